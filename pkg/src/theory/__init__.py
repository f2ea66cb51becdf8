# Density theory package
