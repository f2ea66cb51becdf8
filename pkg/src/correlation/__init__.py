# Angle statistics package
