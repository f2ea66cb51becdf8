# Hyperbolic geometry package
