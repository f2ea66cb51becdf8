# Curve evaluation package
