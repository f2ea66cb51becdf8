# Lattice enumeration package
