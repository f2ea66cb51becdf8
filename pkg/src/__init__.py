# HypAngles - Pair Correlation of Hyperbolic Angles - Source Package
