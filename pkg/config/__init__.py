# Settings for hypangles (HYPANGLES_ environment prefix)
