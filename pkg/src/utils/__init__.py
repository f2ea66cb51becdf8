# Utilities: logging, helpers and exceptions
