# Utility functions and constants
