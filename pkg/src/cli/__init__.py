# Command-line dispatch and output formatting
