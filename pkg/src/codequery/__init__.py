"""Composable code-information queries over ASTs, history, and issues."""

__version__ = "0.1.0"
