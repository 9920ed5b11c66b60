"""Utilities used throughout the project."""
