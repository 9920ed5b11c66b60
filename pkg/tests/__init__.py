"""Unit tests for all first-party code under src."""
