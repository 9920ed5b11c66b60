"""Tests for src.utils submodules."""
