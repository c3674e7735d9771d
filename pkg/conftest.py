"""Keeps the repository root importable when the suites run under pytest."""
