"""atloss utilities."""
