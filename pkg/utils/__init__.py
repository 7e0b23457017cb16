"""Library modules for the sequential test with decision switching."""
