"""srgen: search-based unit-test generation with single-responsibility structure."""

__version__ = "0.1.0"
