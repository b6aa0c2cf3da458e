"""Non-redundancy of constraint languages: engines, patterns, and certificates."""

__version__ = "0.1.0"
