"""codeshift: program-analysis classifiers and predictive uncertainty under distribution shift."""

__version__ = "0.1.0"
