"""Auditable figure improvement toolkit.

Semantic SVG diffing with a grammar-of-graphics taxonomy, review
criteria linting, reviewer bundles with verdict tracking, assessment
scoring, and version comparison with a crossed random-intercepts
logistic model.
"""

__version__ = "0.1.0"

from .errors import FigchainError

__all__ = ["FigchainError", "__version__"]
