"""Issue-tracker mining toolkit.

Builds per-release weighted directed stakeholder collaboration networks
from issue patches, computes influence metrics on them, and derives
release-level innovation and time-to-market measures.
"""

__version__ = "0.1.0"
