"""parkwatch: batch forensic analytics for a nature preserve.

Three evidence streams, one pipeline: vehicle gate-pass trajectories with
rule-based anomaly detectors and PCA/k-means clustering, chemical-sensor
auditing with wind-based factory attribution, and multispectral scene
analysis (NDVI, dryness, soil minerals) with cross-date trends. A seeded
synthetic-scenario generator provides ground truth for every detector.
"""

__version__ = "0.1.0"

from .errors import ParkwatchError

__all__ = ["ParkwatchError", "__version__"]
