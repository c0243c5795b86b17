"""Provider billing anomaly screening: detectors, rank fusion, explanations, reports."""

__version__ = "0.1.0"
