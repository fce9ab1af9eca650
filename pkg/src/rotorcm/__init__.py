"""UAV blade condition-monitoring benchmark pipeline."""

__version__ = "0.1.0"
