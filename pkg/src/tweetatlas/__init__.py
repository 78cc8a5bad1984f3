"""Tweet-stream ingestion, gazetteer location resolution, and country analytics."""

__version__ = "0.1.0"
