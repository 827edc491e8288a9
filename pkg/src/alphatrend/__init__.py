"""Formulaic-alpha features and trend classifiers for daily OHLCV data.

The pipeline runs: ingest CSV panels -> evaluate an alpha catalog into
a feature matrix -> filter and standardize features -> attach binary
trend labels -> train and compare classifiers.  Each stage is importable
on its own; the `alphatrend` CLI chains them over on-disk artifacts.
"""

__version__ = "0.1.0"
