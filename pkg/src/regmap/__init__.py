"""regmap: replayable predictor-regulation mapping pipeline and toolkit."""

__version__ = "0.1.0"
