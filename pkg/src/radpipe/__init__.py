"""Watch-time debiasing pipeline: quantile labels, probit fusion, learned
distribution embeddings, and ranking metrics."""

__version__ = "0.1.0"
