"""Rate-distortion curves for Gaussian time-varying autoregressive sources."""  # noqa: N999

__version__ = "0.1.0"
