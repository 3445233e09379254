"""QKD link simulator - links, attacks, post-processing, Y00 and trusted-repeater networks."""

__version__ = "0.1.0"
