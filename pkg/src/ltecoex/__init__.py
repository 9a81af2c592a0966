"""Discrete-event simulator of LTE and WLAN sharing an unlicensed channel."""

__version__ = "0.1.0"
