"""Envariance toolkit: Schmidt analysis, envariant partners, DFS channels,
correlation measures and the adiabatic-shortcut / thermofield applications."""

__version__ = "0.1.0"
