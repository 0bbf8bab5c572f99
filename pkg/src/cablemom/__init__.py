"""Per-unit-length series impedance of cables in horizontally layered media."""

__version__ = "0.1.0"
