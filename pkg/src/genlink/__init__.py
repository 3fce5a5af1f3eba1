"""Learn linkage rules from reference links, apply them, and measure them."""

__version__ = "0.1.0"
