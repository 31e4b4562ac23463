"""totient-gaps - exact verification toolkit for the density and gaps of Euler's totient image."""

__version__ = "1.0.0"
__author__ = "totient-gaps maintainers"
