"""Scrambled digital nets, lattice rules and tools to measure and improve them."""

__version__ = "0.1.0"
