"""Quantum link model chains: reduced bases, link-constrained MPDO evolution, dimension automata."""

__version__ = "0.1.0"
