"""Quantum state transfer through chains of coupled bosonic (and fermionic) modes."""

__version__ = "0.1.0"
