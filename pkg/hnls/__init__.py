# hnls/__init__.py
"""
Pseudospectral ground states of higher-order NLS and Hartree equations.
"""

__version__ = "0.3.0"
