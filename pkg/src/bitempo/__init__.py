"""Numerical checks for classical and quantum dynamics with two times.

Subpackages cover the classical constraint analysis of two-time force
tensors, unitary two-parameter quantum evolution and its uncertainty
bounds, continuity-equation bookkeeping on grids, the 1+2-dimensional
Dirac equation, and a scenario CLI tying them together.
"""

__version__ = "0.1.0"
