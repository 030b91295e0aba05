"""Operator-valued free probability toolkit: partitions, cumulants, limit laws
and finite-n random matrix models over ``B = M_k(C)``."""

__version__ = "0.1.0"
