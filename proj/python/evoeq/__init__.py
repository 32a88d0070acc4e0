"""Schur-complement calculus, holomorphic material laws and Fourier-Laplace
spectral solvers for evolutionary equations on finite-dimensional Hilbert
spaces, with weak-operator convergence diagnostics."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc  # noqa: F401

__all__ = [name for name in dir() if not name.startswith("_")]
