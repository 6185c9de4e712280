"""Numerical free probability: free entropy, Fisher information, Stein kernels,
free convolutions and q-deformed Fock spaces."""

__version__ = "0.1.0"

from . import entropy, fockq, freeconv, ineq, measure, ncpoly, stein, transforms  # noqa: E402

__all__ = ["entropy", "fockq", "freeconv", "ineq", "measure", "ncpoly", "stein", "transforms",
           "__version__"]
