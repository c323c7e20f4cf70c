"""Exact diagonalization and gap certificates for XXZ chains with kink and
droplet boundary conditions and a single-site pinning field."""

from .config import DEFAULT, Config
from .kernels import BACKEND
from .model import BoundaryCondition, FieldSpec, ModelSpec, build_hamiltonian
from .spin_algebra import SpinParams

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundaryCondition",
    "Config",
    "DEFAULT",
    "FieldSpec",
    "ModelSpec",
    "SpinParams",
    "build_hamiltonian",
    "__version__",
]
