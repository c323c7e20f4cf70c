"""Spin-j matrices, ladder coefficients and the anisotropy parameters.

Local basis convention: index ``k = j - m``, so index 0 is the fully
polarized up state ``m = j`` and the last index is ``m = -j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "SpinParams",
    "as_spin",
    "spin_matrices",
    "ladder_matrices",
    "weight",
    "rho",
    "params_from_delta",
    "magnetizations",
]


def as_spin(j) -> Fraction:
    """Validate a spin value and return it as an exact half-integer."""
    try:
        exact = Fraction(j)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"spin must be a positive half-integer, got {j!r}") from exc
    jj = exact.limit_denominator(1000)
    if abs(float(jj) - float(exact)) > 1e-12 or (2 * jj).denominator != 1 or jj <= 0:
        raise ValueError(f"spin must be a positive half-integer, got {j!r}")
    return jj


def magnetizations(j) -> np.ndarray:
    """S^3 eigenvalues in basis order: j, j-1, ..., -j."""
    jj = as_spin(j)
    d = int(2 * jj) + 1
    return float(jj) - np.arange(d, dtype=float)


@lru_cache(maxsize=None)
def _ladder(jj: Fraction) -> np.ndarray:
    j = float(jj)
    m = magnetizations(jj)
    d = m.size
    sp = np.zeros((d, d))
    # S+ |m> = rho_m |m+1>, i.e. entry (k-1, k) in index space.
    for k in range(1, d):
        sp[k - 1, k] = math.sqrt(max(j * (j + 1) - m[k] * (m[k] + 1), 0.0))
    sp.setflags(write=False)
    return sp


def ladder_matrices(j) -> tuple[np.ndarray, np.ndarray]:
    """Return (S+, S-) as real matrices."""
    sp = _ladder(as_spin(j))
    return sp, sp.T


def spin_matrices(j) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return complex (S1, S2, S3) for spin ``j``.

    ``S3`` is diagonal and descending, ``S1 = (S+ + S-)/2`` and
    ``S2 = (S+ - S-)/(2i)``.
    """
    sp, sm = ladder_matrices(j)
    s1 = 0.5 * (sp + sm) + 0j
    s2 = -0.5j * (sp - sm)
    s3 = np.diag(magnetizations(j)) + 0j
    return s1, s2, s3


def weight(j, m) -> float:
    """sqrt(binom(2j, m + j)); zero outside the ladder (|m| = j + 1)."""
    jj = as_spin(j)
    mm = Fraction(m).limit_denominator(1000)
    if (mm + jj).denominator != 1:
        raise ValueError(f"m={m} is not in the ladder of spin {jj}")
    if abs(mm) == jj + 1:
        return 0.0
    if abs(mm) > jj:
        raise ValueError(f"|m|={abs(mm)} exceeds spin {jj}")
    n, k = int(2 * jj), int(mm + jj)
    if n <= 5:
        return math.sqrt(math.comb(n, k))
    return math.exp(0.5 * (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)))


def rho(j, n) -> float:
    """Ladder coefficient sqrt(j(j+1) - n - n^2), with S+|n> = rho_n |n+1>.

    Defined for ``-j-1 <= n <= j``; both ends give zero.
    """
    jj = as_spin(j)
    nn = Fraction(n).limit_denominator(1000)
    if (nn + jj).denominator != 1 or nn > jj or nn < -jj - 1:
        raise ValueError(f"n={n} out of range for spin {jj}")
    jf, nf = float(jj), float(nn)
    return math.sqrt(max(jf * (jf + 1) - nf - nf * nf, 0.0))


@dataclass(frozen=True)
class SpinParams:
    """Spin value plus the anisotropy and its derived parameters."""

    j: Fraction
    delta: float
    q: float
    a_field: float

    @classmethod
    def make(cls, j, delta: float) -> "SpinParams":
        q, a = params_from_delta(delta)
        return cls(as_spin(j), float(delta), q, a)

    @property
    def jf(self) -> float:
        return float(self.j)

    @property
    def dim(self) -> int:
        """Local Hilbert-space dimension 2j + 1."""
        return int(2 * self.j) + 1


def params_from_delta(delta: float) -> tuple[float, float]:
    """Return (q, A) for anisotropy ``delta > 1``.

    ``q`` is the root of q + 1/q = 2*delta in (0, 1), ``A = sqrt(1 - delta^-2)``.
    """
    delta = float(delta)
    if not math.isfinite(delta) or delta <= 1.0:
        raise ValueError(f"anisotropy must satisfy delta > 1, got {delta}")
    # 1/(delta + sqrt(delta^2-1)) avoids cancellation for large delta.
    q = 1.0 / (delta + math.sqrt(delta * delta - 1.0))
    a = math.sqrt(1.0 - 1.0 / (delta * delta))
    return q, a
