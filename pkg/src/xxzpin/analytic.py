"""Closed-form kink, antikink and droplet states and their energies."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .model import (
    BoundaryCondition,
    FieldSpec,
    ModelSpec,
    SectorBasis,
    sector_basis,
    sector_hamiltonian,
)
from .spin_algebra import SpinParams, ladder_matrices, magnetizations, spin_matrices, weight

__all__ = [
    "ProductState",
    "SectorState",
    "GroundEnergy",
    "chi_site",
    "kink_product_state",
    "antikink_product_state",
    "sector_kink_state",
    "select_ground_z",
    "antikink_z",
    "antipode",
    "norm_plus",
    "verify_field_eigenfactor",
    "droplet_ground_state",
    "droplet_excited_state",
    "critical_field",
    "ground_energy",
    "kink_center",
    "kink_shift_distance",
    "excitation_energy_minus",
    "magnon_decay_rate",
    "one_magnon_branch",
    "magnon_on_kink",
]


@dataclass
class ProductState:
    """Tensor product of per-site vectors (site 1 first)."""

    factors: list[np.ndarray]
    normalized: bool = True

    @property
    def sites(self) -> int:
        return len(self.factors)

    def vector(self) -> np.ndarray:
        return reduce(np.kron, self.factors)

    def norm(self) -> float:
        return float(np.prod([np.linalg.norm(f) for f in self.factors]))

    def profile(self) -> np.ndarray:
        """<S^3_x> for x = 1..b, computed factor by factor."""
        out = []
        for f in self.factors:
            m = magnetizations((f.size - 1) / 2)
            p = np.abs(f) ** 2
            out.append(float(p @ m / p.sum()))
        return np.array(out)


@dataclass
class SectorState:
    total_m: float
    basis: SectorBasis
    amplitudes: np.ndarray

    def full_vector(self) -> np.ndarray:
        d, b = self.basis.d, self.basis.sites_b
        out = np.zeros(d**b, dtype=complex)
        out[self.basis.states.astype(np.int64)] = self.amplitudes
        return out


def _local_components(spin: SpinParams, u_log_abs: float, u_phase: float) -> np.ndarray:
    """Normalized sum_k u^k w_k |k> given log|u| and arg u; stable for any |u|."""
    d = spin.dim
    two_j = d - 1
    k = np.arange(d)
    w = np.array([weight(spin.j, spin.jf - kk) for kk in k])
    if u_log_abs == -math.inf:
        out = np.zeros(d, dtype=complex)
        out[0] = 1.0
        return out
    # |u|^k / (1+|u|^2)^j, evaluated relative to the dominant term
    logs = k * u_log_abs - 0.5 * two_j * np.logaddexp(0.0, 2.0 * u_log_abs)
    return w * np.exp(logs) * np.exp(1j * k * u_phase)


def chi_site(spin: SpinParams, z: complex, x: int) -> np.ndarray:
    """Normalized single-site factor with components (z q^-x)^(j-m) w_m."""
    z = complex(z)
    if z == 0:
        return _local_components(spin, -math.inf, 0.0)
    return _local_components(spin, math.log(abs(z)) - x * math.log(spin.q), cmath.phase(z))


def kink_product_state(spec: ModelSpec, z: complex) -> ProductState:
    return ProductState([chi_site(spec.spin, z, x) for x in range(1, spec.sites_b + 1)])


def antikink_product_state(spec: ModelSpec, z: complex) -> ProductState:
    """Site-wise component reversal of the kink factors (|m> -> |-m>)."""
    return ProductState([chi_site(spec.spin, z, x)[::-1].copy() for x in range(1, spec.sites_b + 1)])


def sector_kink_state(spec: ModelSpec, total_m: float, normalized: bool = True) -> SectorState:
    """Kink state with amplitudes prod_x q^(-x(j-m_x)) w_(m_x), normalized by default."""
    spin = spec.spin
    basis = sector_basis(spec.sites_b, spin.jf, total_m)
    k = basis.configs.astype(float)
    x = np.arange(1, spec.sites_b + 1, dtype=float)
    logw = np.log([weight(spin.j, spin.jf - kk) for kk in range(spin.dim)])
    log_amp = -math.log(spin.q) * (k @ x) + logw[basis.configs].sum(axis=1)
    if not normalized:
        return SectorState(basis.total_m, basis, np.exp(log_amp).astype(complex))
    amp = np.exp(log_amp - log_amp.max())
    amp /= np.linalg.norm(amp)
    return SectorState(basis.total_m, basis, amp.astype(complex))


def _require_transverse(field: FieldSpec) -> None:
    if field.transverse_sq <= 0.0:
        raise ValueError("field has no transverse component (B1 = B2 = 0); no product ground state")


def norm_plus(bt2: float, b3: float) -> float:
    """sqrt(bt2 + b3^2) + b3, without cancellation when b3 < 0."""
    r = math.sqrt(bt2 + b3 * b3)
    return r + b3 if b3 >= 0 else bt2 / (r - b3)


def antipode(z: complex, y: int, q: float) -> complex:
    """Parameter of the orthogonal (antipodal) coherent factor at site y."""
    return -(q ** (2 * y)) / complex(z).conjugate()


def select_ground_z(field: FieldSpec, q: float) -> tuple[complex, complex]:
    """(ground z, excited-branch z) for the kink Hamiltonian with a transverse field.

    The excited branch (energy +j|B|) is the antipodal factor at y,
    ``(|B| - B3)/(B1 - iB2) q^y``; it equals ``-z_ground`` only when B3 = 0.
    """
    _require_transverse(field)
    z = -norm_plus(field.transverse_sq, field.b3) / complex(field.b1, -field.b2) * q**field.site_y
    return z, antipode(z, field.site_y, q)


def antikink_z(field: FieldSpec, q: float) -> complex:
    """Ground-state parameter of the antikink Hamiltonian."""
    _require_transverse(field)
    return -norm_plus(field.transverse_sq, -field.b3) / complex(field.b1, field.b2) * q**field.site_y


def verify_field_eigenfactor(spin: SpinParams, field: FieldSpec, z: complex, branch: str = "ground") -> float:
    """|| (B.S -/+ j|B|) chi_y(z) ||; ``branch`` is "ground" (-j|B|) or "excited" (+j|B|)."""
    _require_transverse(field)
    s1, s2, s3 = spin_matrices(spin.j)
    v = field.b1 * s1 + field.b2 * s2 + field.b3 * s3
    chi = chi_site(spin, z, field.site_y)
    target = -1.0 if branch == "ground" else 1.0
    return float(np.linalg.norm(v @ chi - target * spin.jf * field.norm * chi))


def _droplet_params(spec: ModelSpec, sign: float):
    if spec.bc is not BoundaryCondition.PLUS_PLUS:
        raise ValueError("droplet states need the ++ boundary condition")
    if spec.sites_b < 3:
        raise ValueError("droplet states need b >= 3")
    fld = spec.fld
    _require_transverse(fld)
    j, A = spec.spin.jf, spec.spin.a_field
    shifted = FieldSpec(fld.b1, fld.b2, fld.b3 - 2 * j * A, fld.site_y)
    q, y = spec.spin.q, fld.site_y
    z, z_exc = select_ground_z(shifted, q)
    zt = antikink_z(shifted, q)
    if sign < 0:
        z, zt = z_exc, antipode(zt, y, q)
    factors = [chi_site(spec.spin, z, x) for x in range(1, y + 1)]
    factors += [chi_site(spec.spin, zt, x)[::-1].copy() for x in range(y + 1, spec.sites_b + 1)]
    energy = -sign * j * shifted.norm + 2 * j * j * A
    return ProductState(factors), energy


def droplet_ground_state(spec: ModelSpec) -> tuple[ProductState, float]:
    """Kink factors up to y glued to antikink factors after y, and its energy."""
    return _droplet_params(spec, 1.0)


def droplet_excited_state(spec: ModelSpec) -> tuple[ProductState, float]:
    """Companion eigenstate from the antipodal factors, energy +j||B'|| + 2j^2 A."""
    return _droplet_params(spec, -1.0)


def critical_field(spin: SpinParams) -> float:
    """Axial field at which all-up and all-down droplet states are degenerate (2jA)."""
    return 2 * spin.jf * spin.a_field


@dataclass(frozen=True)
class GroundEnergy:
    value: float
    regime: str
    # False when the value is the bottom of a continuum in the infinite chain
    isolated: bool = True
    note: str = ""


def ground_energy(spec: ModelSpec, atol: float = 1e-12) -> GroundEnergy:
    """Closed-form ground-state energy for the regimes covered by the theory."""
    fld = spec.fld
    j, A = spec.spin.jf, spec.spin.a_field
    bc = spec.bc
    if bc in (BoundaryCondition.PLUS_MINUS, BoundaryCondition.MINUS_PLUS):
        if fld.transverse_sq > 0:
            return GroundEnergy(-j * fld.norm, "kink-transverse")
        if abs(fld.b3) <= atol:
            return GroundEnergy(0.0, "kink-free", True, f"{int(2 * j * spec.sites_b) + 1}-fold degenerate")
        return GroundEnergy(-j * abs(fld.b3), "kink-axial", False, "continuum bottom, gapless")
    if bc in (BoundaryCondition.PLUS_PLUS, BoundaryCondition.MINUS_MINUS):
        b3 = fld.b3 if bc is BoundaryCondition.PLUS_PLUS else -fld.b3
        if fld.transverse_sq > 0:
            shifted = math.sqrt(fld.transverse_sq + (b3 - 2 * j * A) ** 2)
            return GroundEnergy(-j * shifted + 2 * j * j * A, "droplet-transverse")
        bc_field = critical_field(spec.spin)
        if abs(b3 - bc_field) <= atol:
            return GroundEnergy(2 * j * j * A, "droplet-critical", False, "droplet ground states, gapless")
        if b3 < bc_field:
            return GroundEnergy(j * b3, "droplet-axial", True, "all spins up")
        return GroundEnergy(4 * j * j * A - j * b3, "droplet-axial-strong", False, "all spins down, continuum")
    raise ValueError(f"no closed-form ground energy for boundary condition {bc.value}")


def kink_center(field: FieldSpec, q: float) -> float:
    """Position where |z q^-x| = 1 for the ground-state kink."""
    _require_transverse(field)
    ratio = norm_plus(field.transverse_sq, field.b3) / math.sqrt(field.transverse_sq)
    return field.site_y + math.log(ratio) / math.log(q)


def kink_shift_distance(b3: float, q: float) -> float:
    """|log_q(sqrt(1 + b3^2) + b3)|; the kink moves left for b3 > 0, right for b3 < 0.

    Assumes the transverse part of the field is normalized to 1.
    """
    return abs(math.asinh(b3) / math.log(q))


def excitation_energy_minus(b_field: float, delta: float) -> float:
    """Lowest one-overturned-spin energy 1 - sqrt(B^2 + delta^-2) + |B|/2 (spin 1/2)."""
    return 1.0 - math.sqrt(b_field * b_field + delta**-2) + 0.5 * abs(b_field)


def magnon_decay_rate(b_field: float, delta: float) -> float:
    """r_- for the bound magnon: Delta(1-E) - sqrt(Delta^2 (1-E)^2 - 1), E = 1 - sqrt(B^2 + delta^-2)."""
    s = delta * math.sqrt(b_field * b_field + delta**-2)
    return s - math.sqrt(max(s * s - 1.0, 0.0))


def one_magnon_branch(spec: ModelSpec) -> tuple[float, np.ndarray]:
    """Eigenpair of the one-overturned-spin sector (spin 1/2, axial field).

    For kink boundary conditions this is the first excited state of the
    sector (the lowest is the kink ground state); for droplet boundary
    conditions it is the lowest state.  Returns (energy, a_x), x = 1..b.
    """
    if abs(spec.spin.jf - 0.5) > 1e-12:
        raise ValueError("one-magnon branch is derived for spin 1/2")
    b = spec.sites_b
    basis = sector_basis(b, 0.5, 0.5 * b - 1)
    h = sector_hamiltonian(spec, basis)
    vals, vecs = np.linalg.eigh(h)
    pick = 1 if spec.bc in (BoundaryCondition.PLUS_MINUS, BoundaryCondition.MINUS_PLUS) else 0
    # configs are ordered by decreasing index of the flipped site
    flipped = np.argmax(basis.configs, axis=1)
    a = np.zeros(b, dtype=complex)
    a[flipped] = vecs[:, pick]
    return float(vals[pick]), a


def magnon_on_kink(spec: ModelSpec, z: complex, a: np.ndarray) -> np.ndarray:
    """sum_x a_x S-_x psi(z) as a full-space vector (spin 1/2)."""
    psi = kink_product_state(spec, z)
    _, sm = ladder_matrices(spec.spin.j)
    out = np.zeros(spec.dim, dtype=complex)
    for x in range(spec.sites_b):
        if a[x] == 0:
            continue
        factors = list(psi.factors)
        factors[x] = sm @ factors[x]
        out += a[x] * reduce(np.kron, factors)
    return out
