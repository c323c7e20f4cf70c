"""Finite-chain XXZ Hamiltonians with boundary fields and a pinning field.

Full-space index of a configuration is ``sum_x k_x d**(b - x)`` with
site 1 most significant and ``k_x = j - m_x``; index 0 is all spins up.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from . import kernels
from .config import DEFAULT, Config
from .spin_algebra import SpinParams, ladder_matrices, magnetizations, spin_matrices

__all__ = [
    "BoundaryCondition",
    "FieldSpec",
    "ModelSpec",
    "OperatorMatrix",
    "MatrixFreeHamiltonian",
    "SectorBasis",
    "SectorCouplingError",
    "Terms",
    "bond_term",
    "hamiltonian_terms",
    "build_hamiltonian",
    "assemble_kron",
    "decomposition_residual",
    "sector_basis",
    "project_to_sector",
    "sector_hamiltonian",
    "total_sz",
    "site_sz",
    "spin_flip_permutation",
]


class BoundaryCondition(enum.Enum):
    BARE = "bare"
    PLUS_PLUS = "droplet"
    MINUS_MINUS = "antidroplet"
    PLUS_MINUS = "kink"
    MINUS_PLUS = "antikink"

    @classmethod
    def parse(cls, value) -> "BoundaryCondition":
        if isinstance(value, cls):
            return value
        aliases = {"++": "droplet", "--": "antidroplet", "+-": "kink", "-+": "antikink"}
        key = str(value).strip().lower()
        key = aliases.get(key, key)
        for bc in cls:
            if bc.value == key or bc.name.lower() == key:
                return bc
        raise ValueError(f"unknown boundary condition {value!r}")


@dataclass(frozen=True)
class FieldSpec:
    """Field vector B = (b1, b2, b3) acting on the single site ``site_y`` (1-based)."""

    b1: float = 0.0
    b2: float = 0.0
    b3: float = 0.0
    site_y: int = 1

    def __post_init__(self):
        vals = (self.b1, self.b2, self.b3)
        if not all(math.isfinite(float(v)) for v in vals):
            raise ValueError(f"field components must be finite, got {vals}")

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.b1, self.b2, self.b3], dtype=float)

    @property
    def norm(self) -> float:
        return math.sqrt(self.b1**2 + self.b2**2 + self.b3**2)

    @property
    def transverse_sq(self) -> float:
        return self.b1**2 + self.b2**2

    @property
    def is_axial(self) -> bool:
        return self.b1 == 0.0 and self.b2 == 0.0

    def scaled(self, factor: float, b3_shift: float = 0.0, site_y: int | None = None) -> "FieldSpec":
        return FieldSpec(
            factor * self.b1,
            factor * self.b2,
            factor * self.b3 + b3_shift,
            self.site_y if site_y is None else site_y,
        )


@dataclass(frozen=True)
class ModelSpec:
    sites_b: int
    spin: SpinParams
    bc: BoundaryCondition = BoundaryCondition.PLUS_MINUS
    field: FieldSpec | None = None
    interval: tuple[int, int] | None = None

    def __post_init__(self):
        if self.sites_b < 2:
            raise ValueError(f"chain needs at least 2 sites, got {self.sites_b}")
        a, c = self.bounds
        if not (1 <= a < c <= self.sites_b):
            raise ValueError(f"interval [{a},{c}] not inside [1,{self.sites_b}] with >= 2 sites")
        if self.field is not None and not (a <= self.field.site_y <= c):
            raise ValueError(f"field site y={self.field.site_y} outside interval [{a},{c}]")

    @classmethod
    def make(cls, sites, j, delta, bc="kink", b=(0.0, 0.0, 0.0), y=1, interval=None) -> "ModelSpec":
        fld = FieldSpec(float(b[0]), float(b[1]), float(b[2]), int(y))
        return cls(int(sites), SpinParams.make(j, delta), BoundaryCondition.parse(bc), fld, interval)

    @property
    def bounds(self) -> tuple[int, int]:
        return self.interval if self.interval is not None else (1, self.sites_b)

    @property
    def d(self) -> int:
        return self.spin.dim

    @property
    def dim(self) -> int:
        return self.d**self.sites_b

    @property
    def fld(self) -> FieldSpec:
        return self.field if self.field is not None else FieldSpec()

    def with_field(self, b1, b2, b3, y=None) -> "ModelSpec":
        return replace(self, field=FieldSpec(b1, b2, b3, self.fld.site_y if y is None else y))


@dataclass(frozen=True)
class Terms:
    """Structural description consumed by the diagonal and the matvec kernel."""

    d: int
    nsites: int
    j: float
    bonds: np.ndarray  # 0-based left sites
    hop: float
    h3: np.ndarray  # per-site S^3 coefficients
    const: float
    ysite: int  # 0-based, -1 if none
    cp: complex  # coefficient of S+_y
    cm: complex  # coefficient of S-_y
    up: np.ndarray  # up[k] = <k-1|S+|k>, up[0] = 0

    @property
    def dim(self) -> int:
        return self.d**self.nsites

    def diagonal_from_configs(self, configs: np.ndarray) -> np.ndarray:
        m = self.j - configs.astype(float)
        out = np.full(configs.shape[0], self.const)
        out += m @ self.h3
        for x in self.bonds:
            out -= m[:, x] * m[:, x + 1]
        return out

    def diagonal(self) -> np.ndarray:
        dim = self.dim
        idx = np.arange(dim, dtype=np.int64)
        mags = []
        stride = dim
        for _ in range(self.nsites):
            stride //= self.d
            mags.append(self.j - ((idx // stride) % self.d).astype(float))
        out = np.full(dim, self.const)
        for x in range(self.nsites):
            if self.h3[x] != 0.0:
                out += self.h3[x] * mags[x]
        for x in self.bonds:
            out -= mags[x] * mags[x + 1]
        return out


def bond_term(kind: str, spin: SpinParams) -> np.ndarray:
    """Two-site interaction -(1/D)(S1S1 + S2S2) - S3S3 + j^2 (+ boundary part).

    ``kind`` is ``"bare"``, ``"kink"`` (adds -jA(S3 x 1 - 1 x S3)) or
    ``"antikink"`` (adds +jA(S3 x 1 - 1 x S3)).
    """
    s1, s2, s3 = spin_matrices(spin.j)
    d = spin.dim
    eye = np.eye(d)
    j = spin.jf
    h = -(np.kron(s1, s1) + np.kron(s2, s2)) / spin.delta - np.kron(s3, s3) + j * j * np.eye(d * d)
    wall = np.kron(s3, eye) - np.kron(eye, s3)
    if kind == "kink":
        h = h - j * spin.a_field * wall
    elif kind == "antikink":
        h = h + j * spin.a_field * wall
    elif kind != "bare":
        raise ValueError(f"unknown bond kind {kind!r}")
    return h


def _boundary(spec: ModelSpec) -> tuple[dict[int, float], float]:
    """Per-site S^3 coefficients and constant from the boundary fields (1-based sites)."""
    a, c = spec.bounds
    jA = spec.spin.jf * spec.spin.a_field
    j = spec.spin.jf
    bc = spec.bc
    if bc is BoundaryCondition.BARE:
        return {}, 0.0
    if bc is BoundaryCondition.PLUS_PLUS:
        return {a: -jA, c: -jA}, 2 * j * jA
    if bc is BoundaryCondition.MINUS_MINUS:
        return {a: jA, c: jA}, 2 * j * jA
    if bc is BoundaryCondition.PLUS_MINUS:
        return {a: -jA, c: jA}, 0.0
    return {a: jA, c: -jA}, 0.0


def hamiltonian_terms(spec: ModelSpec) -> Terms:
    j = spec.spin.jf
    a, c = spec.bounds
    h3 = np.zeros(spec.sites_b)
    fields3, const = _boundary(spec)
    for site, coef in fields3.items():
        h3[site - 1] += coef
    bonds = np.arange(a - 1, c - 1, dtype=np.int64)
    const += j * j * bonds.size
    fld = spec.fld
    h3[fld.site_y - 1] += fld.b3
    return Terms(
        d=spec.d,
        nsites=spec.sites_b,
        j=j,
        bonds=bonds,
        hop=-0.5 / spec.spin.delta,
        h3=h3,
        const=const,
        ysite=fld.site_y - 1,
        cp=complex(0.5 * fld.b1, -0.5 * fld.b2),
        cm=complex(0.5 * fld.b1, 0.5 * fld.b2),
        up=np.concatenate([[0.0], np.diagonal(ladder_matrices(spec.spin.j)[0], 1)]),
    )


class MatrixFreeHamiltonian:
    """``H v`` from the bond structure, without storing matrix entries."""

    def __init__(self, terms: Terms):
        self.terms = terms
        self.dim = terms.dim
        self.diag = terms.diagonal()
        self._up = terms.up
        self.backend = kernels.BACKEND

    def matvec(self, v: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        v = np.ascontiguousarray(v, dtype=np.complex128)
        if out is None:
            out = np.empty_like(v)
        t = self.terms
        return kernels.apply_xxz(
            self.diag, v, out, t.d, t.nsites, t.bonds, t.hop, self._up, t.ysite, t.cp, t.cm
        )


@dataclass
class OperatorMatrix:
    """Hermitian operator in one of three storages: dense, sparse (CSR), matfree."""

    dim: int
    storage: str
    data: object
    basis_tag: str = "full"
    terms: Terms | None = field(default=None, repr=False)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        if self.storage == "matfree":
            return self.data.matvec(v)
        return self.data @ v

    def __matmul__(self, v):
        return self.matvec(v)

    def to_dense(self) -> np.ndarray:
        if self.storage == "dense":
            return self.data
        if self.storage == "sparse":
            return self.data.toarray()
        eye = np.eye(self.dim, dtype=complex)
        return np.column_stack([self.data.matvec(eye[:, i]) for i in range(self.dim)])

    def to_sparse(self) -> sp.csr_matrix:
        if self.storage == "sparse":
            return self.data
        return sp.csr_matrix(self.to_dense())

    def diagonal(self) -> np.ndarray:
        if self.storage == "matfree":
            return self.data.diag.astype(complex)
        return np.asarray(self.data.diagonal())

    def hermiticity_defect(self) -> float:
        if self.storage == "matfree":
            return 0.0 if self.terms is None else _matfree_hermiticity(self)
        diff = self.data - self.data.conj().T
        if sp.issparse(diff):
            return float(abs(diff).max()) if diff.nnz else 0.0
        return float(np.abs(diff).max())


def _matfree_hermiticity(op: OperatorMatrix, probes: int = 2) -> float:
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(probes):
        u = rng.standard_normal(op.dim) + 1j * rng.standard_normal(op.dim)
        w = rng.standard_normal(op.dim) + 1j * rng.standard_normal(op.dim)
        lhs = np.vdot(u, op.matvec(w))
        rhs = np.vdot(op.matvec(u), w)
        worst = max(worst, abs(lhs - rhs) / (np.linalg.norm(u) * np.linalg.norm(w)))
    return worst


def _embed(local: np.ndarray, first: int, nloc: int, nsites: int, d: int) -> sp.csr_matrix:
    """Identity-pad an operator on sites [first, first+nloc) (0-based)."""
    left = sp.identity(d**first, format="csr", dtype=complex)
    right = sp.identity(d ** (nsites - first - nloc), format="csr", dtype=complex)
    return sp.kron(sp.kron(left, sp.csr_matrix(local)), right, format="csr")


def assemble_kron(spec: ModelSpec) -> sp.csr_matrix:
    """Sparse assembly by tensor-product embedding of the bond and field terms."""
    d, b = spec.d, spec.sites_b
    _, _, s3 = spin_matrices(spec.spin.j)
    a, c = spec.bounds
    h = sp.csr_matrix((spec.dim, spec.dim), dtype=complex)
    bare = bond_term("bare", spec.spin)
    for x in range(a, c):
        h = h + _embed(bare, x - 1, 2, b, d)
    fields3, const = _boundary(spec)
    for site, coef in fields3.items():
        h = h + coef * _embed(s3, site - 1, 1, b, d)
    fld = spec.fld
    s1, s2, _ = spin_matrices(spec.spin.j)
    v = fld.b1 * s1 + fld.b2 * s2 + fld.b3 * s3
    if np.any(v != 0):
        h = h + _embed(v, fld.site_y - 1, 1, b, d)
    if const:
        h = h + const * sp.identity(spec.dim, format="csr", dtype=complex)
    h.sum_duplicates()
    h.eliminate_zeros()
    return h.tocsr()


def _assemble_structural(terms: Terms) -> sp.csr_matrix:
    """Sparse assembly from the same structural data the kernel uses."""
    dim, d = terms.dim, terms.d
    idx = np.arange(dim, dtype=np.int64)
    up = terms.up
    strides = d ** np.arange(terms.nsites - 1, -1, -1, dtype=np.int64)
    rows, cols, vals = [idx], [idx], [terms.diagonal().astype(complex)]
    for x in terms.bonds:
        sx, sx1 = strides[x], strides[x + 1]
        kx = (idx // sx) % d
        kx1 = (idx // sx1) % d
        ok = (kx + 1 < d) & (kx1 >= 1)
        src = idx[ok] + sx - sx1
        amp = terms.hop * up[kx[ok] + 1] * up[kx1[ok]]
        rows += [idx[ok], src]
        cols += [src, idx[ok]]
        vals += [amp.astype(complex), amp.astype(complex)]
    if terms.cp != 0 or terms.cm != 0:
        sy = strides[terms.ysite]
        ky = (idx // sy) % d
        ok = ky + 1 < d
        src = idx[ok] + sy
        amp = up[ky[ok] + 1]
        rows += [idx[ok], src]
        cols += [src, idx[ok]]
        vals += [terms.cp * amp, terms.cm * amp]
    h = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    ).tocsr()
    h.sum_duplicates()
    h.eliminate_zeros()
    return h


def build_hamiltonian(
    spec: ModelSpec, storage: str | None = None, config: Config = DEFAULT
) -> OperatorMatrix:
    """Assemble the chain Hamiltonian.

    ``storage`` is ``"dense"``, ``"sparse"``, ``"matfree"`` or ``None`` for
    automatic choice by dimension (see :class:`Config`).
    """
    dim = spec.dim
    if dim > config.max_dim:
        raise MemoryError(f"dimension {dim} exceeds max_dim={config.max_dim}")
    if storage is None:
        if dim <= config.dense_cap:
            storage = "dense"
        elif dim <= config.matfree_threshold:
            storage = "sparse"
        else:
            storage = "matfree"
    terms = hamiltonian_terms(spec)
    if storage == "dense":
        if dim > config.dense_cap and not config.allow_large_dense:
            raise MemoryError(
                f"dense storage for dim {dim} > dense_cap={config.dense_cap} needs allow_large_dense"
            )
        data = _assemble_structural(terms).toarray()
    elif storage == "sparse":
        data = _assemble_structural(terms)
    elif storage == "matfree":
        data = MatrixFreeHamiltonian(terms)
    else:
        raise ValueError(f"unknown storage {storage!r}")
    return OperatorMatrix(dim, storage, data, "full", terms)


def site_sz(b: int, j, site: int) -> np.ndarray:
    """Diagonal of S^3 at a 1-based site in the full space."""
    m = magnetizations(j)
    d = m.size
    return np.repeat(np.tile(m, d ** (site - 1)), d ** (b - site))


def total_sz(b: int, j) -> np.ndarray:
    """Diagonal of total S^3 in the full space."""
    return sum(site_sz(b, j, x) for x in range(1, b + 1))


def spin_flip_permutation(b: int, j) -> np.ndarray:
    """Index map of the global flip m_x -> -m_x: digit k -> d-1-k on every site."""
    d = int(round(2 * float(j))) + 1
    return np.arange(d**b - 1, -1, -1)


def decomposition_residual(spec: ModelSpec, y: int | None = None) -> float:
    """Max-abs entry of H++(B) - 2j^2 A - [H+-_[1,y](B') + H-+_[y,b](B')].

    ``B' = (B1/2, B2/2, B3/2 - jA)``, both halves sharing site ``y``.
    """
    if spec.bc is not BoundaryCondition.PLUS_PLUS:
        raise ValueError("decomposition applies to the droplet (++) Hamiltonian")
    b = spec.sites_b
    fld = spec.fld if y is None else replace(spec.fld, site_y=y)
    y = fld.site_y
    if b < 3 or not (1 < y < b):
        raise ValueError(f"need b >= 3 and 1 < y < b, got b={b}, y={y}")
    j, A = spec.spin.jf, spec.spin.a_field
    full = replace(spec, field=fld, interval=None)
    lhs = assemble_kron(full) - 2 * j * j * A * sp.identity(spec.dim, format="csr")
    half = fld.scaled(0.5, -j * A)
    left = replace(full, bc=BoundaryCondition.PLUS_MINUS, field=half, interval=(1, y))
    right = replace(full, bc=BoundaryCondition.MINUS_PLUS, field=half, interval=(y, b))
    diff = lhs - assemble_kron(left) - assemble_kron(right)
    return float(abs(diff).max()) if diff.nnz else 0.0


# ---------------------------------------------------------------------------
# total-S^3 sectors


class SectorCouplingError(ValueError):
    """Raised when an operator couples different total-S^3 sectors."""


@lru_cache(maxsize=256)
def _configs(nsites: int, n: int, d: int) -> np.ndarray:
    """Digit strings with sum n, in increasing full-space index order."""
    if nsites == 0:
        return np.zeros((1, 0), dtype=np.int16) if n == 0 else np.zeros((0, 0), dtype=np.int16)
    parts = []
    for k in range(min(d - 1, n) + 1):
        if n - k > (d - 1) * (nsites - 1):
            continue
        rest = _configs(nsites - 1, n - k, d)
        head = np.full((rest.shape[0], 1), k, dtype=np.int16)
        parts.append(np.hstack([head, rest]))
    if not parts:
        return np.zeros((0, nsites), dtype=np.int16)
    out = np.vstack(parts)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SectorBasis:
    """Configurations with a fixed total S^3 = total_m."""

    sites_b: int
    j: float
    total_m: float
    configs: np.ndarray  # (count, b) digits k_x = j - m_x

    @property
    def count(self) -> int:
        return self.configs.shape[0]

    @property
    def overturned(self) -> int:
        """Number of lowering quanta n = jb - total_m (overturned spins for j=1/2)."""
        return int(round(self.j * self.sites_b - self.total_m))

    @property
    def d(self) -> int:
        return int(round(2 * self.j)) + 1

    @property
    def fits_int64(self) -> bool:
        return self.sites_b * math.log2(self.d) < 62

    @property
    def states(self) -> np.ndarray:
        """Full-space indices (ascending)."""
        if self.fits_int64:
            w = self.d ** np.arange(self.sites_b - 1, -1, -1, dtype=np.int64)
            return self.configs.astype(np.int64) @ w
        w = [self.d ** (self.sites_b - 1 - x) for x in range(self.sites_b)]
        return np.array([sum(int(k) * wi for k, wi in zip(row, w)) for row in self.configs], dtype=object)

    def rank(self, configs: np.ndarray) -> np.ndarray:
        """Row positions of the given configurations inside this basis."""
        if self.fits_int64:
            w = self.d ** np.arange(self.sites_b - 1, -1, -1, dtype=np.int64)
            keys = configs.astype(np.int64) @ w
            return np.searchsorted(self.states, keys)
        lookup = {row.tobytes(): i for i, row in enumerate(self.configs)}
        return np.array([lookup[np.asarray(r, dtype=self.configs.dtype).tobytes()] for r in configs], dtype=np.int64)


def sector_basis(b: int, j, total_m) -> SectorBasis:
    """All configurations of ``b`` spins ``j`` with sum of m_x equal to ``total_m``."""
    jf = float(j)
    d = int(round(2 * jf)) + 1
    n_float = jf * b - float(total_m)
    n = int(round(n_float))
    if abs(n - n_float) > 1e-9 or n < 0 or n > (d - 1) * b:
        raise ValueError(f"total_m={total_m} unreachable for b={b}, j={j}")
    return SectorBasis(b, jf, jf * b - n, _configs(b, n, d))


def all_sectors(b: int, j) -> list[SectorBasis]:
    jf = float(j)
    d = int(round(2 * jf)) + 1
    return [sector_basis(b, jf, jf * b - n) for n in range((d - 1) * b + 1)]


def project_to_sector(h: OperatorMatrix, basis: SectorBasis, tol: float = 1e-12) -> OperatorMatrix:
    """Restrict an S^3-conserving operator to one sector.

    Raises :class:`SectorCouplingError` if ``h`` couples the sector to the rest.
    """
    if h.storage == "matfree":
        raise ValueError("project_to_sector needs an assembled (dense or sparse) operator")
    idx = basis.states.astype(np.int64)
    mask = np.ones(h.dim, dtype=bool)
    mask[idx] = False
    if h.storage == "sparse":
        rows = h.data[idx]
        leak = rows[:, np.flatnonzero(mask)]
        leak_max = float(abs(leak).max()) if leak.nnz else 0.0
        block = rows[:, idx].toarray()
    else:
        rows = h.data[idx]
        leak_max = float(np.abs(rows[:, mask]).max()) if mask.any() else 0.0
        block = rows[:, idx]
    if leak_max > tol:
        raise SectorCouplingError(
            f"operator couples sector total_m={basis.total_m} to others (max entry {leak_max:.3e})"
        )
    return OperatorMatrix(basis.count, "dense", np.array(block), f"sector(m={basis.total_m:g})")


def sector_hamiltonian(spec: ModelSpec, basis: SectorBasis, sparse: bool = False):
    """Build H directly in a sector basis (axial field only); works for long chains."""
    fld = spec.fld
    if not fld.is_axial:
        raise SectorCouplingError("transverse field breaks total-S^3 conservation")
    if basis.sites_b != spec.sites_b or abs(basis.j - spec.spin.jf) > 1e-12:
        raise ValueError("sector basis does not match the model")
    terms = hamiltonian_terms(spec)
    cfg = basis.configs
    n, d, up = basis.count, terms.d, terms.up
    diag = terms.diagonal_from_configs(cfg)
    rows, cols, vals = [np.arange(n)], [np.arange(n)], [diag]
    for x in terms.bonds:
        kx, kx1 = cfg[:, x], cfg[:, x + 1]
        ok = np.flatnonzero((kx >= 1) & (kx1 + 1 < d))
        if ok.size == 0:
            continue
        tgt = np.array(cfg[ok], dtype=cfg.dtype)
        tgt[:, x] -= 1
        tgt[:, x + 1] += 1
        t_idx = basis.rank(tgt)
        amp = terms.hop * up[kx[ok]] * up[kx1[ok] + 1]
        rows += [t_idx, ok]
        cols += [ok, t_idx]
        vals += [amp, amp]
    h = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    return h if sparse else h.toarray()
