"""Eigensolvers: dense diagonalization, a locking Lanczos for the lowest k,
sector-resolved spectra, gaps and magnetization profiles."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .config import DEFAULT, Config
from .model import ModelSpec, OperatorMatrix, SectorCouplingError, all_sectors, sector_hamiltonian

__all__ = [
    "SpectrumResult",
    "ConvergenceError",
    "ClusterFillsError",
    "residual_bound",
    "dense_spectrum",
    "lowest_k",
    "lowest_eigenpairs",
    "spectral_gap",
    "sector_resolved_spectrum",
    "expectation_profile",
]

RESIDUAL_FACTOR = 1e-9
# below this dimension LAPACK always wins; above it Lanczos does for k << dim
DENSE_ALWAYS = 1024


class ConvergenceError(RuntimeError):
    """Eigenpairs failed to meet the residual bound; ``diagnostics`` says why."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ClusterFillsError(ValueError):
    """All requested eigenvalues sit in the ground cluster; ask for more."""


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None
    sector_labels: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def sector_minima(self) -> dict[float, float]:
        """Lowest eigenvalue in each labelled sector."""
        if self.sector_labels is None:
            raise ValueError("spectrum is not sector resolved")
        out: dict[float, float] = {}
        for lam, m in zip(self.eigenvalues, self.sector_labels):
            m = float(m)
            if m not in out or lam < out[m]:
                out[m] = float(lam)
        return out

    def in_sector(self, total_m: float) -> np.ndarray:
        if self.sector_labels is None:
            raise ValueError("spectrum is not sector resolved")
        return self.eigenvalues[np.isclose(self.sector_labels, total_m)]


def residual_bound(lam: float) -> float:
    return RESIDUAL_FACTOR * max(1.0, abs(lam))


def _as_apply(h):
    """(matvec, dim) for an OperatorMatrix, array, sparse matrix or matvec object."""
    if isinstance(h, OperatorMatrix):
        if h.storage != "matfree":
            return _as_apply(h.data)
        return h.matvec, h.dim
    if isinstance(h, np.ndarray) or sp.issparse(h):
        return (lambda v: h @ v), h.shape[0]
    if hasattr(h, "matvec") and hasattr(h, "dim"):
        return h.matvec, int(h.dim)
    raise TypeError(f"cannot apply object of type {type(h).__name__}")


def _residuals(apply, vals, vecs) -> np.ndarray:
    return np.array(
        [np.linalg.norm(apply(vecs[:, i]) - vals[i] * vecs[:, i]) for i in range(len(vals))]
    )


def _dense_array(h, config: Config) -> np.ndarray:
    if isinstance(h, OperatorMatrix):
        if h.dim > config.dense_cap and not config.allow_large_dense:
            raise MemoryError(f"dim {h.dim} exceeds dense cap {config.dense_cap}")
        return h.to_dense()
    if sp.issparse(h):
        h = h.toarray()
    h = np.asarray(h)
    if h.shape[0] > config.dense_cap and not config.allow_large_dense:
        raise MemoryError(f"dim {h.shape[0]} exceeds dense cap {config.dense_cap}")
    return h


def dense_spectrum(h, config: Config = DEFAULT, vectors: bool = True) -> SpectrumResult:
    """All eigenpairs of a Hermitian operator by LAPACK, residuals enforced."""
    mat = _dense_array(h, config)
    if vectors:
        vals, vecs = sla.eigh(mat)
        res = np.linalg.norm(mat @ vecs - vecs * vals, axis=0)
        bad = np.flatnonzero(res >= RESIDUAL_FACTOR * np.maximum(1.0, np.abs(vals)))
        if bad.size:
            raise ConvergenceError(
                f"{bad.size} dense eigenpairs above residual bound", {"residuals": res}
            )
        defect = float(np.abs(vecs.conj().T @ vecs - np.eye(len(vals))).max())
        diag = {"method": "dense", "residuals": res, "orthogonality_defect": defect}
        return SpectrumResult(vals, vecs, None, diag)
    vals = sla.eigh(mat, eigvals_only=True)
    return SpectrumResult(vals, None, None, {"method": "dense"})


class _RealApply:
    """Real restriction of a matrix-free operator with real entries."""

    def __init__(self, op: OperatorMatrix):
        self.op, self.dim = op, op.dim

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.op.matvec(v).real


def _real_form(h):
    """A real version of an operator whose entries are all real, else None."""
    data = h.data if isinstance(h, OperatorMatrix) else h
    if isinstance(h, OperatorMatrix) and h.storage == "matfree":
        t = h.terms
        if t is not None and complex(t.cp).imag == 0 and complex(t.cm).imag == 0:
            return _RealApply(h)
        return None
    if sp.issparse(data):
        if not np.iscomplexobj(data.data) or not np.any(data.data.imag):
            return data.real.tocsr()
        return None
    if isinstance(data, np.ndarray) and (not np.iscomplexobj(data) or not np.any(data.imag)):
        return np.ascontiguousarray(data.real)
    return None


def _orthogonalize(w: np.ndarray, *bases: np.ndarray) -> np.ndarray:
    # classical Gram-Schmidt, repeated once when cancellation is severe
    before = np.linalg.norm(w)
    for _ in range(2):
        for basis in bases:
            if basis.shape[1]:
                # basis^H w without materialising the conjugate basis
                w -= basis @ (w.conj() @ basis).conj()
        after = np.linalg.norm(w)
        if after > 0.7071 * before:
            break
        before = after
    return w


def _krylov_size(dim: int, k: int, config: Config, free: int) -> int:
    # cap the basis at ~256 MB of complex vectors
    by_memory = max(k + 20, (256 << 20) // (16 * max(dim, 1)))
    return max(1, min(config.krylov_max, by_memory, free))


def lowest_k(h, k: int, config: Config = DEFAULT) -> SpectrumResult:
    """k smallest eigenpairs by Lanczos with full reorthogonalization and locking.

    Each run builds a Krylov space orthogonal to the locked vectors.  Ritz
    pairs that converge at the bottom of a run are locked after an explicit
    residual check; degenerate partners are found by later runs started
    from seeded random vectors.  The iteration stops once a run started
    from a fresh random vector finds nothing below the k-th locked value.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    real = _real_form(h)
    apply, dim = _as_apply(h if real is None else real)
    dtype = complex if real is None else float
    if k > dim:
        raise ValueError(f"k={k} exceeds dimension {dim}")
    rng = np.random.default_rng(config.seed)

    def random_vec():
        v = rng.standard_normal(dim)
        return v + 1j * rng.standard_normal(dim) if dtype is complex else v

    locked_v = np.zeros((dim, 0), dtype=dtype)
    locked_l: list[float] = []
    matvecs = 0
    runs = 0
    restart_vec = None
    verified = False

    while True:
        free = dim - locked_v.shape[1]
        if free == 0:
            verified = True
            break
        if runs >= config.max_restarts:
            raise ConvergenceError(
                f"lowest_k: no convergence after {runs} Lanczos runs",
                {"locked": len(locked_l), "matvecs": matvecs, "k": k},
            )
        runs += 1
        verifying = len(locked_l) >= k
        want = 1 if verifying else k - len(locked_l)
        mmax = _krylov_size(dim, k, config, free)

        v = random_vec() if restart_vec is None else restart_vec
        v = _orthogonalize(v.astype(dtype), locked_v)
        nv = np.linalg.norm(v)
        if nv < 1e-12:
            v = _orthogonalize(random_vec(), locked_v)
            nv = np.linalg.norm(v)
        V = np.empty((dim, mmax), dtype=dtype)
        V[:, 0] = v / nv
        alpha, beta = [], []
        theta = s = est = tol = None
        m = 0
        breakdown = False
        while m < mmax:
            w = apply(V[:, m])
            matvecs += 1
            a = float(np.vdot(V[:, m], w).real)
            alpha.append(a)
            w = _orthogonalize(w, locked_v, V[:, : m + 1])
            bnorm = float(np.linalg.norm(w))
            m += 1
            scale = max(1.0, abs(a))
            if bnorm < 1e-13 * scale:
                breakdown = True
            check = breakdown or m == mmax or m % 10 == 0 or m <= want
            if check:
                theta, s = sla.eigh_tridiagonal(np.array(alpha), np.array(beta)) if m > 1 else (
                    np.array(alpha),
                    np.ones((1, 1)),
                )
                est = np.abs(bnorm * s[-1, :])
                tol = config.tol * np.maximum(1.0, np.abs(theta))
                nconv = 0
                while nconv < len(theta) and (breakdown or est[nconv] < tol[nconv]):
                    nconv += 1
                if breakdown or nconv >= min(want, len(theta)) or m == mmax:
                    break
            beta.append(bnorm)
            V[:, m] = w / bnorm

        ritz = V[:, :m] @ s
        # lock consecutive converged pairs from the bottom, explicitly checked
        kth = sorted(locked_l)[k - 1] if verifying else np.inf
        newly = 0
        for i in range(m):
            if verifying and theta[i] >= kth - config.cluster_tol:
                break
            x = ritz[:, i]
            x = _orthogonalize(x.copy(), locked_v)
            x /= np.linalg.norm(x)
            lam = float(np.vdot(x, apply(x)).real)
            matvecs += 1
            r = np.linalg.norm(apply(x) - lam * x)
            matvecs += 1
            if r >= 0.5 * residual_bound(lam):
                break
            locked_v = np.column_stack([locked_v, x])
            locked_l.append(lam)
            newly += 1
            if not verifying and len(locked_l) >= k + 8:
                break
        if verifying and newly == 0 and (breakdown or est[0] < tol[0]):
            # converged bottom of the deflated space is not below the k-th value
            verified = True
            break
        if newly == 0 and not breakdown:
            # no progress: continue from the best unconverged Ritz vector
            restart_vec = ritz[:, 0]
        else:
            restart_vec = None

    order = np.argsort(locked_l, kind="stable")[:k]
    vals = np.asarray(locked_l)[order]
    vecs = locked_v[:, order].astype(complex)
    res = _residuals(apply, vals, vecs)
    matvecs += len(vals)
    bad = np.flatnonzero(res >= RESIDUAL_FACTOR * np.maximum(1.0, np.abs(vals)))
    defect = float(np.abs(vecs.conj().T @ vecs - np.eye(len(vals))).max())
    diag = {
        "method": "lanczos",
        "residuals": res,
        "runs": runs,
        "matvecs": matvecs,
        "orthogonality_defect": defect,
        "verified": verified,
    }
    if bad.size:
        raise ConvergenceError(f"{bad.size} Lanczos pairs above residual bound", diag)
    return SpectrumResult(vals, vecs, None, diag)


def lowest_eigenpairs(h, k: int, config: Config = DEFAULT) -> SpectrumResult:
    """Dense path for small operators or large k, Lanczos otherwise."""
    _, dim = _as_apply(h)
    if dim > config.dense_cap or (dim > DENSE_ALWAYS and 16 * k < dim):
        return lowest_k(h, k, config)
    k = min(k, dim)
    if k == dim:
        return dense_spectrum(h, config)
    mat = _dense_array(h, config)
    real = _real_form(mat)
    vals, vecs = sla.eigh(mat if real is None else real, subset_by_index=[0, k - 1], driver="evr")
    res = np.linalg.norm(mat @ vecs - vecs * vals, axis=0)
    bad = np.flatnonzero(res >= RESIDUAL_FACTOR * np.maximum(1.0, np.abs(vals)))
    if bad.size:
        raise ConvergenceError(f"{bad.size} dense eigenpairs above residual bound", {"residuals": res})
    defect = float(np.abs(vecs.conj().T @ vecs - np.eye(k)).max())
    diag = {"method": "dense-subset", "residuals": res, "orthogonality_defect": defect, "k": k}
    return SpectrumResult(vals, vecs.astype(complex), None, diag)


def _gap_from_values(vals: np.ndarray, tol: float) -> float:
    vals = np.sort(np.asarray(vals))
    above = vals[vals > vals[0] + tol]
    if above.size == 0:
        raise ClusterFillsError(
            f"all {len(vals)} eigenvalues lie within {tol:g} of the minimum; raise k"
        )
    return float(above[0] - vals[0])


def spectral_gap(
    h, tol: float | None = None, k: int | None = None, config: Config = DEFAULT
) -> float:
    """Distance from the minimum to the first eigenvalue above the ground cluster.

    ``h`` may be an operator or a precomputed :class:`SpectrumResult`.  With
    an explicit ``k`` a full cluster raises :class:`ClusterFillsError`;
    with ``k=None`` the request grows until the cluster is resolved.
    """
    tol = config.cluster_tol if tol is None else tol
    if isinstance(h, SpectrumResult):
        return _gap_from_values(h.eigenvalues, tol)
    _, dim = _as_apply(h)
    if k is not None:
        return _gap_from_values(lowest_eigenpairs(h, k, config).eigenvalues, tol)
    kk = 2
    while True:
        vals = lowest_eigenpairs(h, min(kk, dim), config).eigenvalues
        try:
            return _gap_from_values(vals, tol)
        except ClusterFillsError:
            if kk >= dim:
                raise
            kk *= 2


def sector_resolved_spectrum(
    spec: ModelSpec,
    k: int | None = None,
    overturned: list[int] | None = None,
    vectors: bool = False,
) -> SpectrumResult:
    """Per-sector diagonalization for an axial field; eigenvalues labelled by total_m.

    ``k`` keeps the lowest k of each sector; ``overturned`` restricts to the
    sectors with those values of n = jb - total_m.  With ``vectors`` the
    eigenvectors are embedded into the full space.
    """
    if not spec.fld.is_axial:
        raise SectorCouplingError("sector-resolved spectra need an axial field (B1 = B2 = 0)")
    vals, labels, vecs, res_max = [], [], [], 0.0
    for basis in all_sectors(spec.sites_b, spec.spin.j):
        if overturned is not None and basis.overturned not in overturned:
            continue
        h = sector_hamiltonian(spec, basis)
        ev, evec = np.linalg.eigh(h)
        if k is not None:
            ev, evec = ev[:k], evec[:, :k]
        res = np.linalg.norm(h @ evec - evec * ev, axis=0)
        if res.size:
            res_max = max(res_max, float((res / np.maximum(1.0, np.abs(ev))).max()))
        vals.append(ev)
        labels.append(np.full(len(ev), basis.total_m))
        if vectors:
            full = np.zeros((spec.dim, len(ev)), dtype=complex)
            full[basis.states.astype(np.int64)] = evec
            vecs.append(full)
    if res_max >= RESIDUAL_FACTOR:
        raise ConvergenceError("sector eigenpairs above residual bound", {"max_residual": res_max})
    vals = np.concatenate(vals)
    labels = np.concatenate(labels)
    order = np.argsort(vals, kind="stable")
    out_vecs = np.hstack(vecs)[:, order] if vectors else None
    return SpectrumResult(
        vals[order], out_vecs, labels[order], {"method": "sector-dense", "max_residual": res_max}
    )


def expectation_profile(state: np.ndarray, sites_b: int, j=0.5) -> np.ndarray:
    """<S^3_x> for x = 1..b of a full-space state vector."""
    d = int(round(2 * float(j))) + 1
    p = np.abs(np.asarray(state)) ** 2
    p = p / p.sum()
    p = p.reshape((d,) * sites_b)
    m = float(j) - np.arange(d)
    out = np.empty(sites_b)
    for x in range(sites_b):
        axes = tuple(a for a in range(sites_b) if a != x)
        out[x] = p.sum(axis=axes) @ m
    return out
