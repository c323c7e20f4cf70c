"""Spectral-gap certificates by the martingale method (spin 1/2).

A certificate fixes the interval C0 = [y - n_l, y + n_r] around the pinning
site, covers the rest of the chain by single bonds added alternately on the
right and on the left, bounds the overlap norms by a closed-form epsilon and
combines it with the local gap gamma of C0 into the lower bound
``gamma * (1 - sqrt(2) * epsilon)**2``.

Record keys written by :meth:`GapCertificate.to_record`, in order:
``bc, sites, spin, delta, field, site`` (inputs), then ``regime, n_l, n_r,
f_abs, epsilon, gamma, gamma_provenance, bound, exact_gap, check``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analytic import norm_plus
from .config import DEFAULT, Config
from .model import BoundaryCondition, FieldSpec, ModelSpec, build_hamiltonian
from .solver import spectral_gap

__all__ = [
    "CertificateRefused",
    "ClosedFormMismatch",
    "CoveringPlan",
    "GapCertificate",
    "RECORD_KEYS",
    "regime_of",
    "effective_f",
    "select_cutoffs",
    "branch_c2",
    "epsilon_closed_form",
    "covering_plan",
    "g2_kink",
    "g2_droplet",
    "three_site_eigenvalues",
    "three_site_eigenvalues_printed",
    "g3_droplet",
    "g3_droplet_printed",
    "g3_crossover",
    "local_gap",
    "certify_gap",
]

RECORD_KEYS = (
    "bc", "sites", "spin", "delta", "field", "site",
    "regime", "n_l", "n_r", "f_abs", "epsilon", "gamma", "gamma_provenance",
    "bound", "exact_gap", "check",
)
EPS_LIMIT = 1.0 / math.sqrt(2.0)
TIE_RTOL = 1e-9
CLOSED_FORM_TOL = 1e-10


class CertificateRefused(ValueError):
    """The instance is outside the regimes where a certificate can be issued."""


class ClosedFormMismatch(RuntimeError):
    """A closed-form local gap disagrees with dense diagonalization."""


def _flip(spec: ModelSpec) -> ModelSpec:
    """Global spin flip: -+ -> +-, -- -> ++, field (B1, -B2, -B3)."""
    swap = {
        BoundaryCondition.MINUS_PLUS: BoundaryCondition.PLUS_MINUS,
        BoundaryCondition.MINUS_MINUS: BoundaryCondition.PLUS_PLUS,
    }
    f = spec.fld
    return ModelSpec.make(
        spec.sites_b, spec.spin.j, spec.spin.delta, swap[spec.bc], b=(f.b1, -f.b2, -f.b3), y=f.site_y
    )


def _canonical(spec: ModelSpec) -> ModelSpec:
    if spec.bc in (BoundaryCondition.MINUS_PLUS, BoundaryCondition.MINUS_MINUS):
        return _flip(spec)
    return spec


def regime_of(spec: ModelSpec) -> str:
    """Certificate regime, or raise :class:`CertificateRefused` with the reason."""
    if abs(spec.spin.jf - 0.5) > 1e-12:
        raise CertificateRefused("gap certificates are derived for spin 1/2 only")
    if spec.sites_b < 2:
        raise CertificateRefused("need at least two sites")
    spec = _canonical(spec)
    fld = spec.fld
    if spec.bc is BoundaryCondition.PLUS_MINUS:
        if fld.transverse_sq > 0:
            return "kink-transverse"
        if fld.b3 != 0:
            raise CertificateRefused(
                "kink-axial regime: excitations above the ground state are gapless in the infinite chain"
            )
        raise CertificateRefused("no pinning field: the kink ground states are degenerate")
    if spec.bc is BoundaryCondition.PLUS_PLUS:
        if fld.transverse_sq > 0:
            return "droplet-transverse"
        if fld.b3 >= spec.spin.a_field:
            raise CertificateRefused(
                "droplet-axial with B >= A: no uniform gap (critical or all-down continuum)"
            )
        return "droplet-axial"
    raise CertificateRefused(f"no certificate for boundary condition {spec.bc.value}")


def effective_f(regime: str, field: FieldSpec, spin) -> complex:
    """The complex parameter f entering the overlap norms."""
    if field.transverse_sq <= 0:
        raise ValueError("effective_f needs a transverse field; the axial droplet has its own path")
    den = complex(field.b1, -field.b2)
    if regime == "kink-transverse":
        return -norm_plus(field.transverse_sq, field.b3) / den
    if regime == "droplet-transverse":
        return norm_plus(field.transverse_sq, field.b3 - spin.a_field) / den
    raise ValueError(f"no f parameter for regime {regime!r}")


def _smallest(cond_value, start: int) -> int:
    """Smallest n >= start with cond_value(n) < 1 by a relative margin (ties move on)."""
    n = start
    while not cond_value(n) < 1.0 - TIE_RTOL:
        n += 1
    return n


def select_cutoffs(f: complex, q: float, regime: str) -> tuple[int, int]:
    """(n_l, n_r): smallest cutoffs with the strict inequalities of the regime."""
    fa = abs(f)
    if fa == 0 or not math.isfinite(fa):
        raise ValueError("|f| must be finite and nonzero")
    n_l = _smallest(lambda n: fa * q**n, 0)
    if regime == "kink-transverse":
        n_r = _smallest(lambda n: q**n / fa, 1)
    elif regime == "droplet-transverse":
        n_r = _smallest(lambda n: fa * q**n, 1)
    else:
        raise ValueError(f"no cutoff rule for regime {regime!r}")
    return n_l, n_r


def branch_c2(side: str, f_abs: float, q: float, n: int, m: int = 0) -> float:
    """Squared overlap norm of the m-th step on one side of C0.

    ``side="right"`` uses the even-step formula in |f| q^-(n+m),
    ``side="left"`` the odd-step formula in |f| q^(n+m).
    """
    q2 = q * q
    if side == "right":
        a = (f_abs * q ** -(n + m)) ** 2
        return 1.0 - q2 / (1.0 + q2) * (1.0 + a / q2) / (1.0 + a)
    if side == "left":
        a = (f_abs * q ** (n + m)) ** 2
        return 1.0 - 1.0 / (1.0 + q2) * (1.0 + a * q2) / (1.0 + a)
    raise ValueError(side)


def epsilon_closed_form(
    f: complex | None,
    q: float,
    n_l: int,
    n_r: int,
    regime: str,
    sides: tuple[bool, bool] = (True, True),
) -> float:
    """Supremum of the overlap norms (attained at the first step on each side).

    ``sides`` says whether the (left, right) step sequences exist after
    clipping C0 to the chain; a missing side imposes no condition.
    """
    if regime == "droplet-axial":
        return q / math.sqrt(1.0 + q * q) if any(sides) else 0.0
    fa = abs(f)
    vals = [0.0]
    if sides[0]:
        vals.append(branch_c2("left", fa, q, n_l))
    if sides[1]:
        right_f = fa if regime == "kink-transverse" else 1.0 / fa
        vals.append(branch_c2("right", right_f, q, n_r))
    return math.sqrt(max(0.0, max(vals)))


@dataclass
class CoveringPlan:
    n_l: int
    n_r: int
    c0: tuple[int, int]
    intervals: list[tuple[int, int]]
    f_param: complex | None
    sites_b: int

    @property
    def sides(self) -> tuple[bool, bool]:
        return self.c0[0] > 1, self.c0[1] < self.sites_b

    def tiles(self) -> bool:
        """Union is [1, b] and consecutive pieces on each side share one site."""
        covered = set()
        for a, b in self.intervals:
            covered.update(range(a, b + 1))
        if covered != set(range(1, self.sites_b + 1)):
            return False
        bonds = [(x, x + 1) for a, b in self.intervals for x in range(a, b)]
        return len(bonds) == len(set(bonds)) == self.sites_b - 1


def covering_plan(sites_b: int, y: int, n_l: int, n_r: int, f_param=None) -> CoveringPlan:
    """C0 clipped to the chain, then single bonds alternately right and left."""
    lo, hi = max(1, y - n_l), min(sites_b, y + n_r)
    if lo == hi:
        # a one-site C0 carries no bond; grow it into the chain
        if hi < sites_b:
            hi += 1
        else:
            lo -= 1
    n_l, n_r = y - lo, hi - y
    intervals = [(lo, hi)]
    right, left = hi, lo
    while right < sites_b or left > 1:
        if right < sites_b:
            intervals.append((right, right + 1))
            right += 1
        if left > 1:
            intervals.append((left - 1, left))
            left -= 1
    return CoveringPlan(n_l, n_r, (lo, hi), intervals, f_param, sites_b)


# closed-form local gaps (spin 1/2)


def g2_kink(field: FieldSpec, delta: float) -> float:
    """Gap of the two-site kink Hamiltonian with the field on its left site."""
    A = math.sqrt(1 - delta**-2)
    nb = field.norm
    return 0.5 - 0.5 * math.sqrt(1 + nb * nb - 2 * field.b3 * A) + 0.5 * nb


def g2_droplet(field: FieldSpec, delta: float) -> float:
    """Gap of the two-site droplet Hamiltonian (either site carries the field)."""
    A = math.sqrt(1 - delta**-2)
    nb2 = field.norm**2
    return 0.5 * (1 - math.sqrt(1 + nb2 - A * A) + math.sqrt(field.transverse_sq + (field.b3 - A) ** 2))


def three_site_eigenvalues(b_field: float, delta: float) -> np.ndarray:
    """e1..e8 of the three-site droplet Hamiltonian with axial field B on the middle site.

    e1..e4 come from the product and antisymmetric states; e5, e6 and e7, e8
    are the eigenvalues of the two reflection-symmetric 2x2 blocks with one
    and two overturned spins, respectively.
    """
    A = math.sqrt(1 - delta**-2)
    B = b_field
    c = math.sqrt(0.5) / delta
    r1 = math.hypot((A - 1) / 4 + B / 2, c)
    r2 = math.hypot((1 + A) / 4 + B / 2, c)
    return np.array(
        [
            B / 2,
            A - B / 2,
            0.5 * (A + 1 + B),
            0.5 * (A + 1 - B),
            (A + 3) / 4 - r1,
            (A + 3) / 4 + r1,
            3 * (1 + A) / 4 - r2,
            3 * (1 + A) / 4 + r2,
        ]
    )


def three_site_eigenvalues_printed(b_field: float, delta: float) -> np.ndarray:
    """The closed-form e1..e8 as commonly quoted (both symmetric blocks taken as copies of one matrix)."""
    A = math.sqrt(1 - delta**-2)
    B = b_field
    r = math.sqrt(0.5 * delta**-2 + B * B)
    return np.array(
        [
            B / 2,
            A - B / 2,
            0.5 * (A + 1 + B),
            0.5 * (A + 1 - B),
            0.5 * (A + 1 - r),
            0.5 * (A + 1 + r),
            0.5 * (A + 1 - r),
            0.5 * (A + 1 + r),
        ]
    )


def g3_crossover(delta: float) -> float:
    """Field (3A - 1)/4 where the quoted e5 - e1 and A - B cross."""
    A = math.sqrt(1 - delta**-2)
    return (3 * A - 1) / 4


def g3_droplet_printed(b_field: float, delta: float) -> float:
    """Quoted piecewise three-site gap, crossover taken at (3A - 1)/4."""
    e = three_site_eigenvalues_printed(b_field, delta)
    if b_field <= g3_crossover(delta):
        return float(e[4] - e[0])
    return float(e[1] - e[0])


def g3_droplet(b_field: float, delta: float) -> float:
    """Three-site droplet gap e5 - e1 for 0 <= B <= A (it reaches A - B only at B = A)."""
    e = three_site_eigenvalues(b_field, delta)
    return float(e[4] - e[0])


def _c0_spec(spec: ModelSpec, plan: CoveringPlan) -> ModelSpec:
    lo, hi = plan.c0
    f = spec.fld
    return ModelSpec.make(
        hi - lo + 1, spec.spin.j, spec.spin.delta, spec.bc, b=(f.b1, f.b2, f.b3), y=f.site_y - lo + 1
    )


def local_gap(regime: str, plan: CoveringPlan, spec: ModelSpec) -> tuple[float, str]:
    """(gamma, provenance): min(gap of H_C0, 1), closed form checked against dense."""
    spec = _canonical(spec)
    local = _c0_spec(spec, plan)
    e = np.linalg.eigvalsh(build_hamiltonian(local, "dense").to_dense())
    dense_gap = float(e[1] - e[0])
    closed, name = None, None
    f, delta = local.fld, spec.spin.delta
    if local.sites_b == 2 and regime == "kink-transverse":
        if f.site_y == 1:
            closed, name = g2_kink(f, delta), "closed-form g2^{+-}"
        else:
            mirrored = FieldSpec(f.b1, f.b2, -f.b3, 1)
            closed, name = g2_kink(mirrored, delta), "closed-form g2^{+-} (mirrored)"
    elif local.sites_b == 2 and regime == "droplet-transverse":
        closed, name = g2_droplet(f, delta), "closed-form g2^{++}"
    elif local.sites_b == 3 and regime == "droplet-axial" and f.site_y == 2:
        if f.b3 >= 0:
            closed, name = g3_droplet(f.b3, delta), "closed-form g3^{+}"
        else:
            ev = np.sort(three_site_eigenvalues(f.b3, delta))
            closed, name = float(ev[1] - ev[0]), "closed-form three-site levels"
    if closed is not None:
        if abs(closed - dense_gap) > CLOSED_FORM_TOL:
            raise ClosedFormMismatch(
                f"{name} = {closed!r} but dense diagonalization of C0 gives {dense_gap!r}"
            )
        provenance = name
    else:
        provenance = "dense-diag of C0"
    return min(dense_gap, 1.0), provenance


@dataclass
class GapCertificate:
    spec: ModelSpec = field(repr=False)
    regime: str
    plan: CoveringPlan
    f_abs: float | None
    epsilon: float
    gamma: float
    gamma_provenance: str
    bound: float
    exact_gap: float | None = None

    @property
    def n_l(self) -> int:
        return self.plan.n_l

    @property
    def n_r(self) -> int:
        return self.plan.n_r

    @property
    def check(self) -> str:
        if self.exact_gap is None:
            return "not run"
        return "PASS" if self.bound <= self.exact_gap + 1e-9 else "FAIL"

    def as_dict(self) -> dict[str, str]:
        s, f = self.spec, self.spec.fld
        num = lambda v: "n/a" if v is None else f"{v:.12g}"
        return {
            "bc": s.bc.value,
            "sites": str(s.sites_b),
            "spin": str(s.spin.j),
            "delta": f"{s.spin.delta:.12g}",
            "field": f"{f.b1:.12g},{f.b2:.12g},{f.b3:.12g}",
            "site": str(f.site_y),
            "regime": self.regime,
            "n_l": str(self.n_l),
            "n_r": str(self.n_r),
            "f_abs": num(self.f_abs),
            "epsilon": num(self.epsilon),
            "gamma": num(self.gamma),
            "gamma_provenance": self.gamma_provenance,
            "bound": num(self.bound),
            "exact_gap": num(self.exact_gap),
            "check": self.check if self.exact_gap is None else f"bound ≤ exact: {self.check}",
        }

    def to_record(self) -> str:
        d = self.as_dict()
        return "".join(f"{k}: {d[k]}\n" for k in RECORD_KEYS)


def certify_gap(spec: ModelSpec, exact: bool = False, config: Config = DEFAULT) -> GapCertificate:
    """Build the covering, epsilon and gamma; optionally compare with the exact gap."""
    regime = regime_of(spec)
    canon = _canonical(spec)
    q, y, b = canon.spin.q, canon.fld.site_y, canon.sites_b
    if regime == "droplet-axial":
        f, n_l, n_r = None, 1, 1
    else:
        f = effective_f(regime, canon.fld, canon.spin)
        n_l, n_r = select_cutoffs(f, q, regime)
    plan = covering_plan(b, y, n_l, n_r, f)
    eps = epsilon_closed_form(f, q, plan.n_l, plan.n_r, regime, plan.sides)
    if not eps < EPS_LIMIT:
        raise CertificateRefused(f"epsilon = {eps:.6g} is not below 1/sqrt(2)")
    gamma, prov = local_gap(regime, plan, canon)
    if gamma <= 0:
        raise CertificateRefused(f"local gap of C0 is {gamma:.3e}; no positive bound")
    bound = gamma * (1.0 - math.sqrt(2.0) * eps) ** 2
    if bound <= 0:
        raise CertificateRefused("bound is not positive")
    cert = GapCertificate(spec, regime, plan, None if f is None else abs(f), eps, gamma, prov, bound)
    if exact:
        cert.exact_gap = exact_gap(spec, config)
    return cert


def exact_gap(spec: ModelSpec, config: Config = DEFAULT) -> float:
    """E1 - E0 of the full chain (unique ground state assumed)."""
    h = build_hamiltonian(spec, config=config)
    return spectral_gap(h, tol=1e-10, config=config)
