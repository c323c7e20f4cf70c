"""Parameter sweeps and the presets that regenerate the figure data."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .analytic import critical_field
from .config import DEFAULT, Config, thread_count
from .model import ModelSpec, build_hamiltonian
from .output import csv_text, svg_lines
from .solver import ConvergenceError, lowest_eigenpairs, sector_resolved_spectrum
from .spin_algebra import SpinParams

__all__ = [
    "SweepSpec",
    "SweepPoint",
    "FigurePreset",
    "PRESETS",
    "DELTA",
    "run_sweep",
    "sweep_csv",
    "sweep_svg",
    "run_figure",
]

DELTA = 2.25
PARAMETERS = ("b1", "b2", "b3", "delta")


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    start: float
    stop: float
    steps: int
    template: ModelSpec
    k: int
    sector_resolved: bool = False

    def __post_init__(self):
        if self.parameter not in PARAMETERS:
            raise ValueError(f"sweep parameter must be one of {PARAMETERS}")
        if self.steps < 2:
            raise ValueError("a sweep needs at least 2 steps")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValueError("sweep range must be finite")
        if self.k < 1:
            raise ValueError("k must be >= 1")

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)

    def spec_at(self, value: float) -> ModelSpec:
        t = self.template
        f = t.fld
        if self.parameter == "delta":
            return ModelSpec.make(t.sites_b, t.spin.j, value, t.bc, b=(f.b1, f.b2, f.b3), y=f.site_y)
        comps = {"b1": f.b1, "b2": f.b2, "b3": f.b3}
        comps[self.parameter] = value
        return t.with_field(comps["b1"], comps["b2"], comps["b3"])


@dataclass
class SweepPoint:
    value: float
    eigenvalues: np.ndarray
    labels: np.ndarray | None = None
    sector_minima: dict = field(default_factory=dict)
    status: str = "ok"


def _solve_point(sweep: SweepSpec, value: float, config: Config) -> SweepPoint:
    spec = sweep.spec_at(value)
    try:
        if sweep.sector_resolved:
            res = sector_resolved_spectrum(spec)
            keep = min(sweep.k, len(res))
            return SweepPoint(
                float(value), res.eigenvalues[:keep], res.sector_labels[:keep], res.sector_minima()
            )
        h = build_hamiltonian(spec, config=config)
        res = lowest_eigenpairs(h, min(sweep.k, spec.dim), config)
        return SweepPoint(float(value), res.eigenvalues)
    except (ConvergenceError, MemoryError, np.linalg.LinAlgError) as exc:
        return SweepPoint(float(value), np.array([]), status=f"error: {exc}")


def run_sweep(sweep: SweepSpec, config: Config = DEFAULT, threads: int | None = None) -> list[SweepPoint]:
    """Independent grid points, computed in parallel and returned in grid order."""
    workers = threads or thread_count(config)
    grid = sweep.grid()
    if workers <= 1:
        return [_solve_point(sweep, v, config) for v in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda v: _solve_point(sweep, v, config), grid))


def _overturned(spec: ModelSpec, total_m: float) -> int:
    return int(round(spec.spin.jf * spec.sites_b - total_m))


def sweep_csv(sweep: SweepSpec, points: list[SweepPoint]) -> str:
    name = sweep.parameter.upper() if sweep.parameter != "delta" else "delta"
    if sweep.sector_resolved:
        header = [name, "index", "eigenvalue", "sector_m", "n", "status"]
    else:
        header = [name, "index", "eigenvalue", "status"]
    rows = []
    for p in points:
        if p.status != "ok":
            rows.append([p.value, "", "", *([""] * (len(header) - 4)), p.status])
            continue
        for i, lam in enumerate(p.eigenvalues):
            if sweep.sector_resolved:
                m = float(p.labels[i])
                rows.append([p.value, i, float(lam), m, _overturned(sweep.template, m), p.status])
            else:
                rows.append([p.value, i, float(lam), p.status])
    return csv_text(header, rows)


def sweep_svg(sweep: SweepSpec, points: list[SweepPoint], title: str = "") -> str:
    """One polyline per eigenvalue rank; for sector sweeps one per sector minimum."""
    xs = [p.value for p in points]
    series = []
    if sweep.sector_resolved:
        shown = sorted({float(m) for p in points if p.labels is not None for m in p.labels}, reverse=True)
        for m in shown:
            ys = [p.sector_minima.get(m, math.nan) for p in points]
            series.append((f"n={_overturned(sweep.template, m)}", xs, ys))
    else:
        for i in range(sweep.k):
            ys = [float(p.eigenvalues[i]) if i < len(p.eigenvalues) else math.nan for p in points]
            series.append((f"E{i}", xs, ys))
    xlabel = sweep.parameter.upper() if sweep.parameter != "delta" else "Delta"
    return svg_lines(series, xlabel=xlabel, ylabel="energy", title=title)


@dataclass(frozen=True)
class FigurePreset:
    """Parameters of one figure; ``kind`` selects how the data are produced."""

    id: str
    kind: str  # "closed-form", "sweep", "sector-sweep" or "sector"
    bc: str
    sites: int
    spin: float
    delta: float
    field: tuple[float, float, float]
    site: int
    parameter: str | None = None
    start: float = 0.0
    stop: float = 0.0
    steps: int = 0
    k: int = 0
    per_sector: int | None = None
    note: str = ""

    def template(self) -> ModelSpec:
        return ModelSpec.make(self.sites, self.spin, self.delta, self.bc, b=self.field, y=self.site)

    def sweep(self) -> SweepSpec:
        return SweepSpec(
            self.parameter, self.start, self.stop, self.steps, self.template(), self.k,
            self.kind == "sector-sweep",
        )


_A = SpinParams.make(0.5, DELTA).a_field

PRESETS: dict[str, FigurePreset] = {
    p.id: p
    for p in (
        FigurePreset(
            "fig1", "closed-form", "droplet", 13, 0.5, DELTA, (0.0, 0.0, 0.0), 7,
            "b3", 0.0, 2 * _A, 41,
            note="ground energy min(B/2, A - B/2) with droplet lines A/2 + (B - A)s",
        ),
        FigurePreset(
            "fig2", "sweep", "kink", 13, 0.5, DELTA, (0.0, 0.0, 0.0), 7,
            "b1", -1.2, 1.2, 49, 16,
            note="field (B,0,0); site not given in the caption, center y=7 used",
        ),
        FigurePreset(
            "fig2_5", "sweep", "kink", 13, 0.5, DELTA, (0.0, 0.0, _A / 6), 7,
            "b1", -1.2, 1.2, 49, 16,
            note="field (B,0,A/6)",
        ),
        FigurePreset(
            "fig3", "sweep", "kink", 13, 0.5, DELTA, (0.0, 0.0, 3.0), 8,
            "b1", -1.2, 1.2, 49, 20,
            note="field (B,0,3); y=8 so that b-y+1 = 6 states bend down from -B3/2",
        ),
        FigurePreset(
            "fig4", "sector", "kink", 11, 0.5, DELTA, (0.0, 0.0, 1.5), 6,
            per_sector=5,
            note="field (0,0,1.5), low-energy part: lowest 5 levels of every sector",
        ),
        FigurePreset(
            "fig5", "sector-sweep", "droplet", 13, 0.5, DELTA, (0.0, 0.0, 0.0), 7,
            "b3", 0.0, 1.5, 31, 5,
            note="field (0,0,B); five lowest eigenvalues labelled by sector",
        ),
        FigurePreset(
            "fig6", "sector", "droplet", 13, 0.5, DELTA, (0.0, 0.0, 1.5 * _A), 7,
            note="field (0,0,1.5A), full spectrum",
        ),
        FigurePreset(
            "fig7", "sector", "droplet", 13, 0.5, DELTA, (0.0, 0.0, 1.5 * _A), 7,
            per_sector=4,
            note="low-energy zoom of fig6: lowest 4 levels of every sector",
        ),
    )
}


def _closed_form_figure(p: FigurePreset) -> tuple[str, str]:
    spin = SpinParams.make(p.spin, p.delta)
    A, j = spin.a_field, spin.jf
    bs = np.linspace(p.start, p.stop, p.steps)
    up = j * bs
    down = 4 * j * j * A - j * bs
    ground = np.minimum(up, down)
    slopes = (-0.25, 0.0, 0.25)
    bc_field = critical_field(spin)
    drops = [2 * j * j * A + (bs - bc_field) * s for s in slopes]
    header = ["B", "all_up", "all_down", "ground"] + [f"droplet_s{s:+g}" for s in slopes]
    rows = [[float(b), float(u), float(d), float(g), *(float(x[i]) for x in drops)]
            for i, (b, u, d, g) in enumerate(zip(bs, up, down, ground))]
    series = [("all_up", list(bs), list(up)), ("all_down", list(bs), list(down)), ("ground", list(bs), list(ground))]
    series += [(f"droplet s={s:+g}", list(bs), list(x)) for s, x in zip(slopes, drops)]
    return csv_text(header, rows), svg_lines(series, xlabel="B", ylabel="energy", title=p.id)


def _sector_figure(p: FigurePreset) -> tuple[str, str]:
    spec = p.template()
    res = sector_resolved_spectrum(spec, k=p.per_sector)
    gmin = float(res.eigenvalues[0])
    by_sector: dict[float, list[float]] = {}
    for lam, m in zip(res.eigenvalues, res.sector_labels):
        by_sector.setdefault(float(m), []).append(float(lam))
    rows = []
    for m in sorted(by_sector, reverse=True):
        n = _overturned(spec, m)
        for i, lam in enumerate(by_sector[m]):
            rows.append([n, m, i, lam, int(i == 0 and lam == gmin)])
    header = ["n", "sector_m", "index", "eigenvalue", "ground"]
    ranks = max(len(v) for v in by_sector.values())
    series = []
    sectors = sorted(by_sector, reverse=True)
    for r in range(ranks):
        xs = [float(_overturned(spec, m)) for m in sectors if r < len(by_sector[m])]
        ys = [by_sector[m][r] for m in sectors if r < len(by_sector[m])]
        series.append((f"level {r}", xs, ys))
    return csv_text(header, rows), svg_lines(series, xlabel="n", ylabel="energy", title=p.id)


def run_figure(fig_id: str, config: Config = DEFAULT, threads: int | None = None) -> tuple[str, str]:
    """(csv text, svg text) for a preset."""
    if fig_id not in PRESETS:
        raise KeyError(f"unknown figure {fig_id!r}; choose from {', '.join(PRESETS)}")
    p = PRESETS[fig_id]
    if p.kind == "closed-form":
        return _closed_form_figure(p)
    if p.kind == "sector":
        return _sector_figure(p)
    sweep = p.sweep()
    points = run_sweep(sweep, config, threads)
    return sweep_csv(sweep, points), sweep_svg(sweep, points, title=p.id)


def with_sites(preset: FigurePreset, sites: int, site: int | None = None) -> FigurePreset:
    """Same preset on a different chain length (for finite-size trends)."""
    return replace(preset, sites=sites, site=preset.site if site is None else site)
