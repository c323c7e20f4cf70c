"""Runtime configuration shared by the model, solver and CLI."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Config:
    # storage selection by Hilbert-space dimension
    dense_cap: int = 4096
    matfree_threshold: int = 16384
    max_dim: int = 1 << 24
    allow_large_dense: bool = False
    # Krylov solver
    seed: int = 20021
    tol: float = 1e-10
    max_restarts: int = 200
    krylov_max: int = 400
    # ground-cluster width used by spectral_gap
    cluster_tol: float = 1e-8
    threads: int = 0

    def with_(self, **kw) -> "Config":
        return replace(self, **kw)

    @classmethod
    def from_mapping(cls, values: dict) -> "Config":
        """Build from string values (config file / flags); unknown keys are ignored."""
        kw = {}
        for f in fields(cls):
            if f.name in values and values[f.name] is not None:
                raw = values[f.name]
                if f.type in ("bool", bool):
                    kw[f.name] = str(raw).lower() in ("1", "true", "yes", "on")
                elif f.type in ("int", int):
                    kw[f.name] = int(raw)
                else:
                    kw[f.name] = float(raw)
        return cls(**kw)


def thread_count(config: Config | None = None) -> int:
    """Worker threads: config value, else ``XXZPIN_THREADS``, else all cores."""
    if config is not None and config.threads > 0:
        return config.threads
    env = os.environ.get("XXZPIN_THREADS", "").strip()
    if env:
        return max(1, int(env))
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:  # pragma: no cover - non-Linux
        return max(1, os.cpu_count() or 1)


DEFAULT = Config()
