import os
import subprocess
import sys

import numpy as np
import pytest

from xxzpin import kernels
from xxzpin.model import ModelSpec, assemble_kron, hamiltonian_terms


def _args(spec):
    t = hamiltonian_terms(spec)
    return t.diagonal(), (t.d, t.nsites, t.bonds, t.hop, t.up, t.ysite, t.cp, t.cm)


@pytest.mark.parametrize("j,b", [(0.5, 9), (1, 5), (1.5, 4)])
@pytest.mark.parametrize("field", [(0, 0, 0), (0.3, -0.7, 0.2)])
def test_fallback_matches_assembled(j, b, field):
    spec = ModelSpec.make(b, j, 1.8, "droplet", b=field, y=2)
    diag, args = _args(spec)
    v = np.random.default_rng(3).standard_normal(spec.dim) * (1 + 0.5j)
    out = kernels.apply_xxz_numpy(diag, v, np.empty_like(v), *args)
    assert np.abs(out - assemble_kron(spec) @ v).max() < 1e-13


@pytest.mark.skipif(not kernels.compiled_available(), reason="compiled core not built")
@pytest.mark.parametrize("j,b", [(0.5, 10), (1, 6), (1.5, 4)])
def test_compiled_matches_fallback(j, b):
    spec = ModelSpec.make(b, j, 2.25, "kink", b=(0.4, 0.2, -0.3), y=b // 2)
    diag, args = _args(spec)
    v = np.random.default_rng(5).standard_normal(spec.dim) + 1j * np.random.default_rng(6).standard_normal(spec.dim)
    a = kernels.apply_xxz(diag, v, np.empty_like(v), *args)
    ref = kernels.apply_xxz_numpy(diag, v, np.empty_like(v), *args)
    assert np.abs(a - ref).max() < 1e-13


def test_backend_flag_consistent():
    assert kernels.BACKEND == ("compiled" if kernels.compiled_available() else "numpy")


def test_env_forces_fallback():
    env = dict(os.environ, XXZPIN_PURE_PYTHON="1")
    proc = subprocess.run(
        [sys.executable, "-c", "import xxzpin; print(xxzpin.BACKEND)"], env=env, capture_output=True, text=True
    )
    assert proc.stdout.strip() == "numpy"
