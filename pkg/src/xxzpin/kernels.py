"""Matrix-free Hamiltonian apply: compiled core with a NumPy fallback.

The compiled extension ``xxzpin._kernels`` is used when it imports;
``XXZPIN_PURE_PYTHON=1`` forces the fallback.  Both compute the same
operator, ``out = H v`` with

    H = diag + hop * sum_bonds (S+_x S-_{x+1} + S-_x S+_{x+1})
             + cp S+_y + cm S-_y
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["BACKEND", "apply_xxz", "apply_xxz_numpy", "compiled_available"]


def apply_xxz_numpy(diag, v, out, d, nsites, bonds, hop, up, ysite, cp, cm):
    """Reference implementation via reshaped two-site contractions."""
    out[:] = diag * v
    up = np.asarray(up, dtype=float)
    sp = np.diag(up[1:], 1)  # S+ in index space
    sm = sp.T
    local = hop * (np.kron(sp, sm) + np.kron(sm, sp))
    dd = d * d
    for x in bonds:
        left = d ** int(x)
        right = d ** (nsites - int(x) - 2)
        vt = v.reshape(left, dd, right)
        out.reshape(left, dd, right)[...] += np.einsum("ab,lbr->lar", local, vt)
    if cp != 0 or cm != 0:
        site = cp * sp + cm * sm
        left = d ** int(ysite)
        right = d ** (nsites - int(ysite) - 1)
        vt = v.reshape(left, d, right)
        out.reshape(left, d, right)[...] += np.einsum("ab,lbr->lar", site, vt)
    return out


def _load_compiled():
    if os.environ.get("XXZPIN_PURE_PYTHON", "").strip() not in ("", "0"):
        return None
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels.apply_xxz


_compiled = _load_compiled()


def compiled_available() -> bool:
    return _compiled is not None


def _apply_compiled(diag, v, out, d, nsites, bonds, hop, up, ysite, cp, cm):
    return _compiled(
        np.ascontiguousarray(diag, dtype=np.float64),
        np.ascontiguousarray(v, dtype=np.complex128),
        out,
        int(d),
        int(nsites),
        np.ascontiguousarray(bonds, dtype=np.int_),
        float(hop),
        np.ascontiguousarray(up, dtype=np.float64),
        int(ysite),
        complex(cp),
        complex(cm),
    )


if _compiled is not None:
    BACKEND = "compiled"
    apply_xxz = _apply_compiled
else:
    BACKEND = "numpy"
    apply_xxz = apply_xxz_numpy
