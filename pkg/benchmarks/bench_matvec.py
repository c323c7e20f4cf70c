"""Time the matrix-free Hamiltonian apply: compiled core vs NumPy fallback.

    python3 benchmarks/bench_matvec.py --sites 12 14 16 --repeat 5

Also reports the CSR sparse matvec on the same operator for reference and
checks that both kernels agree to 1e-12.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from xxzpin import kernels
from xxzpin.model import ModelSpec, assemble_kron, hamiltonian_terms


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench(sites: int, spin: float, repeat: int, sparse: bool) -> dict:
    spec = ModelSpec.make(sites, spin, 2.25, "kink", b=(0.4, 0.1, 0.3), y=(sites + 1) // 2)
    t = hamiltonian_terms(spec)
    diag = t.diagonal()
    rng = np.random.default_rng(0)
    v = rng.standard_normal(t.dim) + 1j * rng.standard_normal(t.dim)
    args = (t.d, t.nsites, t.bonds, t.hop, t.up, t.ysite, t.cp, t.cm)

    out_np = np.empty_like(v)
    row = {"sites": sites, "spin": spin, "dim": t.dim}
    row["numpy"] = best_of(lambda: kernels.apply_xxz_numpy(diag, v, out_np, *args), repeat)
    if kernels.compiled_available():
        out_c = np.empty_like(v)
        row["compiled"] = best_of(lambda: kernels.apply_xxz(diag, v, out_c, *args), repeat)
        row["max_diff"] = float(np.abs(out_c - out_np).max())
    if sparse:
        mat = assemble_kron(spec)
        row["csr"] = best_of(lambda: mat @ v, repeat)
    return row


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sites", type=int, nargs="+", default=[10, 12, 14, 16])
    parser.add_argument("--spin", type=float, default=0.5)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--no-sparse", action="store_true", help="skip the CSR reference")
    args = parser.parse_args(argv)

    print(f"backend selected at import: {kernels.BACKEND}")
    if not kernels.compiled_available():
        print("compiled core not available; only the fallback is timed")
    print(f"{'sites':>5} {'dim':>9} {'numpy ms':>10} {'compiled ms':>12} {'speedup':>8} {'csr ms':>8} {'max diff':>9}")
    for b in args.sites:
        r = bench(b, args.spin, args.repeat, not args.no_sparse)
        comp = r.get("compiled")
        print(
            f"{b:5d} {r['dim']:9d} {1e3 * r['numpy']:10.2f} "
            + (f"{1e3 * comp:12.2f} {r['numpy'] / comp:8.1f} " if comp else f"{'-':>12} {'-':>8} ")
            + (f"{1e3 * r['csr']:8.2f} " if "csr" in r else f"{'-':>8} ")
            + (f"{r['max_diff']:9.1e}" if "max_diff" in r else "")
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
