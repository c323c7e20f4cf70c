"""Regenerate tests/oracles.json from first principles.

Uses only NumPy: spin matrices, bond terms and Hamiltonians are rebuilt
here by explicit Kronecker products, independently of the package.

    python3 tests/generate_oracles.py
"""

from __future__ import annotations

import json
import math
from functools import reduce
from pathlib import Path

import numpy as np

OUT = Path(__file__).with_name("oracles.json")


def spin_ops(j: float):
    ms = np.arange(j, -j - 1, -1)
    d = len(ms)
    sp = np.zeros((d, d))
    for a in range(1, d):
        m = ms[a]
        sp[a - 1, a] = math.sqrt(j * (j + 1) - m * (m + 1))
    sm = sp.T
    return (sp + sm) / 2, (sp - sm) / 2j, np.diag(ms)


def chain(b, j, delta, bc, field=(0, 0, 0), y=1):
    """Dense H on b sites: bonds, boundary S3 terms, field at site y (1-based)."""
    s1, s2, s3 = spin_ops(j)
    d = s3.shape[0]
    A = math.sqrt(1 - delta**-2)

    def at(op, x, span=1):
        return reduce(np.kron, [np.eye(d ** (x - 1)), op, np.eye(d ** (b - x - span + 1))])

    real = field[1] == 0
    bond = -(np.kron(s1, s1) + np.kron(s2, s2)) / delta - np.kron(s3, s3) + j * j * np.eye(d * d)
    bond = bond.real if real else bond
    h = np.zeros((d**b, d**b), dtype=float if real else complex)
    for x in range(1, b):
        h += at(bond, x, 2)
    one = np.eye(d**b)
    if bc == "kink":
        h += -j * A * (at(s3, 1) - at(s3, b))
    elif bc == "droplet":
        h += -j * A * (at(s3, 1) + at(s3, b) - 2 * j * one)
    h += field[0] * at(s1.real, y) + field[2] * at(s3, y)
    if not real:
        h = h + field[1] * at(s2, y)
    return h


def main():
    D = 2.25
    q = 1 / (D + math.sqrt(D * D - 1))
    A = math.sqrt(1 - D**-2)
    o = {"delta": D, "q": q, "A": A, "A_delta2": math.sqrt(0.75)}

    o["kink2_B100_delta2"] = np.linalg.eigvalsh(chain(2, 0.5, 2.0, "kink", (1, 0, 0), 1)).tolist()
    e = np.linalg.eigvalsh(chain(2, 0.5, D, "droplet", (1, 0, 0), 1))
    o["g2_droplet_B100"] = float(e[1] - e[0])
    e = np.linalg.eigvalsh(chain(2, 0.5, D, "kink", (1, 0, 0), 1))
    o["g2_kink_B100"] = float(e[1] - e[0])

    o["three_site"] = {}
    for bz in (0.0, 0.3, 0.6, A):
        o["three_site"][f"{bz:.6f}"] = np.linalg.eigvalsh(chain(3, 0.5, D, "droplet", (0, 0, bz), 2)).tolist()

    e = np.linalg.eigvalsh(chain(7, 0.5, D, "droplet", (1, 0, 0), 4))
    o["droplet_energy_B100_b7"] = float(e[0])

    o["kink_gap_b13"] = 1 - math.cos(math.pi / 13) / D
    o["E_minus_0p4"] = 1 - math.sqrt(0.16 + D**-2) + 0.2
    o["kink_shift_A6"] = abs(math.log(math.sqrt(1 + (A / 6) ** 2) + A / 6) / math.log(q))
    o["eps_droplet_axial"] = q / math.sqrt(1 + q * q)
    o["prefactor_droplet_axial"] = (1 - math.sqrt(2) * o["eps_droplet_axial"]) ** 2

    e = np.linalg.eigvalsh(chain(10, 0.5, D, "droplet", (0, 0, 0.3), 5))
    o["droplet_axial_b10_gap"] = float(e[1] - e[0])
    e = np.linalg.eigvalsh(chain(12, 0.5, D, "kink", (1, 0, 0), 6))
    o["kink_B100_b12_gap"] = float(e[1] - e[0])

    OUT.write_text(json.dumps(o, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
