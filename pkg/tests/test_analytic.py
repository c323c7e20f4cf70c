import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xxzpin import analytic
from xxzpin.model import FieldSpec, ModelSpec, build_hamiltonian
from xxzpin.solver import expectation_profile
from xxzpin.spin_algebra import SpinParams

transverse_fields = st.tuples(
    st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3)
).filter(lambda b: b[0] ** 2 + b[1] ** 2 > 1e-2)


def test_chi_site_limits():
    p = SpinParams.make(0.5, 2.25)
    assert np.allclose(analytic.chi_site(p, 0, 3), [1, 0])
    assert np.allclose(analytic.chi_site(p, p.q**2, 2), np.array([1, 1]) / math.sqrt(2))
    big = analytic.chi_site(p, 1e300, 1)
    assert np.allclose(np.abs(big), [0, 1])
    p1 = SpinParams.make(1, 2.25)
    assert np.allclose(np.abs(analytic.chi_site(p1, 1e200, 2)), [0, 0, 1])


def test_two_site_kink_expansion():
    spec = ModelSpec.make(2, 0.5, 2.25, "kink")
    q, z = spec.spin.q, 0.7 - 0.2j
    ref = np.array([1, z / q**2, z / q, z * z / q**3])  # |uu>, |ud>, |du>, |dd>
    psi = analytic.kink_product_state(spec, z).vector()
    phase = np.vdot(psi, ref / np.linalg.norm(ref))
    assert abs(abs(phase) - 1) < 1e-13
    h = build_hamiltonian(spec).to_dense()
    assert np.linalg.norm(h @ psi) < 1e-12


def test_spin_one_kink_zero_energy(rng):
    spec = ModelSpec.make(4, 1, 2.25, "kink")
    h = build_hamiltonian(spec).to_dense()
    for _ in range(3):
        z = complex(*rng.normal(size=2)) * 0.1
        psi = analytic.kink_product_state(spec, z).vector()
        assert np.linalg.norm(h @ psi) / np.linalg.norm(psi) < 1e-11


def test_sector_state_examples():
    spec = ModelSpec.make(2, 0.5, 2.25, "kink")
    up = analytic.sector_kink_state(spec, 1.0)
    assert up.basis.count == 1 and abs(up.amplitudes[0]) == pytest.approx(1)
    mid = analytic.sector_kink_state(spec, 0.0).full_vector()
    q = spec.spin.q
    ref = np.zeros(4)
    ref[1], ref[2] = 1, q  # |ud> + q|du>
    assert abs(abs(np.vdot(mid, ref / np.linalg.norm(ref))) - 1) < 1e-13


def test_binomial_expansion(rng):
    spec = ModelSpec.make(3, 0.5, 2.25, "kink")
    z = complex(*rng.normal(size=2))
    acc = sum(
        z**n * analytic.sector_kink_state(spec, 1.5 - n, normalized=False).full_vector()
        for n in range(4)
    )
    psi = analytic.kink_product_state(spec, z).vector()
    acc /= np.linalg.norm(acc)
    assert abs(abs(np.vdot(acc, psi)) - 1) < 1e-12


def test_select_ground_z_examples():
    q = SpinParams.make(0.5, 2.25).q
    z, _ = analytic.select_ground_z(FieldSpec(1, 0, 0, 3), q)
    assert z == pytest.approx(-(q**3))
    z, _ = analytic.select_ground_z(FieldSpec(0, 1, 0, 1), q)
    assert abs(z) == pytest.approx(q)
    assert z == pytest.approx(-q / complex(0, -1))
    with pytest.raises(ValueError):
        analytic.select_ground_z(FieldSpec(0, 0, 1, 1), q)


@given(transverse_fields, st.sampled_from([0.5, 1, 1.5]), st.integers(1, 6))
@settings(max_examples=60, deadline=None)
def test_field_eigenfactor(b, j, y):
    spin = SpinParams.make(j, 2.25)
    fld = FieldSpec(*b, y)
    z, z_exc = analytic.select_ground_z(fld, spin.q)
    scale = max(1.0, fld.norm)
    assert analytic.verify_field_eigenfactor(spin, fld, z) < 1e-12 * scale
    assert analytic.verify_field_eigenfactor(spin, fld, z_exc, "excited") < 1e-12 * scale


def test_flipped_sign_excited_only_when_b3_zero():
    spin = SpinParams.make(0.5, 2.25)
    fld = FieldSpec(1, 0, 0, 2)
    z, z_exc = analytic.select_ground_z(fld, spin.q)
    assert z_exc == pytest.approx(-z)
    fld = FieldSpec(1, 0, 0.5, 2)
    z, z_exc = analytic.select_ground_z(fld, spin.q)
    assert analytic.verify_field_eigenfactor(spin, fld, -z, "excited") > 1e-3


@pytest.mark.parametrize("j,b", [(0.5, 6), (1, 4), (1.5, 3)])
def test_kink_and_droplet_eigenstates(j, b, rng):
    for _ in range(3):
        fld = tuple(rng.normal(size=3))
        y = int(rng.integers(2, b))
        delta = 1.5 + 2.5 * rng.random()
        spec = ModelSpec.make(b, j, delta, "kink", b=fld, y=y)
        h = build_hamiltonian(spec).to_dense()
        z, z_exc = analytic.select_ground_z(spec.fld, spec.spin.q)
        for zz, e in ((z, -j * spec.fld.norm), (z_exc, j * spec.fld.norm)):
            v = analytic.kink_product_state(spec, zz).vector()
            assert np.linalg.norm(h @ v - e * v) < 1e-10
        dspec = ModelSpec.make(b, j, delta, "droplet", b=fld, y=y)
        hd = build_hamiltonian(dspec).to_dense()
        for fn in (analytic.droplet_ground_state, analytic.droplet_excited_state):
            state, e = fn(dspec)
            v = state.vector()
            assert np.linalg.norm(hd @ v - e * v) < 1e-10


def test_antikink_ground_state(rng):
    spec = ModelSpec.make(6, 0.5, 2.25, "antikink", b=(0.4, -0.3, 0.2), y=3)
    z = analytic.antikink_z(spec.fld, spec.spin.q)
    v = analytic.antikink_product_state(spec, z).vector()
    h = build_hamiltonian(spec).to_dense()
    assert np.linalg.norm(h @ v + 0.5 * spec.fld.norm * v) < 1e-11


def test_droplet_energy_example(oracle):
    spec = ModelSpec.make(7, 0.5, 2.25, "droplet", b=(1, 0, 0), y=4)
    _, e = analytic.droplet_ground_state(spec)
    assert e == pytest.approx(oracle["droplet_energy_B100_b7"], abs=1e-12)
    A = spec.spin.a_field
    spec = ModelSpec.make(7, 0.5, 2.25, "droplet", b=(1, 0, A), y=4)
    assert analytic.droplet_ground_state(spec)[1] == pytest.approx(-0.5 + 0.5 * A, abs=1e-14)


def test_droplet_profile_dips_at_site():
    spec = ModelSpec.make(11, 0.5, 2.25, "droplet", b=(1, 0, 0), y=6)
    state, _ = analytic.droplet_ground_state(spec)
    prof = state.profile()
    assert np.argmin(prof) == 5
    assert np.all(np.diff(prof[:6]) < 0) and np.all(np.diff(prof[5:]) > 0)
    assert 0.5 - prof[0] < 1e-4


def test_droplet_profile_symmetric_at_center():
    A = SpinParams.make(0.5, 2.25).a_field
    spec = ModelSpec.make(9, 0.5, 2.25, "droplet", b=(0.2, 0, 0.95 * A), y=5)
    state, _ = analytic.droplet_ground_state(spec)
    prof = expectation_profile(state.vector(), 9)
    assert np.abs(prof - prof[::-1]).max() < 1e-8
    assert np.abs(prof - state.profile()).max() < 1e-12


def test_kink_profile_crosses_zero_near_y():
    spec = ModelSpec.make(9, 0.5, 2.25, "kink")
    q = spec.spin.q
    prof = analytic.kink_product_state(spec, -(q**5)).profile()
    assert prof[3] > 0 > prof[5]
    assert abs(prof[4]) < 1e-14


def test_critical_field_and_ground_energy(oracle):
    spin = SpinParams.make(0.5, 2.25)
    assert analytic.critical_field(spin) == pytest.approx(oracle["A"])
    A = oracle["A"]
    crit = analytic.ground_energy(ModelSpec.make(5, 0.5, 2.25, "droplet", b=(0, 0, A), y=3))
    assert crit.value == pytest.approx(A / 2) and not crit.isolated
    kink = analytic.ground_energy(ModelSpec.make(5, 0.5, 2.25, "kink", b=(0, 0, 1.5), y=3))
    assert kink.value == -0.75 and not kink.isolated
    # spin 1: critical field is 2jA, where all-up and all-down energies meet
    spec = ModelSpec.make(4, 1, 2.25, "droplet", b=(0, 0, 2 * A), y=2)
    e = np.linalg.eigvalsh(build_hamiltonian(spec).to_dense())
    assert e[0] == pytest.approx(analytic.ground_energy(spec).value, abs=1e-12)


@pytest.mark.parametrize("bc", ["kink", "droplet", "antidroplet"])
def test_ground_energy_matches_dense(bc, rng):
    for _ in range(4):
        fld = tuple(rng.normal(size=3))
        spec = ModelSpec.make(7, 0.5, 2.0, bc, b=fld, y=4)
        e0 = np.linalg.eigvalsh(build_hamiltonian(spec).to_dense())[0]
        assert analytic.ground_energy(spec).value == pytest.approx(e0, abs=1e-10)


def test_ground_energy_concave_along_direction():
    direction = np.array([0.6, 0.0, 0.8])
    ts = np.linspace(-2, 2, 41)
    vals = [
        analytic.ground_energy(ModelSpec.make(5, 0.5, 2.25, "droplet", b=tuple(t * direction), y=3)).value
        for t in ts
    ]
    second = np.diff(vals, 2)
    assert np.all(second <= 1e-12)


def test_kink_shift(oracle):
    q = oracle["q"]
    assert analytic.kink_shift_distance(0.0, q) == 0.0
    assert analytic.kink_shift_distance(oracle["A"] / 6, q) == pytest.approx(oracle["kink_shift_A6"], abs=1e-12)
    ds = [analytic.kink_shift_distance(b3, q) for b3 in (0.5, 1, 5, 50, 500)]
    assert np.all(np.diff(ds) > 0)


def test_kink_center_moves_with_b3():
    q = SpinParams.make(0.5, 2.25).q
    c0 = analytic.kink_center(FieldSpec(1, 0, 0, 7), q)
    c1 = analytic.kink_center(FieldSpec(1, 0, 0.5, 7), q)
    assert c0 == pytest.approx(7)
    assert c0 - c1 == pytest.approx(analytic.kink_shift_distance(0.5, q))


def test_excitation_energy(oracle):
    assert analytic.excitation_energy_minus(0, 2.25) == pytest.approx(1 - 1 / 2.25)
    A = oracle["A"]
    assert analytic.excitation_energy_minus(A, 2.25) == pytest.approx(A / 2, abs=1e-15)
    assert analytic.excitation_energy_minus(0.4, 2.25) == pytest.approx(oracle["E_minus_0p4"], abs=1e-14)


def test_one_magnon_branch_b40():
    spec = ModelSpec.make(40, 0.5, 2.25, "droplet", b=(0, 0, 0.4), y=20)
    e, a = analytic.one_magnon_branch(spec)
    assert abs(e - analytic.excitation_energy_minus(0.4, 2.25)) < 0.02
    rate = analytic.magnon_decay_rate(0.4, 2.25)
    amp = np.abs(a)
    fitted = [math.log(amp[19 + k] / amp[20 + k]) for k in range(3, 9)]
    assert np.allclose(fitted, -math.log(rate), rtol=0.05)


def test_kink_sector_gap_b0():
    for b in (6, 9):
        spec = ModelSpec.make(b, 0.5, 2.25, "kink")
        e, _ = analytic.one_magnon_branch(spec)
        assert e == pytest.approx(1 - math.cos(math.pi / b) / 2.25, abs=1e-12)


def test_magnon_on_kink_vector():
    spec = ModelSpec.make(5, 0.5, 2.25, "kink")
    a = np.zeros(5, dtype=complex)
    a[2] = 1
    v = analytic.magnon_on_kink(spec, 0.0, a)
    assert np.flatnonzero(np.abs(v) > 1e-14).tolist() == [0b00100]
