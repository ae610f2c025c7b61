import itertools
import math
import warnings

import numpy as np
import pytest

from conftest import projector
from intrinsic_chern import (
    Geometry,
    InvalidArgumentError,
    atomic_insulator,
    build_hamiltonian,
    central_identity_check,
    chern_model,
    direct_cocycle,
    fermi_projector,
    local_cocycle,
    midpoint_shifts,
    random_shifts,
    weak_invariant_sigma12,
)
from intrinsic_chern.cocycle import central_prefactor, local_prefactor, permutation_sign
from intrinsic_chern.crossed import FourierFamily, fourier_assemble
from intrinsic_chern.lattice import identity_operator, shift_operator


def test_permutation_sign():
    assert permutation_sign((0, 1, 2)) == 1
    assert permutation_sign((1, 0, 2)) == -1
    assert permutation_sign((1, 2, 0)) == 1


def test_prefactors():
    assert central_prefactor(2) == pytest.approx(-2 * math.pi / 1j)
    assert local_prefactor(2) == pytest.approx(-2j * math.pi)
    for d in (2, 4, 6):
        assert local_prefactor(d) == pytest.approx(central_prefactor(d) * (-1j) ** d)


def test_shift_grid():
    pts = midpoint_shifts(2)
    assert pts.shape == (9, 2)
    assert set(np.round(pts.ravel(), 12)) == {round(1 / 6, 12), 0.5, round(5 / 6, 12)}
    r = random_shifts(2, 5, seed=1)
    assert np.all((r > 0) & (r < 1)) and np.array_equal(r, random_shifts(2, 5, seed=1))


def test_local_identity_is_zero():
    eye = identity_operator(Geometry.torus(2, 6), 2)
    assert local_cocycle(eye, eye, eye).value == 0


@pytest.fixture(scope="module")
def chern_torus_12():
    return projector("chern", "torus", 12)


def test_local_antisymmetry_commuting_arguments():
    g = Geometry.torus(2, 7)
    u = lambda q: shift_operator(g, 1, q)
    a0, a1, a2 = u((-1, -1)), u((1, 0)) + u((0, 1)).like(0.3 * u((0, 1)).matrix), u((0, 1))
    v = local_cocycle(a0, a1, a2).value
    assert v == pytest.approx(local_prefactor(2) * -1)
    assert local_cocycle(a0, a2, a1).value == -v


def test_swap_is_not_a_symmetry_for_projectors(chern_torus_12):
    # tau(p, p, p) is the Chern number, so exchanging a_1 and a_2 cannot flip the sign in general
    assert abs(local_cocycle(chern_torus_12, chern_torus_12, chern_torus_12).real) > 0.5


def _banded(g, seed):
    rng = np.random.default_rng(seed)
    coeffs = {q: rng.normal(size=(g.nsites, 1, 1)) + 1j * rng.normal(size=(g.nsites, 1, 1))
              for q in itertools.product((-1, 0, 1), repeat=2)}
    return fourier_assemble(FourierFamily(g, 1, coeffs))


@pytest.mark.parametrize("seed", range(4))
def test_local_cyclicity(seed):
    g = Geometry.torus(2, 9)
    a0, a1, a2 = (_banded(g, seed + k) for k in (0, 10, 20))
    v = local_cocycle(a0, a1, a2).value
    assert local_cocycle(a1, a2, a0).value == pytest.approx(v, abs=1e-10 * max(1, abs(v)))
    assert local_cocycle(a2, a0, a1).value == pytest.approx(v, abs=1e-10 * max(1, abs(v)))


def test_local_real_for_projector(chern_torus_12):
    r = local_cocycle(chern_torus_12, chern_torus_12, chern_torus_12)
    assert abs(r.value.imag) < 1e-8
    assert abs(r.real - 1) < 1e-3
    assert r.route == "local" and r.params["L"] == [12, 12]


def test_local_sign_follows_mass():
    P = projector("chern", "torus", 16, -1.0)
    assert abs(local_cocycle(P, P, P).real + 1) < 0.01
    P = projector("chern", "torus", 12, 3.0)
    assert abs(local_cocycle(P, P, P).real) < 0.01


def test_local_rejects_odd_dimension_and_seam():
    P3 = fermi_projector(build_hamiltonian(atomic_insulator(d=3), Geometry.torus(3, 3)), 0.0)
    with pytest.raises(InvalidArgumentError):
        local_cocycle(P3, P3, P3, P3)
    P = fermi_projector(build_hamiltonian(chern_model(1.0), Geometry.torus(2, 6)), 0.0)
    with pytest.raises(InvalidArgumentError):
        local_cocycle(P, P, P)
    with pytest.raises(InvalidArgumentError):
        local_cocycle(P, P)


def test_sigma12_atomic_zero():
    P = fermi_projector(build_hamiltonian(atomic_insulator(d=3), Geometry.torus(3, 4)), 0.0)
    assert weak_invariant_sigma12(P).value == 0


def test_sigma12_requires_3d(chern_torus_12):
    with pytest.raises(InvalidArgumentError):
        weak_invariant_sigma12(chern_torus_12)


def test_direct_identity_is_zero():
    eye = identity_operator(Geometry.box(2, 3), 1)
    r = direct_cocycle(eye, eye, eye, shifts=[(0.5, 0.5)])
    assert r.value == 0 and r.route == "direct"


def test_direct_small_box(chern_box_8):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        r = direct_cocycle(chern_box_8, chern_box_8, chern_box_8, shifts=midpoint_shifts(2, 2), interior_radius=4)
    assert abs(r.real - 1) < 0.05
    assert r.residuals["shift_spread"] < 0.05
    assert r.params["n_shifts"] == 4


def test_direct_spread_warning(chern_box_8):
    with pytest.warns(RuntimeWarning):
        r = direct_cocycle(chern_box_8, chern_box_8, chern_box_8, shifts=[(0.5, 0.5), (0.1, 0.9)],
                           interior_radius=1, spread_tol=1e-9)
    assert "warning" in r.residuals


def test_central_identity_repeated_points():
    lhs, rhs = central_identity_check(2, [(1, 1), (1, 1)], cutoff=60)
    assert rhs == 0
    assert abs(lhs) < 0.05


def test_central_identity_small_cutoff():
    lhs, rhs = central_identity_check(2, [(1, 0), (0, 1)], cutoff=60)
    assert rhs == pytest.approx(2j * math.pi)
    assert abs(lhs - rhs) / abs(rhs) < 0.02


def test_central_identity_orientation():
    lhs, rhs = central_identity_check(2, [(0, 1), (1, 0)], cutoff=60)
    assert rhs == pytest.approx(-2j * math.pi)
    assert abs(lhs - rhs) / abs(rhs) < 0.02


def test_central_identity_d4_rhs():
    # d = 4 closed form only; the 4D lattice sum at a useful cutoff is beyond unit-test budget
    lhs, rhs = central_identity_check(4, np.eye(4, dtype=int), cutoff=2, shifts=[(0.5,) * 4])
    assert rhs == pytest.approx(-(2 * math.pi) ** 2 / (1j ** 2 * 2))
    assert np.isfinite(lhs)


def test_central_identity_bad_points():
    with pytest.raises(InvalidArgumentError):
        central_identity_check(2, [(1, 0, 0), (0, 1, 0)])
