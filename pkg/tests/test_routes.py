"""Cross-route agreement between the local formula and the two Dirac-phase evaluations."""

import pytest

from conftest import projector
from intrinsic_chern import build_clifford, dirac_phase, direct_cocycle, fedosov_tindex, local_cocycle

CL2 = build_clifford(2)


@pytest.fixture(scope="module")
def direct_by_window(chern_box_12):
    return {Rp: direct_cocycle(chern_box_12, chern_box_12, chern_box_12, interior_radius=Rp) for Rp in (4, 6)}


def test_direct_matches_local(direct_by_window, chern_torus_24):
    loc = local_cocycle(chern_torus_24, chern_torus_24, chern_torus_24).real
    r = direct_by_window[6]
    assert abs(r.real - loc) < 0.05
    assert r.residuals["shift_spread"] < 0.05
    assert r.residuals["imag"] < 1e-8


def test_direct_window_stability(direct_by_window):
    assert abs(direct_by_window[4].real - direct_by_window[6].real) < 0.02


@pytest.mark.parametrize("name,m", [("chern", 1.0), ("chern", -1.0), ("chern", 3.0), ("atomic", 1.0)])
def test_local_vs_fedosov_builtin_models(name, m):
    Pt = projector(name, "torus", 20, m)
    Pb = projector(name, "box", 10, m)
    F = dirac_phase(Pb.geometry, CL2, (0.5, 0.5), Q=2)
    assert abs(local_cocycle(Pt, Pt, Pt).real - fedosov_tindex(Pb, F, interior_radius=5).value) < 0.05
