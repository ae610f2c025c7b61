import itertools

import numpy as np
import pytest

from intrinsic_chern import InvalidArgumentError, build_clifford, clifford_trace


@pytest.mark.parametrize("d", [2, 4, 6, 8])
def test_anticommutation_exact(d):
    rep = build_clifford(d)
    eye = np.eye(rep.dim)
    for i, j in itertools.product(range(d), repeat=2):
        gi, gj = rep.generators[i], rep.generators[j]
        target = 2 * eye if i == j else 0 * eye
        assert np.max(np.abs(gi @ gj + gj @ gi - target)) < 1e-12


@pytest.mark.parametrize("d", [2, 4, 6, 8])
def test_grading(d):
    rep = build_clifford(d)
    g0 = rep.grading
    eye = np.eye(rep.dim)
    assert np.array_equal(g0 @ g0, eye)
    assert np.array_equal(g0, g0.conj().T)
    for g in rep.generators:
        assert np.max(np.abs(g0 @ g + g @ g0)) == 0
        assert np.array_equal(g, g.conj().T)
    # diagonal with balanced +-1 entries
    assert np.array_equal(g0, np.diag(np.diag(g0)))
    assert np.sum(np.diag(g0).real) == 0


def test_grading_is_product_formula():
    rep = build_clifford(4)
    prod = np.linalg.multi_dot(rep.generators)
    assert np.allclose(rep.grading, -(1j ** 2) * prod, atol=1e-14)


def test_sizes():
    assert [build_clifford(d).dim for d in (2, 4, 6)] == [2, 4, 8]


@pytest.mark.parametrize("d", [0, 1, 3, 5, 10, -2])
def test_rejects_odd_or_out_of_range(d):
    with pytest.raises(InvalidArgumentError):
        build_clifford(d)


def test_trace_normalized():
    rep = build_clifford(4)
    assert clifford_trace(rep, np.eye(4)) == 1
    for g in rep.generators:
        assert abs(clifford_trace(rep, g)) < 1e-15
    assert abs(clifford_trace(rep, rep.grading)) < 1e-15
    with pytest.raises(InvalidArgumentError):
        clifford_trace(rep, np.eye(2))


def test_dot_squares_to_norm():
    rep = build_clifford(2)
    v = np.array([0.3, -1.1])
    m = rep.dot(v)
    assert np.allclose(m @ m, (v @ v) * np.eye(2), atol=1e-14)


def test_chiral_bases():
    rep = build_clifford(4)
    ep, em = rep.chiral_bases()
    assert ep.shape == em.shape == (4, 2)
    assert np.allclose(rep.grading @ ep, ep)
    assert np.allclose(rep.grading @ em, -em)
