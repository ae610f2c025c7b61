"""Chern cocycle by the local formula and by the Dirac-phase trace.

Normalization: the Clifford factor enters the Dirac-phase traces through the
full matrix trace (2^{d/2} times the normalized trace).  The local formula's
constant is the one forced by the central integral identity,
``central_prefactor(d) * (-i)^d = -(2 pi i)^{d/2} / (d/2)!``: substituting
q Phi_q(a) = -i Phi_q(d a) into the identity produces exactly this factor.
With these choices every route agrees with the Fedosov index including the
sign, and matches the momentum-space Chern number of the Bloch symbol.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .clifford import CliffordRep, build_clifford
from .crossed import derivation
from .dirac import (
    DiracPhase,
    _as_covariant,
    _check_interior,
    _left_rows,
    dirac_phase,
    phase_commutator,
    window_chain_trace,
    window_rows,
)
from .errors import InvalidArgumentError
from .lattice import CovariantOperator, SpectralProjector

DEFAULT_BAND_TOL = 1e-2


@dataclass
class CocycleResult:
    value: complex
    route: str
    params: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)

    @property
    def real(self) -> float:
        return float(self.value.real)

    def as_dict(self):
        return {
            "route": self.route,
            "value_real": float(self.value.real),
            "value_imag": float(self.value.imag),
            **{f"param_{k}": v for k, v in self.params.items()},
            **{f"residual_{k}": v for k, v in self.residuals.items()},
        }


def permutation_sign(perm) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def local_prefactor(k: int) -> complex:
    """-(2 pi i)^{k/2} / (k/2)!, i.e. central_prefactor(k) * (-i)^k."""
    return -((2j * math.pi) ** (k // 2)) / math.factorial(k // 2)


def central_prefactor(d: int) -> complex:
    """-(2 pi)^{d/2} / (i^{d/2} (d/2)!)"""
    return -((2 * math.pi) ** (d // 2)) / ((1j ** (d // 2)) * math.factorial(d // 2))


def _trace_product(mats) -> complex:
    X = mats[0]
    for M in mats[1:-1]:
        X = X @ M
    return complex(np.sum(X * mats[-1].T))


def _antisymmetrized(ops, directions, band_tol):
    k = len(directions)
    if len(ops) != k + 1:
        raise InvalidArgumentError(f"expected {k + 1} operators for a degree-{k} cocycle, got {len(ops)}")
    ops = [_as_covariant(a) for a in ops]
    geom = ops[0].geometry
    for a in ops:
        if a.geometry != geom or a.Q != ops[0].Q:
            raise InvalidArgumentError("cocycle arguments must share geometry and internal dimension")
    # derivatives are computed once per (argument, direction)
    cache = {}
    for i, a in enumerate(ops[1:], start=1):
        for j in directions:
            key = (id(a), j)
            if key not in cache:
                cache[key] = derivation(a, j, band_tol=band_tol).matrix
    total = 0.0 + 0.0j
    for perm in itertools.permutations(range(k)):
        chain = [ops[0].matrix] + [cache[(id(ops[i + 1]), directions[perm[i]])] for i in range(k)]
        total += permutation_sign(perm) * _trace_product(chain)
    return total / geom.nsites


def local_cocycle(*ops, band_tol: float = DEFAULT_BAND_TOL) -> CocycleResult:
    """Local formula c_d sum_rho (-1)^rho T{a_0 d_rho1 a_1 ... d_rhod a_d} on a torus.

    c_d = local_prefactor(d).

    ``band_tol`` bounds the relative weight an argument may carry on the
    minimal-image seam (exponential tails of projectors fall below it).
    """
    a0 = _as_covariant(ops[0])
    d = a0.geometry.d
    if d % 2:
        raise InvalidArgumentError(f"the top-degree cocycle needs even d, got {d}")
    raw = _antisymmetrized(ops, tuple(range(d)), band_tol)
    val = local_prefactor(d) * raw
    return CocycleResult(
        value=complex(val),
        route="local",
        params={"d": d, "L": list(a0.geometry.sizes)},
        residuals={"imag": float(abs(val.imag))},
    )


def weak_invariant_sigma12(p, directions=(0, 1), band_tol: float = DEFAULT_BAND_TOL) -> CocycleResult:
    """Degree-2 local formula inside a 3D torus, derivations along two axes.

    Uses the same constant as the two-dimensional cocycle, local_prefactor(2) = -2 pi i,
    so a decoupled stack reports the Chern number of one layer.
    """
    pc = _as_covariant(p)
    if pc.geometry.d != 3:
        raise InvalidArgumentError("the weak invariant is evaluated on a three-dimensional torus")
    raw = _antisymmetrized([pc, pc, pc], tuple(directions), band_tol)
    val = local_prefactor(2) * raw
    params = {"d": 3, "L": list(pc.geometry.sizes), "directions": list(directions)}
    if isinstance(p, SpectralProjector):
        params["gap"] = p.gap
    return CocycleResult(complex(val), "local", params, {"imag": float(abs(val.imag))})


def midpoint_shifts(d: int, m: int = 3) -> np.ndarray:
    """m^d midpoint grid in [0,1)^d; m=3 gives coordinates {1/6, 1/2, 5/6}."""
    pts = (2 * np.arange(m) + 1) / (2 * m)
    return np.array(list(itertools.product(pts, repeat=d)))


def random_shifts(d: int, count: int, seed: int = 0, margin: float = 0.05) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(margin, 1 - margin, size=(count, d))


def _gamma_phase_rows(F: DiracPhase, rows: np.ndarray) -> np.ndarray:
    """Rows of gamma F restricted to ``rows``."""
    S = F.geometry.nsites * F.Q
    out = 0
    for g, wi in zip(F.clifford.generators, F.site_weights):
        out = out + _left_rows(F, np.diag(wi).astype(complex), F.clifford.grading @ g, rows)
    return out


def direct_cocycle_at(ops, F: DiracPhase, interior_radius: int) -> complex:
    """1/2 Tr{gamma F prod_i [F, a_i]} summed over the interior window, for one shift."""
    rows = window_rows(F, interior_radius)
    comms = [phase_commutator(F, a) for a in ops]
    left = _gamma_phase_rows(F, rows)
    return 0.5 * window_chain_trace(left, comms, rows)


def direct_cocycle(*ops, clifford: CliffordRep | None = None, shifts=None, interior_radius: int | None = None,
                   spread_tol: float = 0.05) -> CocycleResult:
    """Shift-averaged Dirac-phase cocycle on an open box.

    ``shifts`` defaults to the 3^d midpoint grid.  The spread (max - min) of
    the per-shift values is reported; above ``spread_tol`` a warning is
    attached to the result.
    """
    covs = [_as_covariant(a) for a in ops]
    geom = covs[0].geometry
    d = geom.d
    if len(covs) != d + 1:
        raise InvalidArgumentError(f"expected {d + 1} operators, got {len(covs)}")
    clifford = clifford or build_clifford(d)
    Rp = _check_interior(geom, interior_radius)
    shifts = midpoint_shifts(d) if shifts is None else np.atleast_2d(np.asarray(shifts, dtype=float))
    per_shift = []
    for x0 in shifts:
        F = dirac_phase(geom, clifford, x0, Q=covs[0].Q)
        per_shift.append(direct_cocycle_at(covs, F, Rp))
    per_shift = np.array(per_shift)
    val = complex(per_shift.mean())
    spread = float(np.ptp(per_shift.real)) if len(per_shift) > 1 else 0.0
    res = CocycleResult(
        val,
        "direct",
        {"d": d, "R": geom.radius, "interior_radius": Rp, "n_shifts": len(shifts)},
        {"imag": float(abs(val.imag)), "shift_spread": spread},
    )
    if spread > spread_tol:
        msg = f"shift spread {spread:.3g} exceeds {spread_tol:.3g}"
        res.residuals["warning"] = msg
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return res


def central_identity_check(d: int, points, cutoff: float = 200.0, shifts=None, chunk: int = 200_000):
    """Compare the lattice-sum integral of the central identity with its closed form.

    ``points`` are x_1..x_d in Z^d (x_{d+1} = 0).  The integral over R^d is a
    sum over lattice points n with |n| <= cutoff, averaged over the shifts
    (default: 3^d midpoint grid), i.e. a midpoint rule on cells of side 1/3.
    Returns (lhs, rhs).
    """
    clifford = build_clifford(d)
    pts = np.asarray(points, dtype=float)
    if pts.shape != (d, d):
        raise InvalidArgumentError(f"need {d} points in Z^{d}")
    chain = list(pts) + [np.zeros(d)]
    shifts = midpoint_shifts(d) if shifts is None else np.atleast_2d(np.asarray(shifts, dtype=float))
    gammas = np.array(clifford.generators)
    g0 = clifford.grading

    Rc = int(math.floor(cutoff))
    axis = np.arange(-Rc, Rc + 1)
    lattice = np.array(np.meshgrid(*([axis] * d), indexing="ij")).reshape(d, -1).T
    lattice = lattice[np.sum(lattice.astype(float) ** 2, axis=1) <= cutoff ** 2]

    total = 0.0 + 0.0j
    for x0 in shifts:
        for start in range(0, len(lattice), chunk):
            x = lattice[start:start + chunk] + x0
            units = []
            for v in chain:
                y = x + v
                units.append(y / np.linalg.norm(y, axis=1)[:, None])
            prod = None
            for i in range(d):
                m = np.einsum("nk,kab->nab", units[i] - units[i + 1], gammas)
                prod = m if prod is None else prod @ m
            total += np.einsum("ab,nba->", g0, prod)
    lhs = total / len(shifts)
    antisym = sum(permutation_sign(rho) * math.prod(pts[i, rho[i]] for i in range(d))
                  for rho in itertools.permutations(range(d)))
    rhs = central_prefactor(d) * antisym
    return complex(lhs), complex(rhs)
