"""Fourier calculus of covariant operators on a torus.

The q-th Fourier coefficient of an operator is its q-th hopping diagonal,
the family of blocks a_{x, x-q}.  Hopping vectors are minimal-image
representatives in (-L/2, L/2]^d, which makes the derivations
``d_j a = i q_j a_q`` exact for operators whose band fits in that window.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError, UnsupportedGeometryError
from .lattice import CovariantOperator, Geometry


def _require_torus(op: CovariantOperator, what: str):
    if not op.geometry.is_torus:
        raise UnsupportedGeometryError(f"{what} is defined on torus geometries only")


def _window(geometry: Geometry):
    axes = [range(-((L - 1) // 2), L // 2 + 1) for L in geometry.sizes]
    return itertools.product(*axes)


def _expand(site_matrix: np.ndarray, Q: int) -> np.ndarray:
    """Promote a (nsites, nsites) site-pair array to (nsites*Q, nsites*Q)."""
    if Q == 1:
        return site_matrix
    return np.kron(site_matrix, np.ones((Q, Q)))


@dataclass
class FourierFamily:
    """Hopping diagonals {q: blocks} with blocks[x] = a_{x, x-q}, shape (nsites, Q, Q)."""

    geometry: Geometry
    Q: int
    coefficients: dict

    def keys(self):
        return sorted(self.coefficients)


def fourier_decompose(op: CovariantOperator, tol: float = 0.0) -> FourierFamily:
    _require_torus(op, "fourier_decompose")
    g = op.geometry
    blocks = op.blocks()
    sites = np.arange(g.nsites)
    coeffs = {}
    for q in _window(g):
        b = blocks[sites, g.shifted_index(q)]
        if np.max(np.abs(b), initial=0.0) > tol:
            coeffs[q] = b.copy()
    return FourierFamily(g, op.Q, coeffs)


def fourier_assemble(family: FourierFamily) -> CovariantOperator:
    g, Q = family.geometry, family.Q
    ns = g.nsites
    blocks = np.zeros((ns, ns, Q, Q), dtype=complex)
    sites = np.arange(ns)
    for q, b in family.coefficients.items():
        blocks[sites, g.shifted_index(q)] = b
    matrix = blocks.transpose(0, 2, 1, 3).reshape(ns * Q, ns * Q)
    return CovariantOperator(matrix, g, Q, {"kind": "fourier_assemble"})


def cesaro_weights(geometry: Geometry, N: int) -> np.ndarray:
    """Fejer weights prod_j max(0, 1 - |q_j|/(N+1)) on every site pair."""
    if N < 0:
        raise InvalidArgumentError("Cesaro order must be >= 0")
    w = np.clip(1.0 - np.abs(geometry.displacements) / (N + 1.0), 0.0, None)
    return np.prod(w, axis=0)


def cesaro_sum(op: CovariantOperator, N: int) -> CovariantOperator:
    _require_torus(op, "cesaro_sum")
    w = _expand(cesaro_weights(op.geometry, N), op.Q)
    return op.like(w * op.matrix, kind="cesaro", order=int(N))


def seam_weight(op: CovariantOperator, j: int) -> float:
    """Largest block norm on the ambiguous minimal-image seam |q_j| = L_j/2, relative to the largest block."""
    g = op.geometry
    L = g.sizes[j]
    if L % 2:
        return 0.0
    norms = op.block_norms()
    top = norms.max()
    if top == 0:
        return 0.0
    seam = np.abs(g.displacements[j]) * 2 == L
    return float(norms[seam].max(initial=0.0) / top)


def derivation(op: CovariantOperator, j: int, band_tol: float = 0.0) -> CovariantOperator:
    """Noncommutative partial derivative along axis ``j`` (0-based).

    Multiplies the q-th hopping diagonal by i q_j.  Raises when the operator
    has weight above ``band_tol`` (relative to its largest block) on the
    seam |q_j| = L_j/2, where the minimal image is ambiguous.
    """
    _require_torus(op, "derivation")
    g = op.geometry
    if not 0 <= j < g.d:
        raise InvalidArgumentError(f"direction {j} out of range for d={g.d}")
    w = seam_weight(op, j)
    if w > band_tol:
        raise InvalidArgumentError(
            f"operator band reaches the minimal-image seam along axis {j} (relative weight {w:.3g} > {band_tol:.3g})"
        )
    mult = _expand(1j * g.displacements[j].astype(float), op.Q)
    return op.like(mult * op.matrix, kind="derivation", axis=int(j))


def trace_T(op: CovariantOperator, ensemble=None) -> complex:
    """Trace per unit volume, (1/nsites) sum_x tr(a_xx).

    With ``ensemble`` the value is averaged over ``op`` and every member.
    """
    _require_torus(op, "trace_T")
    members = [op] + list(ensemble or [])
    vals = []
    for m in members:
        if m.geometry != op.geometry:
            raise InvalidArgumentError("ensemble members must share the geometry")
        vals.append(np.trace(m.matrix) / m.geometry.nsites)
    return complex(np.mean(vals))


@dataclass
class LocalityProfile:
    distances: np.ndarray
    sup_norms: np.ndarray
    alpha: float | None
    log_c: float | None

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["distance", "sup_norm"])
            for r, v in zip(self.distances, self.sup_norms):
                w.writerow([f"{r:.12g}", f"{v:.12g}"])
        return path


def locality_profile(op: CovariantOperator, floor: float = 1e-13, max_distance: float | None = None) -> LocalityProfile:
    """sup_x ||a_{x,x-q}|| grouped by the Euclidean length |q|, with an exponential fit.

    The fit log(norm) = log C + |q| log(alpha) uses every distance whose
    sup-norm exceeds ``floor`` (and is at most ``max_distance`` when given).
    """
    _require_torus(op, "locality_profile")
    g = op.geometry
    norms = op.block_norms(ord=2)
    r = np.sqrt(np.sum(g.displacements.astype(float) ** 2, axis=0))
    key = np.round(r, 9)
    dist = np.unique(key)
    sup = np.array([norms[key == v].max() for v in dist])
    use = sup > floor
    if max_distance is not None:
        use &= dist <= max_distance
    if np.count_nonzero(use) < 2:
        return LocalityProfile(dist, sup, None, None)
    slope, icept = np.polyfit(dist[use], np.log(sup[use]), 1)
    return LocalityProfile(dist, sup, float(np.exp(slope)), float(icept))
