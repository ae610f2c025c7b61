"""Momentum-space Chern number of a clean two-dimensional model.

Link-variable (field-strength) method on an N x N Brillouin-zone grid for the
Bloch symbol h(k) = sum_q A_q exp(-i k.q).  The plaquette orientation is the
usual one (k_1 then k_2), so the result is the TKNN integer of h(k).
"""

from __future__ import annotations

import numpy as np

from .errors import GapClosedError, InvalidArgumentError, NumericalInconsistencyError
from .lattice import HoppingModel


def bloch_eigensystem(model: HoppingModel, N: int):
    ks = 2 * np.pi * np.arange(N) / N
    H = np.zeros((N, N, model.Q, model.Q), dtype=complex)
    for q, a in model.hoppings.items():
        phase = np.exp(-1j * (ks[:, None] * q[0] + ks[None, :] * q[1]))
        H += phase[:, :, None, None] * a
    return np.linalg.eigh(H)


def momentum_oracle_chern(model: HoppingModel, bands=0, N: int = 24, gap_tol: float = 1e-6) -> int:
    """Chern number of the band(s) ``bands`` (0-based, ascending energy) on an N x N grid."""
    if model.d != 2:
        raise InvalidArgumentError("the momentum oracle handles d = 2 models")
    if not model.is_clean:
        raise InvalidArgumentError("the momentum oracle needs a clean (W = 0) model")
    bands = np.atleast_1d(np.asarray(bands, dtype=int))
    evals, evecs = bloch_eigensystem(model, N)
    lo, hi = bands.min(), bands.max()
    if lo > 0:
        gap = np.min(evals[..., lo] - evals[..., lo - 1])
        if gap < gap_tol:
            raise GapClosedError(f"band {lo} touches band {lo - 1} (gap {gap:.3g})", gap=float(gap))
    if hi < model.Q - 1:
        gap = np.min(evals[..., hi + 1] - evals[..., hi])
        if gap < gap_tol:
            raise GapClosedError(f"band {hi} touches band {hi + 1} (gap {gap:.3g})", gap=float(gap))
    u = evecs[..., bands]  # (N, N, Q, nb)

    def link(axis):
        overlap = np.einsum("xyan,xyam->xynm", u.conj(), np.roll(u, -1, axis=axis))
        det = np.linalg.det(overlap)
        return det / np.abs(det)

    U1, U2 = link(0), link(1)
    F = np.angle(U1 * np.roll(U2, -1, axis=0) / (np.roll(U1, -1, axis=1) * U2))
    c = F.sum() / (2 * np.pi)
    nearest = round(c)
    if abs(c - nearest) > 1e-6:
        raise NumericalInconsistencyError(f"link-variable sum {c} is not an integer", residual=abs(c - nearest))
    return int(nearest)
