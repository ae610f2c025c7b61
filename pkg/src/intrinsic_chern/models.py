"""Built-in covariant models used as fixtures and in the experiment runner."""

from __future__ import annotations

import numpy as np

from .clifford import SIGMA_X, SIGMA_Y, SIGMA_Z
from .lattice import HoppingModel

EYE2 = np.eye(2, dtype=complex)


def chern_model(m: float = 1.0, W: float = 0.0) -> HoppingModel:
    """Two-band square-lattice Chern insulator.

    Bloch symbol sin(kx) sx + sin(ky) sy + (m + cos kx + cos ky) sz; gapped for
    m not in {0, +-2}, topological for 0 < |m| < 2.  ``W`` multiplies the mass
    term by (1 + W omega_x).
    """
    hop = {
        (0, 0): m * SIGMA_Z,
        (1, 0): 0.5 * SIGMA_Z + 0.5j * SIGMA_X,
        (-1, 0): 0.5 * SIGMA_Z - 0.5j * SIGMA_X,
        (0, 1): 0.5 * SIGMA_Z + 0.5j * SIGMA_Y,
        (0, -1): 0.5 * SIGMA_Z - 0.5j * SIGMA_Y,
    }
    disorder = {(0, 0): W} if W else {}
    return HoppingModel(d=2, Q=2, hoppings=hop, disorder=disorder, name="chern")


def atomic_insulator(d: int = 2, m: float = 1.0, W: float = 0.0) -> HoppingModel:
    """Strictly on-site two-level insulator m sz; its projector has no hopping at all."""
    zero = (0,) * d
    return HoppingModel(d=d, Q=2, hoppings={zero: m * SIGMA_Z}, disorder={zero: W} if W else {}, name="atomic")


def layered_chern_stack(m: float = 1.0, t3: float = 0.0, W: float = 0.0) -> HoppingModel:
    """Chern layers stacked along axis 3, coupled by a mass-type hopping t3 sz.

    The coupling shifts the layer mass to m + 2 t3 cos k3, so every k3 slice
    stays in the m-phase while |t3| < min(|m|, 2 - |m|) / 2.
    """
    layer = chern_model(m)
    hop = {q + (0,): a for q, a in layer.hoppings.items()}
    if t3:
        hop[(0, 0, 1)] = t3 * SIGMA_Z
        hop[(0, 0, -1)] = t3 * SIGMA_Z
    disorder = {(0, 0, 0): W} if W else {}
    return HoppingModel(d=3, Q=2, hoppings=hop, disorder=disorder, name="chern_stack")


BUILTIN_MODELS = {
    "chern": chern_model,
    "atomic": atomic_insulator,
    "chern_stack": layered_chern_stack,
}
