"""Even Clifford algebras as explicit gamma matrices.

Generators are built by recursive doubling starting from the Pauli pair
(sigma_x, sigma_y).  Passing from d to d+2 tensors the old generators with
sigma_x and appends ``sigma_y (x) 1`` and ``sigma_x (x) g0``, where g0 is the
grading of the smaller algebra.  This keeps every grading diagonal with +-1
entries, and all entries stay in {0, +-1, +-i}, so the defining relations
hold exactly in floating point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

MAX_DIMENSION = 8


@dataclass(frozen=True)
class CliffordRep:
    d: int
    generators: tuple
    grading: np.ndarray

    @property
    def dim(self) -> int:
        return self.grading.shape[0]

    def __post_init__(self):
        for g in self.generators:
            g.setflags(write=False)
        self.grading.setflags(write=False)

    def dot(self, v) -> np.ndarray:
        """Return gamma . v for a real d-vector v."""
        v = np.asarray(v, dtype=float)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for vi, g in zip(v, self.generators):
            out += vi * g
        return out

    def chiral_bases(self):
        """Orthonormal bases (dim x dim/2) of the +1 and -1 eigenspaces of the grading."""
        diag = np.real(np.diag(self.grading))
        eye = np.eye(self.dim, dtype=complex)
        return eye[:, diag > 0], eye[:, diag < 0]


def build_clifford(d: int) -> CliffordRep:
    if not isinstance(d, (int, np.integer)) or d < 2 or d % 2:
        raise InvalidArgumentError(f"Clifford dimension must be an even integer >= 2, got {d!r}")
    if d > MAX_DIMENSION:
        raise InvalidArgumentError(f"d={d} exceeds the supported bound {MAX_DIMENSION}")
    gens = [SIGMA_X, SIGMA_Y]
    grading = _grading(gens)
    while len(gens) < d:
        eye = np.eye(gens[0].shape[0], dtype=complex)
        gens = [np.kron(SIGMA_X, g) for g in gens] + [np.kron(SIGMA_Y, eye), np.kron(SIGMA_X, grading)]
        grading = _grading(gens)
    return CliffordRep(d=int(d), generators=tuple(np.ascontiguousarray(g) for g in gens), grading=grading)


def _grading(gens):
    k = len(gens) // 2
    out = np.eye(gens[0].shape[0], dtype=complex)
    for g in gens:
        out = out @ g
    out = -(1j ** k) * out
    # entries are exactly 0, +-1, +-i up to signed zeros from the complex products
    return np.round(out.real) + 1j * np.round(out.imag)


def clifford_trace(rep: CliffordRep, m) -> complex:
    m = np.asarray(m)
    if m.shape != (rep.dim, rep.dim):
        raise InvalidArgumentError(f"expected a {rep.dim}x{rep.dim} matrix, got shape {m.shape}")
    return complex(np.trace(m) / rep.dim)
