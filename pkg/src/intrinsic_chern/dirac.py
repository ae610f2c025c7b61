"""Dirac phase on an open box, with the lattice-summed trace and Fedosov index built on it.

The Clifford-extended space is ordered as (clifford, site, internal), so the
lift of a covariant operator A is ``kron(1_c, A)`` and the Dirac phase is
``sum_i gamma_i (x) diag(n_i(x)) (x) 1_Q`` with n(x) = (x + x0)/|x + x0|.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .clifford import CliffordRep
from .errors import (
    AmbiguousKernelError,
    DegenerateShiftError,
    InvalidArgumentError,
    NumericalInconsistencyError,
    UnsupportedGeometryError,
)
from .lattice import CovariantOperator, Geometry, SpectralProjector


@dataclass(frozen=True)
class DiracPhase:
    x0: tuple
    clifford: CliffordRep
    geometry: Geometry
    Q: int
    unit: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.clifford.dim * self.geometry.nsites * self.Q

    @property
    def site_weights(self) -> np.ndarray:
        """Per-coordinate phase factors expanded over the internal index, shape (d, nsites*Q)."""
        return np.repeat(self.unit.T, self.Q, axis=1)

    @cached_property
    def matrix(self) -> np.ndarray:
        S = self.geometry.nsites * self.Q
        out = np.zeros((self.dim, self.dim), dtype=complex)
        c = self.clifford.dim
        w = self.site_weights
        for g, wi in zip(self.clifford.generators, w):
            for a in range(c):
                for b in range(c):
                    if g[a, b] != 0:
                        idx = np.arange(S)
                        out[a * S + idx, b * S + idx] += g[a, b] * wi
        return out

    @cached_property
    def grading(self) -> np.ndarray:
        return np.kron(self.clifford.grading, np.eye(self.geometry.nsites * self.Q))


def dirac_phase(geometry: Geometry, clifford: CliffordRep, x0, Q: int = 1) -> DiracPhase:
    if geometry.is_torus:
        raise UnsupportedGeometryError("the Dirac phase needs true positions (box geometry)")
    if geometry.d != clifford.d:
        raise InvalidArgumentError(f"geometry dimension {geometry.d} differs from Clifford dimension {clifford.d}")
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape != (geometry.d,):
        raise InvalidArgumentError(f"shift must have {geometry.d} components")
    if np.any(x0 < 0) or np.any(x0 >= 1):
        raise InvalidArgumentError(f"shift {tuple(x0)} must lie in [0, 1)^d")
    pos = geometry.coords + x0
    r = np.linalg.norm(pos, axis=1)
    if np.any(r == 0):
        raise DegenerateShiftError(f"shift {tuple(x0)} places a site on the Dirac center")
    unit = pos / r[:, None]
    unit.setflags(write=False)
    return DiracPhase(tuple(float(v) for v in x0), clifford, geometry, int(Q), unit)


@dataclass
class ExtendedOperator:
    matrix: np.ndarray
    clifford: CliffordRep
    geometry: Geometry
    Q: int
    tag: str = ""
    base: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        n = self.clifford.dim * self.geometry.nsites * self.Q
        if self.matrix.shape != (n, n):
            raise InvalidArgumentError(f"extended matrix shape {self.matrix.shape} != ({n}, {n})")


def lift(op: CovariantOperator, clifford: CliffordRep) -> ExtendedOperator:
    if op.geometry.is_torus:
        raise UnsupportedGeometryError("lift acts on box geometries")
    m = np.kron(np.eye(clifford.dim), op.matrix)
    return ExtendedOperator(m, clifford, op.geometry, op.Q, tag="lift", base=op.matrix)


def _as_covariant(p) -> CovariantOperator:
    return p.p if isinstance(p, SpectralProjector) else p


def phase_commutator(F: DiracPhase, op) -> np.ndarray:
    """[F, A] for a covariant operator A (lifted implicitly) or an extended operator."""
    c = F.clifford.dim
    S = F.geometry.nsites * F.Q
    w = F.site_weights
    if isinstance(op, ExtendedOperator) and op.base is None:
        M = op.matrix.reshape(c, S, c, S)
        out = np.zeros_like(M)
        for g, wi in zip(F.clifford.generators, w):
            out += np.einsum("ab,s,bstu->astu", g, wi, M)
            out -= np.einsum("asbt,t,bc->asct", M, wi, g)
        return out.reshape(c * S, c * S)
    A = op.base if isinstance(op, ExtendedOperator) else _as_covariant(op).matrix
    out = np.zeros((c * S, c * S), dtype=complex)
    for g, wi in zip(F.clifford.generators, w):
        out += np.kron(g, (wi[:, None] - wi[None, :]) * A)
    return out


def window_rows(F: DiracPhase, interior_radius: int) -> np.ndarray:
    """Indices of the extended space belonging to sites in [-R', R']^d."""
    mask = np.repeat(F.geometry.interior_mask(interior_radius), F.Q)
    S = mask.size
    return np.concatenate([a * S + np.flatnonzero(mask) for a in range(F.clifford.dim)])


def window_chain_trace(left_rows: np.ndarray, chain, rows: np.ndarray) -> complex:
    """sum_k (L M_1 ... M_m)_{rows_k, rows_k} given the row slice L[rows, :]."""
    X = left_rows
    for M in chain[:-1]:
        X = X @ M
    return complex(np.einsum("kj,jk->", X, chain[-1][:, rows]))


def _check_interior(geometry: Geometry, interior_radius):
    if geometry.is_torus:
        raise UnsupportedGeometryError("the lattice-summed trace is evaluated on box geometries")
    R = geometry.radius
    if interior_radius is None:
        return R // 2
    if not 0 <= interior_radius <= R:
        raise InvalidArgumentError(f"interior radius {interior_radius} must lie in [0, {R}]")
    return int(interior_radius)


def trace_That(eop: ExtendedOperator, interior_radius: int | None = None) -> complex:
    """sum over sites of [-R', R']^d of (normalized Clifford trace) x (matrix trace) of the diagonal block."""
    Rp = _check_interior(eop.geometry, interior_radius if interior_radius is not None else eop.geometry.radius)
    mask = np.repeat(eop.geometry.interior_mask(Rp), eop.Q)
    diag = np.diagonal(eop.matrix).reshape(eop.clifford.dim, -1)
    return complex(diag[:, mask].sum() / eop.clifford.dim)


def _left_rows(F: DiracPhase, left_site_matrix: np.ndarray, left_clifford: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Rows of kron(left_clifford, left_site_matrix) restricted to ``rows``."""
    c = F.clifford.dim
    S = left_site_matrix.shape[0]
    a, s = np.divmod(rows, S)
    return np.concatenate([left_clifford[a, b][:, None] * left_site_matrix[s, :] for b in range(c)], axis=1)


@dataclass
class IndexRecord:
    value: float
    imag_residual: float
    radius: int
    interior_radius: int
    x0: tuple
    n: int

    def as_dict(self):
        return {
            "radius": self.radius,
            "interior_radius": self.interior_radius,
            "x0": list(self.x0),
            "n": self.n,
            "index": self.value,
            "imag_residual": self.imag_residual,
        }


def fedosov_tindex(p, F: DiracPhase, n: int | None = None, interior_radius: int | None = None, imag_tol: float = 1e-6) -> IndexRecord:
    """Fedosov evaluation of the index paired with the projector ``p``.

    Returns (-1)^(n + d/2) Tr{gamma p [F, p]^(2n)} summed over the site
    window [-R', R']^d, with the full matrix trace on the Clifford factor.
    For the default n = d/2 + 1 this is -Tr{gamma p [F, p]^(d+2)}.
    """
    pc = _as_covariant(p)
    d = F.clifford.d
    if n is None:
        n = d // 2 + 1
    if 2 * n <= d + 1:
        raise InvalidArgumentError(f"Fedosov exponent needs 2n > d+1, got n={n}")
    Rp = _check_interior(pc.geometry, interior_radius)
    if pc.geometry != F.geometry:
        raise InvalidArgumentError("projector and Dirac phase live on different geometries")
    rows = window_rows(F, Rp)
    C = phase_commutator(F, pc)
    left = _left_rows(F, pc.matrix, F.clifford.grading, rows)
    raw = window_chain_trace(left, [C] * (2 * n), rows)
    val = (-1) ** (n + d // 2) * raw
    resid = abs(val.imag) / max(1.0, abs(val.real))
    if resid > imag_tol:
        raise NumericalInconsistencyError(f"Fedosov trace has imaginary residual {resid:.3g}", residual=resid)
    return IndexRecord(float(val.real), float(val.imag), F.geometry.radius, Rp, F.x0, int(n))


@dataclass
class DecayRecord:
    distances: np.ndarray
    norms: np.ndarray
    slope: float | None
    k: int

    def rows(self):
        return list(zip(self.distances.tolist(), self.norms.tolist()))


def summability_diagnostic(p, F: DiracPhase, k: int = 2, r_min: float = 2.0, r_max: float | None = None, floor: float = 1e-14) -> DecayRecord:
    """Per-site norms of the diagonal blocks of [F, p]^k against |x + x0|.

    The log-log slope is fitted over sites with r_min <= |x + x0| <= r_max
    (default: half the box radius, away from the open boundary).
    """
    pc = _as_covariant(p)
    C = phase_commutator(F, pc)
    M = C
    for _ in range(k - 1):
        M = M @ C
    c, ns, Q = F.clifford.dim, F.geometry.nsites, F.Q
    blocks = M.reshape(c, ns, Q, c, ns, Q)
    sites = np.arange(ns)
    diag = blocks[:, sites, :, :, sites, :]  # (ns, c, Q, c, Q)
    diag = diag.reshape(ns, c * Q, c * Q)
    norms = np.linalg.norm(diag, ord=2, axis=(1, 2))
    r = np.linalg.norm(F.geometry.coords + np.asarray(F.x0), axis=1)
    order = np.argsort(r, kind="stable")
    r, norms = r[order], norms[order]
    if r_max is None:
        r_max = F.geometry.radius / 2
    use = (r >= r_min) & (r <= r_max) & (norms > floor)
    slope = None
    if np.count_nonzero(use) >= 2:
        slope = float(np.polyfit(np.log(r[use]), np.log(norms[use]), 1)[0])
    return DecayRecord(r, norms, slope, int(k))


def _index_orientation(d: int) -> tuple:
    """(domain, codomain) chirality of the compression whose index equals fedosov_tindex."""
    return ("+", "-") if (d // 2) % 2 == 0 else ("-", "+")


def compressed_phase(p, F: DiracPhase):
    """Matrix of the compression of F between the graded ranges of the lifted projector.

    Returns (K, domain_basis, codomain_basis) where the bases are isometries
    from the compressed coordinates into the extended space.
    """
    pc = _as_covariant(p)
    evals, evecs = np.linalg.eigh(pc.matrix)
    V = evecs[:, evals > 0.5]
    Eplus, Eminus = F.clifford.chiral_bases()
    dom_c, cod_c = _index_orientation(F.clifford.d)
    Ed = Eplus if dom_c == "+" else Eminus
    Ec = Eminus if dom_c == "+" else Eplus
    w = F.site_weights
    K = 0
    for g, wi in zip(F.clifford.generators, w):
        K = K + np.kron(Ec.conj().T @ g @ Ed, V.conj().T @ (wi[:, None] * V))
    return K, np.kron(Ed, V), np.kron(Ec, V)


def kernel_dims(p, F: DiracPhase, tol: float = 1e-3, interior_radius: int | None = None, separation: float = 10.0):
    """Kernel dimensions of the compressed phase counted inside the interior window.

    Singular values below ``tol`` define approximate kernels of f and f^dagger;
    a singular vector is counted when more than half of its weight lies in
    [-R', R']^d.  Raises AmbiguousKernelError when a singular value falls in
    [tol/separation, tol*separation].
    """
    pc = _as_covariant(p)
    Rp = _check_interior(pc.geometry, interior_radius)
    K, Bd, Bc = compressed_phase(pc, F)
    if K.size == 0:
        return 0, 0
    U, s, Vh = np.linalg.svd(K)
    crowded = (s > tol / separation) & (s < tol * separation)
    if np.any(crowded):
        raise AmbiguousKernelError(f"singular values {s[crowded]} crowd the kernel tolerance {tol}", singular_values=s)
    small = np.flatnonzero(s < tol)
    rows = window_rows(F, Rp)

    def interior_count(vectors):
        if vectors.shape[1] == 0:
            return 0
        weight = np.sum(np.abs(vectors[rows, :]) ** 2, axis=0)
        return int(np.count_nonzero(weight > 0.5))

    ker_f = interior_count(Bd @ Vh[small].conj().T)
    ker_fd = interior_count(Bc @ U[:, small])
    # K can be rectangular; unmatched directions are exact zero modes of the wider side
    extra = K.shape[1] - K.shape[0]
    if extra > 0:
        ker_f += interior_count(Bd @ Vh[K.shape[0]:].conj().T)
    elif extra < 0:
        ker_fd += interior_count(Bc @ U[:, K.shape[1]:])
    return ker_f, ker_fd
