"""Finite-volume covariant lattice Hamiltonians and their Fermi projectors.

Two geometries stand in for l^2(Z^d): a periodic torus (translation-invariant
traces, exact Fourier calculus) and an open box [-R, R]^d (true positions,
needed by the Dirac phase).  Matrices are indexed by (site, internal) with the
site index slowest, sites enumerated lexicographically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import GapClosedError, InvalidArgumentError

HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class Geometry:
    """Finite set of lattice sites.

    ``kind="torus"`` uses ``sizes`` (L per axis, coordinates 0..L-1);
    ``kind="box"`` uses ``radius`` (coordinates -R..R on every axis).
    """

    d: int
    kind: str
    sizes: tuple = ()
    radius: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise InvalidArgumentError(f"dimension must be positive, got {self.d}")
        if self.kind == "torus":
            if len(self.sizes) != self.d or min(self.sizes) < 1:
                raise InvalidArgumentError(f"torus needs {self.d} positive sizes, got {self.sizes}")
        elif self.kind == "box":
            if self.radius < 0:
                raise InvalidArgumentError(f"box radius must be >= 0, got {self.radius}")
        else:
            raise InvalidArgumentError(f"unknown geometry kind {self.kind!r}")

    @classmethod
    def torus(cls, d: int, L) -> "Geometry":
        sizes = tuple(int(v) for v in L) if np.ndim(L) else (int(L),) * d
        return cls(d=d, kind="torus", sizes=sizes)

    @classmethod
    def box(cls, d: int, radius: int) -> "Geometry":
        return cls(d=d, kind="box", radius=int(radius))

    @property
    def is_torus(self) -> bool:
        return self.kind == "torus"

    @property
    def extent(self) -> tuple:
        return self.sizes if self.is_torus else (2 * self.radius + 1,) * self.d

    @property
    def nsites(self) -> int:
        return int(np.prod(self.extent))

    @cached_property
    def coords(self) -> np.ndarray:
        grids = np.indices(self.extent).reshape(self.d, -1).T
        if not self.is_torus:
            grids = grids - self.radius
        grids.setflags(write=False)
        return grids

    def index(self, coord) -> int:
        """Site index of an integer coordinate; torus coordinates are wrapped."""
        c = np.asarray(coord, dtype=int)
        ext = np.asarray(self.extent)
        if self.is_torus:
            c = np.mod(c, ext)
        else:
            c = c + self.radius
            if np.any(c < 0) or np.any(c >= ext):
                raise InvalidArgumentError(f"coordinate {coord} lies outside the box")
        return int(np.ravel_multi_index(tuple(c), tuple(ext)))

    def minimal_image(self, dq) -> np.ndarray:
        """Map displacements into the window (-L/2, L/2] on each torus axis."""
        dq = np.asarray(dq)
        if not self.is_torus:
            return dq
        L = np.asarray(self.sizes).reshape((-1,) + (1,) * (dq.ndim - 1)) if dq.ndim > 1 else np.asarray(self.sizes)
        m = np.mod(dq, L)
        return np.where(2 * m > L, m - L, m)

    @cached_property
    def displacements(self) -> np.ndarray:
        """Array (d, nsites, nsites) of x_j - y_j, minimal-image reduced on a torus."""
        c = self.coords.T
        disp = c[:, :, None] - c[:, None, :]
        disp = self.minimal_image(disp)
        disp.setflags(write=False)
        return disp

    def shifted_index(self, q) -> np.ndarray:
        """For each site x the index of x - q, or -1 when x - q leaves the box."""
        target = self.coords - np.asarray(q, dtype=int)
        ext = np.asarray(self.extent)
        if self.is_torus:
            target = np.mod(target, ext)
            return np.ravel_multi_index(tuple(target.T), tuple(ext))
        target = target + self.radius
        inside = np.all((target >= 0) & (target < ext), axis=1)
        out = np.full(self.nsites, -1)
        out[inside] = np.ravel_multi_index(tuple(target[inside].T), tuple(ext))
        return out

    def interior_mask(self, radius: int) -> np.ndarray:
        """Sites of the cube [-r, r]^d (box geometry)."""
        if self.is_torus:
            raise InvalidArgumentError("interior windows are defined on box geometries")
        return np.all(np.abs(self.coords) <= radius, axis=1)


def _positive_half(q) -> bool:
    """True for the lexicographically positive representative of {q, -q}."""
    for v in q:
        if v != 0:
            return v > 0
    return False


@dataclass
class HoppingModel:
    """Covariant Hamiltonian data: hopping matrices A_q and disorder strengths W_q.

    The realization on a configuration omega is
    ``(H psi)_x = sum_q (1 + W_q omega_x) A_q psi_{x-q}``
    with the hopping q and its reverse sharing the random factor of the
    bond's head site, so that H stays exactly self-adjoint.
    """

    d: int
    Q: int
    hoppings: dict
    disorder: dict = field(default_factory=dict)
    name: str = "custom"

    def __post_init__(self):
        self.hoppings = {tuple(int(v) for v in q): np.asarray(a, dtype=complex) for q, a in self.hoppings.items()}
        self.disorder = {tuple(int(v) for v in q): float(w) for q, w in self.disorder.items()}
        self.validate()

    def validate(self):
        for q, a in self.hoppings.items():
            if len(q) != self.d:
                raise InvalidArgumentError(f"hopping vector {q} does not have dimension {self.d}")
            if a.shape != (self.Q, self.Q):
                raise InvalidArgumentError(f"hopping matrix for q={q} has shape {a.shape}, expected {(self.Q, self.Q)}")
            minus = tuple(-v for v in q)
            partner = self.hoppings.get(minus, np.zeros_like(a))
            if not np.allclose(partner, a.conj().T, atol=HERMITICITY_TOL, rtol=0):
                raise InvalidArgumentError(f"model is not Hermitian: A_{minus} != A_{q}^dagger")
        for q, w in self.disorder.items():
            if len(q) != self.d:
                raise InvalidArgumentError(f"disorder vector {q} does not have dimension {self.d}")
            if w < 0:
                raise InvalidArgumentError(f"disorder strength W_{q} must be >= 0")
            minus = tuple(-v for v in q)
            if any(q) and self.disorder.get(minus, w) != w:
                raise InvalidArgumentError(f"W_{q} and W_{minus} must agree")

    @property
    def range(self) -> int:
        return max((max(abs(v) for v in q) for q, a in self.hoppings.items() if np.any(a)), default=0)

    @property
    def is_clean(self) -> bool:
        return not any(self.disorder.values())

    def with_disorder(self, W: float, q=None) -> "HoppingModel":
        q = tuple(q) if q is not None else (0,) * self.d
        dis = dict(self.disorder)
        dis[q] = float(W)
        if any(q):
            dis[tuple(-v for v in q)] = float(W)
        return HoppingModel(self.d, self.Q, dict(self.hoppings), dis, name=self.name)

    def bloch(self, k) -> np.ndarray:
        """h(k) = sum_q A_q exp(-i k.q), the symbol of the clean model."""
        k = np.asarray(k, dtype=float)
        out = np.zeros((self.Q, self.Q), dtype=complex)
        for q, a in self.hoppings.items():
            out += a * np.exp(-1j * np.dot(k, q))
        return out


@dataclass(frozen=True)
class DisorderConfig:
    omega: np.ndarray
    seed: int
    geometry: Geometry


def sample_disorder(geometry: Geometry, seed: int) -> DisorderConfig:
    rng = np.random.default_rng(np.uint64(seed))
    omega = rng.uniform(-0.5, 0.5, size=geometry.nsites)
    omega.setflags(write=False)
    return DisorderConfig(omega=omega, seed=int(seed), geometry=geometry)


@dataclass
class CovariantOperator:
    matrix: np.ndarray
    geometry: Geometry
    Q: int
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.geometry.nsites * self.Q
        if self.matrix.shape != (n, n):
            raise InvalidArgumentError(f"matrix shape {self.matrix.shape} does not match {n} = nsites * Q")

    @property
    def shape(self):
        return self.matrix.shape

    def blocks(self) -> np.ndarray:
        """View of the matrix as (nsites, nsites, Q, Q) site blocks."""
        ns, Q = self.geometry.nsites, self.Q
        return self.matrix.reshape(ns, Q, ns, Q).transpose(0, 2, 1, 3)

    def block_norms(self, ord="fro") -> np.ndarray:
        b = self.blocks()
        if ord == "fro" or self.Q == 1:
            return np.sqrt(np.sum(np.abs(b) ** 2, axis=(2, 3)))
        return np.linalg.norm(b, ord=2, axis=(2, 3))

    def band_width(self, tol: float = 0.0, axis=None) -> int:
        """Largest |q_j| (or max_j |q_j|) over site blocks with norm above ``tol``."""
        norms = self.block_norms()
        nz = norms > tol
        if not np.any(nz):
            return 0
        disp = np.abs(self.geometry.displacements)
        if axis is None:
            return int(np.max(disp.max(axis=0)[nz]))
        return int(np.max(disp[axis][nz]))

    def like(self, matrix, **provenance) -> "CovariantOperator":
        return CovariantOperator(matrix, self.geometry, self.Q, {**self.provenance, **provenance})

    def dagger(self) -> "CovariantOperator":
        return self.like(self.matrix.conj().T)

    def __matmul__(self, other: "CovariantOperator") -> "CovariantOperator":
        return CovariantOperator(self.matrix @ other.matrix, self.geometry, self.Q)

    def __add__(self, other):
        return CovariantOperator(self.matrix + other.matrix, self.geometry, self.Q)

    def __sub__(self, other):
        return CovariantOperator(self.matrix - other.matrix, self.geometry, self.Q)


def identity_operator(geometry: Geometry, Q: int) -> CovariantOperator:
    return CovariantOperator(np.eye(geometry.nsites * Q, dtype=complex), geometry, Q, {"kind": "identity"})


def shift_operator(geometry: Geometry, Q: int, q) -> CovariantOperator:
    """Realization of the unitary u_q: (u_q psi)_x = psi_{x-q}."""
    n = geometry.nsites
    src = geometry.shifted_index(q)
    m = np.zeros((n * Q, n * Q), dtype=complex)
    rows = np.arange(n)[src >= 0]
    for a in range(Q):
        m[rows * Q + a, src[src >= 0] * Q + a] = 1.0
    return CovariantOperator(m, geometry, Q, {"kind": "shift", "q": tuple(int(v) for v in q)})


def build_hamiltonian(model: HoppingModel, geometry: Geometry, disorder: DisorderConfig | None = None) -> CovariantOperator:
    if geometry.d != model.d:
        raise InvalidArgumentError(f"model dimension {model.d} differs from geometry dimension {geometry.d}")
    if geometry.is_torus:
        for q, a in model.hoppings.items():
            if np.any(a) and any(2 * abs(v) >= L for v, L in zip(q, geometry.sizes)):
                raise InvalidArgumentError(f"hopping {q} exceeds the minimal-image bound of torus {geometry.sizes}")
    if disorder is not None:
        if disorder.geometry != geometry:
            raise InvalidArgumentError("disorder configuration was sampled on a different geometry")
        omega = disorder.omega
    else:
        omega = np.zeros(geometry.nsites)
    model.validate()

    ns, Q = geometry.nsites, model.Q
    onsite = np.zeros((ns, ns, Q, Q), dtype=complex)
    hop = np.zeros((ns, ns, Q, Q), dtype=complex)
    sites = np.arange(ns)
    for q, a in model.hoppings.items():
        if not np.any(a):
            continue
        factor = 1.0 + model.disorder.get(q, 0.0) * omega
        if not any(q):
            a0 = 0.5 * (a + a.conj().T)
            onsite[sites, sites] += factor[:, None, None] * a0
        elif _positive_half(q):
            src = geometry.shifted_index(q)
            ok = src >= 0
            # accumulate: on tiny tori two hoppings may land on the same block
            np.add.at(hop, (sites[ok], src[ok]), factor[ok, None, None] * a)
    onsite = onsite.transpose(0, 2, 1, 3).reshape(ns * Q, ns * Q)
    hop = hop.transpose(0, 2, 1, 3).reshape(ns * Q, ns * Q)
    matrix = onsite + (hop + hop.conj().T)
    seed = None if disorder is None else disorder.seed
    return CovariantOperator(matrix, geometry, Q, {"model": model.name, "seed": seed, "omega": omega})


@dataclass
class SpectralProjector:
    p: CovariantOperator
    fermi_level: float
    gap: float
    rank: int
    eigenvalues: np.ndarray = field(repr=False, default=None)

    @property
    def matrix(self) -> np.ndarray:
        return self.p.matrix

    @property
    def geometry(self) -> Geometry:
        return self.p.geometry

    @property
    def Q(self) -> int:
        return self.p.Q


def fermi_projector(h: CovariantOperator, fermi_level: float, gap_threshold: float = 1e-6) -> SpectralProjector:
    """Spectral projection of ``h`` onto eigenvalues <= fermi_level."""
    if not np.allclose(h.matrix, h.matrix.conj().T, atol=HERMITICITY_TOL, rtol=0):
        raise InvalidArgumentError("Hamiltonian is not Hermitian")
    evals, evecs = np.linalg.eigh(h.matrix)
    gap = float(np.min(np.abs(evals - fermi_level)))
    if gap < gap_threshold:
        raise GapClosedError(f"Fermi level {fermi_level} is within {gap:.3g} of the spectrum", gap=gap)
    occ = evecs[:, evals <= fermi_level]
    p = occ @ occ.conj().T
    p = 0.5 * (p + p.conj().T)
    return SpectralProjector(
        p=h.like(p, kind="fermi_projector", fermi_level=float(fermi_level)),
        fermi_level=float(fermi_level),
        gap=gap,
        rank=occ.shape[1],
        eigenvalues=evals,
    )
