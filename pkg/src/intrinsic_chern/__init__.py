"""Chern cocycles and Dirac-phase indices on finite lattices, with numerical cross-checks."""

from .clifford import CliffordRep, build_clifford, clifford_trace
from .cocycle import (
    CocycleResult,
    central_identity_check,
    direct_cocycle,
    local_cocycle,
    midpoint_shifts,
    random_shifts,
    weak_invariant_sigma12,
)
from .crossed import (
    FourierFamily,
    LocalityProfile,
    cesaro_sum,
    derivation,
    fourier_assemble,
    fourier_decompose,
    locality_profile,
    trace_T,
)
from .dirac import (
    DiracPhase,
    ExtendedOperator,
    IndexRecord,
    dirac_phase,
    fedosov_tindex,
    kernel_dims,
    lift,
    summability_diagnostic,
    trace_That,
)
from .errors import (
    AmbiguousKernelError,
    ConfigError,
    DegenerateShiftError,
    GapClosedError,
    InvalidArgumentError,
    NumericalInconsistencyError,
    UnsupportedGeometryError,
)
from .lattice import (
    CovariantOperator,
    Geometry,
    HoppingModel,
    SpectralProjector,
    build_hamiltonian,
    fermi_projector,
    sample_disorder,
)
from .models import BUILTIN_MODELS, atomic_insulator, chern_model, layered_chern_stack
from .oracle import momentum_oracle_chern

__version__ = "0.1.0"
