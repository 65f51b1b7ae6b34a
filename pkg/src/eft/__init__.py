"""Evolving graph Fourier transform: joint time-vertex spectral analysis of dynamic graphs."""

from .errors import (
    DomainError,
    EftError,
    NumericalError,
    ParseError,
    ShapeError,
    SizeGuardError,
    SymmetryError,
)
from .filters import (
    ChebyshevFilter,
    FilterPreset,
    TemporalFilter,
    chebyshev_apply,
    estimate_lambda_max,
    fit_chebyshev,
    joint_filter,
    preset_response,
    temporal_filter_apply,
)
from .graph_core import (
    DynamicGraph,
    LaplacianKind,
    WeightedGraph,
    build_joint_laplacian,
    build_laplacian,
    build_time_ring_laplacian,
    dirichlet_s2,
)
from .spectral import (
    ad_basis,
    align_bases,
    dynamic_gft,
    eft_forward,
    eft_inverse,
    eft_matrix,
    pseudospectrum_residual,
)
from .synth import SynthConfig, gen_dynamic_mesh, gen_evolving_graph, gen_signal

__version__ = "0.1.0"
