"""Spectral theory of a periodic string with point masses.

Computes Floquet discriminants, auxiliary (Dirichlet) spectra, and
multipliers for psi'' = psi/4 - lambda m psi with a 1-periodic momentum m
that may combine a smooth density with delta atoms, builds the explicit
gradients of the spectral data, and verifies numerically that the pairs
(mu_i, f_i) and (mu_i, g_i) are canonically conjugate under the two
Poisson structures of the underlying water-wave hierarchy.
"""

from .coefficient import (
    Atom,
    CoefficientError,
    GridFunction,
    PeriodicCoefficient,
    grid_points,
    load_coefficient,
    make_coefficient,
    momentum_from_velocity,
    momentum_grid,
    perturb,
    velocity_from_momentum,
)
from .shooting import (
    DEFAULT_STEPS,
    BlowUpError,
    FundamentalMatrix,
    ShootingState,
    SolutionTrajectory,
    fundamental_matrix,
    propagate,
    solve_fundamental,
    wronskian,
)
from .floquet import (
    AuxiliaryPoint,
    BandEdge,
    GapCheck,
    JordanGapError,
    auxiliary_spectrum,
    discriminant,
    discriminant_sweep,
    gap_check,
    multipliers,
    periodic_spectrum,
    refine_point,
    second_floquet,
)
from .brackets import (
    BracketDomainError,
    ProductField,
    apply_j,
    apply_k,
    bracket1,
    bracket2,
    conjugacy_matrix,
    conjugacy_target,
    lemma_residual,
    log_multiplier_matrix,
)
from .variations import (
    GradientCheck,
    SpectralGradient,
    gradient_bundle,
    gradient_table,
    mu_gradient,
    norming_constant,
    positivity_residual,
    verify_gradients,
)
from .hamiltonians import (
    SmoothDomainError,
    bihamiltonian_residual,
    grad_h2,
    grad_h3,
    h2,
    h2_energy,
    h3,
    hamiltonian_fields,
)
from .corpus import CorpusMember, corpus_specs, default_corpus
from .report import VerificationReport
from .suites import (
    run_suite,
    suite_gradients,
    suite_hamiltonian,
    suite_lemma,
    suite_theorem1,
    suite_theorem2,
)

__version__ = "0.1.0"
