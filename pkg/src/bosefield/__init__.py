"""Free bose fields on finite oscillator networks and strict localization."""
from .classical import (
    LinearObservable,
    PhaseVector,
    flow,
    g_metric,
    hamiltonian,
    hamiltonian_vector_field,
    inner_plus,
    poisson_bracket,
    symplectic_form,
    z_map,
)
from .errors import *  # noqa: F401,F403
from .fock import (
    FockBasis,
    FockOperator,
    FockVector,
    annihilate,
    coherent,
    create,
    d_gamma,
    field_P,
    field_Q,
    gamma,
    heisenberg_field,
    vacuum,
    vacuum_covariance,
    weyl,
)
from .infrared import classify_scale_membership, infrared_partial_integral
from .locality import (
    Region,
    WeylSample,
    knight_equivalence_check,
    knight_search,
    newton_wigner_demo,
    one_quantum_deviation_minimum,
    polynomial_degree_probe,
    strongly_nonlocal,
)
from .models import ModelSpec, build_omega_squared, dispersion
from .spectral import SpectralModel, decompose

__version__ = "0.1.0"
