"""Fixed numerical constants.

Everything that decides a verdict lives here so that runs are reproducible.
"""
import os

SYMMETRY_RTOL = 1e-12
# smallest eigenvalue of the coupling matrix must exceed this fraction of the largest
POSITIVITY_RTOL = 1e-10

# null-space / rank decisions, relative to the largest frequency
RANK_RTOL = 1e-9
WITNESS_TOL = 1e-8

SELF_ADJOINT_TOL = 1e-10
UNITARY_TOL = 1e-10

# infrared classification
IR_CUTOFF_EXPONENTS = tuple(range(3, 13))  # eps = 2**-k
IR_TAIL_POINTS = 5
IR_SLOPE_THRESHOLD = 0.05
IR_RESIDUAL_THRESHOLD = 0.10
IR_GROWTH_RATIO = 0.99
IR_RTOL = 1e-9

# Weyl sampling for the localization tests
WEYL_SAMPLE_AMPLITUDES = (0.25, 0.5, 1.0)
WEYL_SAMPLE_RANDOM = 20
DEFAULT_SEED = 0

KNIGHT_STARTS = 8
POLY_COEFF_FLOOR = 1e-6

DEFAULT_MAX_DIM = 200_000


def max_fock_dim() -> int:
    return int(os.environ.get("BOSEFIELD_MAX_DIM", DEFAULT_MAX_DIM))
