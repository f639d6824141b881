"""Zero statistics of Gaussian entire functions.

``f(z) = sum_k zeta_k z^k / sqrt(k!)`` with i.i.d. standard complex Gaussian
``zeta_k``: sampling, certified truncation, zero counting, exact mean
formulas, bound checks and rare-event estimation.
"""

__version__ = "0.1.0"

from .gaussian_core import (SeedLineage, VarianceProfile, ProfileKind, profile_value,
                            sample_coefficients)
from .series import (SeriesSample, OutsideCertifiedRadius, truncation_order, evaluate,
                     evaluate_star, translation_matrix, translate_sample)
from .zeros import (Arc, ZeroCountResult, ZeroOnContour, arc_argument_increment, arc_delta,
                    count_zeros_winding, count_zeros_roots)
from .analytic import (edelman_kostlan_mean, BoundId, BoundSpec, bound_value, validate_bound,
                       check_elementary_inequalities)
from .almost_independence import (coefficient_covariance, CovarianceMatrix, decorrelate,
                                  almost_independence_demo)
from .combinatorics import SeparationInstance, select_separated, verify_selection
from .rare_events import (rn_weight, log_rn_weight, is_estimate_deficit, mc_estimate_tail,
                          bernstein_diagnostic, TailSign)
from .lattice import LatticeConfig, sample_perturbed_lattice, lattice_count

__all__ = [
    "SeedLineage", "VarianceProfile", "ProfileKind", "profile_value", "sample_coefficients",
    "SeriesSample", "OutsideCertifiedRadius", "truncation_order", "evaluate",
    "evaluate_star", "translation_matrix", "translate_sample",
    "Arc", "ZeroCountResult", "ZeroOnContour", "arc_argument_increment", "arc_delta",
    "count_zeros_winding", "count_zeros_roots",
    "edelman_kostlan_mean", "BoundId", "BoundSpec", "bound_value", "validate_bound",
    "check_elementary_inequalities",
    "coefficient_covariance", "CovarianceMatrix", "decorrelate", "almost_independence_demo",
    "SeparationInstance", "select_separated", "verify_selection",
    "rn_weight", "log_rn_weight", "is_estimate_deficit", "mc_estimate_tail",
    "bernstein_diagnostic", "TailSign",
    "LatticeConfig", "sample_perturbed_lattice", "lattice_count",
]
