"""Power means, the power triangle inequality, and checks on distance spaces."""

from .classification import (ClassificationReport, Inequality, NamedInequality,
                             classify, named_check, refinement_trend)
from .distance import (DissimilarityMatrix, DistanceValidation, diameter,
                       is_bounded, validate)
from .errors import (DegenerateMatrixError, MatrixError, PowerDistError,
                     UncertifiedLimitError, UnsupportedParameterError,
                     VacuousRelationError)
from .fixtures import (AnalyticSpace, curve_length_324, eval_distance,
                       known_witnesses, sample_matrix, verify_record)
from .numerics import (mean_chain, minkowski_check, pair_mean, power_mean,
                       young_check)
from .power_triangle import (PowerParams, TriplePolicy, boundary_p,
                             boundary_sigma, check_relation, lower_bound_check,
                             sigma_min, sigma_profile, tau)
from .report import parse_matrix_csv
from .sequences import (SequenceSpec, ball_openness_check, cauchy_check,
                        cauchy_from_convergence, certified_limits,
                        distance_continuity_check, limit_check, subsequence)
from .transforms import (TransformSpec, apply, necessary_conditions_check,
                         sufficient_conditions_check)

__version__ = "0.1.0"
