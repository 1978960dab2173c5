"""Exact pseudometric cones on finite spaces: extension, unique-peak
perturbations, and recovery of point bijections from sup-norm isometries."""

from .core import (
    FiniteSpace,
    Pseudometric,
    PseudometricError,
    UPair,
    ball,
    cone_add,
    cone_scale,
    in_pc,
    in_pp,
    norm,
    peak_set,
    sup_distance,
    validate_pseudometric,
)
from .extend import PartialPseudometric, extend_prescribed_blocks, extend_pseudometric, lipschitz_constant
from .peaks import (
    densify_to_pp,
    in_peak_cone,
    layered_rho,
    peak_cone_sum,
    peak_translate,
    peaking_metric_at,
)
from .recover import (
    MetricMapOracle,
    PointMap,
    RecoveryError,
    check_isometry,
    check_zero_preserved,
    full_recovery,
    induced_oracle,
    recover_pair_map,
    recover_point_map,
    verify_canonical_formula,
)

__version__ = "0.1.0"
