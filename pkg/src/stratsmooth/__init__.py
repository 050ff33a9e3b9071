"""C^1 bumps, partitions of unity and Lipschitz-controlled smoothing on
stratified polyhedral sets, with sampled verification certificates."""

__version__ = "0.1.0"

from .bump import BumpFamily, b_threshold, certify_grid, phi, psi, stratum_bump
from .config import DEFAULT, Tolerances
from .errors import (ConstructionError, InputError, LipschitzViolation, PreconditionError,
                     ResourceError, SchemaError, StratError)
from .inner import INFINITE, build_net, check_tube_inner, check_tubes_inner, inner_distance
from .maps import CallableMap, ExpressionMap, PLMap, load_map, pl_from_function
from .partition import build_partition, eval_all, verify_partition
from .smoothing import (lipschitz_estimate, mcshane_extend, separation, smooth,
                        verify_smoothing)
from .stratified import closest_points, load_complex, load_complex_file, locate
from .subspace import angle, check_angle_cap, span
from .tubes import choose_profiles

__all__ = [
    "BumpFamily", "CallableMap", "ConstructionError", "DEFAULT", "ExpressionMap", "INFINITE",
    "InputError", "LipschitzViolation", "PLMap", "PreconditionError", "ResourceError",
    "SchemaError", "StratError", "Tolerances", "angle", "b_threshold", "build_net",
    "build_partition", "certify_grid", "check_angle_cap", "check_tube_inner",
    "check_tubes_inner", "choose_profiles", "closest_points", "eval_all", "inner_distance",
    "lipschitz_estimate", "load_complex", "load_complex_file", "load_map", "locate",
    "mcshane_extend", "phi", "pl_from_function", "psi", "separation", "smooth", "span",
    "stratum_bump", "verify_partition", "verify_smoothing",
]
