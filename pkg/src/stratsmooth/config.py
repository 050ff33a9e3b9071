"""Numerical tolerances shared by every module."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    orthonormal: float = 1e-12
    rank_drop: float = 1e-10
    projection: float = 1e-10
    angle_hypothesis: float = 1e-8
    angle_cap_slack: float = 1e-9
    on_complex: float = 1e-9
    open_simplex: float = 1e-12
    degenerate_height: float = 1e-10
    tangent_match: float = 1e-9
    on_stratum: float = 1e-12
    partition_sum: float = 1e-9
    gradient_floor: float = 1e-12


DEFAULT = Tolerances()
