"""Improvement metrics for deployed scoring rules.

Total improvement of a subgroup is the true-quality gain of its movement.
Per-unit improvement normalizes by the length of the rule the subgroup
actually perceives, which makes groups with very different visibility
comparable; it is undefined when the perceived rule is zero.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np

from .errors import DimensionMismatchError, ZeroProjectedRuleError
from .agents import movement
from .linalg import as_vector
from .principal import PopulationModel, welfare_gain

# Perceived-rule norms at or below this are treated as zero, making the
# per-unit ratio undefined rather than an overflow.
ZERO_NORM_TOL = 1e-12


def _check_rule(model: PopulationModel, w) -> np.ndarray:
    wv = as_vector(w, "w")
    if wv.shape[0] != model.dim:
        raise DimensionMismatchError(
            f"rule has dim {wv.shape[0]}, model has dim {model.dim}"
        )
    return wv


def total_improvement(model: PopulationModel, gid: int, w) -> float:
    """True-quality gain of subgroup gid's movement under rule w."""
    wv = _check_rule(model, w)
    return float(movement(model.group(gid), wv) @ model.w_star)


def per_unit_improvement(model: PopulationModel, gid: int, w) -> float:
    """Total improvement per unit of perceived rule: I_g(w) / ||P_g w||.

    Raises ZeroProjectedRuleError when the subgroup perceives a zero rule,
    in which case the ratio has no value.
    """
    wv = _check_rule(model, w)
    group = model.group(gid)
    perceived = group.projection.apply(wv)
    norm = float(np.linalg.norm(perceived))
    if norm <= ZERO_NORM_TOL:
        raise ZeroProjectedRuleError(
            f"subgroup {gid} perceives a zero rule; per-unit improvement undefined"
        )
    return total_improvement(model, gid, wv) / norm


def optimal_per_unit_improvement(model: PopulationModel, gid: int) -> float:
    """Largest per-unit improvement subgroup gid can get from any rule.

    Equals ||t_g|| for pull direction t_g = P_g A_g^{-1} w_star: writing the
    perceived rule as v = P_g w, the ratio <v, A_g^{-1} w_star> / ||v|| over
    nonzero v in the perceived span is maximized at v parallel to t_g.
    Raises ZeroProjectedRuleError when the subgroup perceives nothing at
    all (rank-zero projection), since every ratio is then undefined.
    """
    group = model.group(gid)
    if group.projection.rank == 0:
        raise ZeroProjectedRuleError(
            f"subgroup {gid} has a rank-zero projection; per-unit improvement undefined"
        )
    return float(np.linalg.norm(model.pull_direction(gid)))


def improvement_difference(model: PopulationModel, w) -> float:
    """Gap in total improvement between subgroup 1 and subgroup 2 under w."""
    wv = _check_rule(model, w)
    return total_improvement(model, 1, wv) - total_improvement(model, 2, wv)


@dataclass(frozen=True)
class GroupImprovement:
    """One subgroup's metrics under a deployed rule.

    per_unit and optimal_per_unit are None when undefined (zero perceived
    rule, or rank-zero projection respectively).
    """

    total: float
    per_unit: Optional[float]
    optimal_per_unit: Optional[float]
    perceived_norm: float


@dataclass(frozen=True)
class ImprovementReport:
    """All improvement metrics of one rule on one two-subgroup population."""

    group1: GroupImprovement
    group2: GroupImprovement
    welfare: float
    difference: float

    def to_dict(self) -> dict:
        return asdict(self)


def _group_improvement(model: PopulationModel, gid: int, w: np.ndarray) -> GroupImprovement:
    group = model.group(gid)
    perceived = group.projection.apply(w)
    norm = float(np.linalg.norm(perceived))
    total = total_improvement(model, gid, w)
    per_unit = total / norm if norm > ZERO_NORM_TOL else None
    if group.projection.rank == 0:
        optimal = None
    else:
        optimal = float(np.linalg.norm(model.pull_direction(gid)))
    return GroupImprovement(
        total=total, per_unit=per_unit, optimal_per_unit=optimal, perceived_norm=norm
    )


def improvement_report(model: PopulationModel, w) -> ImprovementReport:
    """Compute every metric at once, with undefined ratios reported as None."""
    wv = _check_rule(model, w)
    g1 = _group_improvement(model, 1, wv)
    g2 = _group_improvement(model, 2, wv)
    return ImprovementReport(
        group1=g1,
        group2=g2,
        welfare=welfare_gain(model, wv),
        difference=g1.total - g2.total,
    )
