"""The principal's side: welfare objectives and optimal rule deployment.

Welfare gain of a rule is the total true-quality improvement it induces
across both subgroups. Because each subgroup's movement is linear in the
deployed rule, the gain is a linear functional of the rule, and the
welfare-maximizing unit rule is that functional's direction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import DegenerateObjectiveError, DimensionMismatchError
from .agents import Subgroup, movement
from .linalg import as_vector, maximize_linear_under_quadratic

# Below this norm a pull direction is treated as zero and rules built from
# it are refused rather than returned as numerical noise.
DEGENERATE_NORM_TOL = 1e-12


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class PopulationModel:
    """Two subgroups plus the true quality direction the principal cares about.

    Caches each subgroup's pull direction t_g = P_g A_g^{-1} w_star (the
    gradient of that subgroup's improvement in the deployed rule) and their
    sum, which is the gradient of total welfare.
    """

    group1: Subgroup
    group2: Subgroup
    w_star: np.ndarray

    def __post_init__(self):
        w = as_vector(self.w_star, "w_star")
        if self.group1.dim != self.group2.dim:
            raise DimensionMismatchError(
                f"subgroup dims differ: {self.group1.dim} vs {self.group2.dim}"
            )
        if w.shape[0] != self.group1.dim:
            raise DimensionMismatchError(
                f"w_star has dim {w.shape[0]}, subgroups have dim {self.group1.dim}"
            )
        object.__setattr__(self, "w_star", _frozen(w))
        pulls = tuple(_frozen(g.projection.apply(g.cost.solve(w))) for g in (self.group1, self.group2))
        object.__setattr__(self, "_pulls", pulls)
        object.__setattr__(self, "_gain_direction", _frozen(pulls[0] + pulls[1]))

    @property
    def dim(self) -> int:
        return self.group1.dim

    @property
    def groups(self) -> Tuple[Subgroup, Subgroup]:
        return (self.group1, self.group2)

    def group(self, gid: int) -> Subgroup:
        if gid not in (1, 2):
            raise ValueError(f"group id must be 1 or 2, got {gid}")
        return self.group1 if gid == 1 else self.group2

    def pull_direction(self, gid: int) -> np.ndarray:
        """t_g = P_g A_g^{-1} w_star; <w, t_g> is subgroup g's gain under w."""
        if gid not in (1, 2):
            raise ValueError(f"group id must be 1 or 2, got {gid}")
        return self._pulls[gid - 1]

    @property
    def gain_direction(self) -> np.ndarray:
        """t_1 + t_2; <w, .> gives total welfare gain of deploying w."""
        return self._gain_direction

    @property
    def degenerate(self) -> bool:
        """True when no unit rule produces any welfare gain."""
        return bool(np.linalg.norm(self._gain_direction) <= DEGENERATE_NORM_TOL)


def welfare_gain(model: PopulationModel, w) -> float:
    """Total true-quality improvement both subgroups gain under rule w."""
    wv = as_vector(w, "w")
    if wv.shape[0] != model.dim:
        raise DimensionMismatchError(
            f"rule has dim {wv.shape[0]}, model has dim {model.dim}"
        )
    total = movement(model.group1, wv) + movement(model.group2, wv)
    return float(total @ model.w_star)


def welfare_maximizing_rule(model: PopulationModel, weights: Optional[Tuple[float, float]] = None) -> np.ndarray:
    """Unit rule maximizing total welfare gain.

    With `weights` = (a1, a2) the objective becomes a1 * gain_1 + a2 * gain_2,
    a generalization for principals that value the groups unequally; the
    default (1, 1) is plain total welfare. Raises DegenerateObjectiveError
    when the weighted objective is identically zero over unit rules.
    """
    if weights is None:
        direction = model.gain_direction
    else:
        a1, a2 = float(weights[0]), float(weights[1])
        if a1 < 0 or a2 < 0:
            raise ValueError(f"group weights must be non-negative, got {weights}")
        direction = a1 * model.pull_direction(1) + a2 * model.pull_direction(2)
    if np.linalg.norm(direction) <= DEGENERATE_NORM_TOL:
        raise DegenerateObjectiveError(
            "welfare gain is zero for every rule; no maximizer exists"
        )
    return maximize_linear_under_quadratic(direction, np.eye(model.dim), 1.0)


def group_optimal_rule(model: PopulationModel, gid: int) -> np.ndarray:
    """Unit rule maximizing subgroup gid's own improvement."""
    t = model.pull_direction(gid)
    if np.linalg.norm(t) <= DEGENERATE_NORM_TOL:
        raise DegenerateObjectiveError(
            f"subgroup {gid} cannot gain under any rule; no maximizer exists"
        )
    return maximize_linear_under_quadratic(t, np.eye(model.dim), 1.0)
