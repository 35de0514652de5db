"""Long-run cost of a single component under a fixed preventive-replacement age.

A new component is replaced preventively once it reaches age ``t`` (cost
``h + m*t``) or correctively when it fails first (cost ``g``). Each replacement
starts a new renewal cycle, so the time-average cost is
``E(cycle cost) / E(cycle length)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .lifetime import DiscreteWeibull

#: Relative margin a finite replacement age must beat run-to-failure by.
NO_PM_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class OneComponentEconomics:
    """Costs and lifetime law of a single maintained unit.

    Parameters
    ----------
    cm_cost : float
        Corrective replacement cost ``g`` (k$).
    pm_base_cost : float
        Age-independent part ``h`` of a preventive replacement (k$).
    value_loss_rate : float
        Extra preventive cost per month of age ``m`` (k$/month).
    lifetime : DiscreteWeibull
    """

    cm_cost: float
    pm_base_cost: float
    value_loss_rate: float
    lifetime: DiscreteWeibull

    def __post_init__(self) -> None:
        if not self.cm_cost > 0:
            raise ValueError(f"cm_cost must be positive, got {self.cm_cost}")
        if not self.pm_base_cost >= 0:
            raise ValueError(f"pm_base_cost must be >= 0, got {self.pm_base_cost}")
        if not self.value_loss_rate >= 0:
            raise ValueError(f"value_loss_rate must be >= 0, got {self.value_loss_rate}")
        if self.cm_cost < self.pm_base_cost:
            warnings.warn(
                "cm_cost below pm_base_cost: preventive replacement never pays off",
                stacklevel=2,
            )

    def scaled(self, factor: float) -> "OneComponentEconomics":
        """Same lifetime, every cost multiplied by ``factor``."""
        return replace(
            self,
            cm_cost=self.cm_cost * factor,
            pm_base_cost=self.pm_base_cost * factor,
            value_loss_rate=self.value_loss_rate * factor,
        )


def cycle_moments(econ: OneComponentEconomics, t):
    """Expected cycle cost and cycle length when PM is planned at age ``t``.

    Returns ``(E R(t), E X(t))`` with ``X = min(L, t)``; the length uses the
    exact identity ``E X = sum_{k<=t} k P(L=k) + t P(L>t)``.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.int64))
    if np.any(t_arr < 1):
        raise ValueError("planned replacement age must be >= 1")
    top = int(t_arr.max())
    life = econ.lifetime
    k = np.arange(1, top + 1)
    pmf = np.asarray(life.pmf(k))
    surv = np.asarray(life.survival(k))
    partial = np.cumsum(pmf * k)
    idx = t_arr - 1
    s_t = surv[idx]
    length = partial[idx] + t_arr * s_t
    cost = (1.0 - s_t) * econ.cm_cost + s_t * (econ.pm_base_cost + econ.value_loss_rate * t_arr)
    if np.ndim(t) == 0:
        return float(cost[0]), float(length[0])
    return cost, length


def q(econ: OneComponentEconomics, t):
    """Time-average maintenance cost ``q_t`` of replacing at age ``t`` (k$/month)."""
    cost, length = cycle_moments(econ, t)
    return cost / length


def no_pm_cost(econ: OneComponentEconomics) -> float:
    """Run-to-failure rate ``g / E L``, the ``t -> infinity`` limit of :func:`q`."""
    return econ.cm_cost / econ.lifetime.mean()


def default_search_cap(econ: OneComponentEconomics, horizon_end: int | None = None) -> int:
    cap = econ.lifetime.support_cap()
    if horizon_end is not None:
        cap = min(cap, 10 * int(horizon_end))
    return max(cap, 1)


@dataclass(frozen=True)
class CostConstant:
    """Minimal long-run cost rate and the replacement age attaining it.

    ``argmin_t`` is ``None`` when running to failure (no planned PM) is best.
    ``times``/``costs`` hold the scanned curve ``q_t``; ``no_pm`` is ``q_inf``.
    """

    value: float
    argmin_t: int | None
    times: np.ndarray = field(repr=False)
    costs: np.ndarray = field(repr=False)
    no_pm: float

    @property
    def cost_curve(self) -> list[tuple[int, float]]:
        return list(zip(self.times.tolist(), self.costs.tolist()))


def select_minimum(times: np.ndarray, costs: np.ndarray, no_pm: float) -> tuple[float, int | None]:
    """Smallest minimiser of a cost curve against the run-to-failure option.

    A finite age must undercut ``no_pm`` by a relative ``NO_PM_TIE_RTOL``;
    beyond the lifetime support ``q_t`` equals ``q_inf`` up to rounding and
    those ages are not real alternatives.
    """
    i = int(np.argmin(costs))  # argmin returns the first (smallest t) minimiser
    if costs[i] < no_pm * (1.0 - NO_PM_TIE_RTOL):
        return float(costs[i]), int(times[i])
    return float(no_pm), None


def cost_constant(
    econ: OneComponentEconomics,
    search_cap: int | None = None,
    horizon_end: int | None = None,
) -> CostConstant:
    """Minimise ``q_t`` over ``t = 1..search_cap`` and the no-PM limit."""
    if search_cap is None:
        search_cap = default_search_cap(econ, horizon_end)
    if search_cap < 1:
        raise ValueError("search_cap must be >= 1")
    times = np.arange(1, search_cap + 1)
    costs = q(econ, times)
    inf_cost = no_pm_cost(econ)
    value, argmin_t = select_minimum(times, costs, inf_cost)
    return CostConstant(value=value, argmin_t=argmin_t, times=times, costs=costs, no_pm=inf_cost)


def critical_value_loss(
    econ: OneComponentEconomics,
    grid,
    search_cap: int | None = None,
) -> float | None:
    """First ``m`` on ``grid`` at which planned PM stops paying off."""
    for m in grid:
        if cost_constant(replace(econ, value_loss_rate=float(m)), search_cap).argmin_t is None:
            return float(m)
    return None


def selected_costs(econ: OneComponentEconomics, times) -> dict:
    """``q_t`` at the given ages plus ``q_inf`` under the key ``None``."""
    out = {int(t): float(q(econ, int(t))) for t in times}
    out[None] = no_pm_cost(econ)
    return out


def best_of(costs: dict) -> int | None:
    """Key of the smallest entry in a :func:`selected_costs` mapping (ties -> first)."""
    best_key, best_val = None, math.inf
    for key, val in costs.items():
        if val < best_val:
            best_key, best_val = key, val
    return best_key
