"""Finite-horizon planning of the next PM for one component.

Over the months ``[s, T]`` a component of age ``a`` either fails at ``s + u``
(cost ``g``, then ``c`` per remaining month) or is replaced preventively at the
planned month ``t`` (cost ``h + (t - s + a) m``, then ``c`` per remaining
month). Planning for month ``T + 1`` means no PM inside the horizon.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .renewal import CostConstant, OneComponentEconomics, cost_constant


@dataclass(frozen=True)
class Horizon:
    start: int
    end: int

    def __post_init__(self) -> None:
        if int(self.start) != self.start or int(self.end) != self.end:
            raise ValueError("horizon bounds must be integers")
        if self.start < 0:
            raise ValueError("horizon start must be >= 0")
        if not self.start < self.end:
            raise ValueError(f"empty horizon [{self.start}, {self.end}]")

    @property
    def length(self) -> int:
        return self.end - self.start


def plan_cost_curves(
    econ: OneComponentEconomics, start: int, end: int, ages, c: float
) -> np.ndarray:
    """Expected plan cost for every PM month ``t = start+1 .. end+1``.

    ``ages`` may be a scalar or 1-d array; the result has shape
    ``(len(ages), end - start + 1)`` (or a 1-d row for a scalar age). The last
    column is the no-PM option ``t = end + 1``. ``start == end`` is allowed and
    yields a single zero column.
    """
    scalar = np.ndim(ages) == 0
    ages = np.atleast_1d(np.asarray(ages, dtype=np.int64))
    n = end - start
    if n < 0:
        raise ValueError("start must not exceed end")
    life = econ.lifetime
    u = np.arange(n + 1)
    surv = np.exp(
        life.scale
        * (
            np.power(ages[:, None], life.shape, dtype=float)
            - np.power(ages[:, None] + u[None, :], life.shape, dtype=float)
        )
    )
    out = np.zeros((len(ages), n + 1))
    if n > 0:
        pmf = surv[:, :-1] - surv[:, 1:]
        k = u[1:]
        cm_cum = np.cumsum((econ.cm_cost + (n - k) * c) * pmf, axis=1)
        pm_cost = econ.pm_base_cost + (k[None, :] + ages[:, None]) * econ.value_loss_rate + (n - k) * c
        out[:, :n] = cm_cum + pm_cost * surv[:, 1:]
        out[:, n] = cm_cum[:, -1]
    return out[0] if scalar else out


def expected_plan_cost(
    econ: OneComponentEconomics, hz: Horizon, age: int, t: int, c: float
) -> float:
    """``E Q_(s,a)(t, s + L_a)`` for a single planned PM month ``t``."""
    if not hz.start + 1 <= t <= hz.end + 1:
        raise ValueError(f"PM month {t} outside [{hz.start + 1}, {hz.end + 1}]")
    if age < 0:
        raise ValueError("age must be >= 0")
    return float(plan_cost_curves(econ, hz.start, hz.end, age, c)[t - hz.start - 1])


@dataclass(frozen=True)
class SinglePlanResult:
    """Best next-PM month; ``pm_time`` is ``None`` for the no-PM option."""

    pm_time: int | None
    expected_cost: float
    times: np.ndarray = field(repr=False)
    costs: np.ndarray = field(repr=False)
    near_horizon: bool = False

    @property
    def cost_by_time(self) -> list[tuple[int, float]]:
        return list(zip(self.times.tolist(), self.costs.tolist()))


def optimal_next_pm(
    econ: OneComponentEconomics,
    hz: Horizon,
    age: int,
    c: float,
    stationary_t: int | None = None,
) -> SinglePlanResult:
    """Scan ``t = s+1 .. T+1`` and return the smallest minimiser.

    ``stationary_t`` (the long-run optimal replacement age) only feeds the
    ``near_horizon`` flag, raised when ``T - s < 2 * stationary_t``.
    """
    costs = plan_cost_curves(econ, hz.start, hz.end, age, c)
    times = np.arange(hz.start + 1, hz.end + 2)
    i = int(np.argmin(costs))
    pm_time = None if i == len(costs) - 1 else int(times[i])
    near = stationary_t is not None and hz.length < 2 * stationary_t
    return SinglePlanResult(pm_time, float(costs[i]), times, costs, near)


def optimal_cost(econ: OneComponentEconomics, start: int, end: int, age: int, c: float) -> float:
    """``f*_(start, age)``; zero on the empty horizon ``start == end``."""
    return float(plan_cost_curves(econ, start, end, age, c).min())


def virtual_cost(econ: OneComponentEconomics, hz: Horizon, t: int, age: int, c: float) -> float:
    """Virtual replacement cost ``b_(t,a) = f*_(t,a) - f*_(t,0)`` on ``[t, T]``."""
    if not 0 <= t < hz.end:
        raise ValueError(f"time {t} must lie in [0, {hz.end})")
    if age < 0:
        raise ValueError("age must be >= 0")
    if age == 0:
        return 0.0
    pair = plan_cost_curves(econ, t, hz.end, np.array([age, 0]), c).min(axis=1)
    return float(pair[0] - pair[1])


def stationary_limit(econ: OneComponentEconomics, end: int, constant: CostConstant) -> int | None:
    """Largest ``s`` with ``f*_(s',0) = (T - s') c`` for every ``0 <= s' <= s``.

    Two things must hold for a remaining horizon ``tau = T - s``: the long-run
    optimum fits (``t_(0,0) <= tau``) and skipping PM altogether is not
    cheaper, i.e. ``g P(L <= tau) >= c E min(L, tau)``. The second condition
    fails when ``tau`` is only slightly above ``t_(0,0)``.
    """
    t00 = constant.argmin_t
    if t00 is None or t00 > end:
        return None
    life = econ.lifetime
    tau = np.arange(1, end + 1)
    surv = np.asarray(life.survival(tau))
    length = np.cumsum(np.asarray(life.pmf(tau)) * tau) + tau * surv
    no_pm_excess = econ.cm_cost * (1.0 - surv) - constant.value * length
    ok = (tau >= t00) & (no_pm_excess >= -1e-12 * constant.value * length)
    if not ok[-1]:
        return None
    bad = np.flatnonzero(~ok)
    tau_min = int(tau[bad[-1]]) + 1 if len(bad) else 1
    return end - tau_min


@dataclass(frozen=True)
class VirtualCostTable:
    """Stationary virtual costs ``b_a`` and charges ``B_a = min(h + a m, b_a)``.

    ``pm_cost`` is the component-only PM cost ``h`` of the linear branch (the
    shared downtime is charged once per event, not per component).
    ``critical_age`` is the first age at which replacing is no dearer than
    carrying the component on virtually, or ``None`` if that never happens
    within the table.

    The table also answers exact non-stationary queries ``b_(t,a)`` through
    :meth:`b_time`, memoised per instance.
    """

    ages: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    critical_age: int | None
    pm_cost: float
    value_loss_rate: float
    econ: OneComponentEconomics = field(repr=False)
    end: int = 0
    c: float = 0.0
    stationary_until: int | None = None
    _memo: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def max_age(self) -> int:
        return int(self.ages[-1])

    def linear(self, age):
        return self.pm_cost + np.asarray(age, dtype=float) * self.value_loss_rate

    def b_at(self, age):
        """Stationary ``b_a``; ages past the table are computed exactly."""
        scalar = np.ndim(age) == 0
        age = np.atleast_1d(np.asarray(age, dtype=np.int64))
        out = self.b[np.minimum(age, self.max_age)].astype(float)
        for i in np.flatnonzero(age > self.max_age):
            out[i] = self.b_time(0, int(age[i]))
        return float(out[0]) if scalar else out

    def B_at(self, age):
        """Stationary ``B_a``; past the table the linear branch is used."""
        age = np.asarray(age, dtype=np.int64)
        inside = np.minimum(age, self.max_age)
        out = self.B[inside].astype(float)
        beyond = age > self.max_age
        if np.any(beyond):
            if self.critical_age is not None:
                out = np.where(beyond, self.linear(age), out)
            else:
                out = np.minimum(self.linear(age), self.b_at(age))
        return float(out) if np.ndim(out) == 0 else out

    def _fstar0(self, t: int) -> float:
        key = ("f0", t)
        if key not in self._memo:
            if self.stationary_until is not None and t <= self.stationary_until:
                self._memo[key] = (self.end - t) * self.c
            else:
                self._memo[key] = optimal_cost(self.econ, t, self.end, 0, self.c)
        return self._memo[key]

    def b_time(self, t: int, age: int) -> float:
        """Exact ``b_(t,a)``; ``b_(T,a) = 0`` because nothing is left to plan."""
        t, age = int(t), int(age)
        if age == 0 or t >= self.end:
            return 0.0
        if t == 0 and age <= self.max_age:
            return float(self.b[age])
        key = (t, age)
        if key not in self._memo:
            self._memo[key] = optimal_cost(self.econ, t, self.end, age, self.c) - self._fstar0(t)
        return self._memo[key]

    def B_time(self, t: int, age: int) -> float:
        return min(float(self.linear(age)), self.b_time(t, age))


def build_virtual_table(
    econ: OneComponentEconomics,
    hz: Horizon,
    max_age: int | None = None,
    c: float | CostConstant | None = None,
    pm_cost: float | None = None,
    allow_nonstationary: bool = False,
) -> VirtualCostTable:
    """Tabulate ``b_a = b_(0,a)`` and ``B_a`` for ``a = 0 .. max_age``.

    Parameters
    ----------
    econ : OneComponentEconomics
        Merged one-component model (shared downtime folded into ``g`` and ``h``).
    hz : Horizon
        Only ``hz.end`` matters; the table is anchored at time 0.
    max_age : int, optional
        Defaults to ``hz.end``.
    c : float or CostConstant, optional
        Continuation rate; defaults to the long-run constant of ``econ``.
    pm_cost : float, optional
        Intercept of the linear branch of ``B``; defaults to ``econ.pm_base_cost``.
    allow_nonstationary : bool
        Build the table even when the horizon is shorter than the long-run
        optimal replacement age. Exact queries through ``b_time`` stay valid;
        only the stationary reading of ``b`` is lost.

    Raises
    ------
    ValueError
        If the long-run optimal replacement age exceeds the horizon, so the
        stationary table would not represent ``b_(s,a)``.
    """
    constant = c if isinstance(c, CostConstant) else cost_constant(econ, horizon_end=hz.end)
    rate = constant.value if c is None or isinstance(c, CostConstant) else float(c)
    if not allow_nonstationary and constant.argmin_t is not None and constant.argmin_t > hz.end:
        raise ValueError(
            f"non-stationary horizon: optimal replacement age {constant.argmin_t} "
            f"exceeds horizon end {hz.end}"
        )
    if max_age is None:
        max_age = hz.end
    if max_age < 1:
        raise ValueError("max_age must be >= 1")
    if pm_cost is None:
        pm_cost = econ.pm_base_cost
    ages = np.arange(max_age + 1)
    fstar = plan_cost_curves(econ, 0, hz.end, ages, rate).min(axis=1)
    b = fstar - fstar[0]
    b[0] = 0.0
    lin = pm_cost + ages * econ.value_loss_rate
    B = np.minimum(lin, b)
    hit = np.flatnonzero(b >= lin)
    critical = int(hit[0]) if len(hit) else None
    until = stationary_limit(econ, hz.end, constant) if rate == constant.value else None
    return VirtualCostTable(
        ages=ages,
        b=b,
        B=B,
        critical_age=critical,
        pm_cost=float(pm_cost),
        value_loss_rate=econ.value_loss_rate,
        econ=econ,
        end=hz.end,
        c=rate,
        stationary_until=until,
    )
