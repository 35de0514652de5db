"""Multi-component system: first-failure law, renewal constant and next-PM plan.

Components age independently and share a downtime cost per maintenance
event (``g0`` for corrective, ``h0`` for preventive). At every event each
working component is either replaced or charged its virtual replacement cost,
so every event can be treated as a renewal of the whole system.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .lifetime import DiscreteWeibull
from .planner import Horizon, VirtualCostTable, build_virtual_table
from .renewal import CostConstant, OneComponentEconomics, cost_constant, select_minimum

#: Multiplier applied to every value-loss rate to emulate a pure-CM policy.
PURE_CM_FACTOR = 1e6

#: Relative margin a later candidate must improve by to displace an earlier one.
PLAN_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class ComponentSpec:
    name: str
    lifetime: DiscreteWeibull
    cm_cost: float
    pm_cost: float
    value_loss_rate: float

    def __post_init__(self) -> None:
        if not self.cm_cost > 0:
            raise ValueError(f"{self.name}: cm_cost must be positive")
        if self.pm_cost < 0 or self.value_loss_rate < 0:
            raise ValueError(f"{self.name}: costs must be >= 0")


@dataclass(frozen=True)
class SystemSpec:
    """Shared downtime costs, components and planning horizon."""

    cm_downtime: float
    pm_downtime: float
    components: tuple[ComponentSpec, ...]
    horizon: Horizon

    def __post_init__(self) -> None:
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ValueError("a system needs at least one component")
        if self.cm_downtime < 0 or self.pm_downtime < 0:
            raise ValueError("downtime costs must be >= 0")
        names = [comp.name for comp in self.components]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate component names: {names}")

    @property
    def n(self) -> int:
        return len(self.components)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(comp.name for comp in self.components)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def economics(self, j: int) -> OneComponentEconomics:
        """Stand-alone model of component ``j`` with the downtime costs folded in."""
        comp = self.components[j]
        return OneComponentEconomics(
            cm_cost=self.cm_downtime + comp.cm_cost,
            pm_base_cost=self.pm_downtime + comp.pm_cost,
            value_loss_rate=comp.value_loss_rate,
            lifetime=comp.lifetime,
        )

    def with_value_loss_scaled(self, factor: float) -> "SystemSpec":
        comps = tuple(replace(c, value_loss_rate=c.value_loss_rate * factor) for c in self.components)
        return replace(self, components=comps)


@dataclass(frozen=True)
class SystemState:
    ages: tuple[int, ...]
    as_of: int = 0

    def __post_init__(self) -> None:
        ages = tuple(int(a) for a in self.ages)
        if any(a < 0 for a in ages):
            raise ValueError(f"ages must be >= 0, got {ages}")
        object.__setattr__(self, "ages", ages)

    @classmethod
    def new(cls, n: int, as_of: int = 0) -> "SystemState":
        return cls((0,) * n, as_of)


@dataclass(frozen=True)
class PlanSolution:
    """Next PM month with the per-component action, or no PM at all.

    ``replace``/``virtual`` hold component indices. ``monthly_cost`` is the
    expected cost spread over the remaining horizon, ``expected_cost / (T - s)``.
    """

    pm_time: int | None
    replace: tuple[int, ...]
    virtual: tuple[int, ...]
    expected_cost: float
    monthly_cost: float
    start: int
    end: int
    names: tuple[str, ...] = ()
    feasible: bool = True

    @property
    def replace_names(self) -> list[str]:
        return [self.names[j] for j in self.replace] if self.names else list(map(str, self.replace))

    def arrays(self) -> tuple[np.ndarray, np.ndarray, int]:
        """The binary plan ``(x, y, z)``; ``x`` has shape ``(n, T - s)``."""
        n = len(self.replace) + len(self.virtual)
        span = self.end - self.start
        x = np.zeros((n, span), dtype=int)
        y = np.zeros(span, dtype=int)
        if self.pm_time is None:
            return x, y, 1
        col = self.pm_time - self.start - 1
        y[col] = 1
        x[list(self.replace), col] = 1
        return x, y, 0


def validate_plan(x: np.ndarray, y: np.ndarray, z: int) -> list[str]:
    """List every violated plan constraint; empty when the plan is feasible.

    Checks binarity, ``y_t >= x_t^j``, ``sum_t y_t = 1 - z`` and
    ``sum_j x_t^j >= y_t``. Given binary ``x`` and ``y``, each component at a
    PM month is then in exactly one of the replace/virtual branches.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    problems = []
    if not (np.isin(x, (0, 1)).all() and np.isin(y, (0, 1)).all() and z in (0, 1)):
        problems.append("non-binary entries")
    if np.any(x > y[None, :]):
        problems.append("x exceeds y (replacement at a month without PM)")
    if int(y.sum()) != 1 - int(z):
        problems.append(f"sum(y) = {int(y.sum())} but 1 - z = {1 - int(z)}")
    if np.any(x.sum(axis=0) < y):
        problems.append("PM month with no component replaced")
    return problems


@dataclass(frozen=True)
class SystemFailureLaw:
    """Per-month decomposition of the first failure ``L = min_j L^j_{a^j}``.

    Arrays are indexed by ``u - 1`` for ``u = 1..cap`` except ``p_tail``, which
    is indexed by ``u = 0..cap`` and holds ``P(L > u)``.
    """

    cap: int
    p_exact: np.ndarray = field(repr=False)
    p_tail: np.ndarray = field(repr=False)
    cm_component_term: np.ndarray = field(repr=False)
    survivor_term: np.ndarray = field(repr=False)

    def truncated_length(self, t: int) -> float:
        """``E min(L, t) = E_t(L) + t P(L > t)``."""
        u = np.arange(1, t + 1)
        return float(np.sum(u * self.p_exact[:t]) + t * self.p_tail[t])


def _products_without(curves: list[np.ndarray]) -> list[np.ndarray]:
    n = len(curves)
    ones = np.ones_like(curves[0])
    out = []
    for j in range(n):
        prod = ones.copy()
        for k in range(n):
            if k != j:
                prod = prod * curves[k]
        out.append(prod)
    return out


def system_failure_law(
    spec: SystemSpec,
    ages: Sequence[int],
    cap: int,
    survivor_costs: Sequence[np.ndarray] | None = None,
) -> SystemFailureLaw:
    """Exact law of the first failure with the costs charged at that event.

    Parameters
    ----------
    spec : SystemSpec
    ages : sequence of int
        Component ages at the start of the window.
    cap : int
        Last residual month ``u`` tabulated.
    survivor_costs : sequence of arrays, optional
        ``survivor_costs[j][u-1]`` is what component ``j`` is charged if it is
        still working when another component fails at ``u``. Defaults to 0.

    Notes
    -----
    Component ``j`` is in the failed set at ``u`` when ``L^j = u`` and every
    other ``L^k >= u``; it survives when ``L^j > u`` while some other
    ``L^k = u`` and none fails earlier. Simultaneous failures each pay their
    own corrective cost.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    if len(ages) != spec.n:
        raise ValueError(f"expected {spec.n} ages, got {len(ages)}")
    curves = [
        comp.lifetime.residual_survival_curve(int(a), cap) for comp, a in zip(spec.components, ages)
    ]
    ge = [s[:-1] for s in curves]  # P(L^k >= u)
    gt = [s[1:] for s in curves]  # P(L^k > u)
    others_ge = _products_without(ge)
    others_gt = _products_without(gt)
    all_ge = np.prod(ge, axis=0)
    all_gt = np.prod(gt, axis=0)
    cm_term = np.zeros(cap)
    surv_term = np.zeros(cap)
    for j, comp in enumerate(spec.components):
        cm_term += comp.cm_cost * (ge[j] - gt[j]) * others_ge[j]
        if survivor_costs is not None:
            surv_term += np.asarray(survivor_costs[j], dtype=float)[:cap] * gt[j] * (others_ge[j] - others_gt[j])
    p_tail = np.concatenate(([1.0], all_gt))
    return SystemFailureLaw(
        cap=cap,
        p_exact=all_ge - all_gt,
        p_tail=p_tail,
        cm_component_term=cm_term,
        survivor_term=surv_term,
    )


def system_support_cap(spec: SystemSpec) -> int:
    return min(comp.lifetime.support_cap() for comp in spec.components)


def multi_cost_constant(
    spec: SystemSpec,
    tables: Sequence[VirtualCostTable],
    search_cap: int | None = None,
) -> CostConstant:
    """Long-run cost rate of the all-new system with PM planned every ``t`` months.

    A cycle ends at the first failure or at ``t``. A failure costs ``g0`` plus
    ``g^j`` for each failed component and ``B^j_L`` for each survivor; a PM
    costs ``h0 + sum_j B^j_t``.
    """
    cap = system_support_cap(spec) if search_cap is None else int(search_cap)
    u = np.arange(1, cap + 1)
    charges = [np.asarray(tab.B_at(u)) for tab in tables]
    law = system_failure_law(spec, (0,) * spec.n, cap, charges)
    fail_cost = np.cumsum(law.cm_component_term + law.survivor_term + spec.cm_downtime * law.p_exact)
    pm_cost = np.sum(charges, axis=0) + spec.pm_downtime
    tail = law.p_tail[1:]
    length = np.cumsum(u * law.p_exact) + u * tail
    costs = (fail_cost + pm_cost * tail) / length
    no_pm = fail_cost[-1] / length[-1]
    value, argmin_t = select_minimum(u, costs, no_pm)
    return CostConstant(value=value, argmin_t=argmin_t, times=u, costs=costs, no_pm=no_pm)


class _PlanTerms:
    """Horizon-dependent pieces shared by every candidate PM month."""

    def __init__(self, spec, state, tables, c, mode):
        if mode not in ("virtual", "naive"):
            raise ValueError(f"unknown mode {mode!r}")
        if len(state.ages) != spec.n or len(tables) != spec.n:
            raise ValueError("ages and tables must match the component count")
        s, T = state.as_of, spec.horizon.end
        if not 0 <= s < T:
            raise ValueError(f"state time {s} outside [0, {T})")
        self.spec, self.state, self.tables, self.c, self.mode = spec, state, tables, c, mode
        self.s, self.T = s, T
        span = T - s
        u = np.arange(1, span + 1)
        charges = []
        for comp, a, tab in zip(spec.components, state.ages, tables):
            lin = comp.pm_cost + (a + u) * comp.value_loss_rate
            if mode == "virtual":
                virt = np.array([tab.b_time(s + k, a + k) for k in u])
                charges.append(np.minimum(lin, virt))
            else:
                charges.append(lin)
        law = system_failure_law(spec, state.ages, span, charges)
        self.law = law
        self.fail_cum = np.cumsum(
            (spec.cm_downtime + (T - s - u) * c) * law.p_exact
            + law.cm_component_term
            + law.survivor_term
        )

    def branches(self, t: int) -> list[tuple[float, float]]:
        """``(replace cost, virtual cost)`` per component at PM month ``t``."""
        k = t - self.s
        out = []
        for comp, a, tab in zip(self.spec.components, self.state.ages, self.tables):
            actual = comp.pm_cost + (a + k) * comp.value_loss_rate
            virtual = tab.b_time(t, a + k) if self.mode == "virtual" else float("inf")
            out.append((actual, virtual))
        return out

    def value(self, t: int | None, replace_set) -> float:
        if t is None:
            return float(self.fail_cum[-1])
        k = t - self.s
        pm = self.spec.pm_downtime + (self.T - t) * self.c
        for j, (actual, virtual) in enumerate(self.branches(t)):
            pm += actual if j in replace_set else virtual
        return float(self.fail_cum[k - 1] + pm * self.law.p_tail[k])


def expected_multi_plan_cost(
    spec: SystemSpec,
    state: SystemState,
    tables: Sequence[VirtualCostTable],
    c: float,
    t: int | None,
    replace: Iterable[int] = (),
    mode: str = "virtual",
) -> float:
    """Expected total cost over ``[s, T]`` of one explicit plan.

    ``t=None`` is the no-PM plan. Otherwise ``replace`` lists the components
    renewed at ``t``; the rest are charged ``b^j_(t, a^j + t - s)``. With
    ``mode="naive"`` every component is renewed at every event and
    ``replace`` is ignored.

    Raises
    ------
    ValueError
        On a PM month outside ``[s+1, T]`` or an empty replacement set.
    """
    terms = _PlanTerms(spec, state, tables, c, mode)
    if t is None:
        return terms.value(None, ())
    if not terms.s + 1 <= t <= terms.T:
        raise ValueError(f"constraint violation: PM month {t} outside [{terms.s + 1}, {terms.T}]")
    chosen = set(range(spec.n)) if mode == "naive" else set(int(j) for j in replace)
    if not chosen:
        raise ValueError("constraint violation: a PM month must replace at least one component")
    if not chosen <= set(range(spec.n)):
        raise ValueError(f"constraint violation: unknown component index in {sorted(chosen)}")
    return terms.value(t, chosen)


def _improves(candidate: float, incumbent: float) -> bool:
    return candidate < incumbent - PLAN_TIE_RTOL * abs(incumbent)


def solve(
    spec: SystemSpec,
    state: SystemState,
    tables: Sequence[VirtualCostTable],
    c: float,
    mode: str = "virtual",
) -> PlanSolution:
    """Exact optimum over all feasible plans by scanning the PM month.

    For a fixed month each component independently takes its cheaper branch
    (replace on ties). If every component would stay virtual, the one with
    the smallest regret is replaced instead. The no-PM plan is the first
    incumbent and a PM month displaces the incumbent only if it is cheaper by a
    relative ``PLAN_TIE_RTOL``, so near-ties go to no PM and then to the
    earliest month.
    """
    terms = _PlanTerms(spec, state, tables, c, mode)
    everyone = tuple(range(spec.n))
    best_val, best_t, best_rep = terms.value(None, ()), None, ()
    for t in range(terms.s + 1, terms.T + 1):
        if mode == "naive":
            rep = everyone
        else:
            br = terms.branches(t)
            rep = tuple(j for j, (actual, virtual) in enumerate(br) if actual <= virtual)
            if not rep:
                regret = [actual - virtual for actual, virtual in br]
                rep = (int(np.argmin(regret)),)
        val = terms.value(t, set(rep))
        if _improves(val, best_val):
            best_val, best_t, best_rep = val, t, rep
    span = terms.T - terms.s
    virtual = tuple(j for j in everyone if j not in best_rep) if best_t is not None else ()
    return PlanSolution(
        pm_time=best_t,
        replace=tuple(best_rep),
        virtual=virtual,
        expected_cost=best_val,
        monthly_cost=best_val / span,
        start=terms.s,
        end=terms.T,
        names=spec.names,
    )


@dataclass
class SystemModel:
    """Everything needed to plan for one system: per-component constants,
    virtual-cost tables and the system renewal constant."""

    spec: SystemSpec
    component_constants: list[CostConstant]
    tables: list[VirtualCostTable]
    constant: CostConstant

    @classmethod
    def build(
        cls, spec: SystemSpec, max_age: int | None = None, allow_nonstationary: bool = False
    ) -> "SystemModel":
        T = spec.horizon.end
        if max_age is None:
            max_age = 2 * T
        hz = Horizon(0, T)
        constants, tables = [], []
        for j, comp in enumerate(spec.components):
            econ = spec.economics(j)
            const = cost_constant(econ, horizon_end=T)
            constants.append(const)
            tables.append(
                build_virtual_table(
                    econ,
                    hz,
                    max_age=max_age,
                    c=const,
                    pm_cost=comp.pm_cost,
                    allow_nonstationary=allow_nonstationary,
                )
            )
        return cls(spec, constants, tables, multi_cost_constant(spec, tables))

    @property
    def c(self) -> float:
        return self.constant.value

    def solve(self, state: SystemState, mode: str = "virtual") -> PlanSolution:
        return solve(self.spec, state, self.tables, self.c, mode)

    def plan_cost(self, state: SystemState, t: int | None, replace: Iterable[int] = ()) -> float:
        return expected_multi_plan_cost(self.spec, state, self.tables, self.c, t, replace)


def plan(spec: SystemSpec, state: SystemState) -> PlanSolution:
    """Build the model for ``spec`` and solve from ``state``."""
    return SystemModel.build(spec).solve(state)


def pure_cm_monthly_cost(spec: SystemSpec, state: SystemState, factor: float = PURE_CM_FACTOR) -> float:
    """Monthly cost when PM never pays off (all value-loss rates scaled by ``factor``)."""
    return plan(spec.with_value_loss_scaled(factor), state).monthly_cost
