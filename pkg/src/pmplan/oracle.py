"""Independent checks: exhaustive enumeration on tiny systems and Monte Carlo.

The enumeration routines walk the full joint grid of residual lifetimes cell
by cell and share no arithmetic with :mod:`pmplan.system`; agreement between
the two is the main regression guard for the closed forms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .planner import VirtualCostTable
from .system import PlanSolution, SystemSpec, SystemState, validate_plan

MAX_COMPONENTS = 3
MAX_CAP = 20
MAX_SOLVE_SPAN = 12
#: Same tie margin as the closed-form solver so both pick the same plan.
TIE_RTOL = 1e-12


class InstanceTooLarge(ValueError):
    """The instance exceeds the enumeration guards."""


def _survival(comp, age: int, u: int) -> float:
    life = comp.lifetime
    return math.exp(life.scale * (age**life.shape - (age + u) ** life.shape))


def _marginal(comp, age: int, cap: int) -> list[tuple[int, float]]:
    """Residual-life atoms ``(u, prob)`` for ``u = 1..cap`` plus a tail atom at ``cap + 1``."""
    atoms = [(u, _survival(comp, age, u - 1) - _survival(comp, age, u)) for u in range(1, cap + 1)]
    atoms.append((cap + 1, _survival(comp, age, cap)))
    return atoms


def _survivor_charge(comp, table: VirtualCostTable, t: int, age: int) -> float:
    linear = comp.pm_cost + age * comp.value_loss_rate
    return min(linear, table.b_time(t, age))


def brute_force_expectation(
    spec: SystemSpec,
    state: SystemState,
    tables: Sequence[VirtualCostTable],
    c: float,
    plan: tuple[np.ndarray, np.ndarray, int],
    cap: int | None = None,
) -> float:
    """Expected plan cost by summing over every joint residual-lifetime cell.

    Parameters
    ----------
    plan : (x, y, z)
        Binary plan arrays; ``x`` has shape ``(n, T - s)``.
    cap : int, optional
        Largest enumerated lifetime; defaults to ``T - s``. Lifetimes beyond
        ``cap`` collapse into one atom carrying the exact tail probability.

    Raises
    ------
    InstanceTooLarge
        For more than ``MAX_COMPONENTS`` components or ``cap > MAX_CAP``.
    ValueError
        If the plan violates a constraint.
    """
    s, T = state.as_of, spec.horizon.end
    span = T - s
    cap = span if cap is None else int(cap)
    if spec.n > MAX_COMPONENTS or cap > MAX_CAP:
        raise InstanceTooLarge(f"n={spec.n}, cap={cap} exceeds guards ({MAX_COMPONENTS}, {MAX_CAP})")
    if cap < span:
        raise ValueError(f"cap {cap} must cover the remaining horizon {span}")
    x, y, z = plan
    x, y = np.asarray(x), np.asarray(y)
    problems = validate_plan(x, y, z)
    if problems:
        raise ValueError("constraint violation: " + "; ".join(problems))

    if z:
        t, replaced = T, set()
    else:
        col = int(np.flatnonzero(y)[0])
        t = s + col + 1
        replaced = set(np.flatnonzero(x[:, col]).tolist())
    k = t - s
    comps, ages = spec.components, state.ages

    pm_event = spec.pm_downtime + (T - t) * c
    for j, (comp, a) in enumerate(zip(comps, ages)):
        if j in replaced:
            pm_event += comp.pm_cost + (a + k) * comp.value_loss_rate
        else:
            pm_event += tables[j].b_time(t, a + k)

    total = 0.0
    marginals = [_marginal(comp, a, cap) for comp, a in zip(comps, ages)]
    for cell in itertools.product(*marginals):
        lives = [u for u, _ in cell]
        prob = math.prod(p for _, p in cell)
        first = min(lives)
        if first <= k:
            cost = spec.cm_downtime + (T - s - first) * c
            for j, (comp, a) in enumerate(zip(comps, ages)):
                if lives[j] == first:
                    cost += comp.cm_cost
                else:
                    cost += _survivor_charge(comp, tables[j], s + first, a + first)
        elif z:
            cost = 0.0
        else:
            cost = pm_event
        total += prob * cost
    return total


def brute_force_solve(
    spec: SystemSpec,
    state: SystemState,
    tables: Sequence[VirtualCostTable],
    c: float,
    cap: int | None = None,
) -> PlanSolution:
    """Exhaustive search over every feasible ``(x, y, z)`` plan.

    The no-PM plan is visited first, then PM months in increasing order; a
    later candidate wins only by a relative margin ``TIE_RTOL``.
    """
    s, T = state.as_of, spec.horizon.end
    span = T - s
    if spec.n > MAX_COMPONENTS or span > MAX_SOLVE_SPAN:
        raise InstanceTooLarge(f"n={spec.n}, T-s={span} exceeds guards ({MAX_COMPONENTS}, {MAX_SOLVE_SPAN})")
    n = spec.n
    candidates = [(None, (), (np.zeros((n, span), dtype=int), np.zeros(span, dtype=int), 1))]
    for col in range(span):
        for size in range(1, n + 1):
            for subset in itertools.combinations(range(n), size):
                x = np.zeros((n, span), dtype=int)
                y = np.zeros(span, dtype=int)
                y[col] = 1
                x[list(subset), col] = 1
                candidates.append((s + col + 1, subset, (x, y, 0)))

    best = None
    for t, subset, plan in candidates:
        val = brute_force_expectation(spec, state, tables, c, plan, cap)
        if best is None or val < best[0] - TIE_RTOL * abs(best[0]):
            best = (val, t, subset)
    val, t, subset = best
    virtual = tuple(j for j in range(n) if j not in subset) if t is not None else ()
    return PlanSolution(
        pm_time=t,
        replace=tuple(subset),
        virtual=virtual,
        expected_cost=val,
        monthly_cost=val / span,
        start=s,
        end=T,
        names=spec.names,
    )


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo settings; ``policy_t=None`` means run to failure."""

    seed: int
    n_renewal_cycles: int
    policy_t: int | None = None
    record_trace: bool = False

    def __post_init__(self) -> None:
        if self.n_renewal_cycles < 1:
            raise ValueError("n_renewal_cycles must be >= 1")
        if self.policy_t is not None and self.policy_t < 1:
            raise ValueError("policy_t must be >= 1")


@dataclass(frozen=True)
class SimReport:
    avg_cost_per_month: float
    std_error: float
    cycles: int
    total_months: int
    cycle_costs: np.ndarray | None = field(default=None, repr=False)
    cycle_lengths: np.ndarray | None = field(default=None, repr=False)


def simulate_policy(
    spec: SystemSpec,
    cfg: SimConfig,
    tables: Sequence[VirtualCostTable],
) -> SimReport:
    """Simulate renewal cycles of the all-new system and average their cost.

    A cycle ends at the first failure or at ``cfg.policy_t``. A failure costs
    ``g0``, ``g^j`` for every failed component and ``B^j`` at the failure age
    for every survivor; a planned PM costs ``h0 + sum_j B^j_t``.

    Component ``j`` draws its lifetimes from child stream ``j`` of
    ``numpy.random.SeedSequence(cfg.seed)``, in cycle order, so the result
    depends only on the seed and the cycle count. The standard error is the
    delta-method error of the ratio ``sum(R) / sum(X)``.
    """
    n_cycles = cfg.n_renewal_cycles
    streams = np.random.SeedSequence(cfg.seed).spawn(spec.n)
    lives = np.stack(
        [
            comp.lifetime.sample(np.random.default_rng(seq), n_cycles)
            for comp, seq in zip(spec.components, streams)
        ]
    )
    first = lives.min(axis=0)
    t = cfg.policy_t
    failed_first = np.ones(n_cycles, dtype=bool) if t is None else first <= t
    length = np.where(failed_first, first, t if t is not None else 0)

    cost = np.zeros(n_cycles)
    for j, (comp, tab) in enumerate(zip(spec.components, tables)):
        is_failed = lives[j] == first
        cm_branch = np.where(is_failed, comp.cm_cost, tab.B_at(first))
        pm_branch = tab.B_at(t) if t is not None else 0.0
        cost += np.where(failed_first, cm_branch, pm_branch)
    cost += np.where(failed_first, spec.cm_downtime, spec.pm_downtime)

    total_cost, total_len = float(cost.sum()), float(length.sum())
    ratio = total_cost / total_len
    if n_cycles > 1:
        resid = cost - ratio * length
        se = math.sqrt(float(resid @ resid) / (n_cycles * (n_cycles - 1))) / float(length.mean())
    else:
        se = 0.0
    return SimReport(
        avg_cost_per_month=ratio,
        std_error=se,
        cycles=n_cycles,
        total_months=int(length.sum()),
        cycle_costs=cost if cfg.record_trace else None,
        cycle_lengths=length if cfg.record_trace else None,
    )
