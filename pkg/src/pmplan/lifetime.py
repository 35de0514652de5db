"""Discrete Weibull lifetimes and age-conditioned residual lives."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Survival probability below which a lifetime is treated as exhausted.
SUPPORT_TOL = 1e-12


def _as_int_array(x, name: str, minimum: int) -> np.ndarray:
    arr = np.asarray(x)
    if arr.dtype.kind not in "iu":
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise ValueError(f"{name} must be integer valued")
        arr = arr.astype(np.int64)
    if np.any(arr < minimum):
        raise ValueError(f"{name} must be >= {minimum}")
    return arr


def _unwrap(values: np.ndarray):
    return float(values) if np.ndim(values) == 0 else values


@dataclass(frozen=True)
class DiscreteWeibull:
    """Lifetime ``L`` on the months 1, 2, ... with ``P(L > t) = exp(-scale * t**shape)``.

    Parameters
    ----------
    scale : float
        Positive scale parameter (units of month**-shape).
    shape : float
        Shape parameter, at least 1 (non-decreasing failure rate).

    All queries accept scalars or integer arrays and broadcast like numpy.
    """

    scale: float
    shape: float

    def __post_init__(self) -> None:
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError(f"scale must be positive and finite, got {self.scale}")
        if not (self.shape >= 1 and math.isfinite(self.shape)):
            raise ValueError(f"shape must be >= 1, got {self.shape}")

    def cumulative_hazard(self, t):
        """``scale * t**shape``; the negative log-survival."""
        t = _as_int_array(t, "t", 0)
        return _unwrap(self.scale * np.power(t, self.shape, dtype=float))

    def survival(self, t):
        t = _as_int_array(t, "t", 0)
        return _unwrap(np.exp(-self.scale * np.power(t, self.shape, dtype=float)))

    def pmf(self, t):
        """``P(L = t)`` for ``t >= 1``."""
        t = _as_int_array(t, "t", 1)
        s_prev = np.exp(-self.scale * np.power(t - 1, self.shape, dtype=float))
        s_now = np.exp(-self.scale * np.power(t, self.shape, dtype=float))
        return _unwrap(s_prev - s_now)

    def residual_survival(self, age, t):
        """``P(L - age > t | L > age)``.

        Evaluated as ``exp(scale * (age**shape - (age + t)**shape))`` so that
        very old components do not lose the ratio to underflow. For
        ``age = 0`` this is bit-identical to :meth:`survival`.
        """
        age = _as_int_array(age, "age", 0)
        t = _as_int_array(t, "t", 0)
        a_pow = np.power(age, self.shape, dtype=float)
        at_pow = np.power(age + t, self.shape, dtype=float)
        out = np.exp(self.scale * (a_pow - at_pow))
        return _unwrap(out)

    def residual_pmf(self, age, t):
        """``P(L - age = t | L > age)`` for ``t >= 1``."""
        t = _as_int_array(t, "t", 1)
        return self.residual_survival(age, t - 1) - self.residual_survival(age, t)

    def residual_survival_curve(self, age: int, horizon: int) -> np.ndarray:
        """Residual survival at ``t = 0, 1, ..., horizon`` as one array."""
        return np.asarray(self.residual_survival(int(age), np.arange(horizon + 1)))

    def support_cap(self, tol: float = SUPPORT_TOL) -> int:
        """Smallest month ``t`` with ``survival(t) < tol``."""
        target = -math.log(tol)
        t = max(1, math.ceil((target / self.scale) ** (1.0 / self.shape)))
        # guard the float root against off-by-one in either direction
        while self.scale * t**self.shape <= target:
            t += 1
        while t > 1 and self.scale * (t - 1) ** self.shape > target:
            t -= 1
        return t

    def mean(self, cap: int | None = None, tol: float = SUPPORT_TOL) -> float:
        """Discrete mean ``sum_{t>=0} P(L > t)`` truncated at ``cap``.

        Raises
        ------
        ValueError
            If ``survival(cap)`` is not below ``tol``; the neglected tail would
            then be too large.
        """
        if cap is None:
            cap = self.support_cap(tol)
        if self.survival(cap) >= tol:
            raise ValueError(
                f"truncation error above tolerance: survival({cap}) = "
                f"{self.survival(cap):.3e} >= {tol:g}"
            )
        return float(np.sum(self.survival(np.arange(cap))))

    def hazard(self, t):
        """Discrete failure rate ``P(L = t) / P(L > t - 1)``."""
        t = _as_int_array(t, "t", 1)
        prev = self.scale * np.power(t - 1, self.shape, dtype=float)
        now = self.scale * np.power(t, self.shape, dtype=float)
        return _unwrap(-np.expm1(prev - now))

    def sample(self, rng: np.random.Generator, size, age: int = 0) -> np.ndarray:
        """Draw residual lifetimes by inverting the survival function.

        Returns the smallest ``t >= 1`` with ``residual_survival(age, t) < U``
        for ``U ~ Uniform(0, 1]``.
        """
        u = 1.0 - rng.random(size)  # (0, 1]
        base = self.scale * float(age) ** self.shape
        target = base - np.log(u)  # need scale*(age+t)**shape > target
        t = np.floor((target / self.scale) ** (1.0 / self.shape)) - age + 1
        t = np.maximum(t, 1).astype(np.int64)

        def excess(k):
            return self.scale * np.power(age + k, self.shape, dtype=float) - target

        # one-step corrections for rounding in the fractional power
        down = (t > 1) & (excess(t - 1) > 0)
        t = np.where(down, t - 1, t)
        up = excess(t) <= 0
        t = np.where(up, t + 1, t)
        return t
