"""Convergence constants for SGP and the iteration/slot bounds built from them.

With ``p = delta^(Delta B)``: ``C = 4 / p`` and ``q = (1 - p)^(1/(Delta B))``.
Everything is evaluated in log space first; ``1 - q`` goes through
``expm1``/``log1p`` so tiny ``p`` keeps full precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NotStronglyConnected

_LOG_FLOAT_MAX = math.log(1.7976931348623157e308)


def _exp_capped(x: float) -> float:
    return math.inf if x > _LOG_FLOAT_MAX else math.exp(x)


@dataclass(frozen=True)
class ProblemConstants:
    L: float
    sigma2: float
    zeta2: float
    n: int
    f0: float
    f_star: float
    x0_max_norm: float

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError("L must be positive")
        if self.sigma2 < 0 or self.zeta2 < 0:
            raise ValueError("sigma2 and zeta2 must be non-negative")
        if self.f0 < self.f_star - 1e-12 * max(1.0, abs(self.f_star)):
            raise ValueError("f0 must be at least f_star")

    @property
    def A(self) -> float:
        return 2 * self.f0 - 2 * self.f_star + self.L * self.sigma2

    @property
    def S(self) -> float:
        n2 = self.n * self.n
        return self.x0_max_norm**2 + n2 * self.sigma2 + 3 * n2 * self.zeta2


@dataclass(frozen=True)
class MixingConstants:
    """``C`` and ``q`` plus their logs (``log_one_minus_q`` is ``log(1 - q)``)."""

    C: float
    q: float
    log_C: float
    log_one_minus_q: float

    def __iter__(self):
        return iter((self.C, self.q))


def convergence_constants(delta: float, Delta: int, B: int = 1) -> MixingConstants:
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    if Delta < 1 or B < 1:
        raise ValueError("Delta and B must be positive integers")
    span = Delta * B
    log_p = span * math.log(delta)
    log_C = math.log(4.0) - log_p
    if delta == 1.0:
        return MixingConstants(4.0, 0.0, log_C, 0.0)
    if log_p < -40:
        # 1 - q = p/span + O(p^2); p itself may underflow, so stay in logs
        log_gap = log_p - math.log(span)
        return MixingConstants(_exp_capped(log_C), 1.0 - math.exp(log_gap), log_C, log_gap)
    p = delta**span
    one_minus_q = -math.expm1(math.log1p(-p) / span)
    return MixingConstants(4.0 / p, 1.0 - one_minus_q, log_C, math.log(one_minus_q))


def scaling_ratio(delta: float, Delta: int, B: int = 1) -> float:
    """``C^2 / (1 - q)^2`` divided by ``Delta^2 B^2 / delta^(4 Delta B)``.

    Stays within a constant band (it tends to 16 as ``delta^(Delta B)`` shrinks).
    """
    c_q = convergence_constants(delta, Delta, B)
    span = Delta * B
    log_scale = 2 * math.log(span) - 4 * span * math.log(delta)
    return math.exp(2 * c_q.log_C - 2 * c_q.log_one_minus_q - log_scale)


@dataclass(frozen=True)
class IterationBound:
    """``T_lower`` (the closed form) and the four-term sufficient condition it simplifies."""

    T_lower: float
    log_T_lower: float
    terms: tuple[float, float, float, float]
    T_required: float
    closed_form_dominates: bool


def iteration_bound(pc: ProblemConstants, c_q, eps: float) -> IterationBound:
    """``T_lower = 24 L^2 C^2 S / ((1 - q)^2 eps)`` plus the full four-term maximum."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    log_C, log_gap = _logs(c_q)
    n, L, S, A = pc.n, pc.L, pc.S, pc.A
    ratio = 2 * log_C - 2 * log_gap  # log(C^2 / (1-q)^2)
    log_t = math.log(24 * L * L * S / eps) + ratio if S > 0 else -math.inf
    t_lower = _exp_capped(log_t)
    second = _exp_capped(math.log(18 * L * L * n * n) + ratio)
    third = 16 * A * A / (n * eps * eps)
    terms = (float(n), second, third, t_lower)
    return IterationBound(t_lower, log_t, terms, max(terms), t_lower >= max(terms[:3]))


def epsilon_window(pc: ProblemConstants, c_q) -> dict:
    """Interval of ``eps`` for which the closed-form iteration count is valid."""
    log_C, log_gap = _logs(c_q)
    n, L, S, A = pc.n, pc.L, pc.S, pc.A
    log_ratio = 2 * log_C - 2 * log_gap
    if A == 0:
        lo = 0.0
    else:
        lo = _exp_capped(math.log(2 * A * A / (3 * L * L * n * S)) - log_ratio) if S > 0 else math.inf
    hi_a = 4 * S / (3 * n * n)
    hi_b = _exp_capped(math.log(24 * L * L * S / n) + log_ratio) if S > 0 else 0.0
    hi = min(hi_a, hi_b)
    return {"lo": lo, "hi": hi, "nonempty": lo <= hi, "degenerate": n < 2}


def predicted_total_slots(result, pc: ProblemConstants, eps: float, B: int = 1) -> float:
    """``T_lower * tau`` for a design result: the total slot count the design minimizes."""
    if result.tau <= 0:
        raise NotStronglyConnected("an empty design has no slots to predict")
    c_q = convergence_constants(result.delta, result.diameter, B)
    return iteration_bound(pc, c_q, eps).T_lower * result.tau


def _logs(c_q) -> tuple[float, float]:
    if isinstance(c_q, MixingConstants):
        if not math.isfinite(c_q.log_one_minus_q):
            raise ValueError("q must be below 1")
        return c_q.log_C, c_q.log_one_minus_q
    C, q = c_q
    if q >= 1:
        raise ValueError("q must be below 1")
    return math.log(C), math.log1p(-q)
