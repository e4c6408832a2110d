"""Optimal prefetch sizing for the next feature round.

Out of s_k ambiguous samples, p_k get their next feature offloaded early
during the training window tau_k (at the current gain g_k); survivors not
covered by the prefetch must be offloaded in the next round's shorter
window t_{k+1} at an unknown gain. The number of such leftovers is
binomial in (s_k - p_k) with survival ratio rho_k, so the exact expected
cost involves its ell-th moment; replacing that moment with the sharp
bound (mu + ell/2)^ell turns the tradeoff into a convex problem whose
minimizer has the closed form implemented here. The exact-moment
objective and an exhaustive integer search are kept alongside as
oracles to quantify the bound's looseness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import ChannelModel


@dataclass(frozen=True)
class PrefetchContext:
    """Everything the round-k prefetch decision can see."""

    s_k: int  # current ambiguous-set size
    rho_k: float  # estimated survival ratio into the next depth
    g_k: float  # gain during the prefetch window
    tau_k: float  # prefetch/training window (s)
    t_next: float  # next round's offloading window (s)
    alpha: int  # bits per feature value
    channel: ChannelModel

    def __post_init__(self):
        if not (isinstance(self.s_k, (int, np.integer)) and self.s_k >= 0):
            raise ValueError(f"ambiguous count must be a nonnegative integer, got {self.s_k}")
        if not 0.0 <= self.rho_k <= 1.0:
            raise ValueError(f"survival ratio must lie in [0, 1], got {self.rho_k}")
        if not self.tau_k > 0.0:
            raise ValueError(f"prefetch window must be positive, got {self.tau_k}")
        if not self.t_next > 0.0:
            raise ValueError(f"next offload window must be positive, got {self.t_next}")
        if not self.g_k > 0.0:
            raise ValueError(f"gain must be positive, got {self.g_k}")
        if not self.alpha >= 1:
            raise ValueError(f"bits per feature must be >= 1, got {self.alpha}")


def prefetch_weight(ctx: PrefetchContext) -> float:
    """phi = (g_k * nu)^(1/(ell-1)) * tau_k / t_next, the aggressiveness knob."""
    ell = ctx.channel.ell
    return (ctx.g_k * ctx.channel.nu) ** (1.0 / (ell - 1)) * ctx.tau_k / ctx.t_next


def optimal_prefetch(ctx: PrefetchContext) -> float:
    """Closed-form minimizer of the bounded objective, clamped to [0, s_k].

    Returned as a continuous value; the integer decision rounds to nearest.
    """
    ell = ctx.channel.ell
    rho = ctx.rho_k
    if rho == 0.0:
        return 0.0
    phi = prefetch_weight(ctx)
    gain_term = phi * rho ** (1.0 / (ell - 1)) / (1.0 + phi * rho ** (ell / (ell - 1)))
    p_star = gain_term * (ctx.s_k * rho + ell / 2.0)
    return float(min(max(p_star, 0.0), float(ctx.s_k)))


def round_prefetch(p_star: float) -> int:
    """Round-to-nearest integer decision (half always rounds up)."""
    return int(math.floor(p_star + 0.5))


def p2_objective(ctx: PrefetchContext, p: float) -> float:
    """Bounded-moment objective with the common factor lambda*alpha^ell dropped.

    Dropping the constant leaves the argmin unchanged and keeps values
    well-conditioned despite lambda ~ 1e-17.
    """
    if not 0.0 <= p <= ctx.s_k:
        raise ValueError(f"prefetch size {p} outside [0, {ctx.s_k}]")
    ell = ctx.channel.ell
    nu = ctx.channel.nu
    prefetch_term = p**ell / (ctx.g_k * ctx.tau_k ** (ell - 1))
    mu = (ctx.s_k - p) * ctx.rho_k
    leftover_term = nu / ctx.t_next ** (ell - 1) * (mu + ell / 2.0) ** ell
    return float(prefetch_term + leftover_term)


# cumulative log-factorial table (_LOGFACT[i] = log i!), grown on demand
_LOGFACT = np.zeros(1)


def _logfact(n: int) -> np.ndarray:
    global _LOGFACT
    if _LOGFACT.shape[0] <= n:
        size = max(n + 1, 2 * _LOGFACT.shape[0])
        table = np.empty(size, dtype=np.float64)
        table[0] = 0.0
        table[1:] = np.cumsum(np.log(np.arange(1, size, dtype=np.float64)))
        _LOGFACT = table
    return _LOGFACT


def binomial_moment(m: int, rho: float, ell: int) -> float:
    """E[n^ell] for n ~ Binomial(m, rho), summed exactly from the log-space pmf."""
    if m < 0:
        raise ValueError(f"trial count must be nonnegative, got {m}")
    if m == 0 or rho == 0.0:
        return 0.0
    if rho == 1.0:
        return float(m) ** ell
    j = np.arange(m + 1, dtype=np.float64)
    lf = _logfact(m)
    log_pmf = (
        lf[m]
        - lf[: m + 1]
        - lf[: m + 1][::-1]
        + j * math.log(rho)
        + (m - j) * math.log1p(-rho)
    )
    with np.errstate(divide="ignore"):
        log_terms = log_pmf[1:] + ell * np.log(j[1:])  # j = 0 contributes nothing
    peak = log_terms.max()
    return float(math.exp(peak) * np.exp(log_terms - peak).sum())


def p1_expected_energy(ctx: PrefetchContext, p: int) -> float:
    """Exact expected joules of prefetching p now and offloading the leftovers.

    This is the true two-stage objective: the leftover count's ell-th
    moment comes from the exact binomial pmf, not the bound.
    """
    if not (isinstance(p, (int, np.integer)) and 0 <= p <= ctx.s_k):
        raise ValueError(f"prefetch size {p} must be an integer in [0, {ctx.s_k}]")
    ell = ctx.channel.ell
    lam = ctx.channel.lambda_coef
    nu = ctx.channel.nu
    alpha_pow = float(ctx.alpha) ** ell
    prefetch_term = lam * alpha_pow * float(p) ** ell / (ctx.g_k * ctx.tau_k ** (ell - 1))
    moment = binomial_moment(ctx.s_k - int(p), ctx.rho_k, ell)
    leftover_term = lam * nu * alpha_pow / ctx.t_next ** (ell - 1) * moment
    return prefetch_term + leftover_term


def brute_force_p1(ctx: PrefetchContext) -> int:
    """Exhaustive integer argmin of p1_expected_energy; ties go to the smallest p."""
    if ctx.s_k > 10_000:
        raise ValueError(f"exhaustive search capped at 10000, got {ctx.s_k}")
    costs = [p1_expected_energy(ctx, p) for p in range(ctx.s_k + 1)]
    return int(np.argmin(costs))


def estimate_rho(
    history: Sequence[tuple[int, int]],
    prior: float = 0.5,
    current: tuple[int, int] | None = None,
) -> float:
    """Survival-ratio estimate for the upcoming round.

    Default: the previous round's realized ratio (last history entry);
    with no history, a configured prior. Passing `current` switches to
    the clairvoyant mode that uses this round's realized ratio, which
    upper-bounds what any estimator could achieve.
    """
    if current is not None:
        s_now, s_next = current
        return s_next / s_now if s_now > 0 else prior
    if history:
        s_prev, s_prev_next = history[-1]
        if s_prev > 0:
            return s_prev_next / s_prev
    return prior
