"""Throughput optimizers: constrained (beta*, m*) and unconstrained beta*.

Constrained problem: maximize throughput over the SIR threshold and the
retransmission cap subject to a drop-rate bound.  At the optimum the bound
is active, the threshold follows in closed form from the cap, and the cap
is found by an exact integer scan.

Unconstrained problem: maximize  log(1 + beta) * exp(-k * density *
beta^(2/alpha))  over beta alone.  The stationarity condition

    alpha * beta = 2 * beta^(2/alpha) * k * density * (1 + beta) * log(1 + beta)

is transcendental and is solved by expanding-bracket bisection with secant
acceleration.  Both optima agree up to integer quantization of the cap.
"""

import math
from dataclasses import dataclass, replace

from .analytic import (
    ChannelParams,
    QosConstraint,
    _constraint_active_threshold,
    constrained_throughput,
    geometry_constant,
    mean_attempts,
    outage_probability,
    spectral_efficiency,
)

__all__ = [
    "SearchConfig",
    "OptimumReport",
    "OptimaGap",
    "SolverError",
    "beta_star",
    "m_star",
    "beta_star_unconstrained",
    "optimum_unconstrained",
    "verify_optima_coincide",
    "unconstrained_throughput",
    "stationarity_residual",
]

_SIGN_PROBES = 64


class SolverError(RuntimeError):
    """Root bracketing or uniqueness check failed; message carries diagnostics."""


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for the integer scan and the transcendental root finder."""

    m_max: int = 1000
    bracket_hi_init: float = 1e3
    root_tol: float = 1e-10
    max_bracket_expansions: int = 60

    def __post_init__(self):
        if self.m_max <= 0 or self.bracket_hi_init <= 0 or self.root_tol <= 0 \
                or self.max_bracket_expansions <= 0:
            raise ValueError("all SearchConfig fields must be positive")


@dataclass(frozen=True)
class OptimumReport:
    """Operating point returned by the optimizers.

    m_star and drop_rate are None for the unconstrained problem, where the
    cap plays no role.  interference_free marks the degenerate zero-density
    input: the threshold is unbounded and the throughput grows without limit,
    reported as inf rather than NaN.
    """

    beta_star: float
    throughput_star: float
    p_out_at_opt: float
    mean_attempts_at_opt: float
    m_star: int | None = None
    drop_rate: float | None = None
    at_cap: bool = False
    interference_free: bool = False


@dataclass(frozen=True)
class OptimaGap:
    """Relative throughput gap between unconstrained and constrained optima."""

    relative_gap: float
    constrained: OptimumReport
    unconstrained: OptimumReport


def _eps_value(epsilon) -> float:
    return epsilon.epsilon if isinstance(epsilon, QosConstraint) else QosConstraint(epsilon).epsilon


def _interference_free_report() -> OptimumReport:
    return OptimumReport(
        beta_star=math.inf,
        throughput_star=math.inf,
        p_out_at_opt=0.0,
        mean_attempts_at_opt=1.0,
        m_star=0,
        drop_rate=0.0,
        interference_free=True,
    )


# ============================================================================
#  Constrained problem
# ============================================================================

def beta_star(params: ChannelParams, epsilon, m: int) -> float:
    """Constraint-activating SIR threshold for cap m (closed form).

    Satisfies P_out(beta*)^(1+m) = epsilon; raises ValueError when the
    density is zero (constraint non-binding, threshold unbounded).
    """
    eps = _eps_value(epsilon)
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    return _constraint_active_threshold(params, eps, m)


def m_star(
    params: ChannelParams,
    epsilon,
    cfg: SearchConfig = SearchConfig(),
    m_cap: int | None = None,
) -> OptimumReport:
    """Maximize constrained throughput over the retransmission cap.

    Exhaustive scan of m in 0..min(m_cap, cfg.m_max); ties broken toward
    the smallest cap.  at_cap flags an argmax sitting on the scan ceiling,
    where a larger budget might still help.
    """
    eps = _eps_value(epsilon)
    if params.density == 0.0:
        return _interference_free_report()
    limit = cfg.m_max if m_cap is None else min(m_cap, cfg.m_max)
    if limit < 0:
        raise ValueError(f"m_cap must be >= 0, got {m_cap}")

    best_m, best_t = 0, -math.inf
    for m in range(limit + 1):
        t = constrained_throughput(params, eps, m)
        if t > best_t:
            best_m, best_t = m, t

    beta = beta_star(params, eps, best_m)
    p = outage_probability(params, beta)
    return OptimumReport(
        beta_star=beta,
        throughput_star=best_t,
        p_out_at_opt=p,
        mean_attempts_at_opt=mean_attempts(p, best_m),
        m_star=best_m,
        drop_rate=p ** (best_m + 1),
        at_cap=best_m == limit,
    )


# ============================================================================
#  Unconstrained problem
# ============================================================================

def unconstrained_throughput(params: ChannelParams, beta: float) -> float:
    """Objective of the unconstrained problem at threshold beta.

    Equals the single-attempt throughput log(1+beta) * (1 - P_out); written
    with exp directly to stay accurate when the outage probability is close
    to one.
    """
    if not beta > 0.0:
        raise ValueError(f"SIR threshold beta must be positive, got {beta}")
    x = geometry_constant(params) * params.density * beta ** (2.0 / params.alpha)
    return spectral_efficiency(beta, params.log_base) * math.exp(-x)


def stationarity_residual(params: ChannelParams, beta: float) -> float:
    """g(beta) whose positive root is the unconstrained optimum.

    g(beta) = alpha*beta - 2*beta^(2/alpha)*k*density*(1+beta)*log(1+beta);
    positive left of the optimum, negative right of it.
    """
    k_lam = geometry_constant(params) * params.density
    return (
        params.alpha * beta
        - 2.0 * beta ** (2.0 / params.alpha) * k_lam * (1.0 + beta) * math.log1p(beta)
    )


def beta_star_unconstrained(params: ChannelParams, cfg: SearchConfig = SearchConfig()) -> float:
    """Positive root of the stationarity condition, bracketed then bisected.

    Bracket expansion is geometric; a 64-point log-spaced sign sweep guards
    against multiple roots before the bisection/secant iteration runs.
    Raises SolverError with diagnostics when no sign change is found or the
    sign pattern is not a single + to - switch.  Raises ValueError for zero
    density (no interference, threshold unbounded).
    """
    if params.density == 0.0:
        raise ValueError(
            "density is zero: throughput increases without bound in beta "
            "(interference-free link)"
        )

    g = lambda b: stationarity_residual(params, b)

    lo = 1e-8
    for _ in range(cfg.max_bracket_expansions):
        if g(lo) > 0.0:
            break
        lo /= 16.0
    else:
        raise SolverError(
            f"no positive stationarity residual found down to beta={lo:g} "
            f"(density={params.density:g}, alpha={params.alpha:g})"
        )

    hi = cfg.bracket_hi_init
    for _ in range(cfg.max_bracket_expansions):
        if g(hi) < 0.0:
            break
        hi *= 4.0
    else:
        raise SolverError(
            f"no sign change up to beta={hi:g} after "
            f"{cfg.max_bracket_expansions} expansions "
            f"(density={params.density:g}, alpha={params.alpha:g}, "
            f"g(hi)={g(hi):g})"
        )

    # Uniqueness guard: the residual must switch sign exactly once on the bracket.
    flips = 0
    prev_pos = True
    for i in range(_SIGN_PROBES):
        b = lo * (hi / lo) ** (i / (_SIGN_PROBES - 1))
        pos = g(b) > 0.0
        if pos != prev_pos:
            flips += 1
            prev_pos = pos
    if flips > 1:
        raise SolverError(
            f"stationarity residual changes sign {flips} times on "
            f"[{lo:g}, {hi:g}]; root is not unique on the bracket"
        )

    g_lo, g_hi = g(lo), g(hi)
    for it in range(250):
        if hi - lo <= cfg.root_tol * max(1.0, lo):
            break
        # secant candidate every other step, midpoint otherwise
        mid = 0.5 * (lo + hi)
        if it % 2 == 1 and g_lo != g_hi:
            sec = lo - g_lo * (hi - lo) / (g_hi - g_lo)
            if lo < sec < hi:
                mid = sec
        if mid <= lo or mid >= hi:
            break  # interval exhausted at float resolution
        g_mid = g(mid)
        if g_mid > 0.0:
            lo, g_lo = mid, g_mid
        else:
            hi, g_hi = mid, g_mid

    # Secant polish crushes the residual to machine level.
    x0, x1 = lo, hi
    f0, f1 = g_lo, g_hi
    best, f_best = (x0, f0) if abs(f0) < abs(f1) else (x1, f1)
    for _ in range(8):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        if not (x2 > 0.0 and math.isfinite(x2)):
            break
        f2 = g(x2)
        x0, f0, x1, f1 = x1, f1, x2, f2
        if abs(f2) < abs(f_best):
            best, f_best = x2, f2
        if f2 == 0.0:
            break
    return best


def optimum_unconstrained(params: ChannelParams, cfg: SearchConfig = SearchConfig()) -> OptimumReport:
    """Unconstrained optimum report; mean attempts assume unlimited retries."""
    if params.density == 0.0:
        return replace(_interference_free_report(), m_star=None, drop_rate=None)
    beta = beta_star_unconstrained(params, cfg)
    p = outage_probability(params, beta)
    return OptimumReport(
        beta_star=beta,
        throughput_star=unconstrained_throughput(params, beta),
        p_out_at_opt=p,
        mean_attempts_at_opt=1.0 / (1.0 - p),
        m_star=None,
        drop_rate=None,
    )


def verify_optima_coincide(
    params: ChannelParams,
    epsilon,
    cfg: SearchConfig = SearchConfig(),
) -> OptimaGap:
    """Relative gap (T_un - T_con) / T_un between the two optima.

    Non-negative up to float round-off: the constrained optimum samples the
    unconstrained throughput curve at the discrete thresholds beta*(m), so
    it can approach but never exceed the continuous maximum.
    """
    con = m_star(params, epsilon, cfg)
    un = optimum_unconstrained(params, cfg)
    if un.interference_free:
        return OptimaGap(relative_gap=0.0, constrained=con, unconstrained=un)
    gap = (un.throughput_star - con.throughput_star) / un.throughput_star
    return OptimaGap(relative_gap=gap, constrained=con, unconstrained=un)
