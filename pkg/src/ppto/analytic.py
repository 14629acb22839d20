"""Closed-form link model: outage, attempt counts and throughput.

A reference link of length ``r0`` decodes at SIR threshold ``beta`` inside a
plane-filling Poisson field of interferers of density ``density``. Channel
gains are unit-mean exponential (Rayleigh fading) and interferer positions
are redrawn independently for every transmission attempt, so attempts are
i.i.d. Bernoulli trials with per-attempt outage probability

    P_out(beta) = 1 - exp(-k * density * beta^(2/alpha)),
    k = pi * r0^2 * Gamma(1 - 2/alpha) * Gamma(1 + 2/alpha).

A message failing ``1 + m`` attempts (one transmission plus ``m``
retransmissions) is dropped; the link throughput is the spectral efficiency
``log(1 + beta)`` earned per successful message divided by the mean number
of attempts spent per message.
"""

import math
from dataclasses import dataclass

__all__ = [
    "ChannelParams",
    "LinkPolicy",
    "QosConstraint",
    "geometry_constant",
    "outage_probability",
    "mean_attempts",
    "mean_attempts_approx",
    "spectral_efficiency",
    "throughput",
    "drop_probability",
    "constrained_throughput",
    "min_feasible_retransmissions",
]


# ============================================================================
#  Domain types
# ============================================================================

@dataclass(frozen=True)
class ChannelParams:
    """Propagation and interference-field parameters of the reference link.

    alpha    : path-loss exponent; must exceed 2 for the interference field
               to have a finite Laplace transform
    r0       : reference transmitter-receiver distance
    density  : mean number of interferers per unit area (PPP intensity)
    log_base : base of the spectral-efficiency logarithm; ``2`` gives
               bits/s/Hz, ``math.e`` (default) gives nats/s/Hz.  The choice
               rescales every throughput by a constant and never moves an
               optimum.
    """

    alpha: float = 4.0
    r0: float = 1.0
    density: float = 0.05
    log_base: float = math.e

    def __post_init__(self):
        if not self.alpha > 2.0:
            raise ValueError(
                f"path-loss exponent alpha must exceed 2, got {self.alpha}"
            )
        if not self.r0 > 0.0:
            raise ValueError(f"link distance r0 must be positive, got {self.r0}")
        if not self.density >= 0.0:
            raise ValueError(
                f"interferer density must be non-negative, got {self.density}"
            )
        if not self.log_base > 1.0:
            raise ValueError(f"log_base must exceed 1, got {self.log_base}")

    @property
    def k(self) -> float:
        """Geometry constant of the interference field."""
        return geometry_constant(self)


@dataclass(frozen=True)
class LinkPolicy:
    """Design variables of the link: SIR threshold and retransmission cap.

    beta : SIR decoding threshold (linear power ratio, > 0)
    m    : maximum number of retransmissions; a message gets ``1 + m``
           attempts in total before it is dropped
    """

    beta: float
    m: int = 0

    def __post_init__(self):
        if not self.beta > 0.0:
            raise ValueError(f"SIR threshold beta must be positive, got {self.beta}")
        if not (isinstance(self.m, int) and self.m >= 0):
            raise ValueError(f"retransmission cap m must be an integer >= 0, got {self.m}")


@dataclass(frozen=True)
class QosConstraint:
    """Maximum acceptable probability of dropping a message after all attempts."""

    epsilon: float

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(
                f"drop-rate bound epsilon must lie in (0, 1), got {self.epsilon}"
            )


# ============================================================================
#  Closed forms
# ============================================================================

def geometry_constant(params: ChannelParams) -> float:
    """pi * r0^2 * Gamma(1 - 2/alpha) * Gamma(1 + 2/alpha), strictly positive.

    Diverges as alpha -> 2+ (the far field contributes unbounded mean
    interference); ChannelParams already rejects alpha <= 2.
    """
    a = params.alpha
    return math.pi * params.r0 ** 2 * math.gamma(1.0 - 2.0 / a) * math.gamma(1.0 + 2.0 / a)


def outage_probability(params: ChannelParams, beta: float) -> float:
    """Per-attempt probability that the received SIR falls at or below beta."""
    if not beta > 0.0:
        raise ValueError(f"SIR threshold beta must be positive, got {beta}")
    x = geometry_constant(params) * params.density * beta ** (2.0 / params.alpha)
    return -math.expm1(-x)


def mean_attempts(p_out: float, m: int) -> float:
    """Mean attempts consumed per message: sum of p_out^n for n = 0..m.

    Exact finite geometric sum; equals 1 when m = 0 or p_out = 0.
    """
    if not 0.0 <= p_out < 1.0:
        raise ValueError(f"p_out must lie in [0, 1), got {p_out}")
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    return (1.0 - p_out ** (m + 1)) / (1.0 - p_out)


def mean_attempts_approx(epsilon: float, m: int) -> float:
    """Approximate mean attempt count (1 - eps) / (1 - eps^(1/(1+m))).

    Substitutes the drop-rate bound for the actual outage probability; exact
    only when the drop-rate constraint holds with equality.  Kept for
    figure-fidelity studies; prefer :func:`mean_attempts`.
    """
    eps = QosConstraint(epsilon).epsilon
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    return (1.0 - eps) / (1.0 - eps ** (1.0 / (m + 1)))


def spectral_efficiency(beta: float, log_base: float = math.e) -> float:
    """log(1 + beta) in the configured base."""
    return math.log1p(beta) / math.log(log_base)


def throughput(params: ChannelParams, policy: LinkPolicy) -> float:
    """Link throughput: efficiency x success probability / mean attempts.

    Uses the exact geometric attempt count, so algebraically this equals
    ``log(1 + beta) * (1 - P_out)`` for every retransmission cap.
    """
    p = outage_probability(params, policy.beta)
    p_drop = p ** (policy.m + 1)
    return (
        spectral_efficiency(policy.beta, params.log_base)
        * (1.0 - p_drop)
        / mean_attempts(p, policy.m)
    )


def drop_probability(params: ChannelParams, policy: LinkPolicy) -> float:
    """Probability that a message fails all 1 + m attempts."""
    return outage_probability(params, policy.beta) ** (policy.m + 1)


def _constraint_active_threshold(params: ChannelParams, epsilon: float, m: int) -> float:
    """SIR threshold at which the drop rate equals epsilon exactly.

    Inverts P_out(beta)^(1+m) = epsilon.  Requires density > 0; with no
    interferers the drop rate is zero at every beta and no finite threshold
    activates the constraint.
    """
    k_lam = geometry_constant(params) * params.density
    if k_lam <= 0.0:
        raise ValueError(
            "density is zero: the drop-rate constraint never binds and the "
            "SIR threshold is unbounded (interference-free link)"
        )
    return (-math.log(1.0 - epsilon ** (1.0 / (m + 1))) / k_lam) ** (params.alpha / 2.0)


def constrained_throughput(params: ChannelParams, epsilon, m: int) -> float:
    """Throughput with the drop-rate constraint held active at cap m.

    Evaluates ``log(1 + beta*) * (1 - epsilon^(1/(m+1)))`` at the
    constraint-activating threshold beta*; this is the best throughput
    attainable at cap ``m`` while dropping at most a fraction ``epsilon``
    of messages.
    """
    eps = epsilon.epsilon if isinstance(epsilon, QosConstraint) else QosConstraint(epsilon).epsilon
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    beta = _constraint_active_threshold(params, eps, m)
    return spectral_efficiency(beta, params.log_base) * (1.0 - eps ** (1.0 / (m + 1)))


def min_feasible_retransmissions(params: ChannelParams, beta: float, epsilon) -> int | None:
    """Smallest m with P_out(beta)^(1+m) <= epsilon, or None if none exists.

    None occurs only when P_out rounds to 1.0 in floating point (extreme
    threshold or density), where no finite attempt budget meets the bound.
    """
    eps = epsilon.epsilon if isinstance(epsilon, QosConstraint) else QosConstraint(epsilon).epsilon
    p = outage_probability(params, beta)
    if p <= eps:
        return 0
    if p >= 1.0:
        return None
    # 1 + m >= log(eps)/log(p); nudge against float slop around the ceiling
    m = max(math.ceil(math.log(eps) / math.log(p) - 1.0), 0)
    while p ** (m + 1) > eps:
        m += 1
    while m > 0 and p ** m <= eps:
        m -= 1
    return m
