"""Monte Carlo validation of the link model.

Simulates the physical system directly: interferer positions drawn from a
Poisson point process on a disk around the receiver, unit-mean exponential
fading on every path, a fresh network realization for every transmission
attempt, and drop-after-m ARQ.  Estimates come with standard errors so the
closed forms can be checked at stated confidence.

Reproducibility contract
------------------------
Sampling is decomposed into fixed-size message blocks; block ``i`` draws
from :func:`seeded_stream`'s substream ``i``.  The block plan depends only
on the configuration (never on the worker count), and per-block tallies are
integers, so merged results are bit-identical for any ``streams`` setting.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .analytic import ChannelParams, LinkPolicy, geometry_constant, spectral_efficiency

__all__ = [
    "SimConfig",
    "McEstimate",
    "AttemptSample",
    "ProtocolReport",
    "seeded_stream",
    "truncation_bias_ratio",
    "sample_sir",
    "estimate_outage",
    "simulate_protocol",
    "backend",
]

# Per-round draw budget; caps transient arrays at a few tens of MB per worker.
_TARGET_DRAWS_PER_ROUND = 1_000_000
_MAX_BLOCK = 65_536
_MIN_BLOCK = 64

# Neglected far-field interference must stay below this fraction of the
# near-field interference scale k * r0^(-alpha).
_BIAS_RATIO_LIMIT = 1e-3


# ============================================================================
#  Types and configuration
# ============================================================================

@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo run configuration.

    seed                 : 64-bit root seed; all randomness derives from it
    n_messages           : messages simulated per estimate
    window_radius_factor : simulation disk radius as a multiple of r0
    power_ratio          : interferer-to-reference transmit power ratio;
                           scales the interference term of the SIR
    streams              : worker threads; never affects results
    """

    seed: int
    n_messages: int = 100_000
    window_radius_factor: float = 100.0
    power_ratio: float = 1.0
    streams: int = 4

    def __post_init__(self):
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2 ** 64):
            raise ValueError(f"seed must be an integer in [0, 2^64), got {self.seed}")
        if self.n_messages < 1:
            raise ValueError(f"n_messages must be >= 1, got {self.n_messages}")
        if not self.window_radius_factor > 0:
            raise ValueError(
                f"window_radius_factor must be positive, got {self.window_radius_factor}"
            )
        if not self.power_ratio > 0:
            raise ValueError(f"power_ratio must be positive, got {self.power_ratio}")
        if self.streams < 1:
            raise ValueError(f"streams must be >= 1, got {self.streams}")

    def validate_for(self, params: ChannelParams) -> None:
        """Reject windows whose truncation bias is not negligible."""
        if params.density == 0.0:
            return
        ratio = truncation_bias_ratio(params, self.window_radius_factor)
        if ratio >= _BIAS_RATIO_LIMIT:
            raise ValueError(
                f"window_radius_factor={self.window_radius_factor:g} leaves a "
                f"truncation bias ratio of {ratio:.3g} (limit {_BIAS_RATIO_LIMIT:g}); "
                f"enlarge the simulation window"
            )


@dataclass(frozen=True)
class McEstimate:
    """Point estimate with its standard error and sample count."""

    mean: float
    std_error: float
    n: int


@dataclass(frozen=True)
class AttemptSample:
    """One physical-layer attempt: realized SIR and the decode outcome."""

    sir: float
    success: bool
    n_interferers: int


@dataclass(frozen=True)
class ProtocolReport:
    """Empirical ARQ statistics over a batch of messages."""

    throughput: McEstimate
    drop_rate: McEstimate
    mean_attempts: McEstimate
    attempt_outage: McEstimate
    n_messages: int
    total_attempts: int
    n_success: int


def backend() -> str:
    """Active kernel backend, 'numba' or 'numpy'."""
    return _kernels.BACKEND


def truncation_bias_ratio(params: ChannelParams, window_radius_factor: float) -> float:
    """Neglected mean far-field interference over the near-field scale.

    The mean interference from beyond radius R is
    2*pi*density*R^(2-alpha)/(alpha-2); the comparison scale is the
    geometry-constant interference level k*density*r0^(-alpha) with unit
    mean fading.  Density cancels, so the ratio is a pure window property.
    """
    r_window = window_radius_factor * params.r0
    tail = 2.0 * math.pi * r_window ** (2.0 - params.alpha) / (params.alpha - 2.0)
    scale = geometry_constant(params) * params.r0 ** -params.alpha
    return tail / scale


def seeded_stream(seed: int, stream_index: int) -> np.random.Generator:
    """Deterministic, non-overlapping substream of the root seed.

    Identical (seed, stream_index) always yields the identical generator
    state; distinct stream indices give statistically independent streams.
    """
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream_index,)))
    )


# ============================================================================
#  Sampling core
# ============================================================================

def _mean_interferers(params: ChannelParams, sim: SimConfig) -> float:
    r_window = sim.window_radius_factor * params.r0
    return params.density * math.pi * r_window ** 2


def _block_plan(n_messages: int, mu: float) -> list[int]:
    """Fixed decomposition of the batch into per-substream message blocks."""
    if mu <= 0.0:
        block = _MAX_BLOCK
    else:
        block = int(min(_MAX_BLOCK, max(_MIN_BLOCK, _TARGET_DRAWS_PER_ROUND / mu)))
    sizes = [block] * (n_messages // block)
    if n_messages % block:
        sizes.append(n_messages % block)
    return sizes


def _run_block(
    rng: np.random.Generator,
    n_msgs: int,
    params: ChannelParams,
    beta: float,
    m: int,
    sim: SimConfig,
) -> np.ndarray:
    """Simulate one message block; returns integer tallies.

    Draw order per round is fixed (counts, radii uniforms, fading gains,
    reference gain) so results are reproducible across kernel backends.
    Tallies: [messages, successes, drops, sum attempts, sum attempts^2,
    sum attempts over successful messages].
    """
    mu = _mean_interferers(params, sim)
    r_window = sim.window_radius_factor * params.r0
    signal_gain = params.r0 ** -params.alpha
    beta_eff = beta * sim.power_ratio

    succ = drops = sum_a = sum_a2 = sum_as = 0
    active = n_msgs
    for attempt in range(m + 1):
        if active == 0:
            break
        counts = rng.poisson(mu, active)
        total = int(counts.sum())
        u = rng.random(total)
        e = rng.standard_exponential(total)
        g0 = rng.standard_exponential(active)
        interference = _kernels.interference_sums(
            counts, u, e, r_window, params.alpha
        )
        ok = int(np.count_nonzero(g0 * signal_gain > beta_eff * interference))
        a = attempt + 1
        succ += ok
        sum_a += ok * a
        sum_a2 += ok * a * a
        sum_as += ok * a
        active -= ok
    drops = active
    last = m + 1
    sum_a += drops * last
    sum_a2 += drops * last * last
    return np.array([n_msgs, succ, drops, sum_a, sum_a2, sum_as], dtype=np.int64)


def _accumulate(params: ChannelParams, beta: float, m: int, sim: SimConfig) -> np.ndarray:
    """Run all blocks, possibly in parallel; integer merge is order-free."""
    if not beta > 0.0:
        raise ValueError(f"SIR threshold beta must be positive, got {beta}")
    sim.validate_for(params)
    mu = _mean_interferers(params, sim)
    plan = _block_plan(sim.n_messages, mu)

    def work(item):
        index, size = item
        return _run_block(seeded_stream(sim.seed, index), size, params, beta, m, sim)

    items = list(enumerate(plan))
    if sim.streams == 1 or len(items) == 1:
        parts = [work(item) for item in items]
    else:
        with ThreadPoolExecutor(max_workers=sim.streams) as pool:
            parts = list(pool.map(work, items))
    return np.sum(parts, axis=0)


def sample_sir(
    params: ChannelParams,
    beta: float,
    sim: SimConfig,
    rng: np.random.Generator,
) -> AttemptSample:
    """Draw one attempt: fresh interferer field, fresh fading, one SIR.

    An empty interference field yields infinite SIR and a guaranteed
    decode.
    """
    if not beta > 0.0:
        raise ValueError(f"SIR threshold beta must be positive, got {beta}")
    mu = _mean_interferers(params, sim)
    r_window = sim.window_radius_factor * params.r0
    n = int(rng.poisson(mu))
    u = rng.random(n)
    e = rng.standard_exponential(n)
    g0 = float(rng.standard_exponential())
    interference = float(
        _kernels.interference_sums(
            np.array([n], dtype=np.int64), u, e, r_window, params.alpha
        )[0]
    )
    signal = g0 * params.r0 ** -params.alpha
    if interference > 0.0:
        sir = signal / (sim.power_ratio * interference)
    else:
        sir = math.inf
    return AttemptSample(sir=sir, success=sir > beta, n_interferers=n)


# ============================================================================
#  Estimators
# ============================================================================

def estimate_outage(params: ChannelParams, beta: float, sim: SimConfig) -> McEstimate:
    """Bernoulli estimate of the per-attempt outage probability.

    One independent attempt per message; std_error is the binomial
    sqrt(p(1-p)/n).
    """
    if sim.n_messages < 1000:
        raise ValueError(
            f"outage estimation needs n_messages >= 1000, got {sim.n_messages}"
        )
    totals = _accumulate(params, beta, 0, sim)
    n = int(totals[0])
    p = totals[2] / n
    return McEstimate(mean=p, std_error=math.sqrt(p * (1.0 - p) / n), n=n)


def _ratio_se(num_mean, den_mean, var_num, var_den, cov, n) -> float:
    """Delta-method standard error of mean(num)/mean(den)."""
    r = num_mean / den_mean
    var = (var_num - 2.0 * r * cov + r * r * var_den) / (n * den_mean * den_mean)
    return math.sqrt(max(var, 0.0))


def simulate_protocol(params: ChannelParams, policy: LinkPolicy, sim: SimConfig) -> ProtocolReport:
    """Run drop-after-m ARQ for a batch of messages.

    The throughput estimator is the renewal-reward ratio
    ``log(1 + beta) * successes / attempts``: the empirical reward per
    channel use, matching the structure of the closed form (per-message
    ratios would be biased).  Standard errors for the ratio estimators come
    from the delta method.
    """
    totals = _accumulate(params, policy.beta, policy.m, sim)
    n, succ, drops, sum_a, sum_a2, sum_as = (int(v) for v in totals)
    denom = max(n - 1, 1)

    mean_s = succ / n
    mean_a = sum_a / n
    var_s = (succ - n * mean_s * mean_s) / denom  # s in {0,1}: sum s^2 == sum s
    var_a = (sum_a2 - n * mean_a * mean_a) / denom
    cov_sa = (sum_as - n * mean_s * mean_a) / denom

    eff = spectral_efficiency(policy.beta, params.log_base)
    tp = eff * succ / sum_a
    tp_se = eff * _ratio_se(mean_s, mean_a, var_s, var_a, cov_sa, n)

    p_drop = drops / n
    drop = McEstimate(p_drop, math.sqrt(p_drop * (1.0 - p_drop) / n), n)

    attempts = McEstimate(mean_a, math.sqrt(max(var_a, 0.0) / n), n)

    # attempt-level outage: failed attempts per attempt, x_i = a_i - s_i
    fails = sum_a - succ
    mean_x = fails / n
    sum_x2 = sum_a2 - 2 * sum_as + succ
    var_x = (sum_x2 - n * mean_x * mean_x) / denom
    cov_xa = ((sum_a2 - sum_as) - n * mean_x * mean_a) / denom
    outage = McEstimate(
        fails / sum_a, _ratio_se(mean_x, mean_a, var_x, var_a, cov_xa, n), n
    )

    return ProtocolReport(
        throughput=McEstimate(tp, tp_se, n),
        drop_rate=drop,
        mean_attempts=attempts,
        attempt_outage=outage,
        n_messages=n,
        total_attempts=sum_a,
        n_success=succ,
    )
