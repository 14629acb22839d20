"""Closed-form model: frozen high-precision values and structural identities.

Expected constants were computed independently with 40-digit arithmetic
(mpmath gamma/exp/log) and frozen here.
"""

import math

import numpy as np
import pytest

from ppto import (
    ChannelParams,
    LinkPolicy,
    QosConstraint,
    constrained_throughput,
    drop_probability,
    geometry_constant,
    mean_attempts,
    mean_attempts_approx,
    min_feasible_retransmissions,
    outage_probability,
    spectral_efficiency,
    throughput,
)

REL = 1e-12


# ----------------------------------------------------------------------------
# geometry constant
# ----------------------------------------------------------------------------

def test_geometry_constant_frozen_values(a4):
    assert geometry_constant(a4(0.1)) == pytest.approx(4.9348022005446793, rel=REL)
    assert geometry_constant(a4(0.1)) == pytest.approx(math.pi ** 2 / 2, rel=REL)
    k_r2 = geometry_constant(ChannelParams(alpha=4.0, r0=2.0, density=0.1))
    assert k_r2 == pytest.approx(19.739208802178717, rel=REL)
    k_a3 = geometry_constant(ChannelParams(alpha=3.0, r0=1.0, density=0.1))
    assert k_a3 == pytest.approx(7.5976250103520752, rel=REL)


def test_geometry_constant_scales_with_r0_squared(a4):
    k1 = geometry_constant(a4(0.1))
    for r0 in (0.5, 2.0, 3.5):
        k = geometry_constant(ChannelParams(alpha=4.0, r0=r0, density=0.1))
        assert k == pytest.approx(r0 ** 2 * k1, rel=REL)


def test_geometry_constant_diverges_toward_alpha_two():
    k4 = geometry_constant(ChannelParams(alpha=4.0))
    k_edge = geometry_constant(ChannelParams(alpha=2.01))
    assert k_edge > 10.0 * k4
    # continuity and positivity across the admissible range
    alphas = np.linspace(2.05, 12.0, 60)
    ks = [geometry_constant(ChannelParams(alpha=float(a))) for a in alphas]
    assert all(k > 0.0 for k in ks)
    assert all(abs(b - a) / a < 0.5 for a, b in zip(ks, ks[1:]))


def test_alpha_at_or_below_two_rejected():
    for alpha in (2.0, 1.5, 0.0, -3.0):
        with pytest.raises(ValueError):
            ChannelParams(alpha=alpha)


# ----------------------------------------------------------------------------
# outage probability
# ----------------------------------------------------------------------------

def test_outage_probability_frozen_values(a4):
    assert outage_probability(a4(0.1), 1.0) == pytest.approx(0.38950197473420284, rel=REL)
    assert outage_probability(a4(0.05), 6.14) == pytest.approx(0.45740814812154082, rel=REL)
    assert outage_probability(a4(0.2), 1.67) == pytest.approx(0.72069027105097967, rel=REL)


def test_outage_probability_no_interferers(a4):
    for beta in (0.1, 1.0, 50.0, 1e6):
        assert outage_probability(a4(0.0), beta) == 0.0


def test_outage_probability_range_and_monotonicity(a4):
    betas = np.logspace(-2, 2, 40)
    lams = (0.01, 0.05, 0.1, 0.3)
    for lam in lams:
        ps = [outage_probability(a4(lam), float(b)) for b in betas]
        assert all(0.0 <= p < 1.0 for p in ps)
        assert all(b > a for a, b in zip(ps, ps[1:]))
    for beta in (0.5, 2.0, 10.0):
        ps = [outage_probability(a4(lam), beta) for lam in lams]
        assert all(b > a for a, b in zip(ps, ps[1:]))
    for beta in (0.5, 2.0):
        ps = [
            outage_probability(ChannelParams(alpha=4.0, r0=r0, density=0.05), beta)
            for r0 in (0.5, 1.0, 2.0, 4.0)
        ]
        assert all(b > a for a, b in zip(ps, ps[1:]))


def test_outage_probability_validates_beta(a4):
    with pytest.raises(ValueError):
        outage_probability(a4(0.1), 0.0)
    with pytest.raises(ValueError):
        outage_probability(a4(0.1), -1.0)


# ----------------------------------------------------------------------------
# attempt counts
# ----------------------------------------------------------------------------

def test_mean_attempts_matches_brute_force_sum():
    rng = np.random.default_rng(421)
    for _ in range(200):
        p = float(rng.uniform(0.0, 0.999))
        m = int(rng.integers(0, 40))
        brute = sum(p ** n for n in range(m + 1))
        assert mean_attempts(p, m) == pytest.approx(brute, rel=1e-12)


def test_mean_attempts_edge_cases():
    assert mean_attempts(0.0, 5) == 1.0
    assert mean_attempts(0.7, 0) == 1.0
    assert mean_attempts(0.5, 3) == pytest.approx(1.875, rel=0.0, abs=0.0)
    with pytest.raises(ValueError):
        mean_attempts(1.0, 3)
    with pytest.raises(ValueError):
        mean_attempts(0.5, -1)


def test_mean_attempts_monotone():
    for m in (1, 3, 10):
        vals = [mean_attempts(p, m) for p in np.linspace(0.01, 0.95, 20)]
        assert all(b > a for a, b in zip(vals, vals[1:]))
    for p in (0.2, 0.6, 0.9):
        vals = [mean_attempts(p, m) for m in range(0, 12)]
        assert all(b > a for a, b in zip(vals, vals[1:]))


def test_mean_attempts_approx_vs_exact_under_active_constraint():
    # with the drop bound active, epsilon^(1/(1+m)) is the outage probability
    # and the approximate chain collapses onto the exact sum
    for eps in (0.1, 0.02, 0.001):
        for m in (0, 1, 4, 9):
            p = eps ** (1.0 / (m + 1))
            assert mean_attempts_approx(eps, m) == pytest.approx(
                mean_attempts(p, m), rel=1e-12
            )
    assert mean_attempts_approx(0.3, 0) == 1.0


# ----------------------------------------------------------------------------
# throughput
# ----------------------------------------------------------------------------

def test_throughput_frozen_and_trivial(a4):
    assert throughput(a4(0.0, log_base=2.0), LinkPolicy(1.0, 0)) == 1.0
    assert throughput(a4(0.1), LinkPolicy(1.0, 0)) == pytest.approx(
        0.42316498495040156, rel=REL
    )
    assert throughput(a4(0.1), LinkPolicy(1e-9, 0)) < 1e-8


def test_throughput_collapses_to_single_attempt_form(a4):
    # exact geometric attempt count cancels: T == log(1+beta) * (1 - P_out)
    rng = np.random.default_rng(77)
    for _ in range(300):
        lam = float(rng.uniform(0.005, 0.4))
        beta = float(10 ** rng.uniform(-2, 1.6))
        m = int(rng.integers(0, 30))
        params = a4(lam)
        p = outage_probability(params, beta)
        expect = math.log1p(beta) * (1.0 - p)
        assert throughput(params, LinkPolicy(beta, m)) == pytest.approx(expect, rel=1e-12)


def test_throughput_log_base_rescales(a4):
    t_nat = throughput(a4(0.05), LinkPolicy(3.0, 2))
    t_bits = throughput(a4(0.05, log_base=2.0), LinkPolicy(3.0, 2))
    assert t_bits == pytest.approx(t_nat / math.log(2.0), rel=REL)


# ----------------------------------------------------------------------------
# constrained throughput
# ----------------------------------------------------------------------------

def test_constrained_throughput_frozen_values(a4):
    assert constrained_throughput(a4(0.05), 0.02, 4) == pytest.approx(
        1.0664923191687085, rel=REL
    )
    assert constrained_throughput(a4(0.1), 0.01, 5) == pytest.approx(
        0.51169484768267050, rel=REL
    )


def test_constrained_throughput_vanishes_as_bound_loosens(a4):
    # as epsilon -> 1 the admissible success margin disappears
    vals = [
        constrained_throughput(a4(0.05), eps, 3)
        for eps in (0.5, 0.9, 0.99, 0.9999, 1.0 - 1e-9)
    ]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-7


def test_constrained_equals_plain_throughput_when_bound_active(a4):
    # computational content of the equal-optima argument: with
    # epsilon = P_out^(1+m) both formulas rate the same operating point
    rng = np.random.default_rng(99)
    for _ in range(200):
        lam = float(rng.uniform(0.01, 0.3))
        beta = float(10 ** rng.uniform(-1, 1.3))
        m = int(rng.integers(0, 20))
        params = a4(lam)
        eps = outage_probability(params, beta) ** (m + 1)
        if not 0.0 < eps < 1.0:
            continue
        t_con = constrained_throughput(params, eps, m)
        t_plain = throughput(params, LinkPolicy(beta, m))
        assert t_con == pytest.approx(t_plain, rel=1e-9)


def test_constrained_throughput_requires_interference(a4):
    with pytest.raises(ValueError):
        constrained_throughput(a4(0.0), 0.02, 4)


# ----------------------------------------------------------------------------
# feasibility and type invariants
# ----------------------------------------------------------------------------

def test_min_feasible_retransmissions(a4):
    params = a4(0.05)
    # below the bound already on one attempt
    assert min_feasible_retransmissions(params, 0.05, 0.5) == 0
    # at the constraint-activating threshold for m=4 the answer is exactly 4
    m = min_feasible_retransmissions(params, 6.1361846441113664, 0.02)
    assert m == 4
    p = outage_probability(params, 6.1361846441113664)
    assert p ** (m + 1) <= 0.02 < p ** m
    assert min_feasible_retransmissions(a4(0.0), 100.0, 0.01) == 0


def test_drop_probability(a4):
    params = a4(0.05)
    p = outage_probability(params, 2.0)
    assert drop_probability(params, LinkPolicy(2.0, 3)) == pytest.approx(p ** 4, rel=REL)


def test_type_invariants():
    with pytest.raises(ValueError):
        LinkPolicy(beta=0.0)
    with pytest.raises(ValueError):
        LinkPolicy(beta=1.0, m=-1)
    with pytest.raises(ValueError):
        LinkPolicy(beta=1.0, m=1.5)  # type: ignore[arg-type]
    with pytest.raises(ValueError):
        QosConstraint(0.0)
    with pytest.raises(ValueError):
        QosConstraint(1.0)
    with pytest.raises(ValueError):
        ChannelParams(r0=0.0)
    with pytest.raises(ValueError):
        ChannelParams(density=-0.1)
    with pytest.raises(ValueError):
        ChannelParams(log_base=1.0)


def test_spectral_efficiency_bases():
    assert spectral_efficiency(1.0, 2.0) == pytest.approx(1.0, rel=REL)
    assert spectral_efficiency(math.e - 1.0) == pytest.approx(1.0, rel=REL)
