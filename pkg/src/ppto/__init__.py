"""Throughput of an ARQ link in a Poisson field of interferers.

Closed-form link model (:mod:`ppto.analytic`), constrained and
unconstrained throughput optimizers (:mod:`ppto.optimize`), Monte Carlo
validation (:mod:`ppto.montecarlo`), figure-grade parameter sweeps
(:mod:`ppto.experiments`) and a command-line front end (:mod:`ppto.cli`).
"""

from .analytic import (
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
from .montecarlo import (
    AttemptSample,
    McEstimate,
    ProtocolReport,
    SimConfig,
    backend,
    estimate_outage,
    sample_sir,
    seeded_stream,
    simulate_protocol,
    truncation_bias_ratio,
)
from .optimize import (
    OptimaGap,
    OptimumReport,
    SearchConfig,
    SolverError,
    beta_star,
    beta_star_unconstrained,
    m_star,
    optimum_unconstrained,
    stationarity_residual,
    unconstrained_throughput,
    verify_optima_coincide,
)

__version__ = "0.1.0"
