"""Command-line front end: eval, optimize, simulate, reproduce.

Configuration precedence is flags > config file > built-in defaults.  The
config file is flat ``key = value`` text (``#`` starts a comment); keys are
the long flag names with dashes replaced by underscores.  All randomness
flows from an explicit ``--seed``; simulation without one is an error, not
silent nondeterminism.

Exit codes: 0 success, 2 argument or configuration error, 3 solver
failure, 4 output I/O failure.
"""

import argparse
import math
import os
import sys
from pathlib import Path

from . import __version__
from .analytic import (
    ChannelParams,
    LinkPolicy,
    drop_probability,
    geometry_constant,
    mean_attempts,
    outage_probability,
    throughput,
)
from .experiments import FIGURE_IDS, default_spec, render_figure, run_sweep
from .montecarlo import SimConfig, backend, estimate_outage, simulate_protocol
from .optimize import (
    SearchConfig,
    SolverError,
    m_star,
    optimum_unconstrained,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SOLVER = 3
EXIT_IO = 4

_ENV_OUTPUT_DIR = "PPTO_OUTPUT_DIR"

# key -> parser for values coming from the config file
_CONFIG_TYPES = {
    "alpha": float,
    "r0": float,
    "lambda": float,
    "log_base": str,
    "beta": float,
    "m": int,
    "epsilon": float,
    "m_cap": int,
    "m_max": int,
    "bracket_hi_init": float,
    "root_tol": float,
    "max_bracket_expansions": int,
    "n": int,
    "seed": int,
    "window_factor": float,
    "power_ratio": float,
    "streams": int,
    "outdir": str,
    "figure": str,
    "mc_overlay": None,  # bool, parsed specially
    "mc_points": int,
    "attempt_model": str,
    "unconstrained": None,
}

_DEFAULTS = {
    "alpha": 4.0,
    "r0": 1.0,
    "log_base": "e",
    "m": 0,
    "m_max": 1000,
    "bracket_hi_init": 1e3,
    "root_tol": 1e-10,
    "max_bracket_expansions": 60,
    "n": 100_000,
    "window_factor": 100.0,
    "power_ratio": 1.0,
    "streams": 4,
    "figure": "all",
    "mc_overlay": False,
    "mc_points": 8,
    "attempt_model": "exact",
    "unconstrained": False,
}


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _read_config(path: str) -> dict:
    """Flat key = value file; unknown keys are rejected early."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _CONFIG_TYPES:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        value = value.strip()
        caster = _CONFIG_TYPES[key]
        try:
            values[key] = _parse_bool(value) if caster is None else caster(value)
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


class _Settings:
    """Resolved values with flags > config file > defaults precedence."""

    def __init__(self, args: argparse.Namespace, parser: argparse.ArgumentParser):
        self._args = vars(args)
        self._parser = parser
        self._file = _read_config(args.config) if args.config else {}

    def get(self, key: str, default=None):
        flag_value = self._args.get(key if key != "lambda" else "lam")
        if flag_value is not None:
            return flag_value
        if key in self._file:
            return self._file[key]
        if key in _DEFAULTS:
            return _DEFAULTS[key]
        return default

    def require(self, key: str):
        value = self.get(key)
        if value is None:
            self._parser.error(f"argument --{key.replace('_', '-')} is required")
        return value

    def channel_params(self) -> ChannelParams:
        base = self.get("log_base")
        if isinstance(base, str):
            if base not in ("2", "e"):
                raise ValueError(f"--log-base must be 2 or e, got {base!r}")
            base = 2.0 if base == "2" else math.e
        return ChannelParams(
            alpha=self.get("alpha"),
            r0=self.get("r0"),
            density=self.require("lambda"),
            log_base=base,
        )

    def search_config(self) -> SearchConfig:
        return SearchConfig(
            m_max=self.get("m_max"),
            bracket_hi_init=self.get("bracket_hi_init"),
            root_tol=self.get("root_tol"),
            max_bracket_expansions=self.get("max_bracket_expansions"),
        )

    def sim_config(self) -> SimConfig:
        return SimConfig(
            seed=self.require("seed"),
            n_messages=self.get("n"),
            window_radius_factor=self.get("window_factor"),
            power_ratio=self.get("power_ratio"),
            streams=self.get("streams"),
        )

    def outdir(self) -> Path:
        value = self._args.get("outdir") or self._file.get("outdir") \
            or os.environ.get(_ENV_OUTPUT_DIR) or "figures"
        return Path(value)


def _emit(record: dict) -> None:
    for key, value in record.items():
        if value is None:
            continue
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, float):
            text = format(value, ".12g")
        else:
            text = str(value)
        print(f"{key} = {text}")


def _note(args, message: str) -> None:
    if getattr(args, "verbose", 0):
        print(message, file=sys.stderr)


# ============================================================================
#  Subcommands
# ============================================================================

def cmd_eval(args, parser) -> int:
    cfg = _Settings(args, parser)
    params = cfg.channel_params()
    beta = cfg.require("beta")
    policy = LinkPolicy(beta=beta, m=cfg.get("m"))
    p = outage_probability(params, policy.beta)
    drop = drop_probability(params, policy)
    record = {
        "k": geometry_constant(params),
        "p_out": p,
        "mean_attempts": mean_attempts(p, policy.m),
        "throughput": throughput(params, policy),
        "drop_rate": drop,
    }
    eps = cfg.get("epsilon")
    if eps is not None:
        record["epsilon"] = float(eps)
        record["feasible"] = drop <= eps
    _emit(record)
    return EXIT_OK


def cmd_optimize(args, parser) -> int:
    cfg = _Settings(args, parser)
    params = cfg.channel_params()
    search = cfg.search_config()
    unconstrained = cfg.get("unconstrained")
    eps = cfg.get("epsilon")
    if unconstrained and eps is not None:
        parser.error("pass either --epsilon or --unconstrained, not both")
    if not unconstrained and eps is None:
        parser.error("argument --epsilon is required (or pass --unconstrained)")

    if unconstrained:
        report = optimum_unconstrained(params, search)
        _emit(
            {
                "mode": "unconstrained",
                "beta_star_un": report.beta_star,
                "throughput_star": report.throughput_star,
                "p_out_at_opt": report.p_out_at_opt,
                "mean_attempts": report.mean_attempts_at_opt,
                "interference_free": report.interference_free,
            }
        )
        return EXIT_OK

    report = m_star(params, eps, search, m_cap=cfg.get("m_cap"))
    active = (
        report.drop_rate is not None
        and abs(report.drop_rate - eps) <= 1e-9 * eps
    )
    _emit(
        {
            "mode": "constrained",
            "beta_star": report.beta_star,
            "m_star": report.m_star,
            "one_plus_m_star": None if report.m_star is None else 1 + report.m_star,
            "throughput_star": report.throughput_star,
            "p_out_at_opt": report.p_out_at_opt,
            "mean_attempts": report.mean_attempts_at_opt,
            "drop_rate": report.drop_rate,
            "epsilon": float(eps),
            "constraint_active": bool(active or report.interference_free),
            "at_cap": report.at_cap,
            "interference_free": report.interference_free,
        }
    )
    return EXIT_OK


def cmd_simulate(args, parser) -> int:
    cfg = _Settings(args, parser)
    params = cfg.channel_params()
    sim = cfg.sim_config()
    sim.validate_for(params)
    beta = cfg.require("beta")
    policy = LinkPolicy(beta=beta, m=cfg.get("m"))
    _note(args, f"kernel backend: {backend()}")

    report = simulate_protocol(params, policy, sim)
    _emit(
        {
            "n_messages": report.n_messages,
            "total_attempts": report.total_attempts,
            "n_success": report.n_success,
            "p_out": report.attempt_outage.mean,
            "p_out_se": report.attempt_outage.std_error,
            "throughput": report.throughput.mean,
            "throughput_se": report.throughput.std_error,
            "drop_rate": report.drop_rate.mean,
            "drop_rate_se": report.drop_rate.std_error,
            "mean_attempts": report.mean_attempts.mean,
            "mean_attempts_se": report.mean_attempts.std_error,
        }
    )
    return EXIT_OK


def cmd_reproduce(args, parser) -> int:
    cfg = _Settings(args, parser)
    figure = cfg.get("figure")
    if figure != "all" and figure not in FIGURE_IDS:
        parser.error(
            f"argument --figure: invalid choice {figure!r} "
            f"(choose from {', '.join(FIGURE_IDS)}, all)"
        )
    figures = FIGURE_IDS if figure == "all" else (figure,)

    base = ChannelParams(
        alpha=cfg.get("alpha"), r0=cfg.get("r0"), density=0.05,
        log_base=2.0 if cfg.get("log_base") == "2" else math.e,
    )
    mc_overlay = cfg.get("mc_overlay")
    sim = None
    if mc_overlay:
        sim = cfg.sim_config()
        sim.validate_for(base)
    outdir = cfg.outdir()

    for figure_id in figures:
        spec = default_spec(
            figure_id,
            params=base,
            mc_overlay=mc_overlay,
            sim=sim,
            mc_points=cfg.get("mc_points"),
            attempt_model=cfg.get("attempt_model"),
        )
        dataset = run_sweep(spec, figure_id)
        rendered = render_figure(dataset, outdir)
        print(f"wrote {rendered.csv_path}")
        print(f"wrote {rendered.svg_path}")

    _print_summary(base, cfg.search_config())
    return EXIT_OK


def _print_summary(base: ChannelParams, search: SearchConfig) -> None:
    """Headline operating points for the canonical densities."""
    eps = 0.02
    print()
    print(f"operating points at epsilon = {eps:g} (natural log throughput)")
    header = (
        f"{'lambda':>8} {'beta*':>9} {'1+m*':>5} {'T*':>9} "
        f"{'beta*_un':>9} {'T*_un':>9} {'p_out_un':>9}"
    )
    print(header)
    import dataclasses

    for density in (0.05, 0.1, 0.2):
        params = dataclasses.replace(base, density=density, log_base=math.e)
        con = m_star(params, eps, search)
        un = optimum_unconstrained(params, search)
        print(
            f"{density:>8g} {con.beta_star:>9.4g} {1 + con.m_star:>5d} "
            f"{con.throughput_star:>9.4g} {un.beta_star:>9.4g} "
            f"{un.throughput_star:>9.4g} {un.p_out_at_opt:>9.4g}"
        )


# ============================================================================
#  Parser
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppto",
        description=(
            "Throughput of an ARQ link in a Poisson field of interferers: "
            "closed forms, optimizers, Monte Carlo validation and figure "
            "reproduction."
        ),
    )
    parser.add_argument("--version", action="version", version=f"ppto {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument("--alpha", type=float, help="path-loss exponent (> 2)")
        p.add_argument("--r0", type=float, help="reference link distance")
        p.add_argument(
            "--lambda", dest="lam", type=float, help="interferer density per unit area"
        )
        p.add_argument(
            "--log-base", dest="log_base", choices=("2", "e"),
            help="throughput log base: 2 for bits, e for nats (default e)",
        )
        p.add_argument("-v", "--verbose", action="count", default=0)

    p_eval = sub.add_parser("eval", help="evaluate the closed-form link metrics")
    add_common(p_eval)
    p_eval.add_argument("--beta", type=float, help="SIR decoding threshold")
    p_eval.add_argument("--m", type=int, help="retransmission cap (default 0)")
    p_eval.add_argument(
        "--epsilon", type=float, help="drop-rate bound for the feasibility check"
    )
    p_eval.set_defaults(func=cmd_eval)

    p_opt = sub.add_parser("optimize", help="solve for the optimal (beta, m) design")
    add_common(p_opt)
    p_opt.add_argument("--epsilon", type=float, help="drop-rate bound")
    p_opt.add_argument(
        "--unconstrained", action="store_const", const=True,
        help="maximize without a drop-rate bound",
    )
    p_opt.add_argument("--m-cap", dest="m_cap", type=int, help="cap the retransmission budget")
    p_opt.add_argument("--m-max", dest="m_max", type=int, help="integer scan ceiling")
    p_opt.add_argument("--root-tol", dest="root_tol", type=float)
    p_opt.add_argument("--bracket-hi-init", dest="bracket_hi_init", type=float)
    p_opt.add_argument("--max-bracket-expansions", dest="max_bracket_expansions", type=int)
    p_opt.set_defaults(func=cmd_optimize)

    p_sim = sub.add_parser("simulate", help="Monte Carlo run of the ARQ protocol")
    add_common(p_sim)
    p_sim.add_argument("--beta", type=float, help="SIR decoding threshold")
    p_sim.add_argument("--m", type=int, help="retransmission cap (default 0)")
    p_sim.add_argument("--n", type=int, help="messages to simulate (default 100000)")
    p_sim.add_argument("--seed", type=int, help="root RNG seed (required)")
    p_sim.add_argument(
        "--window-factor", dest="window_factor", type=float,
        help="simulation disk radius as a multiple of r0 (default 100)",
    )
    p_sim.add_argument("--power-ratio", dest="power_ratio", type=float)
    p_sim.add_argument("--streams", type=int, help="worker threads (never changes results)")
    p_sim.set_defaults(func=cmd_simulate)

    p_rep = sub.add_parser("reproduce", help="emit the figure datasets as CSV + SVG")
    add_common(p_rep)
    p_rep.add_argument("--figure", choices=FIGURE_IDS + ("all",), help="figure to emit")
    p_rep.add_argument("--outdir", help=f"output directory (or ${_ENV_OUTPUT_DIR})")
    p_rep.add_argument(
        "--mc-overlay", dest="mc_overlay", action="store_const", const=True,
        help="add Monte Carlo points with error bars (needs --seed)",
    )
    p_rep.add_argument("--n", type=int, help="messages per overlay point")
    p_rep.add_argument("--seed", type=int, help="root RNG seed for overlays")
    p_rep.add_argument("--mc-points", dest="mc_points", type=int)
    p_rep.add_argument(
        "--attempt-model", dest="attempt_model", choices=("exact", "approx", "both"),
        help="attempt-count chain for the threshold sweep",
    )
    p_rep.add_argument("--window-factor", dest="window_factor", type=float)
    p_rep.add_argument("--power-ratio", dest="power_ratio", type=float)
    p_rep.add_argument("--streams", type=int)
    p_rep.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args, parser)
    except SystemExit as exc:  # parser.error inside a command
        return EXIT_USAGE if exc.code else EXIT_OK
    except SolverError as exc:
        print(f"ppto: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"ppto: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ppto: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
