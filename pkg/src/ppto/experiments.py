"""Parameter sweeps and figure-grade datasets with CSV/SVG emission.

Five canonical figures:

* fig2 - throughput versus SIR threshold, one series per interferer density;
  the retransmission cap at each threshold is the smallest one meeting the
  drop-rate bound (recorded in metadata, switchable to the approximate
  attempt-count chain).
* fig3 - throughput versus total attempt budget 1+m at the
  constraint-activating threshold, one series per density.
* fig4 / fig5 - optimal throughput versus density, unconstrained curve plus
  one constrained curve per drop-rate bound; fig5 caps the retransmission
  budget.
* fig6 - optimal retransmission cap versus density, one series per bound.

Datasets embed full provenance: re-running :func:`dataset_from_metadata`
on a dataset's metadata reproduces every number bit for bit.  Rendering is
deterministic; identical datasets yield byte-identical SVG and CSV.
"""

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .analytic import (
    ChannelParams,
    LinkPolicy,
    QosConstraint,
    constrained_throughput,
    mean_attempts_approx,
    min_feasible_retransmissions,
    outage_probability,
    spectral_efficiency,
    throughput,
)
from .montecarlo import SimConfig, simulate_protocol
from .optimize import SearchConfig, beta_star, m_star, optimum_unconstrained

__all__ = [
    "SweepSpec",
    "Series",
    "FigureDataset",
    "RenderedFigure",
    "FigureStyle",
    "sweep_beta",
    "sweep_m",
    "sweep_lambda_optimal",
    "sweep_lambda_mstar",
    "run_sweep",
    "dataset_from_metadata",
    "default_spec",
    "render_figure",
    "spec_hash",
    "FIGURE_IDS",
]

FIGURE_IDS = ("fig2", "fig3", "fig4", "fig5", "fig6")

_ATTEMPT_MODELS = ("exact", "approx", "both")

_DEFAULT_M_CAP = 1000


# ============================================================================
#  Sweep specification and dataset containers
# ============================================================================

def _expand_grid(grid) -> tuple[float, ...]:
    """Accept an explicit sequence or a (min, max, count, spacing) range."""
    if (
        isinstance(grid, tuple)
        and len(grid) == 4
        and isinstance(grid[3], str)
    ):
        lo, hi, count, spacing = grid
        if spacing == "log":
            values = np.logspace(math.log10(lo), math.log10(hi), int(count))
        elif spacing == "linear":
            values = np.linspace(lo, hi, int(count))
        else:
            raise ValueError(f"grid spacing must be 'linear' or 'log', got {spacing!r}")
        return tuple(float(v) for v in values)
    return tuple(float(v) for v in grid)


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep, over which grid, and with which fixed parameters.

    densities lists the per-series interferer densities for beta and m
    sweeps (the grid itself is the density for lambda sweeps).  epsilons
    must hold exactly one bound for beta/m sweeps and one or more for
    lambda sweeps.  mc_overlay adds simulated points with error bars on
    ``mc_points`` evenly spaced grid indices and requires ``sim``.
    """

    sweep_variable: str
    grid: tuple
    fixed_params: ChannelParams = ChannelParams()
    epsilons: tuple = (0.02,)
    densities: tuple | None = None
    m_cap: int | None = None
    attempt_model: str = "exact"
    mc_overlay: bool = False
    sim: SimConfig | None = None
    mc_points: int = 8
    search: SearchConfig = SearchConfig()

    def __post_init__(self):
        if self.sweep_variable not in ("beta", "m", "lambda"):
            raise ValueError(f"unknown sweep_variable {self.sweep_variable!r}")
        object.__setattr__(self, "grid", _expand_grid(self.grid))
        if len(self.grid) == 0:
            raise ValueError("sweep grid must be non-empty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("sweep grid must be strictly increasing")
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))
        for eps in self.epsilons:
            QosConstraint(eps)
        if not self.epsilons:
            raise ValueError("epsilons must be non-empty")
        if self.densities is not None:
            object.__setattr__(
                self, "densities", tuple(float(d) for d in self.densities)
            )
        if self.m_cap is not None and self.m_cap < 0:
            raise ValueError(f"m_cap must be >= 0, got {self.m_cap}")
        if self.attempt_model not in _ATTEMPT_MODELS:
            raise ValueError(f"attempt_model must be one of {_ATTEMPT_MODELS}")
        if self.mc_overlay and self.sim is None:
            raise ValueError("mc_overlay requires a SimConfig with an explicit seed")
        if self.mc_points < 1:
            raise ValueError(f"mc_points must be >= 1, got {self.mc_points}")


@dataclass(frozen=True)
class Series:
    """One curve: y values on the shared grid, optional errors and flags."""

    label: str
    y: np.ndarray
    se: np.ndarray | None = None
    feasible: np.ndarray | None = None


@dataclass(frozen=True)
class FigureDataset:
    """Shared x grid, one or more series, and re-run provenance."""

    figure_id: str
    x: np.ndarray
    x_label: str
    y_label: str
    series: list[Series]
    metadata: dict


@dataclass(frozen=True)
class FigureStyle:
    """Rendering knobs; defaults give a 720x480 plot with a fixed palette."""

    width: int = 720
    height: int = 480
    log_x: bool | None = None  # None: follow the figure's conventional axis
    palette: tuple = (
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
        "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
    )


@dataclass(frozen=True)
class RenderedFigure:
    svg: str
    csv: str
    basename: str
    svg_path: Path | None = None
    csv_path: Path | None = None


# ============================================================================
#  Provenance helpers
# ============================================================================

def _spec_to_metadata(operation: str, figure_id: str, spec: SweepSpec) -> dict:
    from . import __version__

    params = spec.fixed_params
    return {
        "figure_id": figure_id,
        "operation": operation,
        "version": __version__,
        "sweep_variable": spec.sweep_variable,
        "grid": list(spec.grid),
        "params": {
            "alpha": params.alpha,
            "r0": params.r0,
            "density": params.density,
            "log_base": params.log_base,
        },
        "densities": None if spec.densities is None else list(spec.densities),
        "epsilons": list(spec.epsilons),
        "m_cap": spec.m_cap,
        "attempt_model": spec.attempt_model,
        "mc_overlay": spec.mc_overlay,
        "mc_points": spec.mc_points,
        "sim": None
        if spec.sim is None
        else {
            "seed": spec.sim.seed,
            "n_messages": spec.sim.n_messages,
            "window_radius_factor": spec.sim.window_radius_factor,
            "power_ratio": spec.sim.power_ratio,
            "streams": spec.sim.streams,
        },
        "search": {
            "m_max": spec.search.m_max,
            "bracket_hi_init": spec.search.bracket_hi_init,
            "root_tol": spec.search.root_tol,
            "max_bracket_expansions": spec.search.max_bracket_expansions,
        },
    }


def spec_hash(metadata: dict) -> str:
    """12-hex-digit digest of the dataset provenance; names output files."""
    blob = json.dumps(metadata, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _spec_from_metadata(meta: dict) -> SweepSpec:
    sim = None if meta["sim"] is None else SimConfig(**meta["sim"])
    return SweepSpec(
        sweep_variable=meta["sweep_variable"],
        grid=tuple(meta["grid"]),
        fixed_params=ChannelParams(**meta["params"]),
        epsilons=tuple(meta["epsilons"]),
        densities=None if meta["densities"] is None else tuple(meta["densities"]),
        m_cap=meta["m_cap"],
        attempt_model=meta["attempt_model"],
        mc_overlay=meta["mc_overlay"],
        sim=sim,
        mc_points=meta["mc_points"],
        search=SearchConfig(**meta["search"]),
    )


def dataset_from_metadata(meta: dict) -> FigureDataset:
    """Re-run the sweep recorded in a dataset's metadata."""
    operations = {
        "sweep_beta": sweep_beta,
        "sweep_m": sweep_m,
        "sweep_lambda_optimal": sweep_lambda_optimal,
        "sweep_lambda_mstar": sweep_lambda_mstar,
    }
    op = meta.get("operation")
    if op not in operations:
        raise ValueError(f"metadata names unknown operation {op!r}")
    return operations[op](_spec_from_metadata(meta))


# ============================================================================
#  Monte Carlo overlay helpers
# ============================================================================

def _overlay_indices(n: int, mc_points: int) -> np.ndarray:
    return np.unique(np.linspace(0, n - 1, min(mc_points, n)).round().astype(int))


def _overlay_sim(base: SimConfig, series_idx: int, point_idx: int) -> SimConfig:
    """Independent child seed per overlay point, derived from the root seed."""
    child = int(
        np.random.SeedSequence(
            base.seed, spawn_key=(series_idx, point_idx)
        ).generate_state(1, dtype=np.uint64)[0]
    )
    return replace(base, seed=child)


def _overlay_series(label, n_points, picks, runs) -> Series:
    """Assemble an MC overlay series from sparse (index, report) pairs."""
    y = np.full(n_points, np.nan)
    se = np.full(n_points, np.nan)
    for idx, report in zip(picks, runs):
        if report is None:
            continue
        y[idx] = report.throughput.mean
        se[idx] = report.throughput.std_error
    return Series(label=f"{label} mc", y=y, se=se)


# ============================================================================
#  Sweeps
# ============================================================================

def _require(spec: SweepSpec, variable: str, op: str) -> None:
    if spec.sweep_variable != variable:
        raise ValueError(f"{op} needs sweep_variable={variable!r}, got {spec.sweep_variable!r}")


def sweep_beta(spec: SweepSpec) -> FigureDataset:
    """Throughput versus SIR threshold (fig2 layout).

    At every threshold the cap is the smallest m whose drop rate meets the
    bound; points where no cap up to the budget is feasible carry NaN and a
    zero feasibility flag.
    """
    _require(spec, "beta", "sweep_beta")
    if spec.densities is None:
        raise ValueError("sweep_beta needs the per-series densities tuple")
    if len(spec.epsilons) != 1:
        raise ValueError("sweep_beta sweeps a single drop-rate bound")
    eps = spec.epsilons[0]
    cap = _DEFAULT_M_CAP if spec.m_cap is None else spec.m_cap
    grid = np.asarray(spec.grid)
    models = ("exact", "approx") if spec.attempt_model == "both" else (spec.attempt_model,)

    series: list[Series] = []
    overlay: list[Series] = []
    for s_idx, density in enumerate(spec.densities):
        params = replace(spec.fixed_params, density=density)
        chosen_m: list[int | None] = []
        for beta in grid:
            m = min_feasible_retransmissions(params, float(beta), eps)
            chosen_m.append(m if (m is not None and m <= cap) else None)
        feasible = np.array([m is not None for m in chosen_m], dtype=float)

        for model in models:
            y = np.full(grid.shape, np.nan)
            for i, (beta, m) in enumerate(zip(grid, chosen_m)):
                if m is None:
                    continue
                if model == "exact":
                    y[i] = throughput(params, LinkPolicy(float(beta), m))
                else:
                    p = outage_probability(params, float(beta))
                    y[i] = (
                        spectral_efficiency(float(beta), params.log_base)
                        * (1.0 - p ** (m + 1))
                        / mean_attempts_approx(eps, m)
                    )
            label = f"lambda={density:g}"
            if model == "approx":
                label += " approx"
            series.append(Series(label=label, y=y, feasible=feasible))

        if spec.mc_overlay:
            picks = _overlay_indices(grid.size, spec.mc_points)
            runs = []
            for j, i in enumerate(picks):
                m = chosen_m[i]
                if m is None:
                    runs.append(None)
                    continue
                sim = _overlay_sim(spec.sim, s_idx, j)
                runs.append(simulate_protocol(params, LinkPolicy(float(grid[i]), m), sim))
            overlay.append(_overlay_series(f"lambda={density:g}", grid.size, picks, runs))

    meta = _spec_to_metadata("sweep_beta", "fig2", spec)
    meta["m_policy"] = "smallest-feasible"
    return FigureDataset(
        figure_id="fig2",
        x=grid,
        x_label="beta",
        y_label="throughput",
        series=series + overlay,
        metadata=meta,
    )


def sweep_m(spec: SweepSpec) -> FigureDataset:
    """Throughput versus attempt budget 1+m at the activating threshold (fig3)."""
    _require(spec, "m", "sweep_m")
    if spec.densities is None:
        raise ValueError("sweep_m needs the per-series densities tuple")
    if len(spec.epsilons) != 1:
        raise ValueError("sweep_m sweeps a single drop-rate bound")
    eps = spec.epsilons[0]
    grid = np.asarray(spec.grid)
    if np.any(grid < 1) or np.any(grid != np.round(grid)):
        raise ValueError("sweep_m grid holds total attempt counts: integers >= 1")
    m_values = grid.astype(int) - 1

    series: list[Series] = []
    overlay: list[Series] = []
    for s_idx, density in enumerate(spec.densities):
        params = replace(spec.fixed_params, density=density)
        y = np.array([constrained_throughput(params, eps, int(m)) for m in m_values])
        label = f"lambda={density:g}"
        series.append(Series(label=label, y=y))
        if spec.mc_overlay:
            picks = _overlay_indices(grid.size, spec.mc_points)
            runs = []
            for j, i in enumerate(picks):
                m = int(m_values[i])
                beta = beta_star(params, eps, m)
                sim = _overlay_sim(spec.sim, s_idx, j)
                runs.append(simulate_protocol(params, LinkPolicy(beta, m), sim))
            overlay.append(_overlay_series(label, grid.size, picks, runs))

    return FigureDataset(
        figure_id="fig3",
        x=grid,
        x_label="one_plus_m",
        y_label="throughput",
        series=series + overlay,
        metadata=_spec_to_metadata("sweep_m", "fig3", spec),
    )


def sweep_lambda_optimal(spec: SweepSpec) -> FigureDataset:
    """Optimal throughput versus density: unconstrained plus per-bound curves.

    fig4 when the retransmission budget is unlimited, fig5 when spec.m_cap
    caps it.
    """
    _require(spec, "lambda", "sweep_lambda_optimal")
    grid = np.asarray(spec.grid)
    if np.any(grid <= 0):
        raise ValueError("density grid must be strictly positive")
    figure_id = "fig4" if spec.m_cap is None else "fig5"

    un = np.empty(grid.shape)
    for i, lam in enumerate(grid):
        params = replace(spec.fixed_params, density=float(lam))
        un[i] = optimum_unconstrained(params, spec.search).throughput_star
    series = [Series(label="unconstrained", y=un)]

    overlay: list[Series] = []
    for s_idx, eps in enumerate(spec.epsilons):
        y = np.empty(grid.shape)
        reports = []
        for i, lam in enumerate(grid):
            params = replace(spec.fixed_params, density=float(lam))
            report = m_star(params, eps, spec.search, m_cap=spec.m_cap)
            reports.append(report)
            y[i] = report.throughput_star
        label = f"epsilon={eps:g}"
        series.append(Series(label=label, y=y))
        if spec.mc_overlay:
            picks = _overlay_indices(grid.size, spec.mc_points)
            runs = []
            for j, i in enumerate(picks):
                params = replace(spec.fixed_params, density=float(grid[i]))
                report = reports[i]
                sim = _overlay_sim(spec.sim, s_idx, j)
                runs.append(
                    simulate_protocol(
                        params, LinkPolicy(report.beta_star, report.m_star), sim
                    )
                )
            overlay.append(_overlay_series(label, grid.size, picks, runs))

    return FigureDataset(
        figure_id=figure_id,
        x=grid,
        x_label="lambda",
        y_label="optimal throughput",
        series=series + overlay,
        metadata=_spec_to_metadata("sweep_lambda_optimal", figure_id, spec),
    )


def sweep_lambda_mstar(spec: SweepSpec) -> FigureDataset:
    """Optimal retransmission cap versus density, one series per bound (fig6).

    Monte Carlo overlays do not apply to an integer-valued design curve and
    are recorded as skipped in the metadata when requested.
    """
    _require(spec, "lambda", "sweep_lambda_mstar")
    grid = np.asarray(spec.grid)
    if np.any(grid <= 0):
        raise ValueError("density grid must be strictly positive")

    series = []
    for eps in spec.epsilons:
        y = np.empty(grid.shape)
        for i, lam in enumerate(grid):
            params = replace(spec.fixed_params, density=float(lam))
            y[i] = m_star(params, eps, spec.search, m_cap=spec.m_cap).m_star
        series.append(Series(label=f"epsilon={eps:g}", y=y))

    meta = _spec_to_metadata("sweep_lambda_mstar", "fig6", spec)
    if spec.mc_overlay:
        meta["mc_overlay_skipped"] = "integer design curve has no MC counterpart"
    return FigureDataset(
        figure_id="fig6",
        x=grid,
        x_label="lambda",
        y_label="optimal retransmission cap",
        series=series,
        metadata=meta,
    )


_OPERATIONS = {
    "fig2": sweep_beta,
    "fig3": sweep_m,
    "fig4": sweep_lambda_optimal,
    "fig5": sweep_lambda_optimal,
    "fig6": sweep_lambda_mstar,
}


def default_spec(
    figure_id: str,
    *,
    params: ChannelParams = ChannelParams(),
    mc_overlay: bool = False,
    sim: SimConfig | None = None,
    mc_points: int = 8,
    attempt_model: str = "exact",
) -> SweepSpec:
    """Canonical sweep specification for each figure."""
    common = dict(
        fixed_params=params,
        mc_overlay=mc_overlay,
        sim=sim,
        mc_points=mc_points,
    )
    if figure_id == "fig2":
        return SweepSpec(
            sweep_variable="beta",
            grid=(0.1, 30.0, 200, "log"),
            epsilons=(0.02,),
            densities=(0.0, 0.05, 0.1, 0.2),
            attempt_model=attempt_model,
            **common,
        )
    if figure_id == "fig3":
        return SweepSpec(
            sweep_variable="m",
            grid=tuple(range(1, 31)),
            epsilons=(0.02,),
            densities=(0.05, 0.1, 0.2),
            **common,
        )
    if figure_id in ("fig4", "fig5"):
        return SweepSpec(
            sweep_variable="lambda",
            grid=(0.01, 0.3, 50, "log"),
            epsilons=(0.1, 0.01, 0.001),
            m_cap=None if figure_id == "fig4" else 5,
            **common,
        )
    if figure_id == "fig6":
        return SweepSpec(
            sweep_variable="lambda",
            grid=(0.01, 0.3, 50, "log"),
            epsilons=(0.1, 0.01, 0.001),
            **common,
        )
    raise ValueError(f"unknown figure id {figure_id!r}; expected one of {FIGURE_IDS}")


def run_sweep(spec: SweepSpec, figure_id: str | None = None) -> FigureDataset:
    """Dispatch a spec to its sweep operation (by figure id or variable)."""
    if figure_id is not None:
        if figure_id not in _OPERATIONS:
            raise ValueError(f"unknown figure id {figure_id!r}; expected one of {FIGURE_IDS}")
        return _OPERATIONS[figure_id](spec)
    if spec.sweep_variable == "beta":
        return sweep_beta(spec)
    if spec.sweep_variable == "m":
        return sweep_m(spec)
    raise ValueError(
        "density sweeps are ambiguous without a figure id: pass 'fig4'/'fig5' "
        "for optimal throughput or 'fig6' for the optimal cap"
    )


# ============================================================================
#  CSV emission
# ============================================================================

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def dataset_to_csv(dataset: FigureDataset) -> str:
    """RFC-4180 CSV: header row, one row per grid point, one column per
    series; error-bar columns carry the _se suffix, feasibility flags the
    _feasible suffix."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    header = [dataset.x_label]
    for s in dataset.series:
        header.append(s.label)
        if s.se is not None:
            header.append(f"{s.label}_se")
        if s.feasible is not None:
            header.append(f"{s.label}_feasible")
    writer.writerow(header)
    for i, x in enumerate(dataset.x):
        row = [_fmt(x)]
        for s in dataset.series:
            row.append(_fmt(s.y[i]))
            if s.se is not None:
                row.append(_fmt(s.se[i]))
            if s.feasible is not None:
                row.append(_fmt(s.feasible[i]))
        writer.writerow(row)
    return buf.getvalue()


# ============================================================================
#  SVG emission
# ============================================================================

_LOG_X_FIGURES = {"fig2": True, "fig3": False, "fig4": True, "fig5": True, "fig6": True}


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _log_ticks(lo: float, hi: float) -> list[float]:
    ticks = []
    d = math.floor(math.log10(lo))
    while 10.0 ** d <= hi * (1 + 1e-12):
        for mant in (1.0, 2.0, 5.0):
            t = mant * 10.0 ** d
            if lo * (1 - 1e-12) <= t <= hi * (1 + 1e-12):
                ticks.append(t)
        d += 1
    return ticks or [lo, hi]


def dataset_to_svg(dataset: FigureDataset, style: FigureStyle = FigureStyle()) -> str:
    """Static SVG 1.1 line plot; same dataset always yields identical bytes."""
    if not dataset.series:
        raise ValueError("dataset has no series to render")
    width, height = style.width, style.height
    ml, mr, mt, mb = 64, 16, 14, 46
    pw, ph = width - ml - mr, height - mt - mb

    log_x = style.log_x
    if log_x is None:
        log_x = _LOG_X_FIGURES.get(dataset.figure_id, False)

    x = np.asarray(dataset.x, dtype=float)
    x_lo, x_hi = float(x[0]), float(x[-1])
    if log_x and x_lo <= 0:
        raise ValueError("log x axis needs strictly positive grid values")

    finite = []
    for s in dataset.series:
        y = np.asarray(s.y, dtype=float)
        finite.append(y[np.isfinite(y)])
        if s.se is not None:
            se = np.asarray(s.se, dtype=float)
            ok = np.isfinite(y) & np.isfinite(se)
            finite.append((y + 3 * se)[ok])
            finite.append((y - 3 * se)[ok])
    allv = np.concatenate([v for v in finite if v.size]) if finite else np.array([])
    if allv.size == 0:
        y_lo, y_hi = 0.0, 1.0
    else:
        y_lo, y_hi = float(allv.min()), float(allv.max())
        if y_hi == y_lo:
            y_hi = y_lo + 1.0
        pad = 0.05 * (y_hi - y_lo)
        y_lo = min(y_lo - pad, 0.0 if y_lo >= 0 else y_lo - pad)
        y_hi = y_hi + pad

    def sx(v: float) -> float:
        if log_x:
            f = (math.log10(v) - math.log10(x_lo)) / (math.log10(x_hi) - math.log10(x_lo))
        else:
            f = (v - x_lo) / (x_hi - x_lo) if x_hi > x_lo else 0.5
        return ml + f * pw

    def sy(v: float) -> float:
        return mt + (1.0 - (v - y_lo) / (y_hi - y_lo)) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<g fill="none" stroke="black" stroke-width="1">'
        f'<path d="M {ml} {mt} L {ml} {mt + ph} L {ml + pw} {mt + ph}"/></g>',
    ]

    x_ticks = _log_ticks(x_lo, x_hi) if log_x else _nice_ticks(x_lo, x_hi)
    for t in x_ticks:
        px = sx(t)
        out.append(
            f'<line x1="{px:.2f}" y1="{mt + ph}" x2="{px:.2f}" y2="{mt + ph + 5}" '
            f'stroke="black" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{px:.2f}" y="{mt + ph + 18}" font-family="sans-serif" '
            f'font-size="11" text-anchor="middle">{t:g}</text>'
        )
    for t in _nice_ticks(y_lo, y_hi):
        py = sy(t)
        out.append(
            f'<line x1="{ml - 5}" y1="{py:.2f}" x2="{ml}" y2="{py:.2f}" '
            f'stroke="black" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{ml - 8}" y="{py + 4:.2f}" font-family="sans-serif" '
            f'font-size="11" text-anchor="end">{t:g}</text>'
        )
    out.append(
        f'<text x="{ml + pw / 2:.2f}" y="{height - 10}" font-family="sans-serif" '
        f'font-size="13" text-anchor="middle">{dataset.x_label}</text>'
    )
    out.append(
        f'<text x="16" y="{mt + ph / 2:.2f}" font-family="sans-serif" font-size="13" '
        f'text-anchor="middle" transform="rotate(-90 16 {mt + ph / 2:.2f})">'
        f"{dataset.y_label}</text>"
    )

    for idx, s in enumerate(dataset.series):
        color = style.palette[idx % len(style.palette)]
        y = np.asarray(s.y, dtype=float)
        ok = np.isfinite(y)
        # NaN (infeasible or off-overlay) points break the polyline
        segments: list[list[str]] = [[]]
        for xi, yi, good in zip(x, y, ok):
            if good:
                segments[-1].append(f"{sx(float(xi)):.2f},{sy(float(yi)):.2f}")
            elif segments[-1]:
                segments.append([])
        for seg in segments:
            if len(seg) >= 2:
                out.append(
                    f'<polyline points="{" ".join(seg)}" fill="none" '
                    f'stroke="{color}" stroke-width="1.6"/>'
                )
        if s.se is not None:
            se = np.asarray(s.se, dtype=float)
            for xi, yi, si in zip(x, y, se):
                if not (np.isfinite(yi) and np.isfinite(si)):
                    continue
                px = sx(float(xi))
                top, bot = sy(float(yi + 3 * si)), sy(float(yi - 3 * si))
                out.append(
                    f'<g class="errorbar" stroke="{color}" stroke-width="1">'
                    f'<line x1="{px:.2f}" y1="{top:.2f}" x2="{px:.2f}" y2="{bot:.2f}"/>'
                    f'<line x1="{px - 3:.2f}" y1="{top:.2f}" x2="{px + 3:.2f}" y2="{top:.2f}"/>'
                    f'<line x1="{px - 3:.2f}" y1="{bot:.2f}" x2="{px + 3:.2f}" y2="{bot:.2f}"/>'
                    f"</g>"
                )
                out.append(
                    f'<circle cx="{px:.2f}" cy="{sy(float(yi)):.2f}" r="2.4" '
                    f'fill="{color}"/>'
                )

    lx, ly = ml + pw - 180, mt + 8
    for idx, s in enumerate(dataset.series):
        color = style.palette[idx % len(style.palette)]
        yy = ly + 16 * idx
        out.append(
            f'<line x1="{lx}" y1="{yy + 4}" x2="{lx + 22}" y2="{yy + 4}" '
            f'stroke="{color}" stroke-width="1.6"/>'
        )
        out.append(
            f'<text x="{lx + 28}" y="{yy + 8}" font-family="sans-serif" '
            f'font-size="11">{s.label}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_figure(
    dataset: FigureDataset,
    outdir: str | Path | None = None,
    style: FigureStyle = FigureStyle(),
) -> RenderedFigure:
    """Emit the dataset as CSV and SVG, optionally writing both files.

    Files are named <figure_id>_<provenance-hash>.{csv,svg}.  I/O failures
    are re-raised with the offending path attached.
    """
    if not dataset.series:
        raise ValueError("dataset has no series to render")
    svg = dataset_to_svg(dataset, style)
    csv_text = dataset_to_csv(dataset)
    basename = f"{dataset.figure_id}_{spec_hash(dataset.metadata)}"
    svg_path = csv_path = None
    if outdir is not None:
        outdir = Path(outdir)
        try:
            outdir.mkdir(parents=True, exist_ok=True)
            csv_path = outdir / f"{basename}.csv"
            csv_path.write_text(csv_text, encoding="utf-8", newline="")
            svg_path = outdir / f"{basename}.svg"
            svg_path.write_text(svg, encoding="utf-8", newline="")
        except OSError as exc:
            raise OSError(f"cannot write figure files under {outdir}: {exc}") from exc
    return RenderedFigure(
        svg=svg, csv=csv_text, basename=basename, svg_path=svg_path, csv_path=csv_path
    )
