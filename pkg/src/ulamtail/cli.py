"""Configuration-driven experiment runner.

Commands read a TOML config with [map], [noise], [grid], [run], and [output]
sections; command-line flags override config values. Outputs are CSV files
(comma separated, LF, '#' metadata header lines, 17 significant digits) and
JSON reports that echo the resolved configuration.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ._version import __version__
from .errors import ConfigError, UlamTailError

__all__ = ["ExperimentConfig", "load_config", "main"]

_SECTION_KEYS = {
    "map": {
        "family", "b", "lam", "alpha", "r", "sigma", "sigma_star_factor",
        "domain", "knots", "values",
    },
    "noise": {"kind", "k"},
    "grid": {"n_cells", "grading", "ratio", "anchor"},
    "run": {
        "seed", "sigma_grid", "sigma_min", "sigma_max", "sigma_points",
        "window", "window_points", "n_samples", "burn_in", "n_chains", "x0",
        "interval", "tol", "max_iter", "m_q", "reference_density",
    },
    "output": {"directory", "formats"},
}


@dataclass
class ExperimentConfig:
    map: dict = field(default_factory=dict)
    noise: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    run: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "map": dict(self.map),
            "noise": dict(self.noise),
            "grid": dict(self.grid),
            "run": dict(self.run),
            "output": dict(self.output),
        }


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"config parse error in {path}: {e}")
    for section, content in data.items():
        if section not in _SECTION_KEYS:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(content, dict):
            raise ConfigError(f"config section [{section}] must be a table")
        unknown = set(content) - _SECTION_KEYS[section]
        if unknown:
            raise ConfigError(
                f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}"
            )
    return ExperimentConfig(**{s: data.get(s, {}) for s in _SECTION_KEYS})


def _require(section: dict, name: str, key: str):
    if key not in section:
        raise ConfigError(f"[{name}] is missing required key '{key}'")
    return section[key]


def _build_map(map_cfg: dict):
    from . import boundary, map_model

    family = _require(map_cfg, "map", "family")
    domain = map_cfg.get("domain")
    if domain is not None:
        domain = (float(domain[0]), float(domain[1]))
    if family == "tanh_affine":
        b = float(_require(map_cfg, "map", "b"))
        has_sigma = "sigma" in map_cfg
        has_factor = "sigma_star_factor" in map_cfg
        if has_sigma == has_factor:
            raise ConfigError("[map] needs exactly one of 'sigma' or 'sigma_star_factor'")
        if has_factor:
            if not b > 2:
                raise ConfigError("'sigma_star_factor' requires b > 2")
            sigma_star, _ = boundary.bifurcation_parameter(b)
            sigma = float(map_cfg["sigma_star_factor"]) * sigma_star
        else:
            sigma = float(map_cfg["sigma"])
        return map_model.tanh_affine(b, sigma, domain)
    if family == "affine":
        return map_model.affine(
            float(_require(map_cfg, "map", "lam")),
            float(_require(map_cfg, "map", "sigma")),
            domain,
        )
    if family == "power_nonhyp":
        return map_model.power_nonhyp(
            float(_require(map_cfg, "map", "alpha")),
            int(_require(map_cfg, "map", "r")),
            float(_require(map_cfg, "map", "sigma")),
            domain,
        )
    if family == "user":
        return _build_user_map(map_cfg, domain)
    raise ConfigError(f"unknown map family {map_cfg.get('family')!r}")


def _build_user_map(map_cfg: dict, domain):
    """Monotone spline through (knots, values) plus additive noise."""
    import numpy as np
    from scipy.interpolate import PchipInterpolator

    from . import map_model

    knots = np.asarray(_require(map_cfg, "map", "knots"), dtype=float)
    values = np.asarray(_require(map_cfg, "map", "values"), dtype=float)
    sigma = float(_require(map_cfg, "map", "sigma"))
    if knots.ndim != 1 or knots.shape != values.shape or len(knots) < 2:
        raise ConfigError("'knots' and 'values' must be 1-d lists of equal length >= 2")
    if np.any(np.diff(knots) <= 0) or np.any(np.diff(values) <= 0):
        raise ConfigError("'knots' and 'values' must both be strictly increasing")
    if sigma <= 0:
        raise ConfigError("'sigma' must be positive")
    spline = PchipInterpolator(knots, values)
    dspline = spline.derivative()
    if domain is None:
        domain = (float(knots[0]), float(knots[-1]))
    return map_model.user_tabulated(
        lambda x, w: spline(x) + sigma * w,
        domain,
        dh_dx=lambda x, w: dspline(x),
        dh_domega=lambda x, w: np.full_like(np.asarray(x, dtype=float), sigma),
    )


def _build_noise(noise_cfg: dict):
    from . import noise as noise_mod

    kind = noise_cfg.get("kind", "uniform")
    k = int(noise_cfg.get("k", 0))
    if kind == "uniform":
        if k != 0:
            raise ConfigError("uniform noise has k = 0")
        return noise_mod.uniform_noise()
    if kind == "poly_upper":
        return noise_mod.poly_upper_noise(k)
    if kind == "poly_symmetric":
        return noise_mod.poly_symmetric_noise(k)
    raise ConfigError(f"unknown noise kind {kind!r}")


def _select_interval(m, run_cfg: dict):
    """Resolve [run] interval to (lo, hi): an invariant interval or the domain."""
    from . import boundary
    from .errors import NumericalError

    choice = run_cfg.get("interval", "upper")
    if choice == "domain":
        return m.domain, None
    intervals = boundary.minimal_invariant_intervals(m)
    if not intervals:
        raise NumericalError("no minimal invariant interval located")
    if choice == "upper":
        picked = intervals[-1]
    elif choice == "lower":
        picked = intervals[0]
    elif isinstance(choice, int) and not isinstance(choice, bool):
        if not 0 <= choice < len(intervals):
            raise ConfigError(
                f"interval index {choice} out of range (found {len(intervals)})"
            )
        picked = intervals[choice]
    else:
        raise ConfigError(f"[run] interval must be 'upper', 'lower', 'domain', or an index")
    return picked.bounds, picked


def _build_grid(grid_cfg: dict, interval: tuple[float, float]):
    from . import ulam

    n_cells = int(grid_cfg.get("n_cells", 1000))
    grading = grid_cfg.get("grading", "uniform")
    ratio = float(grid_cfg.get("ratio", 0.995))
    anchor = grid_cfg.get("anchor")
    if anchor == "lo":
        anchor = interval[0]
    elif anchor == "hi":
        anchor = interval[1]
    elif anchor is None and grading == "geometric":
        anchor = interval[1]
    elif anchor is not None:
        anchor = float(anchor)
    return ulam.build_grid(interval, n_cells, grading=grading, ratio=ratio, anchor=anchor)


def _resolve_window(run_cfg: dict, classification):
    import numpy as np

    from . import scaling

    window = run_cfg.get("window")
    if window is None:
        return scaling.default_window(classification)
    if len(window) != 2 or not all(isinstance(w, (int, float)) for w in window):
        raise ConfigError("[run] window must be [d_max, d_min]")
    hi, lo = float(window[0]), float(window[1])
    if not 0 < lo < hi:
        raise ConfigError("[run] window must satisfy 0 < d_min < d_max")
    return np.geomspace(hi, lo, int(run_cfg.get("window_points", 20)))


# --- output helpers ---------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _meta_lines(command: str, config: ExperimentConfig) -> list[str]:
    return [
        f"ulamtail {__version__} {command}",
        "config " + json.dumps(config.as_dict(), sort_keys=True),
    ]


def _write_csv(path: str, meta: list[str], header: list[str], rows) -> None:
    with open(path, "w", newline="") as f:
        for line in meta:
            f.write(f"# {line}\n")
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: str, command: str, config: ExperimentConfig, payload: dict) -> None:
    doc = {"version": __version__, "command": command, "config": config.as_dict()}
    doc.update(payload)
    with open(path, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=False)
        f.write("\n")


def _interval_dict(interval) -> dict | None:
    if interval is None:
        return None
    return {"lo": interval.lo, "hi": interval.hi, "verified": interval.verified}


def _classification_dict(c) -> dict:
    return {"kind": c.kind, "lam": c.lam, "r": c.r, "alpha": c.alpha, "gamma": c.gamma}


def _report_dict(rep) -> dict:
    fit = None
    if rep.fit_details is not None:
        fit = {
            "slope": rep.fit_details.slope,
            "intercept": rep.fit_details.intercept,
            "residual": rep.fit_details.residual,
        }
    return {
        "mode": rep.mode,
        "window": [float(d) for d in rep.window],
        "raw_values": [float(v) for v in rep.raw_values],
        "estimate": rep.estimate,
        "theory": rep.theory,
        "rel_error": rep.rel_error,
        "fit_details": fit,
        "converged": rep.converged,
    }


def _outdir(config: ExperimentConfig) -> str:
    directory = config.output.get("directory", ".")
    os.makedirs(directory, exist_ok=True)
    return directory


# --- commands ---------------------------------------------------------------

def cmd_analyze(config: ExperimentConfig) -> int:
    from . import boundary

    m = _build_map(config.map)
    fps = {}
    for which in ("upper", "lower"):
        points = boundary.find_fixed_points(m, which=which)
        fps[which] = [
            {
                "x_star": p.x_star,
                "which": p.which,
                "multiplier": p.multiplier,
                "stability": p.stability,
            }
            for p in points
        ]
    intervals = boundary.minimal_invariant_intervals(m)
    rows = []
    for ival in intervals:
        entry = {"interval": _interval_dict(ival)}
        try:
            entry["boundary"] = _classification_dict(
                boundary.classify_boundary(m, ival.hi)
            )
        except UlamTailError as e:
            entry["boundary"] = {"error": str(e)}
        rows.append(entry)
    out = _outdir(config)
    _write_json(
        os.path.join(out, "analysis.json"),
        "analyze",
        config,
        {
            "family": m.family,
            "sigma": m.sigma,
            "domain": list(m.domain),
            "fixed_points": fps,
            "n_intervals": len(intervals),
            "intervals": rows,
        },
    )
    return 0


def cmd_density(config: ExperimentConfig) -> int:
    from . import ulam

    m = _build_map(config.map)
    noise = _build_noise(config.noise)
    bounds, picked = _select_interval(m, config.run)
    grid = _build_grid(config.grid, bounds)
    matrix = ulam.assemble(m, noise, grid, m_q=int(config.run.get("m_q", 4)))
    density = ulam.stationary(
        matrix,
        tol=float(config.run.get("tol", 1e-13)),
        max_iter=int(config.run.get("max_iter", 10**6)),
    )
    out = _outdir(config)
    meta = _meta_lines("density", config)
    edges = grid.edges
    _write_csv(
        os.path.join(out, "density.csv"),
        meta,
        ["x_lo", "x_hi", "x_mid", "phi"],
        zip(edges[:-1], edges[1:], grid.midpoints, density.phi),
    )
    _write_json(
        os.path.join(out, "meta.json"),
        "density",
        config,
        {
            "interval": _interval_dict(picked) or {"lo": bounds[0], "hi": bounds[1]},
            "n_cells": grid.n_cells,
            "residual": density.residual,
            "mass": density.mass,
            "row_defect": matrix.row_defect,
        },
    )
    return 0


def cmd_bifurcation(config: ExperimentConfig) -> int:
    import numpy as np

    from . import boundary

    family = config.map.get("family", "tanh_affine")
    if family != "tanh_affine":
        raise ConfigError("bifurcation command requires family = 'tanh_affine'")
    b = float(_require(config.map, "map", "b"))
    if not b > 2:
        raise ConfigError(f"bifurcation requires b > 2, got b = {b}")
    run = config.run
    if "sigma_grid" in run:
        sigma_grid = [float(s) for s in run["sigma_grid"]]
    else:
        lo = float(_require(run, "run", "sigma_min"))
        hi = float(_require(run, "run", "sigma_max"))
        n = int(run.get("sigma_points", 50))
        sigma_grid = np.linspace(lo, hi, n)
    sigma_star, x_plus = boundary.bifurcation_parameter(b)
    rows = boundary.bifurcation_scan("tanh_affine", b, sigma_grid)
    max_n = max(r.n_intervals for r in rows)
    header = ["sigma", "n_intervals"]
    for i in range(max_n):
        header += [f"lo{i + 1}", f"hi{i + 1}"]
    csv_rows = []
    for r in rows:
        row = [r.sigma, r.n_intervals]
        for ival in r.intervals:
            row += [ival.lo, ival.hi]
        row += [float("nan")] * (2 * max_n - 2 * r.n_intervals)
        csv_rows.append(row)
    out = _outdir(config)
    _write_csv(
        os.path.join(out, "bifurcation.csv"),
        _meta_lines("bifurcation", config),
        header,
        csv_rows,
    )
    _write_json(
        os.path.join(out, "meta.json"),
        "bifurcation",
        config,
        {"b": b, "sigma_star": sigma_star, "x_plus_at_sigma_star": x_plus},
    )
    return 0


def cmd_scaling(config: ExperimentConfig) -> int:
    from . import boundary, scaling, ulam

    m = _build_map(config.map)
    noise = _build_noise(config.noise)
    bounds, picked = _select_interval(m, config.run)
    x_plus = bounds[1]
    classification = boundary.classify_boundary(m, x_plus)
    grid = _build_grid(config.grid, bounds)
    matrix = ulam.assemble(m, noise, grid, m_q=int(config.run.get("m_q", 4)))
    density = ulam.stationary(
        matrix,
        tol=float(config.run.get("tol", 1e-13)),
        max_iter=int(config.run.get("max_iter", 10**6)),
    )
    window = _resolve_window(config.run, classification)
    k = noise.k
    density_report = scaling.density_tail_exponent(
        density, x_plus, classification, window=window, k=k
    )
    tail_report = scaling.measure_tail_exponent(
        density, x_plus, classification, window=window, k=k
    )
    fit = scaling.loglog_fit(density, x_plus, classification, window=window)
    out = _outdir(config)
    meta = _meta_lines("scaling", config)
    _write_csv(
        os.path.join(out, "scaling.csv"),
        meta,
        ["d", "raw_value"],
        zip(density_report.window, density_report.raw_values),
    )
    edges = grid.edges
    _write_csv(
        os.path.join(out, "density.csv"),
        meta,
        ["x_lo", "x_hi", "x_mid", "phi"],
        zip(edges[:-1], edges[1:], grid.midpoints, density.phi),
    )
    _write_json(
        os.path.join(out, "report.json"),
        "scaling",
        config,
        {
            "interval": _interval_dict(picked) or {"lo": bounds[0], "hi": bounds[1]},
            "classification": _classification_dict(classification),
            "residual": density.residual,
            "density_report": _report_dict(density_report),
            "tail_report": _report_dict(tail_report),
            "loglog_fit": {
                "slope": fit.slope,
                "intercept": fit.intercept,
                "residual": fit.residual,
            },
        },
    )
    return 0


def cmd_simulate(config: ExperimentConfig) -> int:
    from . import montecarlo, ulam

    m = _build_map(config.map)
    noise = _build_noise(config.noise)
    bounds, picked = _select_interval(m, config.run)
    grid = _build_grid(config.grid, bounds)
    run = config.run
    x0 = float(run.get("x0", 0.5 * (bounds[0] + bounds[1])))
    plan = montecarlo.SimulationPlan(
        x0=x0,
        n_samples=int(_require(run, "run", "n_samples")),
        seed=int(run.get("seed", 0)),
        burn_in=int(run.get("burn_in", 1000)),
        n_chains=int(run.get("n_chains", 1)),
    )
    measure = montecarlo.simulate(m, noise, plan, grid)
    out = _outdir(config)
    freq = measure.counts / (measure.total * grid.widths)
    _write_csv(
        os.path.join(out, "histogram.csv"),
        _meta_lines("simulate", config),
        ["x_lo", "x_hi", "count", "density"],
        zip(grid.edges[:-1], grid.edges[1:], measure.counts, freq),
    )
    payload = {
        "interval": _interval_dict(picked) or {"lo": bounds[0], "hi": bounds[1]},
        "total_samples": measure.total,
        "min_seen": measure.min_seen,
        "max_seen": measure.max_seen,
    }
    reference = run.get("reference_density")
    if reference is not None:
        density = _load_density_csv(str(reference))
        payload["l1_distance"] = montecarlo.l1_distance(measure, density)
    _write_json(os.path.join(out, "meta.json"), "simulate", config, payload)
    return 0


def _load_density_csv(path: str):
    import numpy as np

    from .boundary import MinimalInvariantInterval
    from .ulam import Grid, StationaryDensity

    rows = []
    try:
        with open(path) as f:
            for line in f:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                try:
                    rows.append([float(p) for p in line.split(",")])
                except ValueError:
                    continue  # header row
    except OSError:
        raise ConfigError(f"reference density file not found: {path}")
    data = np.asarray(rows)
    if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 4:
        raise ConfigError(f"{path} does not look like a density table")
    edges = np.concatenate((data[:, 0], [data[-1, 1]]))
    grid = Grid(edges, "uniform")
    support = MinimalInvariantInterval(float(edges[0]), float(edges[-1]), False)
    return StationaryDensity(grid, data[:, 3], support, 0.0)


# --- entry point ------------------------------------------------------------

_COMMANDS = {
    "analyze": cmd_analyze,
    "density": cmd_density,
    "bifurcation": cmd_bifurcation,
    "scaling": cmd_scaling,
    "simulate": cmd_simulate,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ulamtail",
        description=(
            "Stationary densities, invariant intervals, and boundary tail "
            "scaling of bounded-noise random maps."
        ),
    )
    parser.add_argument("--version", action="version", version=f"ulamtail {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "analyze": "fixed points, minimal invariant intervals, boundary type",
        "density": "Ulam stationary density on an invariant interval",
        "bifurcation": "invariant-interval count along a noise-amplitude grid",
        "scaling": "tail-exponent estimates against the theoretical constants",
        "simulate": "Monte Carlo histogram, optionally compared to a density",
    }
    for name, desc in descriptions.items():
        p = sub.add_parser(name, help=desc)
        p.add_argument("--config", required=True, help="TOML experiment config")
        p.add_argument("--out", help="output directory (overrides [output] directory)")
        p.add_argument("--threads", type=int, help="cap BLAS/OpenMP worker threads")
        p.add_argument("--seed", type=int, help="RNG seed (overrides [run] seed)")
    return parser


def _set_thread_caps(n: int) -> None:
    for var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ[var] = str(n)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be >= 1", file=sys.stderr)
            return 2
        _set_thread_caps(args.threads)
    try:
        config = load_config(args.config)
        if args.out is not None:
            config.output["directory"] = args.out
        if args.seed is not None:
            config.run["seed"] = args.seed
        return _COMMANDS[args.command](config)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except UlamTailError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
