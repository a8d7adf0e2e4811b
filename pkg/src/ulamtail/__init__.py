"""Stationary densities and boundary tail scaling of bounded-noise random maps.

Submodules:
    map_model   parametric random-map families and their extremal sections
    noise       bounded noise densities, CDFs, and sampling
    boundary    fixed points, minimal invariant intervals, bifurcation scans
    ulam        transfer-operator discretization and stationary densities
    montecarlo  direct simulation and empirical measures
    scaling     hitting times and tail-exponent estimators
    cli         configuration-driven experiment runner

Imports are lazy so that thread caps set by the CLI take effect before any
numerical library loads.
"""
import importlib

from ._version import __version__

_SUBMODULES = (
    "errors",
    "noise",
    "map_model",
    "boundary",
    "ulam",
    "montecarlo",
    "scaling",
    "cli",
)

_EXPORTS = {
    # errors
    "UlamTailError": "errors",
    "ConfigError": "errors",
    "DomainError": "errors",
    "NonMonotoneError": "errors",
    "OutOfRangeError": "errors",
    "UnsupportedError": "errors",
    "NoFixedPointError": "errors",
    "NotFixedPointError": "errors",
    "DegenerateError": "errors",
    "NumericalError": "errors",
    "NoConvergenceError": "errors",
    "EscapeError": "errors",
    "GridMismatchError": "errors",
    "DivergenceError": "errors",
    "IterationCapError": "errors",
    "WindowError": "errors",
    # noise
    "NoiseModel": "noise",
    "uniform_noise": "noise",
    "poly_upper_noise": "noise",
    "poly_symmetric_noise": "noise",
    "pdf": "noise",
    "cdf": "noise",
    "survival": "noise",
    "interval_mass": "noise",
    "consecutive_masses": "noise",
    "sample": "noise",
    "boundary_coeffs": "noise",
    # map_model
    "RandomMapSpec": "map_model",
    "DerivativeBundle": "map_model",
    "tanh_affine": "map_model",
    "affine": "map_model",
    "power_nonhyp": "map_model",
    "user_tabulated": "map_model",
    "eval_map": "map_model",
    "extremal": "map_model",
    "partials": "map_model",
    "extremal_derivative": "map_model",
    "section_inverse": "map_model",
    "section_inverse_clipped": "map_model",
    "transition_density": "map_model",
    "validate_h1": "map_model",
    # boundary
    "FixedPoint": "boundary",
    "MinimalInvariantInterval": "boundary",
    "BoundaryClassification": "boundary",
    "ScanRow": "boundary",
    "find_fixed_points": "boundary",
    "minimal_invariant_intervals": "boundary",
    "classify_boundary": "boundary",
    "bifurcation_parameter": "boundary",
    "bifurcation_scan": "boundary",
    # ulam
    "Grid": "ulam",
    "TransitionMatrix": "ulam",
    "StationaryDensity": "ulam",
    "build_grid": "ulam",
    "assemble": "ulam",
    "stationary": "ulam",
    "apply_transfer": "ulam",
    "density_at": "ulam",
    "n_step_density": "ulam",
    # montecarlo
    "SimulationPlan": "montecarlo",
    "EmpiricalMeasure": "montecarlo",
    "simulate": "montecarlo",
    "empirical_tail": "montecarlo",
    "l1_distance": "montecarlo",
    # scaling
    "FitDetails": "scaling",
    "ScalingReport": "scaling",
    "tail_constant": "scaling",
    "default_window": "scaling",
    "hitting_time": "scaling",
    "hitting_scaling": "scaling",
    "density_tail_exponent": "scaling",
    "measure_tail_exponent": "scaling",
    "loglog_fit": "scaling",
}

__all__ = ["__version__", *_SUBMODULES, *_EXPORTS]


def __getattr__(name: str):
    if name in _SUBMODULES:
        return importlib.import_module(f".{name}", __name__)
    if name in _EXPORTS:
        module = importlib.import_module(f".{_EXPORTS[name]}", __name__)
        return getattr(module, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return sorted(__all__)
