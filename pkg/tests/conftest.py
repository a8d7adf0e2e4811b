"""Shared fixtures. The two graded N=8000 runs are expensive (~7 s each) and
session-scoped so the tail benchmarks and their consistency checks share them."""
import numpy as np
import pytest

import ulamtail as ut


@pytest.fixture(scope="session")
def uniform():
    return ut.uniform_noise()


def _graded_run(sigma_factor):
    sigma_star, _ = ut.bifurcation_parameter(3.0)
    m = ut.tanh_affine(3.0, sigma_factor * sigma_star)
    interval = ut.minimal_invariant_intervals(m)[0]
    x_plus = interval.hi
    cls = ut.classify_boundary(m, x_plus)
    grid = ut.build_grid(interval.bounds, 8000, grading="geometric", ratio=0.995, anchor=x_plus)
    matrix = ut.assemble(m, ut.uniform_noise(), grid)
    density = ut.stationary(matrix)
    return {
        "map": m,
        "interval": interval,
        "x_plus": x_plus,
        "classification": cls,
        "grid": grid,
        "matrix": matrix,
        "density": density,
    }


@pytest.fixture(scope="session")
def contracting_boundary_run():
    """TanhAffine b=3 at half the critical amplitude, left interval, N=8000."""
    return _graded_run(0.5)


@pytest.fixture(scope="session")
def neutral_boundary_run():
    """TanhAffine b=3 at the critical amplitude (tangent boundary), N=8000."""
    return _graded_run(1.0)
