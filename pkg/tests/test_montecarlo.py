import numpy as np
import pytest

import ulamtail as ut
from ulamtail.errors import ConfigError, GridMismatchError


@pytest.fixture(scope="module")
def affine_setup(uniform):
    m = ut.affine(0.5, 1.0)
    iv = ut.minimal_invariant_intervals(m)[0]
    grid = ut.build_grid(iv.bounds, 200)
    return m, iv, grid


def test_plan_validation():
    with pytest.raises(ConfigError):
        ut.SimulationPlan(x0=0.0, n_samples=0, seed=1)
    with pytest.raises(ConfigError):
        ut.SimulationPlan(x0=0.0, n_samples=10, seed=1, burn_in=-1)
    with pytest.raises(ConfigError):
        ut.SimulationPlan(x0=0.0, n_samples=10, seed=1, n_chains=0)


def test_bit_identical_reruns(uniform, affine_setup):
    m, _, grid = affine_setup
    plan = ut.SimulationPlan(x0=0.0, n_samples=50_000, seed=11, n_chains=3)
    a = ut.simulate(m, uniform, plan, grid=grid)
    b = ut.simulate(m, uniform, plan, grid=grid)
    assert np.array_equal(a.counts, b.counts)
    assert a.total == b.total == 150_000


def test_seeds_give_different_histograms(uniform, affine_setup):
    m, _, grid = affine_setup
    a = ut.simulate(m, uniform, ut.SimulationPlan(x0=0.0, n_samples=20_000, seed=1), grid=grid)
    b = ut.simulate(m, uniform, ut.SimulationPlan(x0=0.0, n_samples=20_000, seed=2), grid=grid)
    assert not np.array_equal(a.counts, b.counts)


def test_confinement_and_totals(uniform, affine_setup):
    m, iv, grid = affine_setup
    plan = ut.SimulationPlan(x0=0.5 * (iv.lo + iv.hi), n_samples=30_000, seed=5, n_chains=2)
    emp = ut.simulate(m, uniform, plan, grid=grid)
    assert int(emp.counts.sum()) == emp.total == 60_000
    assert emp.counts.dtype == np.int64


def test_histogram_grid_must_cover_orbit(uniform, affine_setup):
    m, iv, _ = affine_setup
    narrow = ut.build_grid((iv.lo, 0.5 * iv.hi), 50)
    plan = ut.SimulationPlan(x0=0.0, n_samples=20_000, seed=3)
    with pytest.raises(GridMismatchError):
        ut.simulate(m, uniform, plan, grid=narrow)


def test_l1_distance_to_ulam(uniform, affine_setup):
    m, iv, _ = affine_setup
    grid = ut.build_grid(iv.bounds, 500)
    dens = ut.stationary(ut.assemble(m, uniform, grid))
    plan = ut.SimulationPlan(x0=0.0, n_samples=200_000, seed=7)
    emp = ut.simulate(m, uniform, plan, grid=grid)
    assert ut.l1_distance(emp, dens) <= 0.08


def test_empirical_tail_monotone(uniform, affine_setup):
    m, iv, grid = affine_setup
    plan = ut.SimulationPlan(x0=0.0, n_samples=30_000, seed=9)
    emp = ut.simulate(m, uniform, plan, grid=grid)
    xs = np.linspace(iv.lo, iv.hi, 12)
    tails = [ut.empirical_tail(emp, x) for x in xs]
    assert tails[0] == pytest.approx(1.0)
    assert tails[-1] == pytest.approx(0.0, abs=1e-12)
    assert np.all(np.diff(tails) <= 1e-12)


def test_l1_distance_grid_mismatch(uniform, affine_setup):
    m, iv, grid = affine_setup
    dens = ut.stationary(ut.assemble(m, uniform, grid))
    other = ut.build_grid((iv.lo - 1.0, iv.hi + 1.0), 64)
    plan = ut.SimulationPlan(x0=0.0, n_samples=1_000, seed=1)
    emp = ut.simulate(m, uniform, plan, grid=other)
    with pytest.raises(GridMismatchError):
        ut.l1_distance(emp, dens)
