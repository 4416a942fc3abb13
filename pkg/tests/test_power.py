import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cofsec.beamforming import BeamParams, monomial_values
from cofsec.channel import ChannelConfig, rng_for, sample_channel
from cofsec.power import (
    AllocationGrid,
    Infeasible,
    PowerAllocation,
    check_allocation,
    default_allocation,
    grid_search,
    random_feasible_allocation,
    share_allocation,
)
from cofsec.secure import sum_secure_rate_objective


def unit_config(P=100.0):
    return ChannelConfig(3, np.ones(3), np.ones((3, 3)), P)


def test_default_allocation_values():
    alloc = default_allocation(unit_config(), BeamParams(3, 2), 0.1)
    assert alloc.M == 16
    assert np.allclose(alloc.PJ, 0.05625, rtol=0, atol=1e-15)
    assert np.allclose(alloc.Pm, 100 / 48, rtol=1e-15)
    assert check_allocation(alloc, unit_config()).ok


def test_default_allocation_infeasible_at_low_power():
    with pytest.raises(Infeasible):
        default_allocation(unit_config(0.5), BeamParams(3, 2), 0.1)


def test_own_receiver_margin():
    cfg = sample_channel(3, 11, P=1e5)
    alloc = default_allocation(cfg, BeamParams(3, 2), 0.1)
    assert np.allclose(cfg.G.diagonal() ** 2 * alloc.jamming_totals, 0.9)


@pytest.mark.parametrize("delta", [0.0, 1.0, -0.2])
def test_delta_range(delta):
    with pytest.raises(ValueError):
        default_allocation(unit_config(), BeamParams(3, 2), delta)


def test_forced_dominance_violation():
    cfg = unit_config()
    alloc = default_allocation(cfg, BeamParams(3, 2))
    PJ = alloc.PJ.copy()
    PJ[0, 0] = 2 * alloc.Pm[0, 0]
    res = check_allocation(PowerAllocation(alloc.Pm, PJ), cfg)
    assert any(v.startswith("dominance: PJ[0][0]") for v in res.violations), res.violations


def test_forced_budget_violation():
    cfg = unit_config()
    params = BeamParams(3, 2)
    alloc = default_allocation(cfg, params)
    big = PowerAllocation(alloc.Pm * cfg.P * cfg.K * params.M, alloc.PJ)
    assert any(v.startswith("budget") for v in check_allocation(big, cfg).violations)


def test_own_jamming_violation():
    cfg = unit_config()
    alloc = default_allocation(cfg, BeamParams(3, 2))
    res = check_allocation(alloc.scaled(jamming=2.0), cfg)
    assert any(v.startswith("own-jamming") for v in res.violations)


def test_nonpositive_power_flagged():
    cfg = unit_config()
    alloc = default_allocation(cfg, BeamParams(3, 2))
    Pm = alloc.Pm.copy()
    Pm[1, 3] = 0.0
    assert any(v.startswith("positivity") for v in check_allocation(PowerAllocation(Pm, alloc.PJ), cfg).violations)


def test_shares_are_power_independent():
    cfg = sample_channel(3, 2)
    params = BeamParams(3, 2)
    a = default_allocation(cfg.with_power(1e6), params)
    b = default_allocation(cfg.with_power(1e9), params)
    assert np.allclose(a.Pm / 1e6, b.Pm / 1e9, rtol=1e-14)


def test_joint_helper_budget_scaling():
    # Tiny direct gains make per-helper jamming exceed P; it must be scaled.
    G = np.full((2, 2), 1.0)
    np.fill_diagonal(G, 0.01)
    cfg = ChannelConfig(2, [1.0, 1.0], G, 1e6)
    alloc = default_allocation(cfg, BeamParams(2, 2))
    assert alloc.PJ.sum() <= cfg.P * (1 + 1e-12)
    assert check_allocation(alloc, cfg).ok


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), K=st.integers(2, 4))
def test_m_prime_is_minimum(seed, K):
    cfg = sample_channel(K, seed, P=1e5)
    params = BeamParams(K, 2)
    alloc = random_feasible_allocation(cfg, params, rng_for(seed, "test"))
    assert check_allocation(alloc, cfg).ok
    for ell in range(K):
        assert alloc.PJ[ell, alloc.m_prime[ell]] == alloc.PJ[ell].min()


def test_sigma2_lattice():
    cfg = sample_channel(3, 4, P=1e4)
    params = BeamParams(3, 2)
    alloc = default_allocation(cfg, params)
    s2 = alloc.sigma2_lattice(cfg, params)
    for ell in range(3):
        assert np.allclose(s2[ell] * monomial_values(ell, cfg, params) ** 2, alloc.Pm[ell])


def test_allocation_json_round_trip():
    alloc = default_allocation(unit_config(), BeamParams(3, 2))
    back = PowerAllocation.from_dict(json.loads(json.dumps(alloc.to_dict())))
    assert np.array_equal(back.Pm, alloc.Pm) and np.array_equal(back.PJ, alloc.PJ)


def test_grid_singleton_returns_default():
    cfg = sample_channel(3, 1, P=1e5)
    params = BeamParams(3, 2)
    grid = AllocationGrid([0.1], [(1 / 3, 1 / 3, 1 / 3)])
    best = grid_search(cfg, params, lambda a: 0.0, grid)
    ref = default_allocation(cfg, params, 0.1)
    assert np.array_equal(best.Pm, ref.Pm) and np.array_equal(best.PJ, ref.PJ)


def test_grid_constant_objective_keeps_first_feasible():
    cfg = sample_channel(3, 1, P=1e5)
    params = BeamParams(3, 2)
    grid = AllocationGrid([0.2, 0.1], [(1e-9, 0.4, 0.4), (0.5, 0.25, 0.25), (0.25, 0.5, 0.25)])
    best = grid_search(cfg, params, lambda a: 1.0, grid)
    ref = share_allocation(cfg, params, 0.2, (0.5, 0.25, 0.25))
    assert np.array_equal(best.Pm, ref.Pm) and np.array_equal(best.PJ, ref.PJ)


def test_grid_no_feasible_point():
    cfg = sample_channel(3, 1, P=0.01)
    with pytest.raises(Infeasible):
        grid_search(cfg, BeamParams(3, 2), lambda a: 0.0)


def test_grid_search_beats_default():
    cfg = sample_channel(3, 3, P=1e6)
    params = BeamParams(3, 2)
    objective = sum_secure_rate_objective(cfg)
    grid = AllocationGrid.simplex(3, 6, deltas=(0.1, 0.3))
    best = grid_search(cfg, params, objective, grid)
    brute = max(objective(share_allocation(cfg, params, d, s)) for d, s in grid.points(3))
    assert objective(best) == brute
    assert objective(best) >= objective(default_allocation(cfg, params))


def test_simplex_grid():
    grid = AllocationGrid.simplex(3, 4)
    assert len(grid.shares) == 3
    assert all(abs(sum(s) - 1) < 1e-12 and min(s) > 0 for s in grid.shares)


def test_grid_file(tmp_path):
    p = tmp_path / "grid.json"
    p.write_text(json.dumps({"deltas": [0.1, 0.2], "share_steps": 3}))
    grid = AllocationGrid.load(p, 3)
    assert grid.deltas == [0.1, 0.2] and grid.shares == [(1 / 3, 1 / 3, 1 / 3)]
