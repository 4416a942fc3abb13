"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (visible with ``-s`` or in
the ``-v`` log) before asserting.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from cofsec.beamforming import BeamParams, alignment_fraction, alignment_fraction_exact
from cofsec.channel import sample_channel
from cofsec.cof import EffectiveMac, successive_rates
from cofsec.lattice_lab import LatticeChain1D, crypto_uniformity_test, quantization_entropy_check
from cofsec.oracles import check_conditioning, check_lll, check_mmse
from cofsec.power import default_allocation
from cofsec.secure import leakage_matrix, log_grid, sdof_sweep


@pytest.fixture
def report(capsys):
    def emit(criterion: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'}  [{criterion}] {detail}")
        assert ok, detail

    return emit


def test_c1_mmse_closed_form(report):
    t0 = time.perf_counter()
    res = check_mmse(n=1000, tol=1e-6)
    dt = time.perf_counter() - t0
    report("1 mmse", res.ok and dt < 10,
           f"{res.passes}/{res.trials} within 1e-6, max rel err {res.max_rel_error:.2e}, {dt:.1f}s (< 10s)")


def test_c2_lll_vs_enumeration(report):
    t0 = time.perf_counter()
    res = check_lll(n=500, bound=8, min_match=0.9, max_factor=4.0)
    dt = time.perf_counter() - t0
    report("2 lll", res.ok and dt < 30, f"{res.detail} (need >= 0.9, <= 4), {dt:.1f}s (< 30s)")


def test_c3_successive_conditioning(report):
    res = check_conditioning(n=200, tol=1e-8, psd_tol=1e-9)
    report("3 conditioning", res.ok,
           f"{res.passes}/{res.trials} within 1e-8, max rel err {res.max_rel_error:.2e}, {res.detail} (>= -1e-9)")


def test_c4_leakage_power_invariance(report):
    params = BeamParams(3, 2)
    grid = log_grid(1e4, 1e12, 9)
    worst = 0.0
    for seed in range(1, 21):
        base = sample_channel(3, seed)
        L = [leakage_matrix(c, default_allocation(c, params, 0.1))
             for c in (base.with_power(P) for P in grid)]
        spread = np.max(L, axis=0) - np.min(L, axis=0)
        worst = max(worst, float(spread.max()))
    report("4 leakage P-invariance", worst <= 1e-9,
           f"max spread of leakage across P in [1e4, 1e12] = {worst:.3e} bits (need <= 1e-9)")


def test_c5_sdof_slope(report):
    t0 = time.perf_counter()
    params = BeamParams(3, 2)
    grid = log_grid(1e4, 1e12, 9)
    slopes, increasing = [], []
    for seed in range(1, 21):
        sweep = sdof_sweep(sample_channel(3, seed), params, 0.1, grid)
        slopes.append(sweep.slope)
        increasing.append(bool(np.all(np.diff(sweep.ratio) > 0)))
    dt = time.perf_counter() - t0
    slopes = np.array(slopes)
    in_band = (slopes >= 0.9) & (slopes <= 1.05)
    ok = bool(in_band.all()) and all(increasing) and dt < 60
    report("5 sdof", ok,
           f"slopes in [0.9, 1.05]: {int(in_band.sum())}/20 (range {slopes.min():.3f}..{slopes.max():.3f}), "
           f"ratio increasing: {sum(increasing)}/20, {dt:.1f}s (< 60s)")


def test_c6_alignment_combinatorics(report):
    bad = []
    for K in (2, 3, 4):
        for T in range(2, 7):
            p = BeamParams(K, T)
            got = alignment_fraction(0, K - 1, p)
            count = round(got * p.M)
            # Exact rational comparison of the enumerated count.
            exact = Fraction(count, p.M) == Fraction((T - 1) ** 2, T**2) and abs(got * p.M - count) < 1e-6
            if not exact or abs(got - alignment_fraction_exact(T)) > 1e-15:
                bad.append((K, T, got))
    report("6 alignment", not bad, f"mismatches {bad}" if bad else "15/15 (K, T) pairs equal ((T-1)/T)^2")


def test_c7_crypto_uniformity(report):
    worst = 1.0
    for ratio in (2, 4, 8, 16):
        chain = LatticeChain1D(8.0, 8.0 / ratio)
        for seed in range(5):
            worst = min(worst, crypto_uniformity_test(chain, 1.75, 100_000, seed).p_value)
    stub = crypto_uniformity_test(LatticeChain1D(8.0, 1.0), 1.75, 100_000, 0,
                                  dither=lambda rng, chain, n: np.zeros(n))
    ok = worst > 1e-3 and not stub.passed
    report("7 crypto lemma", ok, f"min p-value {worst:.3g} over 20 runs (> 1e-3); point-mass p-value {stub.p_value:.1e}")


ENTROPY_GRID = [
    ([1.0], 1.0),
    ([25.0], 25.0),
    ([1.0, 1.0, 1.0, 1.0], 1.0),
    ([1.0, 2.0, 4.0, 8.0], 1.0),
    ([3.0, 3.0], 0.3),
    ([10.0] * 16, 0.5),
    ([1e4, 2e4, 5e3], 1e3),
]


def test_c8_quantization_entropy(report):
    slack = []
    for i, (powers, jam) in enumerate(ENTROPY_GRID):
        ent, bound = quantization_entropy_check(powers, jam, 100_000, i)
        slack.append(bound - ent)
    report("8 quantization entropy", min(slack) >= 0,
           f"smallest margin bound - entropy = {min(slack):.3f} bits over {len(ENTROPY_GRID)} cases")


def test_c9_scalar_channel(report):
    worst = 0.0
    for h in (0.1, 0.5, 1.0, 1.7, 3.0):
        for p in (1e-2, 1.0, 1e2, 1e4, 1e8):
            sol = successive_rates(EffectiveMac(0, [h], [p]), [[1]])
            worst = max(worst, abs(sol.R_comb[0] - 0.5 * math.log2(1 + h * h * p)))
    report("9 awgn", worst <= 1e-9, f"max |R - 1/2 log2(1 + h^2 p)| = {worst:.2e} (<= 1e-9)")
