"""Independent reference computations for the compute-and-forward engine.

None of these go through :func:`cofsec.cof.gram_matrix` or the kernels:

* ``beta_grid_sigma2`` minimizes the effective-noise variance over the
  scaling directly on a grid;
* ``enumeration_min`` scans every integer vector in a box;
* ``ls_conditional_variance`` solves the joint-Gaussian estimation problem
  for a combination given the channel output and earlier combinations.
"""

from __future__ import annotations

import itertools
import math
import time
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .beamforming import BeamParams
from .channel import ChannelConfig, rng_for, sample_channel
from .cof import (
    EffectiveMac,
    build_effective_mac,
    conditioning_sequence,
    gram_factor,
    gram_matrix,
    mmse_sigma2,
    select_coefficients,
    successive_rates,
)
from .power import Infeasible, random_feasible_allocation


def noise_variance(mac: EffectiveMac, a, beta: float) -> float:
    """Variance of ``beta * y - a . x_eff`` for a fixed scaling."""
    a = np.asarray(a, dtype=float)
    return beta**2 + float(np.sum((beta * mac.h_eff - a) ** 2 * mac.P_eff))


def beta_grid_sigma2(mac: EffectiveMac, a, step: float = 1e-4, points: int = 2001) -> tuple[float, float]:
    """Minimize the noise variance over the scaling by grid search.

    The bracket comes from ``beta**2 <= f(beta) <= f(0)``. The grid is
    zoomed around its best point until the spacing reaches ``step``, then
    refined by golden-section search on the final cell.
    """
    a = np.asarray(a, dtype=float)
    P, h = mac.P_eff, mac.h_eff

    def f(b):
        b = np.asarray(b, dtype=float)[..., None]
        return b[..., 0] ** 2 + np.sum((b * h - a) ** 2 * P, axis=-1)

    half = math.sqrt(float(f(0.0))) + 1.0
    lo, hi = -half, half
    while True:
        grid = np.linspace(lo, hi, points)
        i = int(np.argmin(f(grid)))
        spacing = grid[1] - grid[0]
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, points - 1)]
        if spacing <= step:
            break
    inv_phi = (math.sqrt(5) - 1) / 2
    c, d = hi - inv_phi * (hi - lo), lo + inv_phi * (hi - lo)
    fc, fd = float(f(c)), float(f(d))
    for _ in range(200):
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - inv_phi * (hi - lo)
            fc = float(f(c))
        else:
            lo, c, fc = c, d, fd
            d = lo + inv_phi * (hi - lo)
            fd = float(f(d))
        if hi - lo <= 1e-15 * max(1.0, abs(lo)):
            break
    beta = 0.5 * (lo + hi)
    return float(f(beta)), beta


def box_vectors(K: int, bound: int) -> np.ndarray:
    """All nonzero integer vectors with ``max|a_j| <= bound``."""
    rng = np.arange(-bound, bound + 1)
    grid = np.array(np.meshgrid(*([rng] * K), indexing="ij")).reshape(K, -1).T
    return grid[np.any(grid != 0, axis=1)]


def enumeration_min(mac: EffectiveMac, bound: int = 8) -> tuple[float, np.ndarray]:
    """Smallest effective-noise variance over the box, by exhaustion."""
    A = box_vectors(mac.K, bound).astype(float)
    P, h = mac.P_eff, mac.h_eff
    corr = A @ (h * P)
    vals = (A**2) @ P - corr**2 / (1.0 + float(np.sum(h**2 * P)))
    i = int(np.argmin(vals))
    return float(vals[i]), A[i].astype(np.int64)


def ls_conditional_variance(mac: EffectiveMac, A, k: int) -> float:
    """Error variance of the best linear estimate of combination ``k``.

    Observations are the channel output ``y = h . x + z`` and the exactly
    known combinations ``0..k-1``; ``x ~ N(0, diag(P_eff))``, ``z ~ N(0, 1)``.
    """
    A = np.asarray(A, dtype=float)
    D = np.diag(mac.P_eff)
    h = mac.h_eff
    # Rows: y, then earlier combinations; as linear maps of (x, z).
    obs_x = np.vstack([h[None, :], A[:k]])
    obs_z = np.zeros(k + 1)
    obs_z[0] = 1.0
    cov_obs = obs_x @ D @ obs_x.T + np.outer(obs_z, obs_z)
    target = A[k]
    cross = obs_x @ D @ target
    coef = np.linalg.lstsq(cov_obs, cross, rcond=None)[0]
    return float(target @ D @ target - cross @ coef)


def awgn_rate(h: float, p: float) -> float:
    return 0.5 * math.log2(1.0 + h * h * p)


@dataclass
class Instance:
    config: ChannelConfig
    ell: int
    mac: EffectiveMac


def random_instance(
    seed: int, K: int, log10_p: tuple[float, float] = (2.0, 5.0), T: int = 2, label: str = "oracle"
) -> Instance:
    """Random channel, random feasible allocation and random receiver."""
    rng = rng_for(seed, label)
    params = BeamParams(K, T)
    for attempt in range(100):
        P = 10 ** rng.uniform(*log10_p)
        config = sample_channel(K, int(rng.integers(2**31)), P=P)
        try:
            alloc = random_feasible_allocation(config, params, rng)
        except Infeasible:
            continue
        ell = int(rng.integers(K))
        return Instance(config, ell, build_effective_mac(config, alloc, ell))
    raise RuntimeError("could not draw a feasible instance")


@dataclass
class OracleResult:
    name: str
    trials: int
    passes: int
    max_rel_error: float
    ok: bool
    seconds: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return (
            f"{status}  {self.name:<24} trials={self.trials:<5d} agree={self.passes:<5d} "
            f"max_rel_err={self.max_rel_error:.3e}  {self.seconds:6.2f}s  {self.detail}"
        )


def check_mmse(n: int = 1000, tol: float = 1e-6, seed: int = 0) -> OracleResult:
    t0 = time.perf_counter()
    rng = rng_for(seed, "oracle-mmse")
    worst, good = 0.0, 0
    for i in range(n):
        K = 2 + i % 4
        inst = random_instance(seed * 100_003 + i, K, label="oracle-mmse")
        a = rng.integers(-3, 4, size=K)
        if not np.any(a):
            a[0] = 1
        s, _ = mmse_sigma2(inst.mac, a)
        s_ref, _ = beta_grid_sigma2(inst.mac, a)
        err = abs(s - s_ref) / abs(s_ref)
        worst = max(worst, err)
        good += err <= tol
    return OracleResult("mmse_vs_beta_grid", n, good, worst, good == n, time.perf_counter() - t0)


def check_lll(
    n: int = 500,
    bound: int = 8,
    min_match: float = 0.9,
    max_factor: float = 4.0,
    seed: int = 0,
    gram: Callable[[EffectiveMac], np.ndarray] = gram_matrix,
) -> OracleResult:
    """Smallest LLL row against the box minimum, with an injectable Gram builder."""
    t0 = time.perf_counter()
    good, worst_factor = 0, 1.0
    for i in range(n):
        inst = random_instance(seed * 100_003 + i, 3, label="oracle-lll")
        A = select_coefficients(inst.mac, gram=gram)
        lll_min = min(mmse_sigma2(inst.mac, a)[0] for a in A)
        box_min, _ = enumeration_min(inst.mac, bound)
        factor = lll_min / box_min
        worst_factor = max(worst_factor, factor)
        good += factor <= 1 + 1e-9
    frac = good / n
    ok = frac >= min_match and worst_factor <= max_factor
    detail = f"match={frac:.3f} worst_factor={worst_factor:.3f}"
    return OracleResult("lll_vs_enumeration", n, good, worst_factor - 1.0, ok, time.perf_counter() - t0, detail)


def check_conditioning(n: int = 200, tol: float = 1e-8, psd_tol: float = 1e-9, seed: int = 0) -> OracleResult:
    t0 = time.perf_counter()
    worst, good, min_eig = 0.0, 0, math.inf
    for i in range(n):
        K = 2 + i % 4
        inst = random_instance(seed * 100_003 + i, K, label="oracle-cond")
        A = select_coefficients(inst.mac)
        sol = successive_rates(inst.mac, A)
        errs = []
        for k in range(K):
            ref = ls_conditional_variance(inst.mac, A, k)
            errs.append(abs(sol.sigma2[k] - ref) / abs(ref))
        for Qk in conditioning_sequence(gram_factor(inst.mac), A)[:-1]:
            min_eig = min(min_eig, float(np.linalg.eigvalsh(Qk).min()))
        worst = max(worst, max(errs))
        good += max(errs) <= tol
    ok = good == n and min_eig >= -psd_tol
    return OracleResult(
        "conditioning_vs_lstsq", n, good, worst, ok, time.perf_counter() - t0, f"min_eig={min_eig:.3e}"
    )


def check_awgn(tol: float = 1e-9) -> OracleResult:
    t0 = time.perf_counter()
    worst, good, n = 0.0, 0, 0
    for h in (0.3, 0.7, 1.0, 1.9):
        for p in (0.1, 1.0, 10.0, 1e3, 1e6):
            mac = EffectiveMac(0, [h], [p])
            sol = successive_rates(mac, [[1]])
            ref = awgn_rate(h, p)
            err = abs(sol.R_comb[0] - ref)
            worst = max(worst, err)
            good += err <= tol
            n += 1
    return OracleResult("k1_awgn_capacity", n, good, worst, good == n, time.perf_counter() - t0, "abs error")


def run_oracle_checks(quick: bool = False, gram: Callable[[EffectiveMac], np.ndarray] = gram_matrix) -> list[OracleResult]:
    scale = 10 if quick else 1
    return [
        check_mmse(n=1000 // scale),
        check_lll(n=500 // scale, gram=gram),
        check_conditioning(n=200 // scale),
        check_awgn(),
    ]


def corrupted_gram(mac: EffectiveMac) -> np.ndarray:
    """Negative control: drops the MMSE rank-one correction."""
    return np.diag(mac.P_eff)


def signed_permutations(K: int) -> list[np.ndarray]:
    """All signed permutation matrices of size ``K``."""
    out = []
    for perm in itertools.permutations(range(K)):
        for signs in itertools.product((1, -1), repeat=K):
            M = np.zeros((K, K), dtype=np.int64)
            for i, j in enumerate(perm):
                M[i, j] = signs[i]
            out.append(M)
    return out
