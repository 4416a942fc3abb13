"""Secure-rate lower bounds and the secure degrees-of-freedom sweep.

The secure rate of message ``l`` is its intended compute-and-forward rate
minus the worst leakage towards an unintended receiver ``k``:

    leak(l, k) = 1/2 log2( sum_m (h_k^2 Pm[l][m] + G[l][k]^2 PJ[l][m])
                           / (G[l][k]^2 PJ[l][m']) )

with ``m'`` the weakest jamming component of helper ``l``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .beamforming import BeamParams
from .channel import ChannelConfig
from .cof import CofSolution, receiver_solution
from .power import DEFAULT_DELTA, Infeasible, PowerAllocation, default_allocation


@dataclass
class SecureRateReport:
    R: np.ndarray
    leakage: np.ndarray
    R_intended: np.ndarray
    solutions: list[CofSolution] = field(default_factory=list, repr=False)
    epsilon_slack: float = 0.0

    @property
    def K(self) -> int:
        return len(self.R)

    @property
    def sum_rate(self) -> float:
        return float(np.sum(self.R))

    @property
    def max_leakage(self) -> np.ndarray:
        off = self.leakage.copy()
        np.fill_diagonal(off, -np.inf)
        return off.max(axis=1)

    def to_dict(self, include_cof: bool = False) -> dict:
        leak = [[None if k == ell else float(self.leakage[ell, k]) for k in range(self.K)]
                for ell in range(self.K)]
        d = {
            "R": self.R.tolist(),
            "R_intended": self.R_intended.tolist(),
            "leakage": leak,
            "maxLeakage": self.max_leakage.tolist(),
            "sumRate": self.sum_rate,
            "epsilonSlack": self.epsilon_slack,
        }
        if include_cof:
            d["cof"] = [s.to_dict() for s in self.solutions]
        return d


def leakage_term(config: ChannelConfig, alloc: PowerAllocation, ell: int, k: int) -> float:
    """Leakage of message ``ell`` at unintended receiver ``k`` (bits)."""
    if k == ell:
        raise ValueError("leakage is defined for unintended receivers only (k != ell)")
    g2 = config.G[ell, k] ** 2
    num = float(np.sum(config.h[k] ** 2 * alloc.Pm[ell] + g2 * alloc.PJ[ell]))
    den = g2 * alloc.PJ[ell, alloc.m_prime[ell]]
    return 0.5 * math.log2(num / den)


def leakage_matrix(config: ChannelConfig, alloc: PowerAllocation) -> np.ndarray:
    K = config.K
    L = np.zeros((K, K))
    for ell in range(K):
        for k in range(K):
            if k != ell:
                L[ell, k] = leakage_term(config, alloc, ell, k)
    return L


def intended_rate(sol: CofSolution, ell: int | None = None) -> float:
    """Rate of the intended codeword against the largest effective noise.

    This lower bound holds whichever combination resolves the intended
    codeword.
    """
    ell = sol.receiver if ell is None else ell
    s = float(np.max(sol.sigma2))
    if s <= 0.0:
        return 0.0
    return max(0.0, 0.5 * math.log2(sol.P_eff[ell] / s))


def secure_rate_report(config: ChannelConfig, alloc: PowerAllocation) -> SecureRateReport:
    """Per-receiver secure rates: intended rate minus the worst leakage, clipped at 0."""
    sols = [receiver_solution(config, alloc, ell) for ell in range(config.K)]
    R_int = np.array([intended_rate(s, ell) for ell, s in enumerate(sols)])
    leak = leakage_matrix(config, alloc)
    rep = SecureRateReport(np.zeros(config.K), leak, R_int, sols)
    rep.R = np.maximum(0.0, R_int - rep.max_leakage)
    return rep


# Alias under the operation name used by external callers.
theorem1_report = secure_rate_report


def sum_secure_rate_objective(config: ChannelConfig):
    """Objective for :func:`cofsec.power.grid_search`."""

    def objective(alloc: PowerAllocation) -> float:
        return secure_rate_report(config, alloc).sum_rate

    return objective


def half_log2_1p(P) -> np.ndarray:
    return 0.5 * np.log2(1.0 + np.asarray(P, dtype=float))


@dataclass
class SweepPoint:
    P: float
    report: SecureRateReport

    @property
    def benchmark(self) -> float:
        return float(half_log2_1p(self.P))

    @property
    def ratio(self) -> float:
        return self.report.sum_rate / self.benchmark


@dataclass
class SdofSweep:
    points: list[SweepPoint]
    dropped: list[tuple[float, str]]

    @property
    def P(self) -> np.ndarray:
        return np.array([p.P for p in self.points])

    @property
    def sum_rate(self) -> np.ndarray:
        return np.array([p.report.sum_rate for p in self.points])

    @property
    def benchmark(self) -> np.ndarray:
        return half_log2_1p(self.P)

    @property
    def ratio(self) -> np.ndarray:
        return self.sum_rate / self.benchmark

    def fit(self) -> tuple[float, float, float]:
        """Least-squares line of sum rate against ``1/2 log2(1+P)``, top half of the grid.

        Returns slope, intercept and the largest absolute residual.
        """
        n = len(self.points)
        if n < 2:
            raise ValueError("need at least two feasible grid points to fit a slope")
        top = slice(n // 2, n) if n >= 4 else slice(0, n)
        x, y = self.benchmark[top], self.sum_rate[top]
        slope, intercept = np.polyfit(x, y, 1)
        resid = y - (slope * x + intercept)
        return float(slope), float(intercept), float(np.max(np.abs(resid)))

    @property
    def slope(self) -> float:
        return self.fit()[0]


def log_grid(pmin: float, pmax: float, points: int) -> np.ndarray:
    if not (0 < pmin < pmax) or points < 2:
        raise ValueError("need 0 < pmin < pmax and at least two points")
    return np.logspace(math.log10(pmin), math.log10(pmax), points)


def sdof_sweep(
    config: ChannelConfig,
    params: BeamParams,
    delta: float = DEFAULT_DELTA,
    P_grid: Sequence[float] | None = None,
) -> SdofSweep:
    """Secure rates along a power grid for one fixed gain realization.

    The default allocation is recomputed at every grid point; points where it
    is infeasible are dropped and listed in ``dropped``.
    """
    grid = np.asarray(P_grid if P_grid is not None else log_grid(1e4, 1e12, 9), dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("power grid must be strictly increasing")
    points, dropped = [], []
    for P in grid:
        cfg = config.with_power(P)
        try:
            alloc = default_allocation(cfg, params, delta)
        except Infeasible as exc:
            dropped.append((float(P), str(exc)))
            continue
        points.append(SweepPoint(float(P), secure_rate_report(cfg, alloc)))
    return SdofSweep(points, dropped)
