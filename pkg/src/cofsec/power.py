"""Per-component power allocations for the transmitter and the helpers.

An allocation is feasible when

* every helper keeps its own jamming below the noise floor at its paired
  receiver: ``G[l][l]**2 * sum_m PJ[l][m] < 1``;
* every jamming component of helper ``l`` is weaker than every message
  component of message ``l``: ``PJ[l][m1] < Pm[l][m2]``;
* the transmitter and the helpers (jointly) each stay within ``P``.
"""

from __future__ import annotations

import itertools
import json
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .beamforming import BeamParams, monomial_values
from .channel import ChannelConfig, ValidationResult

STRICT_SLACK = 1e-12
DEFAULT_DELTA = 0.1

RateObjective = Callable[["PowerAllocation"], float]


class Infeasible(Exception):
    """No allocation satisfies the power constraints."""


@dataclass(frozen=True)
class PowerAllocation:
    """Message powers ``Pm[l, m]`` and jamming powers ``PJ[l, m]``."""

    Pm: np.ndarray
    PJ: np.ndarray

    def __post_init__(self):
        Pm = np.array(self.Pm, dtype=float)
        PJ = np.array(self.PJ, dtype=float)
        if Pm.ndim != 2 or Pm.shape != PJ.shape:
            raise ValueError(f"Pm and PJ must be equal-shape K x M matrices, got {Pm.shape}, {PJ.shape}")
        Pm.setflags(write=False)
        PJ.setflags(write=False)
        object.__setattr__(self, "Pm", Pm)
        object.__setattr__(self, "PJ", PJ)

    @property
    def K(self) -> int:
        return self.Pm.shape[0]

    @property
    def M(self) -> int:
        return self.Pm.shape[1]

    @property
    def m_prime(self) -> np.ndarray:
        """Index of the weakest jamming component of each helper."""
        return np.argmin(self.PJ, axis=1)

    @property
    def message_totals(self) -> np.ndarray:
        return self.Pm.sum(axis=1)

    @property
    def jamming_totals(self) -> np.ndarray:
        return self.PJ.sum(axis=1)

    def sigma2_lattice(self, config: ChannelConfig, params: BeamParams) -> np.ndarray:
        """Coarse-lattice second moments implied by the beam-forming scale."""
        f = np.vstack([monomial_values(ell, config, params) for ell in range(self.K)])
        return self.Pm / f**2

    def scaled(self, message: float = 1.0, jamming: float = 1.0) -> PowerAllocation:
        return PowerAllocation(self.Pm * message, self.PJ * jamming)

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "Pm": self.Pm.tolist(),
            "PJ": self.PJ.tolist(),
            "mPrime": self.m_prime.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> PowerAllocation:
        return cls(d["Pm"], d["PJ"])


def check_allocation(alloc: PowerAllocation, config: ChannelConfig) -> ValidationResult:
    res = ValidationResult()
    K = config.K
    if alloc.K != K:
        res.violations.append(f"dimension mismatch: allocation has {alloc.K} streams, channel has K={K}")
        return res
    Pm, PJ = alloc.Pm, alloc.PJ
    bad = np.argwhere(~(Pm > 0))
    for ell, m in bad:
        res.violations.append(f"positivity: Pm[{ell}][{m}] = {Pm[ell, m]}")
    bad = np.argwhere(~(PJ > 0))
    for ell, m in bad:
        res.violations.append(f"positivity: PJ[{ell}][{m}] = {PJ[ell, m]}")
    for ell in range(K):
        own = config.G[ell, ell] ** 2 * PJ[ell].sum()
        if not own < 1.0 - STRICT_SLACK:
            res.violations.append(f"own-jamming: G[{ell}][{ell}]^2 * sum_m PJ[{ell}] = {own:.6g} not < 1")
        m1 = int(np.argmax(PJ[ell]))
        m2 = int(np.argmin(Pm[ell]))
        if not PJ[ell, m1] < Pm[ell, m2] - STRICT_SLACK:
            res.violations.append(
                f"dominance: PJ[{ell}][{m1}] = {PJ[ell, m1]:.6g} not < Pm[{ell}][{m2}] = {Pm[ell, m2]:.6g}"
            )
    tol = STRICT_SLACK * max(1.0, config.P)
    if Pm.sum() > config.P + tol:
        res.violations.append(f"budget: total message power {Pm.sum():.6g} exceeds P = {config.P:.6g}")
    if PJ.sum() > config.P + tol:
        res.violations.append(f"budget: total jamming power {PJ.sum():.6g} exceeds P = {config.P:.6g}")
    return res


def require_feasible(alloc: PowerAllocation, config: ChannelConfig) -> PowerAllocation:
    res = check_allocation(alloc, config)
    if not res.ok:
        raise Infeasible("; ".join(res.violations))
    return alloc


def share_allocation(
    config: ChannelConfig, params: BeamParams, delta: float, shares: Sequence[float]
) -> PowerAllocation:
    """Equal split across components, message ``l`` receiving ``shares[l] * P``.

    Helper ``l`` spends ``(1 - delta) / G[l][l]**2`` in total, split evenly
    over its ``M`` components, scaled down uniformly if the helpers' joint
    budget would be exceeded.
    """
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    K, M, P = config.K, params.M, config.P
    shares = np.asarray(shares, dtype=float)
    if shares.shape != (K,) or np.any(shares <= 0) or shares.sum() > 1 + 1e-12:
        raise ValueError(f"shares must be K positive numbers summing to at most 1, got {shares}")
    jam = (1.0 - delta) / (M * config.G.diagonal() ** 2)
    msg = shares * P / M
    if np.any(msg <= jam):
        worst = int(np.argmax(jam - msg))
        raise Infeasible(
            f"message component power {msg[worst]:.6g} does not exceed jamming component "
            f"power {jam[worst]:.6g} for stream {worst} (raise P)"
        )
    PJ = np.repeat(jam[:, None], M, axis=1)
    total_jam = PJ.sum()
    if total_jam > P:
        PJ = PJ * (P / total_jam)
    Pm = np.repeat(msg[:, None], M, axis=1)
    return require_feasible(PowerAllocation(Pm, PJ), config)


def default_allocation(
    config: ChannelConfig, params: BeamParams, delta: float = DEFAULT_DELTA
) -> PowerAllocation:
    """Equal message shares ``P / (K M)`` per component.

    Raises
    ------
    Infeasible
        If ``P / (K M)`` does not exceed the per-component jamming power.
    """
    return share_allocation(config, params, delta, np.full(config.K, 1.0 / config.K))


@dataclass
class AllocationGrid:
    """Finite set of ``(delta, shares)`` points explored by :func:`grid_search`."""

    deltas: list[float] = field(default_factory=lambda: [DEFAULT_DELTA])
    shares: list[tuple[float, ...]] = field(default_factory=list)

    @classmethod
    def simplex(cls, K: int, steps: int, deltas: Iterable[float] = (DEFAULT_DELTA,)) -> AllocationGrid:
        """All share vectors with entries ``i/steps``, ``i >= 1``, summing to one."""
        pts = [
            tuple(c / steps for c in combo)
            for combo in itertools.product(range(1, steps + 1), repeat=K)
            if sum(combo) == steps
        ]
        return cls(list(deltas), pts)

    def points(self, K: int):
        shares = self.shares or [tuple([1.0 / K] * K)]
        for delta in self.deltas:
            for s in shares:
                yield delta, s

    @classmethod
    def load(cls, path: str | Path, K: int) -> AllocationGrid:
        d = json.loads(Path(path).read_text())
        deltas = [float(x) for x in d.get("deltas", [DEFAULT_DELTA])]
        if "shares" in d:
            return cls(deltas, [tuple(float(v) for v in s) for s in d["shares"]])
        return cls.simplex(K, int(d.get("share_steps", K)), deltas)


def grid_search(
    config: ChannelConfig,
    params: BeamParams,
    objective: RateObjective,
    grid: AllocationGrid | None = None,
) -> PowerAllocation:
    """Best feasible grid allocation under ``objective``; ties keep the first found."""
    grid = grid or AllocationGrid.simplex(config.K, 2 * config.K)
    best, best_val = None, -np.inf
    for delta, shares in grid.points(config.K):
        try:
            alloc = share_allocation(config, params, delta, shares)
        except Infeasible:
            continue
        val = objective(alloc)
        if best is None or val > best_val:
            best, best_val = alloc, val
    if best is None:
        raise Infeasible("no grid point yields a feasible allocation")
    return best


def random_feasible_allocation(
    config: ChannelConfig, params: BeamParams, rng: np.random.Generator
) -> PowerAllocation:
    """Feasible allocation with random, unequal component powers.

    Jamming totals use a random fraction of the own-receiver noise margin and
    of the joint budget; message powers sit strictly above every jamming
    component of the same stream.
    """
    K, M, P = config.K, params.M, config.P
    PJ = np.empty((K, M))
    for ell in range(K):
        w = rng.dirichlet(np.ones(M))
        PJ[ell] = rng.uniform(0.2, 0.95) * w / config.G[ell, ell] ** 2
    if PJ.sum() > P:
        PJ *= rng.uniform(0.2, 0.95) * P / PJ.sum()
    floor = PJ.max(axis=1, keepdims=True)
    budget = P * rng.uniform(0.5, 0.99)
    extra = rng.dirichlet(np.ones(K * M)).reshape(K, M) * (budget - M * floor.sum())
    if np.any(extra < 0) or budget <= M * floor.sum():
        raise Infeasible("P too small for a random feasible allocation")
    Pm = floor * (1 + 1e-6) + extra + 1e-9
    return require_feasible(PowerAllocation(Pm, PJ), config)
