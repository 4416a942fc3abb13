"""Scalar nested-lattice laboratory.

One-dimensional lattices ``q_c Z`` inside ``q_f Z`` stand in for the
high-dimensional nested chain. The modulo algebra, the crypto lemma and the
entropy of a coarse quantization index do not depend on the dimension, so
they can be checked empirically at this scale.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .channel import rng_for

ENTROPY_SLACK_BITS = 2.0
UNIFORMITY_ALPHA = 1e-3


@dataclass(frozen=True)
class LatticeChain1D:
    """Coarse lattice ``coarse * Z`` nested in fine lattice ``fine * Z``."""

    coarse: float
    fine: float

    def __post_init__(self):
        if not (self.coarse > 0 and self.fine > 0):
            raise ValueError("lattice spacings must be positive")
        ratio = self.coarse / self.fine
        if abs(ratio - round(ratio)) > 1e-9 * ratio or round(ratio) < 1:
            raise ValueError(f"coarse/fine = {ratio} is not a positive integer")

    @property
    def index(self) -> int:
        """Number of fine cosets in one coarse cell."""
        return int(round(self.coarse / self.fine))


def mod_reduce(v, chain: LatticeChain1D):
    """Reduce into the representative cell ``[0, coarse)``."""
    q = chain.coarse
    r = np.asarray(v, dtype=float) - q * np.floor(np.asarray(v, dtype=float) / q)
    # Round-off can land exactly on q for tiny negative inputs.
    r = np.where(r >= q, r - q, r)
    return float(r) if np.ndim(r) == 0 else r


def quantize(v, chain: LatticeChain1D):
    """Nearest coarse-lattice point; ties go to the even multiple."""
    q = chain.coarse
    out = q * np.round(np.asarray(v, dtype=float) / q)
    return float(out) if np.ndim(out) == 0 else out


def decomposition_residual(v, chain: LatticeChain1D):
    """``v - (Q(v) + [v - Q(v) + q/2] mod q - q/2)``; zero up to round-off."""
    v = np.asarray(v, dtype=float)
    q = chain.coarse
    qv = quantize(v, chain)
    return v - (qv + mod_reduce(v - qv + q / 2, chain) - q / 2)


@dataclass
class TestResult:
    statistic: float
    p_value: float
    counts: list[int]
    alpha: float = UNIFORMITY_ALPHA

    __test__ = False

    @property
    def passed(self) -> bool:
        return self.p_value > self.alpha

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "passed": self.passed,
            "alpha": self.alpha,
            "counts": self.counts,
        }


DitherSampler = Callable[[np.random.Generator, LatticeChain1D, int], np.ndarray]


def uniform_fine_dither(rng: np.random.Generator, chain: LatticeChain1D, n: int) -> np.ndarray:
    return chain.fine * rng.integers(0, chain.index, size=n)


def dithered_cosets(
    chain: LatticeChain1D,
    t_fixed: float,
    n_samples: int,
    seed: int,
    dither: DitherSampler = uniform_fine_dither,
) -> np.ndarray:
    """Fine-coset index of ``[t + u] mod coarse`` for ``n_samples`` dithers."""
    rng = rng_for(seed, "dither")
    x = mod_reduce(t_fixed + dither(rng, chain, n_samples), chain)
    offset = t_fixed % chain.fine
    return np.rint((x - offset) / chain.fine).astype(np.int64) % chain.index


def crypto_uniformity_test(
    chain: LatticeChain1D,
    t_fixed: float,
    n_samples: int,
    seed: int,
    dither: DitherSampler = uniform_fine_dither,
) -> TestResult:
    """Chi-square test that the dithered codeword is uniform over the fine cosets."""
    if chain.index < 2:
        raise ValueError("degenerate chain: coarse and fine lattices coincide")
    if not 0 <= t_fixed < chain.coarse:
        raise ValueError("t_fixed must lie in [0, coarse)")
    if n_samples < 10_000:
        raise ValueError("need at least 10^4 samples")
    idx = dithered_cosets(chain, t_fixed, n_samples, seed, dither)
    counts = np.bincount(idx, minlength=chain.index)
    stat, p = stats.chisquare(counts)
    return TestResult(float(stat), float(p), counts.tolist())


def two_sample_uniformity(
    chain: LatticeChain1D, t_a: float, t_b: float, n_samples: int, seed: int
) -> TestResult:
    """Chi-square homogeneity test between the coset laws for two messages."""
    a = np.bincount(dithered_cosets(chain, t_a, n_samples, seed), minlength=chain.index)
    b = np.bincount(dithered_cosets(chain, t_b, n_samples, seed + 1), minlength=chain.index)
    stat, p, _, _ = stats.chi2_contingency(np.vstack([a, b]))
    return TestResult(float(stat), float(p), (a + b).tolist())


def plugin_entropy_bits(labels: np.ndarray) -> float:
    _, counts = np.unique(labels, return_counts=True)
    p = counts / counts.sum()
    return float(-np.sum(p * np.log2(p)))


def quantization_entropy_check(
    powers: Sequence[float],
    jam_cell_power: float,
    n_samples: int,
    seed: int,
    slack_bits: float = ENTROPY_SLACK_BITS,
) -> tuple[float, float]:
    """Entropy of the coarse index of an aligned sum of dithered components.

    Each component is uniform with second moment ``powers[i]``; the sum is
    quantized by the 1-D lattice whose cell has second moment
    ``jam_cell_power``. Returns the plug-in entropy of the index (bits) and
    the bound ``1/2 log2(sum(powers) / jam_cell_power) + slack_bits``.
    """
    powers = np.asarray(powers, dtype=float)
    if powers.ndim != 1 or powers.size == 0 or np.any(~(powers > 0)):
        raise ValueError("powers must be a nonempty vector of positive numbers")
    if not 0 < jam_cell_power <= powers.min():
        raise ValueError("jam_cell_power must lie in (0, min(powers)]")
    rng = rng_for(seed, "lab")
    half_widths = np.sqrt(3.0 * powers)
    u = rng.uniform(-1.0, 1.0, size=(n_samples, powers.size))
    total = (u * half_widths).sum(axis=1)
    cell = math.sqrt(12.0 * jam_cell_power)
    index = np.round(total / cell)
    bound = 0.5 * math.log2(powers.sum() / jam_cell_power) + slack_bits
    return plugin_entropy_bits(index), bound
