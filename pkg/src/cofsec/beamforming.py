"""Monomial beam-forming for asymptotic real interference alignment.

Sub-message ``m`` of message ``l`` (and jamming component ``m`` of helper
``l``) is scaled by a monomial in the gains ``{h_j : j != l}`` and
``{G[l][j] : j != l}``, with exponents taken from a bijection between
component indices and ``{1..T}^(2K-2)``.

Monomials are kept as exponent vectors; their real values overflow quickly
for large ``T`` and are only evaluated on demand. All comparisons between
monomials are done on exponents, never on floats.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .channel import ChannelConfig

DEFAULT_T = 3
DEFAULT_MAX_ELEMENTS = 50_000_000


@dataclass(frozen=True)
class BeamParams:
    K: int
    T: int = DEFAULT_T
    max_elements: int = DEFAULT_MAX_ELEMENTS

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K >= 1 required")
        if self.T < 2:
            raise ValueError("T >= 2 required")
        if self.M * self.n_exponents > self.max_elements:
            raise MemoryError(
                f"M * (2K-2) = {self.M * self.n_exponents} exceeds the configured "
                f"bound {self.max_elements}"
            )

    @property
    def n_exponents(self) -> int:
        return 2 * self.K - 2

    @property
    def M(self) -> int:
        return self.T ** (2 * self.K - 2)


def phi(m: int, params: BeamParams) -> tuple[int, ...]:
    """Exponent tuple of component ``m`` (0-based).

    Lexicographic mixed-radix order: ``m`` written in base ``T`` with the
    most significant digit first, each digit shifted up by one.
    """
    if not 0 <= m < params.M:
        raise IndexError(f"component index {m} out of range [0, {params.M})")
    digits = []
    for _ in range(params.n_exponents):
        m, d = divmod(m, params.T)
        digits.append(d + 1)
    return tuple(reversed(digits))


def phi_inverse(r: tuple[int, ...], params: BeamParams) -> int:
    if len(r) != params.n_exponents or not all(1 <= x <= params.T for x in r):
        raise ValueError(f"invalid exponent tuple {r!r}")
    m = 0
    for x in r:
        m = m * params.T + (x - 1)
    return m


def gain_index(K: int, kind: str, i: int, j: int | None = None) -> int:
    """Position of a gain in the flat vector ``[h_0..h_{K-1}, G.ravel()]``."""
    if kind == "h":
        return i
    return K + i * K + j


def beam_gain_ids(ell: int, K: int) -> tuple[int, ...]:
    """Flat gain indices entering ``f(., ell, .)``, in exponent order."""
    others = [j for j in range(K) if j != ell]
    return tuple(gain_index(K, "h", j) for j in others) + tuple(
        gain_index(K, "g", ell, j) for j in others
    )


def flat_gains(config: ChannelConfig) -> np.ndarray:
    return np.concatenate([config.h, config.G.ravel()])


@dataclass(frozen=True)
class Monomial:
    """Product of channel gains raised to integer exponents."""

    gain_ids: tuple[int, ...]
    exponents: tuple[int, ...]
    gains: tuple[float, ...]

    @cached_property
    def value(self) -> float:
        return math.prod(self.gains[g] ** e for g, e in zip(self.gain_ids, self.exponents))

    @cached_property
    def log_abs_value(self) -> float:
        return sum(e * math.log(abs(self.gains[g])) for g, e in zip(self.gain_ids, self.exponents))

    def times(self, gain_id: int) -> Monomial:
        """This monomial multiplied by one more factor of the given gain."""
        ids = list(self.gain_ids)
        exps = list(self.exponents)
        if gain_id in ids:
            exps[ids.index(gain_id)] += 1
        else:
            ids.append(gain_id)
            exps.append(1)
        return Monomial(tuple(ids), tuple(exps), self.gains)


def f_monomial(m: int, ell: int, config: ChannelConfig, params: BeamParams) -> Monomial:
    """Beam-forming monomial of component ``m`` of message/helper ``ell``."""
    K = config.K
    if not 0 <= ell < K:
        raise IndexError(f"stream index {ell} out of range [0, {K})")
    if params.K != K:
        raise ValueError(f"params.K={params.K} does not match config.K={K}")
    return Monomial(beam_gain_ids(ell, K), phi(m, params), tuple(flat_gains(config).tolist()))


def monomial_values(ell: int, config: ChannelConfig, params: BeamParams) -> np.ndarray:
    """Values of ``f(m, ell)`` for all ``m``, shape ``(M,)``."""
    gains = flat_gains(config)[list(beam_gain_ids(ell, config.K))]
    r = np.array([phi(m, params) for m in range(params.M)], dtype=float)
    return np.prod(gains[None, :] ** r, axis=1)


def _shifted_exponent_set(params: BeamParams, pos: int) -> set[tuple[int, ...]]:
    out = set()
    for r in itertools.product(range(1, params.T + 1), repeat=params.n_exponents):
        s = list(r)
        s[pos] += 1
        out.add(tuple(s))
    return out


def alignment_fraction(ell: int, k: int, params: BeamParams) -> float:
    """Share of message components of ``ell`` aligned with its jamming at ``k``.

    At receiver ``k`` the message components arrive as ``h_k f(m, ell)`` and
    the jamming components as ``G[ell][k] f(m, ell)``. The fraction is the
    overlap of the two exponent sets divided by ``M``, found by exhaustive
    enumeration.
    """
    if k == ell:
        raise ValueError("alignment is defined for unintended receivers only (k != ell)")
    K = params.K
    if not (0 <= ell < K and 0 <= k < K):
        raise IndexError("receiver index out of range")
    pos_h = k if k < ell else k - 1
    pos_g = (K - 1) + pos_h
    msg = _shifted_exponent_set(params, pos_h)
    jam = _shifted_exponent_set(params, pos_g)
    return len(msg & jam) / params.M


def alignment_fraction_exact(T: int) -> float:
    return ((T - 1) / T) ** 2


def _canonical_symbols(config: ChannelConfig, tol: float = 0.0) -> list[int | None]:
    # Gains with equal magnitude share one symbol; unit magnitude carries none.
    gains = np.abs(flat_gains(config))
    symbols: list[int | None] = []
    reps: list[float] = []
    for g in gains:
        if abs(g - 1.0) <= tol:
            symbols.append(None)
            continue
        for s, rep in enumerate(reps):
            if abs(g - rep) <= tol * max(1.0, rep):
                symbols.append(s)
                break
        else:
            reps.append(float(g))
            symbols.append(len(reps) - 1)
    return symbols


def _canonical(exps: dict[int, int]) -> tuple[tuple[int, int], ...]:
    return tuple(sorted((s, e) for s, e in exps.items() if e))


def _canonical_monomial(
    r: tuple[int, ...], ids: tuple[int, ...], symbols: list[int | None], extra: int | None = None
) -> tuple[tuple[int, int], ...]:
    acc: dict[int, int] = {}
    for g, e in zip(ids, r):
        s = symbols[g]
        if s is not None:
            acc[s] = acc.get(s, 0) + e
    if extra is not None and symbols[extra] is not None:
        acc[symbols[extra]] = acc.get(symbols[extra], 0) + 1
    return _canonical(acc)


def alignment_collisions(config: ChannelConfig, params: BeamParams) -> list[str]:
    """Describe every unwanted coincidence among beam-forming monomials.

    Gains of equal magnitude are identified with one symbol, so structural
    coincidences in the gain values show up as equal exponent vectors.
    Coincidence between message ``l`` and jamming ``l`` at one receiver is
    the intended alignment and is not reported.
    """
    K = config.K
    symbols = _canonical_symbols(config)
    tuples = [phi(m, params) for m in range(params.M)]
    ids = [beam_gain_ids(ell, K) for ell in range(K)]
    problems: list[str] = []

    seen: dict[tuple, tuple[int, int]] = {}
    for ell in range(K):
        for m, r in enumerate(tuples):
            key = _canonical_monomial(r, ids[ell], symbols)
            if key in seen:
                problems.append(f"transmit: f({m},{ell}) == f{seen[key]}")
            else:
                seen[key] = (m, ell)

    for k in range(K):
        owner: dict[tuple, int] = {}
        for ell in range(K):
            h_k = gain_index(K, "h", k)
            g_lk = gain_index(K, "g", ell, k)
            stream = set()
            for r in tuples:
                stream.add(_canonical_monomial(r, ids[ell], symbols, h_k))
                stream.add(_canonical_monomial(r, ids[ell], symbols, g_lk))
            for key in stream:
                if key in owner and owner[key] != ell:
                    problems.append(f"receiver {k}: streams {owner[key]} and {ell} share a dimension")
                else:
                    owner[key] = ell
    return problems


def rational_independence_check(config: ChannelConfig, params: BeamParams) -> bool:
    """Symbolic proxy for generic rational independence of the received monomials."""
    return not alignment_collisions(config, params)
