"""K-receiver Gaussian broadcast channel with K cooperative-jamming helpers.

Receiver ``l`` observes ``y_l = h[l] x + sum_i G[i][l] xJ_i + z_l`` with unit
variance noise. Gains are real; ``G[i][l]`` is the gain from helper ``i`` to
receiver ``l``.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DEFAULT_LO = 0.5
DEFAULT_HI = 2.0


def rng_for(seed: int, label: str) -> np.random.Generator:
    """Independent generator for a labeled stream derived from ``seed``.

    Labels such as ``"channel"``, ``"dither"`` or ``"lab"`` decouple the
    random draws of different modules that share one user-facing seed.
    """
    return np.random.default_rng([int(seed), zlib.crc32(label.encode())])


@dataclass
class ValidationResult:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class ChannelConfig:
    """Gains and power budget of one channel realization.

    Attributes
    ----------
    K : int
        Number of receivers, equal to the number of helpers.
    h : ndarray, shape (K,)
        Transmitter to receiver gains.
    G : ndarray, shape (K, K)
        ``G[i, l]`` is the gain from helper ``i`` to receiver ``l``.
    P : float
        Power budget, shared by the transmitter and jointly by the helpers.
    """

    K: int
    h: np.ndarray
    G: np.ndarray
    P: float

    def __post_init__(self):
        h = np.array(self.h, dtype=float)
        G = np.array(self.G, dtype=float)
        h.setflags(write=False)
        G.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "P", float(self.P))

    def with_power(self, P: float) -> ChannelConfig:
        return ChannelConfig(self.K, self.h, self.G, P)

    def to_dict(self) -> dict:
        return {"K": int(self.K), "h": self.h.tolist(), "G": self.G.tolist(), "P": self.P}

    @classmethod
    def from_dict(cls, d: dict) -> ChannelConfig:
        try:
            return cls(int(d["K"]), d["h"], d["G"], d["P"])
        except KeyError as exc:
            raise ValueError(f"channel config missing field {exc}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> ChannelConfig:
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path: str | Path) -> ChannelConfig:
        return cls.from_json(Path(path).read_text())


def validate(config: ChannelConfig) -> ValidationResult:
    """Check the channel invariants and list every violation found."""
    res = ValidationResult()
    K = config.K
    if K < 2:
        res.violations.append("K >= 2")
    if config.h.shape != (K,):
        res.violations.append(f"h must have length K={K}, got shape {config.h.shape}")
    if config.G.shape != (K, K):
        res.violations.append(f"G must be K x K, got shape {config.G.shape}")
    gains = np.concatenate([config.h.ravel(), config.G.ravel()])
    if not np.all(np.isfinite(gains)):
        res.violations.append("finite gains")
    elif np.any(gains == 0):
        res.violations.append("nonzero gains")
    if not (np.isfinite(config.P) and config.P > 0):
        res.violations.append("P > 0")
    return res


def sample_channel(
    K: int, seed: int, lo: float = DEFAULT_LO, hi: float = DEFAULT_HI, P: float = 1.0
) -> ChannelConfig:
    """Draw gains i.i.d. uniform on ``[lo, hi]``.

    A continuous law makes the gains rationally independent with
    probability one. Same arguments always give the same config.
    """
    if not (0 < lo < hi):
        raise ValueError(f"invalid gain range [{lo}, {hi}]: need 0 < lo < hi")
    if K < 2:
        raise ValueError("K >= 2 required")
    rng = rng_for(seed, "channel")
    draws = rng.uniform(lo, hi, size=K + K * K)
    return ChannelConfig(K, draws[:K], draws[K:].reshape(K, K), P)
