"""Asymmetric compute-and-forward at one receiver.

After alignment, receiver ``l`` sees an effective K-user multiple-access
channel: its own message with gain ``h[l]/d`` and, for every ``j != l``, the
aligned sum of message ``j`` and jamming ``j`` with gain ``1/d``, where
``d = sqrt(G[l][l]**2 * PJ_l + 1)`` absorbs the own helper's jamming into the
noise.

For an integer vector ``a``, the MMSE-scaled effective noise variance of the
combination ``sum_j a_j x_eff_j`` is the quadratic form ``a^T Q a`` with

    Q = D - (D h)(D h)^T / (1 + h^T D h),   D = diag(P_eff).

Coefficient vectors are picked by LLL reduction of ``Z^K`` under ``Q`` and
decoded successively, each decoded combination being conditioned on through
a rank-one Schur-complement update of ``Q`` (carried out on a square root of
``Q``).
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .channel import ChannelConfig
from .power import PowerAllocation, check_allocation, Infeasible

LLL_DELTA = 0.75
RATE_CAP = 60.0


class SkipCombination(Exception):
    """A combination involves only effective codewords that are already decoded."""


@dataclass(frozen=True)
class EffectiveMac:
    """Effective channel ``h_eff`` and codeword powers ``P_eff`` at one receiver.

    Noise is normalized to unit variance. ``P`` is the power budget used to
    express the powers as scaling factors ``b_eff``.
    """

    receiver: int
    h_eff: np.ndarray
    P_eff: np.ndarray
    P: float = 1.0

    def __post_init__(self):
        h = np.array(self.h_eff, dtype=float).reshape(-1)
        p = np.array(self.P_eff, dtype=float).reshape(-1)
        if h.shape != p.shape:
            raise ValueError("h_eff and P_eff must have equal length")
        if np.any(p <= 0):
            raise ValueError("effective powers must be positive")
        object.__setattr__(self, "h_eff", h)
        object.__setattr__(self, "P_eff", p)

    @property
    def K(self) -> int:
        return self.h_eff.size

    @property
    def b_eff(self) -> np.ndarray:
        return np.sqrt(self.P_eff / self.P)

    @property
    def snr_gains(self) -> np.ndarray:
        """Received amplitude of each unit-power effective codeword."""
        return self.h_eff * np.sqrt(self.P_eff)


def build_effective_mac(config: ChannelConfig, alloc: PowerAllocation, ell: int) -> EffectiveMac:
    res = check_allocation(alloc, config)
    if not res.ok:
        raise Infeasible("; ".join(res.violations))
    K = config.K
    if not 0 <= ell < K:
        raise IndexError(f"receiver index {ell} out of range [0, {K})")
    msg = alloc.message_totals
    jam = alloc.jamming_totals
    denom = math.sqrt(config.G[ell, ell] ** 2 * jam[ell] + 1.0)
    h_eff = np.full(K, 1.0 / denom)
    h_eff[ell] = config.h[ell] / denom
    P_eff = config.h[ell] ** 2 * msg + config.G[:, ell] ** 2 * jam
    P_eff[ell] = msg[ell]
    return EffectiveMac(ell, h_eff, P_eff, config.P)


def gram_matrix(mac: EffectiveMac) -> np.ndarray:
    """Quadratic form ``Q`` with ``a^T Q a`` the MMSE effective-noise variance.

    Built as ``D^1/2 ((1+S) I - g g^T) D^1/2 / (1+S)`` with ``g = h sqrt(P)``
    and ``S = |g|^2``; the diagonal uses ``sum_{t != i} g_t^2`` directly so
    the large terms never cancel.
    """
    g = mac.snr_gains
    S = float(g @ g)
    inner = -np.outer(g, g)
    inner[np.diag_indices_from(inner)] = 1.0 + (S - g**2)
    sq = np.sqrt(mac.P_eff)
    return sq[:, None] * inner * sq[None, :] / (1.0 + S)


def gram_factor(mac: EffectiveMac) -> np.ndarray:
    """Symmetric square root ``F`` with ``F F^T = Q``.

    ``(I + g g^T)^(-1/2) = I - c g g^T`` with ``c = (1 - 1/sqrt(1+S)) / S``.
    """
    g = mac.snr_gains
    S = float(g @ g)
    c = 0.0 if S == 0.0 else (1.0 - 1.0 / math.sqrt(1.0 + S)) / S
    root = np.eye(mac.K) - c * np.outer(g, g)
    return np.sqrt(mac.P_eff)[:, None] * root


def mmse_sigma2(mac: EffectiveMac, a) -> tuple[float, float]:
    """Effective-noise variance and MMSE scaling for coefficient vector ``a``.

    Returns
    -------
    sigma2 : float
        ``sum_j a_j^2 P_j - beta * sum_j a_j h_j P_j``, evaluated through the
        Lagrange identity to avoid cancellation at high SNR.
    beta : float
        ``sum_j a_j h_j P_j / (1 + sum_j h_j^2 P_j)``.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != mac.h_eff.shape:
        raise ValueError(f"coefficient vector must have length {mac.K}")
    if not np.any(a):
        raise ValueError("coefficient vector must be nonzero")
    P, h = mac.P_eff, mac.h_eff
    denom = 1.0 + float(np.sum(h**2 * P))
    corr = float(np.sum(a * h * P))
    beta = corr / denom
    b = a * np.sqrt(P)
    g = mac.snr_gains
    cross = np.outer(b, g) - np.outer(g, b)
    wedge = 0.5 * float(np.sum(cross**2))
    sigma2 = (float(b @ b) + wedge) / denom
    return sigma2, beta


def _is_positive_definite(Q: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(Q)
    except np.linalg.LinAlgError:
        return False
    return True


def select_coefficients(
    mac: EffectiveMac,
    delta: float = LLL_DELTA,
    gram: Callable[[EffectiveMac], np.ndarray] = gram_matrix,
) -> np.ndarray:
    """LLL-reduced unimodular coefficient matrix, rows by ``a^T Q a`` ascending.

    If ``Q`` is numerically singular the diagonal ``D`` is reduced instead,
    which degrades to decoding the effective codewords one by one.
    """
    Q = gram(mac)
    if not _is_positive_definite(Q):
        Q = np.diag(mac.P_eff)
    A = kernels.lll_reduce_gram(Q, delta)
    # Canonical sign: first nonzero entry positive.
    lead = A[np.arange(A.shape[0]), np.argmax(A != 0, axis=1)]
    A = A * np.where(lead < 0, -1, 1)[:, None]
    norms = np.einsum("ij,jk,ik->i", A, Q, A)
    return A[np.argsort(norms, kind="stable")]


def conditioning_sequence(F: np.ndarray, A: np.ndarray) -> list[np.ndarray]:
    """The matrices ``Q_1, ..., Q_{K+1}`` of the successive recursion.

    ``F`` is a square root of ``Q_1`` (see :func:`gram_factor`); each step
    projects it orthogonally to ``F^T a_k``.
    """
    Fk = np.array(F, dtype=float)
    out = [Fk @ Fk.T]
    for a in np.asarray(A, dtype=float):
        w = Fk.T @ a
        s = float(w @ w)
        if s > 0:
            Fk = Fk - np.outer(Fk @ w, w) / s
        out.append(Fk @ Fk.T)
    return out


@dataclass
class CofSolution:
    """Coefficients, noise variances and combination rates at one receiver.

    ``sigma2[k]`` and ``R_comb[k]`` follow the decoding order of the rows of
    ``A``; ``decode_order[k]`` is the effective codeword resolved by
    combination ``k``.
    """

    receiver: int
    A: np.ndarray
    beta1: float
    sigma2: np.ndarray
    decode_order: list[int]
    R_comb: np.ndarray
    P_eff: np.ndarray
    skipped: list[int] = field(default_factory=list)

    @property
    def K(self) -> int:
        return len(self.sigma2)

    @property
    def sigma2_sorted(self) -> np.ndarray:
        return np.sort(self.sigma2)

    @property
    def is_ordered(self) -> bool:
        """Whether the decoded variances came out nondecreasing."""
        return bool(np.all(np.diff(self.sigma2) >= -1e-12 * np.max(self.sigma2)))

    def to_dict(self) -> dict:
        return {
            "receiver": self.receiver,
            "A": self.A.tolist(),
            "beta1": self.beta1,
            "sigma2": self.sigma2.tolist(),
            "sigma2_sorted": self.sigma2_sorted.tolist(),
            "R_comb": self.R_comb.tolist(),
            "decodeOrder": list(self.decode_order),
            "skipped": list(self.skipped),
        }


def combination_rate(p_eff: float, sigma2: float, cap: float = RATE_CAP) -> float:
    if sigma2 <= 0.0:
        return cap
    return min(cap, max(0.0, 0.5 * math.log2(p_eff / sigma2)))


def _decode_order(A: np.ndarray, P_eff: np.ndarray, strict: bool) -> tuple[list[int], list[int]]:
    K = A.shape[1]
    order: list[int] = []
    skipped: list[int] = []
    for k, a in enumerate(A):
        free = [j for j in range(K) if j not in order]
        eligible = [j for j in free if a[j] != 0]
        if not eligible:
            if strict:
                raise SkipCombination(f"combination {k} involves only decoded codewords")
            skipped.append(k)
            eligible = free
        # Largest power first; ties to the smallest index.
        order.append(max(eligible, key=lambda j: (P_eff[j], -j)))
    return order, skipped


def successive_rates(
    mac: EffectiveMac, A, strict: bool = False, rate_cap: float = RATE_CAP
) -> CofSolution:
    """Decode the rows of ``A`` in order, conditioning on each decoded combination.

    With ``strict`` a combination that involves no undecoded codeword raises
    :class:`SkipCombination`; otherwise it is listed in ``skipped`` and
    assigned the strongest remaining codeword.
    """
    A = np.asarray(A, dtype=np.int64)
    if A.ndim != 2 or A.shape != (mac.K, mac.K):
        raise ValueError(f"A must be {mac.K} x {mac.K}")
    if np.linalg.matrix_rank(A.astype(float)) < mac.K:
        raise ValueError("coefficient matrix is rank deficient")
    sigma2 = np.asarray(kernels.successive_sigma2(gram_factor(mac), A), dtype=float)
    _, beta1 = mmse_sigma2(mac, A[0])
    order, skipped = _decode_order(A, mac.P_eff, strict)
    R = np.array([combination_rate(mac.P_eff[j], s, rate_cap) for j, s in zip(order, sigma2)])
    return CofSolution(mac.receiver, A, beta1, sigma2, order, R, mac.P_eff.copy(), skipped)


def receiver_solution(config: ChannelConfig, alloc: PowerAllocation, ell: int) -> CofSolution:
    mac = build_effective_mac(config, alloc, ell)
    return successive_rates(mac, select_coefficients(mac))
