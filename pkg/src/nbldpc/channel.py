"""Modulation, AWGN and per-symbol a-priori information.

The a-priori row of a variable node is a length-q vector of nonnegative
metrics in nats. Three referencing conventions are supported and differ only
by a per-row constant:

* ``LOGPROB``: ``-ln Pr(x_n = a | y_n)`` (properly normalized).
* ``ZERO_REF``: ``ln Pr(x_n = 0 | y_n) / Pr(x_n = a | y_n)``, zero at symbol 0.
* ``STAR_REF``: referenced to the most likely symbol, so each row has minimum 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import logsumexp


class ChannelError(ValueError):
    pass


class Convention(str, Enum):
    LOGPROB = "logprob"
    ZERO_REF = "zero_ref"
    STAR_REF = "star_ref"


# Per-axis Gray code: 2-bit label -> amplitude level.
_GRAY_LEVEL = {0b00: -3.0, 0b01: -1.0, 0b11: 1.0, 0b10: 3.0}


@dataclass(frozen=True)
class ModulationScheme:
    name: str
    constellation: np.ndarray  # constellation[s] is the point for GF(q) symbol s
    bits_per_symbol: int

    @property
    def q(self) -> int:
        return len(self.constellation)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.constellation)


def bpsk() -> ModulationScheme:
    return ModulationScheme("bpsk", np.array([1.0, -1.0]), 1)


def qam16() -> ModulationScheme:
    """Square 16-QAM: bits b3b2 pick the I level, b1b0 the Q level."""
    pts = np.empty(16, dtype=complex)
    for s in range(16):
        pts[s] = complex(_GRAY_LEVEL[s >> 2], _GRAY_LEVEL[s & 0b11])
    return ModulationScheme("qam16", pts / np.sqrt(10.0), 4)


SCHEMES = {"bpsk": bpsk, "qam16": qam16}


def get_scheme(name: str) -> ModulationScheme:
    try:
        return SCHEMES[name.lower()]()
    except KeyError:
        raise ChannelError(f"unknown modulation {name!r}; choose from {sorted(SCHEMES)}") from None


def ebno_to_sigma(ebno_db: float, rate: float, bits_per_channel_symbol: int) -> float:
    """Noise standard deviation per real dimension for a unit-energy constellation."""
    if not rate > 0 or rate > 1:
        raise ChannelError(f"code rate must lie in (0, 1], got {rate}")
    if bits_per_channel_symbol < 1:
        raise ChannelError("bits_per_channel_symbol must be >= 1")
    ebno = 10.0 ** (ebno_db / 10.0)
    return float(np.sqrt(1.0 / (2.0 * rate * bits_per_channel_symbol * ebno)))


def modulate(word, scheme: ModulationScheme) -> np.ndarray:
    word = np.asarray(word, dtype=np.int64)
    if word.size and (word.min() < 0 or word.max() >= scheme.q):
        raise ChannelError(f"symbols outside 0..{scheme.q - 1} for {scheme.name}")
    return scheme.constellation[word]


def check_cardinality(scheme: ModulationScheme, q: int):
    if scheme.q != q:
        raise ChannelError(f"{scheme.name} carries {scheme.q} symbols but the field has {q}")


def awgn(samples, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Add white Gaussian noise of std ``sigma`` to each real dimension."""
    if sigma < 0:
        raise ChannelError("sigma must be nonnegative")
    samples = np.asarray(samples)
    if np.iscomplexobj(samples):
        noise = rng.standard_normal(samples.shape) + 1j * rng.standard_normal(samples.shape)
    else:
        noise = rng.standard_normal(samples.shape)
    return samples + sigma * noise


@dataclass
class IntrinsicInfo:
    gamma: np.ndarray  # (N, q)
    convention: Convention
    sigma: float | None = None

    @property
    def N(self) -> int:
        return self.gamma.shape[0]

    @property
    def q(self) -> int:
        return self.gamma.shape[1]

    def scaled(self, lam: float) -> "IntrinsicInfo":
        return IntrinsicInfo(self.gamma * lam, self.convention, self.sigma)


def reference(metric, convention: Convention) -> np.ndarray:
    """Re-reference rows of a per-symbol metric to ``convention``.

    ``metric`` may carry any per-row offset; only differences within a row
    matter.
    """
    d = np.asarray(metric, dtype=float)
    convention = Convention(convention)
    if convention is Convention.STAR_REF:
        return d - d.min(axis=1, keepdims=True)
    if convention is Convention.ZERO_REF:
        return d - d[:, :1]
    return d + logsumexp(-d, axis=1, keepdims=True)


def intrinsic_from_metric(metric, convention, sigma=None) -> IntrinsicInfo:
    gamma = reference(metric, convention)
    if not np.isfinite(gamma).all():
        raise ChannelError("a-priori metrics must be finite")
    return IntrinsicInfo(gamma, Convention(convention), sigma)


def convert(info: IntrinsicInfo, convention) -> IntrinsicInfo:
    return intrinsic_from_metric(info.gamma, convention, info.sigma)


def symbol_metric(observations, sigma: float, scheme: ModulationScheme) -> np.ndarray:
    """``|y_n - s(a)|^2 / (2 sigma^2)`` for every node and symbol."""
    if sigma <= 0:
        raise ChannelError("sigma = 0 gives degenerate likelihoods")
    y = np.asarray(observations)
    pts = scheme.constellation
    if scheme.is_real:
        y = np.real(y)
    return np.abs(y[:, None] - pts[None, :]) ** 2 / (2.0 * sigma**2)


def intrinsic(observations, sigma: float, scheme: ModulationScheme, convention) -> IntrinsicInfo:
    return intrinsic_from_metric(symbol_metric(observations, sigma, scheme), convention, sigma)


def to_probabilities(info: IntrinsicInfo) -> np.ndarray:
    """Row-normalized symbol probabilities ``exp(-gamma)``."""
    g = info.gamma - info.gamma.min(axis=1, keepdims=True)
    p = np.exp(-g)
    return p / p.sum(axis=1, keepdims=True)
