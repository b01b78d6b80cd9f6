"""Deterministic random streams and two-level (population -> individual) sampling.

Every random draw in the simulator comes from a stream addressed by
``(master_seed, path)``, where ``path`` is a tuple of tags such as
``("consumer", 7, "income")``.  The path is hashed with BLAKE2b into the
128-bit key of a Philox counter-based generator, so any entity's stream can be
rebuilt in any process without shared generator state.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

_MASK64 = (1 << 64) - 1


def _encode_tag(tag) -> bytes:
    if isinstance(tag, (bool, np.bool_)):
        return b"b" + (b"1" if tag else b"0")
    if isinstance(tag, (int, np.integer)):
        return b"i" + str(int(tag)).encode()
    if isinstance(tag, str):
        return b"s" + tag.encode("utf-8")
    raise TypeError(f"stream path tags must be str or int, got {type(tag).__name__}")


def _path_key(master_seed: int, path: Sequence[Hashable]) -> tuple[int, int]:
    h = hashlib.blake2b(digest_size=16, person=b"synthcard-rng")
    h.update(int(master_seed & _MASK64).to_bytes(8, "little"))
    for tag in path:
        enc = _encode_tag(tag)
        h.update(len(enc).to_bytes(4, "little"))
        h.update(enc)
    d = h.digest()
    return int.from_bytes(d[:8], "little"), int.from_bytes(d[8:], "little")


class RngStream:
    """A named, reproducible random stream.

    ``generator`` is a plain :class:`numpy.random.Generator`; callers on hot
    paths use it directly.
    """

    __slots__ = ("master_seed", "path", "generator")

    def __init__(self, master_seed: int, path: Sequence[Hashable]):
        self.master_seed = int(master_seed) & _MASK64
        self.path = tuple(path)
        k0, k1 = _path_key(self.master_seed, self.path)
        self.generator = np.random.Generator(np.random.Philox(key=[k0, k1]))

    def child(self, *tags) -> "RngStream":
        return RngStream(self.master_seed, self.path + tags)

    def __repr__(self):
        return f"RngStream(seed={self.master_seed}, path={self.path!r})"


def derive_stream(master_seed: int, path: Sequence[Hashable]) -> RngStream:
    """Return the stream for ``path`` under ``master_seed``.

    Identical arguments always yield an identical value sequence; distinct
    paths give distinct Philox keys.
    """
    if len(path) == 0:
        raise ValueError("stream path must be non-empty")
    return RngStream(master_seed, path)


@dataclass(frozen=True)
class PopulationDistribution:
    """Population-level distribution of one attribute.

    ``spread_fraction`` is the share of the population variance that sits
    between individuals; the rest is event-to-event variation within one
    individual.
    """

    mean: float
    std_dev: float
    spread_fraction: float = 0.5

    def __post_init__(self):
        if not self.std_dev >= 0:
            raise ValueError(f"std_dev must be >= 0, got {self.std_dev}")
        if not 0.0 <= self.spread_fraction <= 1.0:
            raise ValueError(f"spread_fraction must be in [0, 1], got {self.spread_fraction}")


@dataclass(frozen=True)
class IndividualDistribution:
    indiv_mean: float
    indiv_std: float

    def __post_init__(self):
        if not self.indiv_std >= 0:
            raise ValueError(f"indiv_std must be >= 0, got {self.indiv_std}")


def _gen(s) -> np.random.Generator:
    return s.generator if isinstance(s, RngStream) else s


def sample_gaussian(s, mean: float, std: float, size=None):
    if std < 0:
        raise ValueError(f"std must be >= 0, got {std}")
    g = _gen(s)
    if std == 0:
        return float(mean) if size is None else np.full(size, float(mean))
    return g.normal(mean, std, size)


def sample_truncated_gaussian(s, mean: float, std: float, lo: float = -math.inf,
                              hi: float = math.inf, size=None, max_attempts: int = 100):
    """Gaussian conditioned on ``[lo, hi]`` by rejection.

    Out-of-range draws are redrawn up to ``max_attempts`` times; anything still
    outside after that is clamped.  Clamping only matters when the interval
    sits far in a tail.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got lo={lo}, hi={hi}")
    if std < 0:
        raise ValueError(f"std must be >= 0, got {std}")
    g = _gen(s)
    if std == 0:
        v = min(max(float(mean), lo), hi)
        return v if size is None else np.full(size, v)
    scalar = size is None
    x = np.atleast_1d(g.normal(mean, std, 1 if scalar else size))
    bad = (x < lo) | (x > hi)
    for _ in range(max_attempts - 1):
        n_bad = int(bad.sum())
        if n_bad == 0:
            break
        x[bad] = g.normal(mean, std, n_bad)
        bad = (x < lo) | (x > hi)
    np.clip(x, lo, hi, out=x)
    return float(x[0]) if scalar else x


def truncated_gaussian_cdf(x, mean, std, lo=-math.inf, hi=math.inf):
    """CDF of the Gaussian conditioned on ``[lo, hi]``."""
    a, b = ndtr((lo - mean) / std), ndtr((hi - mean) / std)
    return (ndtr((np.asarray(x) - mean) / std) - a) / (b - a)


def truncated_gaussian_ppf(u, mean, std, lo=-math.inf, hi=math.inf):
    a, b = ndtr((lo - mean) / std), ndtr((hi - mean) / std)
    q = np.clip(a + np.asarray(u) * (b - a), 1e-15, 1 - 1e-15)
    return np.clip(mean + std * ndtri(q), lo, hi)


def lognormal_params(mean: float, std: float) -> tuple[float, float]:
    """(mu, sigma) of the lognormal with the given arithmetic mean and std."""
    if mean <= 0:
        raise ValueError("lognormal mean must be positive")
    sigma2 = math.log1p((std / mean) ** 2)
    return math.log(mean) - 0.5 * sigma2, math.sqrt(sigma2)


def sample_lognormal(s, mean: float, std: float, size=None):
    mu, sigma = lognormal_params(mean, std)
    return _gen(s).lognormal(mu, sigma, size)


def individualize(pop: PopulationDistribution, s, lo: float = -math.inf,
                  hi: float = math.inf) -> IndividualDistribution:
    """Draw one individual's personal distribution from the population one.

    The personal mean gets ``spread_fraction`` of the variance and the
    personal std keeps the remainder, so pooled event draws across the
    population have variance ``pop.std_dev**2``.  Optional bounds truncate the
    personal mean only.
    """
    between = math.sqrt(pop.spread_fraction) * pop.std_dev
    within = math.sqrt(1.0 - pop.spread_fraction) * pop.std_dev
    if math.isinf(lo) and math.isinf(hi):
        m = sample_gaussian(s, pop.mean, between)
    else:
        m = sample_truncated_gaussian(s, pop.mean, between, lo, hi)
    return IndividualDistribution(float(m), within)


def individualize_many(pop: PopulationDistribution, g: np.random.Generator, n: int,
                       lo: float = -math.inf, hi: float = math.inf) -> tuple[np.ndarray, float]:
    """Vectorized :func:`individualize`: ``n`` personal means and the shared personal std."""
    between = math.sqrt(pop.spread_fraction) * pop.std_dev
    within = math.sqrt(1.0 - pop.spread_fraction) * pop.std_dev
    means = sample_truncated_gaussian(g, pop.mean, between, lo, hi, size=n)
    return np.asarray(means, dtype=float), within


def sample_categorical(g: np.random.Generator, weights, size=None):
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or len(w) == 0 or (w < 0).any() or w.sum() <= 0:
        raise ValueError("categorical weights must be non-negative with positive sum")
    cw = np.cumsum(w)
    u = g.random(size) * cw[-1]
    return np.minimum(np.searchsorted(cw, u, side="right"), len(w) - 1)
