"""Cross-correlation of attribute columns.

Two tools, used together by the population generator:

* :func:`impose_correlation` rotates a block of columns so its empirical
  correlation matrix equals a target exactly, leaving every column's mean and
  standard deviation untouched (whiten by the inverse square root of the
  empirical correlation, recolor by the square root of the target).
* :func:`monotone_couple` is the cheap alternative for attributes outside the
  core block: it rank-couples a freshly drawn column to a driver column.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import ndtri
from scipy.stats import rankdata

from .errors import CalibrationError
from .rand import PopulationDistribution, RngStream, sample_gaussian, sample_truncated_gaussian

PSD_TOL = 1e-8


@dataclass(frozen=True)
class CorrelationSpec:
    """Partially known pairwise correlations over named attributes.

    ``entries`` holds each specified pair once, keyed by index pair ``(i, j)``
    with ``i < j``; lookups are symmetric.
    """

    attribute_names: tuple[str, ...]
    entries: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        names = tuple(self.attribute_names)
        object.__setattr__(self, "attribute_names", names)
        if len(set(names)) != len(names):
            raise ValueError("attribute names must be unique")
        k = len(names)
        norm = {}
        for (i, j), rho in dict(self.entries).items():
            if not (0 <= i < k and 0 <= j < k) or i == j:
                raise ValueError(f"bad correlation index pair ({i}, {j})")
            if not -1.0 <= rho <= 1.0:
                raise ValueError(f"correlation {names[i]}~{names[j]}={rho} outside [-1, 1]")
            key = (min(i, j), max(i, j))
            if key in norm and norm[key] != rho:
                raise ValueError(f"asymmetric entries for {names[key[0]]}~{names[key[1]]}")
            norm[key] = float(rho)
        object.__setattr__(self, "entries", norm)

    @classmethod
    def from_triples(cls, names: Sequence[str], triples: Iterable[tuple[str, str, float]]):
        index = {n: i for i, n in enumerate(names)}
        entries = {}
        for a, b, rho in triples:
            if a not in index or b not in index:
                missing = a if a not in index else b
                raise ValueError(f"unknown attribute in correlation spec: {missing!r}")
            i, j = index[a], index[b]
            key = (min(i, j), max(i, j))
            if key in entries and entries[key] != rho:
                raise ValueError(f"conflicting correlation entries for {a}~{b}")
            entries[key] = rho
        return cls(tuple(names), entries)

    def get(self, i: int, j: int):
        if i == j:
            return 1.0
        return self.entries.get((min(i, j), max(i, j)))

    def raw_matrix(self) -> np.ndarray:
        k = len(self.attribute_names)
        m = np.eye(k)
        for (i, j), rho in self.entries.items():
            m[i, j] = m[j, i] = rho
        return m


@dataclass(frozen=True)
class CompletedCorrelation:
    matrix: np.ndarray
    max_deviation: float
    worst_pair: tuple[str, str] | None
    repaired: bool


def nearest_psd_correlation(m: np.ndarray) -> np.ndarray:
    """Clip negative eigenvalues to zero, then rescale back to unit diagonal."""
    m = 0.5 * (m + m.T)
    w, v = np.linalg.eigh(m)
    if w[0] >= 0:
        return m.copy()
    out = (v * np.maximum(w, 0.0)) @ v.T
    d = np.sqrt(np.clip(np.diag(out), 1e-300, None))
    out = out / d[:, None] / d[None, :]
    out = 0.5 * (out + out.T)
    np.fill_diagonal(out, 1.0)
    return out


def complete_to_psd(spec: CorrelationSpec, max_shift: float | None = 0.2) -> CompletedCorrelation:
    """Fill unspecified pairs with 0 and repair to a PSD correlation matrix.

    Raises :class:`CalibrationError` naming the most-moved specified pair when
    repair moves any specified entry by more than ``max_shift``.  Pass
    ``max_shift=None`` to get the repaired matrix and its deviation report
    without the check.
    """
    raw = spec.raw_matrix()
    fixed = nearest_psd_correlation(raw)
    worst, worst_pair = 0.0, None
    for (i, j), rho in spec.entries.items():
        dev = abs(fixed[i, j] - rho)
        if dev > worst:
            worst, worst_pair = dev, (spec.attribute_names[i], spec.attribute_names[j])
    result = CompletedCorrelation(fixed, worst, worst_pair, not np.array_equal(fixed, raw))
    if max_shift is not None and worst > max_shift:
        a, b = worst_pair
        raise CalibrationError(
            f"correlation spec is contradictory: PSD repair moves {a}~{b} by {worst:.3f} "
            f"(limit {max_shift})", pair=worst_pair, completion=result)
    return result


@dataclass
class AttributeMatrix:
    """Columns of per-individual attribute values plus their recorded moments."""

    columns: np.ndarray
    names: tuple[str, ...]
    means: np.ndarray = None
    stds: np.ndarray = None

    def __post_init__(self):
        self.columns = np.asarray(self.columns, dtype=float)
        if self.columns.ndim != 2:
            raise ValueError("columns must be a 2-D array (individuals x attributes)")
        self.names = tuple(self.names)
        if len(self.names) != self.columns.shape[1]:
            raise ValueError("one name per column required")
        if self.means is None:
            self.means = self.columns.mean(axis=0)
        if self.stds is None:
            self.stds = self.columns.std(axis=0)

    def correlation(self) -> np.ndarray:
        return np.corrcoef(self.columns, rowvar=False)


def _sym_sqrt(c: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(0.5 * (c + c.T))
    return w, v, (v * np.sqrt(np.maximum(w, 0.0))) @ v.T


def impose_correlation(data: AttributeMatrix, target: np.ndarray) -> AttributeMatrix:
    """Return a copy of ``data`` whose empirical correlation equals ``target``.

    Columns are standardized, whitened with ``C^{-1/2}`` (``C`` the empirical
    correlation), recolored with ``T^{1/2}`` and shifted back to their original
    means and standard deviations.  Both square roots are the symmetric ones
    from the eigendecomposition, so imposing a matrix equal to the current
    correlation is the identity and repeated application is idempotent.
    """
    x = data.columns
    n, k = x.shape
    target = np.asarray(target, dtype=float)
    if target.shape != (k, k):
        raise ValueError(f"target must be {k}x{k}, got {target.shape}")
    if not np.allclose(target, target.T, atol=1e-12):
        raise ValueError("target correlation must be symmetric")
    if n <= k:
        raise ValueError(f"need more individuals ({n}) than attributes ({k})")
    tw, _, t_half = _sym_sqrt(target)
    if tw[0] < -PSD_TOL:
        raise ValueError(f"target is not positive semidefinite (min eigenvalue {tw[0]:.3g})")

    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    for j in range(k):
        if not sd[j] > 0:
            raise ValueError(f"column {data.names[j]!r} has zero variance")
    z = (x - mu) / sd
    c = (z.T @ z) / n
    cw, cv, _ = _sym_sqrt(c)
    if cw[0] <= 1e-12 * cw[-1]:
        raise ValueError("input columns are collinear; empirical correlation is singular")
    c_inv_half = (cv / np.sqrt(cw)) @ cv.T
    y = z @ (c_inv_half @ t_half)
    out = mu + y * sd
    return AttributeMatrix(out, data.names, data.means.copy(), data.stds.copy())


def normal_scores(x: np.ndarray) -> np.ndarray:
    """Rank-based standard normal scores; ties broken by position."""
    n = len(x)
    r = rankdata(x, method="ordinal")
    return ndtri((r - 0.5) / n)


def monotone_couple(driver, response_dist: PopulationDistribution, strength: float, s: RngStream,
                    lo: float = -np.inf, hi: float = np.inf) -> np.ndarray:
    """Draw a column from ``response_dist`` that rank-tracks ``driver``.

    The output is an i.i.d. sample from ``response_dist`` (truncated to
    ``[lo, hi]``) rearranged by the ranks of
    ``strength * z_driver + sqrt(1 - strength**2) * z_noise``.  At strength 1
    the arrangement is comonotone with the driver; at 0 it is independent.
    For the Gaussian blend the expected Spearman coefficient is
    ``(6/pi) * arcsin(strength / 2)``.
    """
    if not 0.0 <= strength <= 1.0:
        raise ValueError(f"strength must be in [0, 1], got {strength}")
    driver = np.asarray(driver, dtype=float)
    n = len(driver)
    g = s.generator
    if np.isinf(lo) and np.isinf(hi):
        values = np.atleast_1d(sample_gaussian(g, response_dist.mean, response_dist.std_dev, size=n))
    else:
        values = np.atleast_1d(sample_truncated_gaussian(g, response_dist.mean, response_dist.std_dev,
                                                         lo, hi, size=n))
    noise = g.standard_normal(n)
    if n == 0:
        return values
    if strength == 1.0:
        score = normal_scores(driver)
    else:
        score = strength * normal_scores(driver) + np.sqrt(1.0 - strength ** 2) * noise
    out = np.empty(n)
    out[np.argsort(score, kind="stable")] = np.sort(values)
    return out
