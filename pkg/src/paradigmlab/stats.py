"""Empirical distributions and the distances used to judge convergence."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import special, stats as sps

from .errors import DegenerateSample, EmptySample, NonPositiveValue, SizeMismatch, TooFewPoints


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    sorted_samples: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.sorted_samples, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise EmptySample("an empirical distribution needs at least one sample")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        if arr.size > 1 and np.any(np.diff(arr) < 0):
            raise ValueError("sorted_samples must be nondecreasing; use EmpiricalDistribution.from_samples")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "sorted_samples", arr)

    @classmethod
    def from_samples(cls, values: Iterable[float] | np.ndarray) -> "EmpiricalDistribution":
        arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
        if arr.size == 0:
            raise EmptySample("an empirical distribution needs at least one sample")
        return cls(np.sort(arr, kind="stable"))

    @property
    def n(self) -> int:
        return int(self.sorted_samples.size)

    def cdf(self, x: float | np.ndarray) -> float | np.ndarray:
        counts = np.searchsorted(self.sorted_samples, x, side="right")
        return counts / self.n

    def quantile(self, q: float) -> float:
        if not 0 <= q <= 1:
            raise ValueError(f"quantile level must lie in [0, 1], got {q}")
        return float(np.quantile(self.sorted_samples, q))

    def map(self, fn) -> "EmpiricalDistribution":
        """Apply an elementwise transform (e.g. a rescaling) and re-sort."""
        return EmpiricalDistribution.from_samples(fn(self.sorted_samples))

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class Moments:
    n: int
    mean: float
    variance: float
    _skewness: float
    _excess_kurtosis: float

    @property
    def skewness(self) -> float:
        if self.variance == 0:
            raise DegenerateSample("skewness is undefined for a constant sample")
        return self._skewness

    @property
    def excess_kurtosis(self) -> float:
        if self.variance == 0:
            raise DegenerateSample("kurtosis is undefined for a constant sample")
        return self._excess_kurtosis

    def as_dict(self) -> dict[str, float]:
        out = {"mean": self.mean, "variance": self.variance}
        if self.variance > 0:
            out.update(skewness=self._skewness, excess_kurtosis=self._excess_kurtosis)
        return out


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float


@dataclass(frozen=True)
class NormalLaw:
    mean: float
    variance: float


def _require(a: EmpiricalDistribution | None) -> EmpiricalDistribution:
    if a is None or a.n == 0:
        raise EmptySample("sample is empty")
    return a


def ks_two_sample(a: EmpiricalDistribution, b: EmpiricalDistribution) -> float:
    """Sup distance between the two empirical CDFs."""
    a, b = _require(a), _require(b)
    # only the statistic is read; the asymptotic p-value keeps large samples cheap
    return float(sps.ks_2samp(a.sorted_samples, b.sorted_samples, method="asymp").statistic)


def normal_cdf(x: float | np.ndarray, mean: float = 0.0, variance: float = 1.0) -> float | np.ndarray:
    if not variance > 0:
        raise ValueError(f"variance must be positive, got {variance}")
    return special.ndtr((np.asarray(x, dtype=float) - mean) / math.sqrt(variance))


def ks_vs_normal(a: EmpiricalDistribution, mean: float, variance: float) -> float:
    """One-sample KS statistic of ``a`` against Normal(mean, variance)."""
    a = _require(a)
    if not variance > 0:
        raise ValueError(f"variance must be positive, got {variance}")
    return float(sps.kstest(a.sorted_samples, "norm", args=(mean, math.sqrt(variance))).statistic)


def wasserstein1(a: EmpiricalDistribution, b: EmpiricalDistribution) -> float:
    """W1 between equal-size empirical laws."""
    a, b = _require(a), _require(b)
    if a.n != b.n:
        raise SizeMismatch(f"wasserstein1 needs equal sample counts, got {a.n} and {b.n}")
    return float(sps.wasserstein_distance(a.sorted_samples, b.sorted_samples))


def moments(a: EmpiricalDistribution) -> Moments:
    a = _require(a)
    if a.n < 2:
        raise DegenerateSample("at least two samples are needed for a variance")
    x = a.sorted_samples
    mean = float(np.mean(x))
    variance = float(np.var(x, ddof=1))
    if variance == 0:
        return Moments(a.n, mean, 0.0, math.nan, math.nan)
    skew = float(sps.skew(x, bias=True))
    kurt = float(sps.kurtosis(x, fisher=True, bias=True))
    return Moments(a.n, mean, variance, skew, kurt)


def fit_rate(xs: Sequence[float], ys: Sequence[float]) -> RateFit:
    """Least-squares line through ``(log x, log y)``."""
    if len(xs) != len(ys):
        raise SizeMismatch(f"xs and ys differ in length: {len(xs)} vs {len(ys)}")
    if len(xs) < 3:
        raise TooFewPoints(f"a rate fit needs at least 3 points, got {len(xs)}")
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise NonPositiveValue("rate fits are taken on log scale; all values must be positive")
    res = sps.linregress(np.log(x), np.log(y))
    r2 = float(res.rvalue) ** 2
    return RateFit(slope=float(res.slope), intercept=float(res.intercept), r_squared=min(max(r2, 0.0), 1.0))


def ks_critical_value(n: int, m: int, level: float = 0.01) -> float:
    """Asymptotic two-sample KS critical value at significance ``level``."""
    if n < 1 or m < 1:
        raise EmptySample("critical values need nonempty samples")
    if not 0 < level < 1:
        raise ValueError(f"significance level must lie in (0, 1), got {level}")
    c = float(sps.kstwobign.isf(level))
    return c * math.sqrt((n + m) / (n * m))
