"""Probability primitives: discrete pmfs, 1-D samples, Gaussian closed forms, KDE.

Random numbers come from numpy's ``PCG64`` bit generator; Gaussian variates use
numpy's ziggurat transform (``Generator.standard_normal``).  Streams are derived
from ``numpy.random.SeedSequence`` so sub-streams can be spawned without
disturbing the parent stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special

__all__ = [
    "DiscretePmf",
    "EmpiricalSamples1D",
    "Density1D",
    "normal_pdf",
    "normal_cdf",
    "normal_sf",
    "normal_density",
    "truncated_normal_pdf",
    "truncated_normal_density",
    "scott_bandwidth",
    "kde_fit",
    "make_rng",
    "sample_standard_normal",
]

PMF_SUM_TOL = 1e-12
# Normal mass beyond +-12 is below 1e-32.
NORMAL_SUPPORT_HALF_WIDTH = 12.0
# Kernel mass beyond 8 bandwidths is ~1e-15 per kernel.
KDE_SUPPORT_BANDWIDTHS = 8.0
# Kernels further than this many bandwidths contribute < exp(-50) relative.
_KDE_WINDOW_BANDWIDTHS = 10.0
_KDE_BLOCK = 64

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

Side = Literal["above_cut", "below_cut"]


@dataclass(frozen=True)
class DiscretePmf:
    """Probability mass function over the alphabet ``0..len(probs)-1``.

    Construction never renormalises: the entries must already sum to one
    within ``PMF_SUM_TOL``.
    """

    probs: NDArray[np.float64]

    def __post_init__(self) -> None:
        p = np.array(self.probs, dtype=np.float64, copy=True)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("pmf must be a nonempty 1-D vector")
        if not np.all(np.isfinite(p)):
            raise ValueError("pmf entries must be finite")
        if np.any(p < 0):
            raise ValueError(f"pmf has negative entries: min={p.min()!r}")
        total = p.sum()
        if abs(total - 1.0) > PMF_SUM_TOL:
            raise ValueError(f"pmf sums to {total!r}, not 1 within {PMF_SUM_TOL}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __len__(self) -> int:
        return self.probs.size

    def __array__(self, dtype=None, copy=None):
        return self.probs if dtype is None else self.probs.astype(dtype)

    def support(self, threshold: float = 1e-15) -> NDArray[np.bool_]:
        """Boolean mask of symbols carrying probability above ``threshold``."""
        return self.probs > threshold


@dataclass(frozen=True)
class EmpiricalSamples1D:
    """Realisations of a scalar random variable."""

    values: NDArray[np.float64]
    seed: int | None = None

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        if v.size == 0:
            raise ValueError("sample set is empty")
        if not np.all(np.isfinite(v)):
            raise ValueError("samples must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


@dataclass(frozen=True)
class Density1D:
    """A univariate density with a declared effective support ``[lo, hi]``.

    ``evaluate`` must accept a float array and return densities of the same
    shape.  Mass outside ``support`` is treated as negligible by quadrature.
    """

    evaluate: Callable[[NDArray[np.float64]], NDArray[np.float64]]
    support: tuple[float, float]
    name: str = field(default="density", compare=False)
    bandwidth: float | None = None

    def __call__(self, x: ArrayLike) -> NDArray[np.float64]:
        return self.evaluate(np.asarray(x, dtype=np.float64))


def _values(samples: EmpiricalSamples1D | ArrayLike) -> NDArray[np.float64]:
    if isinstance(samples, EmpiricalSamples1D):
        return samples.values
    return EmpiricalSamples1D(samples).values


def normal_pdf(x: ArrayLike) -> NDArray[np.float64] | float:
    """Standard normal density ``exp(-x**2/2) / sqrt(2*pi)``."""
    x = np.asarray(x, dtype=np.float64)
    out = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    return float(out) if out.ndim == 0 else out


def normal_cdf(x: ArrayLike) -> NDArray[np.float64] | float:
    """Standard normal CDF ``(1 + erf(x/sqrt(2))) / 2``."""
    x = np.asarray(x, dtype=np.float64)
    out = 0.5 * (1.0 + special.erf(x / math.sqrt(2.0)))
    return float(out) if out.ndim == 0 else out


def normal_sf(x: ArrayLike) -> NDArray[np.float64] | float:
    """Upper tail ``1 - Phi(x)``, computed with erfc to keep tail accuracy."""
    x = np.asarray(x, dtype=np.float64)
    out = 0.5 * special.erfc(x / math.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


def normal_density(mean: float = 0.0, std: float = 1.0) -> Density1D:
    """``N(mean, std**2)`` as a :class:`Density1D`."""
    if not std > 0:
        raise ValueError("std must be positive")

    def evaluate(x):
        return normal_pdf((x - mean) / std) / std

    half = NORMAL_SUPPORT_HALF_WIDTH * std
    return Density1D(evaluate, (mean - half, mean + half), name=f"N({mean}, {std}^2)")


def truncated_normal_pdf(x: ArrayLike, side: Side, cut: float) -> NDArray[np.float64] | float:
    """Standard normal density conditioned on ``X >= cut`` or ``X < cut``."""
    if not math.isfinite(cut):
        raise ValueError("cut must be finite")
    x = np.asarray(x, dtype=np.float64)
    if side == "above_cut":
        out = np.where(x >= cut, normal_pdf(x) / normal_sf(cut), 0.0)
    elif side == "below_cut":
        out = np.where(x < cut, normal_pdf(x) / normal_cdf(cut), 0.0)
    else:
        raise ValueError(f"unknown side {side!r}")
    return float(out) if out.ndim == 0 else out


def truncated_normal_density(side: Side, cut: float) -> Density1D:
    """:func:`truncated_normal_pdf` packaged with its effective support."""
    if side == "above_cut":
        support = (cut, max(cut, 0.0) + NORMAL_SUPPORT_HALF_WIDTH)
    elif side == "below_cut":
        support = (min(cut, 0.0) - NORMAL_SUPPORT_HALF_WIDTH, cut)
    else:
        raise ValueError(f"unknown side {side!r}")
    return Density1D(
        lambda x: np.asarray(truncated_normal_pdf(x, side, cut), dtype=np.float64),
        support,
        name=f"N(0,1) | {side} {cut}",
    )


def scott_bandwidth(values: NDArray[np.float64]) -> float:
    """Scott's rule ``n**(-1/5) * std`` with the unbiased standard deviation."""
    n = values.size
    return n ** (-0.2) * float(np.std(values, ddof=1))


def kde_fit(
    samples: EmpiricalSamples1D | ArrayLike,
    bw_adjust: float = 1.0,
    bandwidth_rule: Callable[[NDArray[np.float64]], float] = scott_bandwidth,
) -> Density1D:
    """Gaussian kernel density estimate, evaluated exactly as a kernel sum.

    The bandwidth is ``bw_adjust * bandwidth_rule(samples)``.  Samples are
    sorted first, which makes the fit exactly invariant to input order and lets
    evaluation skip kernels more than ten bandwidths away.
    """
    values = np.sort(_values(samples))
    if values.size < 2:
        raise ValueError("kde_fit needs at least 2 samples")
    if not bw_adjust > 0:
        raise ValueError("bw_adjust must be positive")
    h = bw_adjust * bandwidth_rule(values)
    if not h > 0:
        raise ValueError("zero bandwidth: all samples identical")
    n = values.size
    norm = _INV_SQRT_2PI / (n * h)
    reach = _KDE_WINDOW_BANDWIDTHS * h

    def evaluate(x: NDArray[np.float64]) -> NDArray[np.float64]:
        x = np.asarray(x, dtype=np.float64)
        flat = x.reshape(-1)
        order = np.argsort(flat, kind="stable")
        xs = flat[order]
        out = np.empty_like(xs)
        for start in range(0, xs.size, _KDE_BLOCK):
            block = xs[start : start + _KDE_BLOCK]
            lo = np.searchsorted(values, block[0] - reach, side="left")
            hi = np.searchsorted(values, block[-1] + reach, side="right")
            if lo == hi:
                out[start : start + block.size] = 0.0
                continue
            z = (block[:, None] - values[None, lo:hi]) / h
            out[start : start + block.size] = np.exp(-0.5 * z * z).sum(axis=1)
        result = np.empty_like(flat)
        result[order] = out * norm
        return result.reshape(x.shape)

    pad = KDE_SUPPORT_BANDWIDTHS * h
    return Density1D(
        evaluate, (float(values[0] - pad), float(values[-1] + pad)), name="kde", bandwidth=h
    )


def make_rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    """PCG64 generator for ``seed``; the versioned source of all randomness here."""
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return np.random.Generator(np.random.PCG64(seq))


def sample_standard_normal(n: int, seed: int) -> EmpiricalSamples1D:
    """``n`` i.i.d. N(0, 1) draws, bit-reproducible for a fixed seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return EmpiricalSamples1D(make_rng(seed).standard_normal(n), seed=seed)
