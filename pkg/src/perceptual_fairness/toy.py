"""Scalar Gaussian restoration toy with the sensitive attribute ``A = 1{X >= 1}``.

``X, N ~ N(0, 1)`` independent and ``Y = X + N``.  Three estimators are
compared: the MMSE estimator ``Y/2``, the posterior sampler ``Y/2 + W`` with
``W ~ N(0, 1/2)``, and ``Y/sqrt(2)``, the lowest-MSE estimator with
``p_Xhat = p_X``.  Per group we report the TV distance between the exact
truncated-normal law of ``X | A=a`` and a KDE of the reconstructions, and the
empirical W1 between the group's ground-truth samples and reconstructions.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from numpy.typing import NDArray

from .distributions import kde_fit, make_rng, truncated_normal_density
from .divergences import QuadratureSpec, tv_continuous_1d, wasserstein1_empirical

__all__ = [
    "CUT",
    "ESTIMATORS",
    "ToyConfig",
    "ToyCell",
    "ToyResult",
    "estimator_mmse",
    "estimator_posterior",
    "estimator_mse_pi",
    "estimator_identity",
    "group_truth_density",
    "run_toy",
]

CUT = 1.0
MIN_GROUP_SAMPLES = 100
POSTERIOR_NOISE_VAR = 0.5


def estimator_mmse(y):
    return np.multiply(y, 0.5)


def estimator_posterior(y, w):
    """Posterior sample given ``y``; ``w`` must be drawn from N(0, 1/2)."""
    return np.add(np.multiply(y, 0.5), w)


def estimator_mse_pi(y):
    return np.divide(y, math.sqrt(2.0))


def estimator_identity(y):
    """Control estimator returning the measurement itself."""
    return np.asarray(y, dtype=np.float64)


ESTIMATORS: dict[str, str] = {
    "mmse": "MMSE (Y/2)",
    "posterior": "posterior sampler (Y/2 + W)",
    "mse_pi": "MSE+PI (Y/sqrt 2)",
    "identity": "identity control (Y)",
}


@dataclass(frozen=True)
class ToyConfig:
    n_samples: int = 200_000
    seed: int = 42
    bw_adjust: float = 2.0
    quadrature: QuadratureSpec = field(default_factory=lambda: QuadratureSpec(breakpoints=(CUT,)))
    estimators: tuple[str, ...] = ("mmse", "posterior", "mse_pi")

    def __post_init__(self) -> None:
        if self.n_samples < 1000:
            raise ValueError("n_samples must be >= 1000")
        unknown = set(self.estimators) - set(ESTIMATORS)
        if unknown:
            raise ValueError(f"unknown estimators {sorted(unknown)}")
        if not self.bw_adjust > 0:
            raise ValueError("bw_adjust must be positive")


@dataclass(frozen=True)
class ToyCell:
    estimator: str
    group: int
    gpi_tv: float
    gpi_w1: float
    tv_error: float


@dataclass(frozen=True)
class ToyResult:
    config: ToyConfig
    p_a0: float
    counts: dict[int, int]
    cells: tuple[ToyCell, ...]

    def cell(self, estimator: str, group: int) -> ToyCell:
        for c in self.cells:
            if c.estimator == estimator and c.group == group:
                return c
        raise KeyError((estimator, group))

    def to_dict(self) -> dict:
        q = self.config.quadrature
        return {
            "config": {
                "n_samples": self.config.n_samples,
                "seed": self.config.seed,
                "bw_adjust": self.config.bw_adjust,
                "estimators": list(self.config.estimators),
                "quadrature": {
                    "lo": q.lo,
                    "hi": q.hi,
                    "breakpoints": list(q.breakpoints),
                    "points": q.points,
                    "tolerance": q.tolerance,
                },
            },
            "p_a0": self.p_a0,
            "counts": {str(k): v for k, v in self.counts.items()},
            "cells": [asdict(c) for c in self.cells],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["estimator", "group", "gpi_tv", "gpi_w1"])
        for c in self.cells:
            writer.writerow([c.estimator, c.group, repr(c.gpi_tv), repr(c.gpi_w1)])
        return buf.getvalue()


def group_truth_density(group: int):
    """Exact law of ``X | A=group``: N(0,1) truncated at :data:`CUT`."""
    return truncated_normal_density("above_cut" if group == 1 else "below_cut", CUT)


def _draw(config: ToyConfig) -> tuple[NDArray, NDArray, NDArray]:
    root = np.random.SeedSequence(config.seed)
    rng = make_rng(root)
    x = rng.standard_normal(config.n_samples)
    y = x + rng.standard_normal(config.n_samples)
    # Posterior noise lives on a spawned sub-stream.
    w = math.sqrt(POSTERIOR_NOISE_VAR) * make_rng(root.spawn(1)[0]).standard_normal(config.n_samples)
    return x, y, w


def _reconstruct(name: str, y: NDArray, w: NDArray) -> NDArray:
    table: dict[str, Callable[[], NDArray]] = {
        "mmse": lambda: estimator_mmse(y),
        "posterior": lambda: estimator_posterior(y, w),
        "mse_pi": lambda: estimator_mse_pi(y),
        "identity": lambda: estimator_identity(y),
    }
    return table[name]()


def run_toy(config: ToyConfig | None = None, return_samples: bool = False):
    """Run the toy experiment; deterministic for a given config.

    With ``return_samples`` also returns a dict holding ``x``, ``y``, the
    group labels ``a`` and every estimator's reconstructions.
    """
    config = config or ToyConfig()
    x, y, w = _draw(config)
    a = (x >= CUT).astype(np.int64)
    counts = {0: int(np.sum(a == 0)), 1: int(np.sum(a == 1))}
    if min(counts.values()) < MIN_GROUP_SAMPLES:
        raise ValueError(f"a group received fewer than {MIN_GROUP_SAMPLES} samples: {counts}")
    cells = []
    recons = {}
    for name in config.estimators:
        xhat = _reconstruct(name, y, w)
        recons[name] = xhat
        for group in (0, 1):
            mask = a == group
            tv, err = tv_continuous_1d(
                group_truth_density(group),
                kde_fit(xhat[mask], config.bw_adjust),
                config.quadrature,
                full_output=True,
            )
            w1 = wasserstein1_empirical(x[mask], xhat[mask])
            cells.append(ToyCell(name, group, tv, w1, err))
    result = ToyResult(config, counts[0] / config.n_samples, counts, tuple(cells))
    if return_samples:
        return result, {"x": x, "y": y, "a": a, "recon": recons}
    return result
