"""Group-level fairness metrics and the fairness report.

Per group ``a`` the Group Perceptual Index is a divergence between the group's
ground-truth features and the features of its reconstructions.  Alongside it
we compute the classical group metrics (hit-rate precision, k-NN precision and
recall, PSNR, any paired scalar) and summarise disparities across groups.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import divergences as dv
from .distributions import kde_fit
from .theorems import DiscreteScenario, _kernel_matrix, _padded_x, push_forward, support

__all__ = [
    "DIVERGENCES",
    "REPORT_VERSION",
    "GroupEvaluationInput",
    "GroupMetrics",
    "Disparity",
    "FairnessReport",
    "gpi",
    "tv_kde_1d",
    "group_precision_hit_rate",
    "knn_precision_recall",
    "psnr",
    "group_psnr",
    "paired_scalar_group_mean",
    "pf_disparity",
    "rdp_gap",
    "pr_gap",
    "cpr_residual",
    "evaluate_groups",
]

DIVERGENCES = ("kid", "fid", "tv_kde_1d", "w1_1d")
REPORT_VERSION = 1
DISPARITY_NOTE = (
    "gap = max - min and ratio = max / min of the per-group GPI values; "
    "these scalar PF summaries are conventions of this tool"
)


@dataclass(frozen=True)
class GroupEvaluationInput:
    """Everything measured for one fairness group.

    ``paired_images`` holds ``(real, recon)`` pixel arrays compared at
    ``peak``; ``paired_scalars`` maps a metric name to per-pair values such as
    precomputed LPIPS distances.
    """

    group: str
    real_features: NDArray[np.float64]
    recon_features: NDArray[np.float64]
    labels: Sequence[str] | None = None
    paired_scalars: Mapping[str, Sequence[float]] = field(default_factory=dict)
    paired_images: Sequence[tuple[NDArray, NDArray]] | None = None
    peak: float = 1.0

    def __post_init__(self) -> None:
        real = dv.as_features(self.real_features, f"{self.group}: real features")
        recon = dv.as_features(self.recon_features, f"{self.group}: recon features")
        if real.shape[1] != recon.shape[1]:
            raise ValueError(
                f"{self.group}: real features have dimension {real.shape[1]}, "
                f"reconstructions {recon.shape[1]}"
            )
        n = recon.shape[0]
        if self.labels is not None and len(self.labels) != n:
            raise ValueError(f"{self.group}: {len(self.labels)} labels for {n} reconstructions")
        for name, values in self.paired_scalars.items():
            if len(values) != n:
                raise ValueError(f"{self.group}: {len(values)} '{name}' values for {n} reconstructions")
        if self.paired_images is not None and len(self.paired_images) != n:
            raise ValueError(f"{self.group}: {len(self.paired_images)} image pairs for {n} reconstructions")
        object.__setattr__(self, "real_features", real)
        object.__setattr__(self, "recon_features", recon)


def tv_kde_1d(real: ArrayLike, recon: ArrayLike, bw_adjust: float = 2.0, points: int = 4096) -> float:
    """TV between KDE fits of two 1-D sample sets, integrated over both supports."""
    real = dv.as_features(real, "real")
    recon = dv.as_features(recon, "recon")
    a = kde_fit(real[:, 0], bw_adjust)
    b = kde_fit(recon[:, 0], bw_adjust)
    lo = min(a.support[0], b.support[0])
    hi = max(a.support[1], b.support[1])
    spec = dv.QuadratureSpec(lo, hi, points=points, tolerance=1e-4)
    return dv.tv_continuous_1d(a, b, spec)


def gpi(
    data: GroupEvaluationInput,
    divergence: str,
    *,
    kid_blocks: Mapping[str, int] | None = None,
    bw_adjust: float = 2.0,
    quadrature_points: int = 4096,
) -> float:
    """Group Perceptual Index of one group under ``divergence``.

    ``divergence`` is one of ``kid``, ``fid``, ``tv_kde_1d`` (KDE of both
    sets, then quadrature TV) and ``w1_1d``; the 1-D ones need scalar
    features.  ``kid_blocks`` may carry ``subset_size``, ``n_subsets`` and
    ``seed`` for subset-averaged KID.
    """
    real, recon = data.real_features, data.recon_features
    if divergence == "kid":
        return dv.kid(real, recon, **dict(kid_blocks or {}))
    if divergence == "fid":
        return dv.frechet_distance(dv.fit_gaussian_moments(real), dv.fit_gaussian_moments(recon))
    if divergence in ("tv_kde_1d", "w1_1d"):
        if real.shape[1] != 1:
            raise ValueError(f"{divergence} needs 1-D features, got dimension {real.shape[1]}")
        if divergence == "w1_1d":
            return dv.wasserstein1_empirical(real[:, 0], recon[:, 0])
        return tv_kde_1d(real, recon, bw_adjust, quadrature_points)
    raise ValueError(f"unknown divergence {divergence!r}; expected one of {DIVERGENCES}")


def group_precision_hit_rate(labels: Sequence[str], group: str) -> float:
    """Fraction of a group's reconstructions classified as that group."""
    if len(labels) == 0:
        raise ValueError("no labels")
    return sum(1 for lab in labels if lab == group) / len(labels)


def _sq_dists(a: NDArray[np.float64], b: NDArray[np.float64]) -> NDArray[np.float64]:
    # Direct differences summed coordinate by coordinate in index order, not the
    # Gram expansion: no cancellation and reproducible tie decisions.
    out = np.zeros((a.shape[0], b.shape[0]))
    for j in range(a.shape[1]):
        diff = a[:, j, None] - b[None, :, j]
        out += diff * diff
    return out


def _knn_radii_sq(a: NDArray[np.float64], k: int) -> NDArray[np.float64]:
    d = _sq_dists(a, a)
    np.fill_diagonal(d, np.inf)
    return np.partition(d, k - 1, axis=1)[:, k - 1]


def knn_precision_recall(real: ArrayLike, recon: ArrayLike, k: int = 3) -> tuple[float, float]:
    """k-NN manifold precision and recall between two feature sets.

    Each point's ball reaches its k-th nearest neighbour within its own set
    (itself excluded).  Precision is the share of reconstructions inside at
    least one real ball; recall is the share of real points inside at least
    one reconstruction ball.  Containment is inclusive.
    """
    real = dv.as_features(real, "real")
    recon = dv.as_features(recon, "recon")
    if real.shape[1] != recon.shape[1]:
        raise ValueError("feature dimensions differ")
    if k < 1 or min(real.shape[0], recon.shape[0]) < k + 1:
        raise ValueError(f"k={k} too large: both sets need at least k+1 rows")
    r_real = _knn_radii_sq(real, k)
    r_recon = _knn_radii_sq(recon, k)
    cross = _sq_dists(real, recon)
    precision = float(np.mean(np.any(cross <= r_real[:, None], axis=0)))
    recall = float(np.mean(np.any(cross <= r_recon[None, :], axis=1)))
    return precision, recall


def psnr(real: ArrayLike, recon: ArrayLike, peak: float) -> float:
    """``10 log10(peak^2 / MSE)``; infinite for identical arrays."""
    real = np.asarray(real, dtype=np.float64)
    recon = np.asarray(recon, dtype=np.float64)
    if real.shape != recon.shape:
        raise ValueError(f"shape mismatch: {real.shape} vs {recon.shape}")
    mse = float(np.mean((real - recon) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def group_psnr(paired_images: Iterable[tuple[ArrayLike, ArrayLike]], peak: float) -> float:
    """Mean PSNR over a group's image pairs.

    Identical pairs have infinite PSNR; they are left out of the mean and a
    warning names how many were dropped.  Returns ``inf`` if every pair was
    identical.
    """
    values = [psnr(real, recon, peak) for real, recon in paired_images]
    if not values:
        raise ValueError("no image pairs")
    finite = [v for v in values if math.isfinite(v)]
    dropped = len(values) - len(finite)
    if dropped:
        warnings.warn(
            f"{dropped} of {len(values)} image pairs are identical (infinite PSNR); excluded from the mean",
            RuntimeWarning,
            stacklevel=2,
        )
    if not finite:
        return math.inf
    return math.fsum(finite) / len(finite)


def paired_scalar_group_mean(values: Sequence[float]) -> float:
    """Arithmetic mean of per-pair values, e.g. precomputed LPIPS distances."""
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    if v.size == 0:
        raise ValueError("no values")
    return math.fsum(v) / v.size


@dataclass(frozen=True)
class Disparity:
    """Spread of one per-group metric: ``ratio`` is None when ``min <= 0``."""

    gap: float
    ratio: float | None
    worst: str

    def to_dict(self) -> dict[str, Any]:
        return {"gap": self.gap, "ratio": self.ratio, "worst": self.worst}


def pf_disparity(per_group_values: Mapping[str, float]) -> Disparity:
    """Gap, ratio and worst (largest-valued) group; ties go to the smallest id."""
    if len(per_group_values) < 2:
        raise ValueError("need at least 2 groups")
    hi = max(per_group_values.values())
    lo = min(per_group_values.values())
    worst = min(g for g, v in per_group_values.items() if v == hi)
    ratio = hi / lo if lo > 0 else None
    return Disparity(hi - lo, ratio, worst)


def _membership(scenario: DiscreteScenario, xhat_size: int) -> NDArray[np.bool_]:
    return support(_padded_x(scenario, xhat_size))


def _group_precisions(scenario: DiscreteScenario, kernel) -> dict[int, float]:
    q = push_forward(scenario, kernel)
    member = _membership(scenario, q.shape[1])
    return {g: float(q[g][member[g]].sum()) for g in scenario.active_groups()}


def rdp_gap(scenario: DiscreteScenario, kernel) -> float:
    """Largest difference of ``P(Xhat in X_a | A=a)`` between two groups."""
    gp = _group_precisions(scenario, kernel)
    return max(gp.values()) - min(gp.values())


def pr_gap(scenario: DiscreteScenario, kernel) -> float:
    """``max_a |P(Xhat in X_a) - P(X in X_a)|``."""
    q = push_forward(scenario, kernel)
    p = _padded_x(scenario, q.shape[1])
    member = support(p)
    pa = scenario.p_a.probs
    p_xhat, p_x = pa @ q, pa @ p
    return max(abs(float(p_xhat[member[g]].sum() - p_x[member[g]].sum())) for g in scenario.active_groups())


def cpr_residual(scenario: DiscreteScenario, kernel) -> float:
    """``max_{a,y} |P(Xhat in X_a | Y=y) - P(X in X_a | Y=y)|`` over reachable ``y``."""
    k = _kernel_matrix(kernel)
    q = push_forward(scenario, k)
    member = _membership(scenario, q.shape[1]).astype(np.float64)
    joint = scenario.p_x[:, None] * scenario.degradation
    p_y = joint.sum(axis=0)
    live = p_y > 0
    post = (joint[:, live] / p_y[live]).T
    truth = post @ member[:, : scenario.x_size].T
    recon = k[live] @ member.T
    active = scenario.active_groups()
    return float(np.max(np.abs(truth - recon)[:, active])) if active else 0.0


@dataclass
class GroupMetrics:
    """All metrics for one group; unavailable ones are None."""

    gpi: dict[str, float] = field(default_factory=dict)
    gp_hit_rate: float | None = None
    gp_nn: float | None = None
    gr_nn: float | None = None
    gpsnr: float | None = None
    paired_means: dict[str, float] = field(default_factory=dict)

    @property
    def flags(self) -> list[str]:
        return ["negative_kid"] if self.gpi.get("kid", 0.0) < 0 else []

    def to_dict(self) -> dict[str, Any]:
        return {
            "gpi": dict(self.gpi),
            "flags": self.flags,
            "gp_hit_rate": self.gp_hit_rate,
            "gp_nn": self.gp_nn,
            "gr_nn": self.gr_nn,
            "gpsnr": _finite_or_none(self.gpsnr),
            "paired_means": dict(self.paired_means),
        }


def _finite_or_none(x: float | None) -> float | None:
    return x if x is None or math.isfinite(x) else None


@dataclass
class FairnessReport:
    """Per-group metrics plus a disparity summary for every GPI divergence."""

    per_group: dict[str, GroupMetrics]
    disparity: dict[str, Disparity]
    version: int = REPORT_VERSION

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": self.version,
            "per_group": {g: m.to_dict() for g, m in self.per_group.items()},
            "disparity": {k: d.to_dict() for k, d in self.disparity.items()},
            "disparity_definition": DISPARITY_NOTE,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> FairnessReport:
        per_group = {}
        for g, m in data["per_group"].items():
            gpsnr = m.get("gpsnr")
            per_group[g] = GroupMetrics(
                gpi=dict(m.get("gpi", {})),
                gp_hit_rate=m.get("gp_hit_rate"),
                gp_nn=m.get("gp_nn"),
                gr_nn=m.get("gr_nn"),
                gpsnr=gpsnr,
                paired_means=dict(m.get("paired_means", {})),
            )
        disparity = {k: Disparity(d["gap"], d["ratio"], d["worst"]) for k, d in data["disparity"].items()}
        return cls(per_group, disparity, int(data.get("version", REPORT_VERSION)))

    @classmethod
    def from_json(cls, text: str) -> FairnessReport:
        return cls.from_dict(json.loads(text))


def evaluate_groups(
    groups: Sequence[GroupEvaluationInput],
    metrics: Sequence[str] = ("kid", "fid"),
    knn_k: int | None = 3,
    kid_blocks: Mapping[str, int] | None = None,
    bw_adjust: float = 2.0,
) -> FairnessReport:
    """Evaluate every group and summarise GPI disparities.

    ``knn_k=None`` skips the k-NN precision/recall.
    """
    if len(groups) < 2:
        raise ValueError("need at least 2 groups")
    ids = [g.group for g in groups]
    if len(set(ids)) != len(ids):
        raise ValueError("group ids must be unique")
    for m in metrics:
        if m not in DIVERGENCES:
            raise ValueError(f"unknown metric {m!r}; expected one of {DIVERGENCES}")
    per_group: dict[str, GroupMetrics] = {}
    for data in groups:
        gm = GroupMetrics()
        for m in metrics:
            gm.gpi[m] = gpi(data, m, kid_blocks=kid_blocks, bw_adjust=bw_adjust)
        if data.labels is not None:
            gm.gp_hit_rate = group_precision_hit_rate(data.labels, data.group)
        if knn_k is not None:
            gm.gp_nn, gm.gr_nn = knn_precision_recall(data.real_features, data.recon_features, knn_k)
        if data.paired_images is not None:
            gm.gpsnr = group_psnr(data.paired_images, data.peak)
        for name, values in sorted(data.paired_scalars.items()):
            gm.paired_means[name] = paired_scalar_group_mean(values)
        per_group[data.group] = gm
    disparity = {m: pf_disparity({g: per_group[g].gpi[m] for g in ids}) for m in metrics}
    return FairnessReport(per_group, disparity)
