import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perceptual_fairness import theorems as th
from perceptual_fairness.distributions import DiscretePmf, make_rng
from perceptual_fairness.fairness import (
    Disparity,
    FairnessReport,
    GroupEvaluationInput,
    cpr_residual,
    evaluate_groups,
    gpi,
    group_precision_hit_rate,
    group_psnr,
    knn_precision_recall,
    paired_scalar_group_mean,
    pf_disparity,
    pr_gap,
    psnr,
    rdp_gap,
    tv_kde_1d,
)


def _group(name, real, recon, **kw):
    return GroupEvaluationInput(name, np.asarray(real, float), np.asarray(recon, float), **kw)


class TestGroupInput:
    def test_1d_features_become_columns(self):
        g = _group("a", [1.0, 2.0], [3.0, 4.0])
        assert g.real_features.shape == (2, 1)

    def test_mismatches(self):
        with pytest.raises(ValueError, match="dimension"):
            _group("a", np.zeros((3, 2)), np.zeros((3, 3)))
        with pytest.raises(ValueError, match="labels"):
            _group("a", [1.0, 2.0], [1.0, 2.0], labels=["a"])
        with pytest.raises(ValueError, match="lpips"):
            _group("a", [1.0, 2.0], [1.0, 2.0], paired_scalars={"lpips": [0.1]})
        with pytest.raises(ValueError):
            _group("a", [1.0, math.nan], [1.0, 2.0])


class TestGpi:
    def test_dispatch(self):
        rng = make_rng(0)
        real, recon = rng.normal(size=200), rng.normal(0.5, 1, size=200)
        g = _group("a", real, recon)
        assert gpi(g, "w1_1d") == pytest.approx(np.mean(np.abs(np.sort(real) - np.sort(recon))))
        assert 0 < gpi(g, "tv_kde_1d") < 1
        assert gpi(g, "tv_kde_1d") == tv_kde_1d(real, recon)
        assert gpi(g, "fid") > 0
        assert isinstance(gpi(g, "kid"), float)
        with pytest.raises(ValueError):
            gpi(g, "lpips")

    def test_1d_only_divergences(self):
        g = _group("a", np.zeros((5, 2)) + np.arange(5)[:, None], np.ones((5, 2)) * np.arange(5)[:, None])
        with pytest.raises(ValueError, match="1-D"):
            gpi(g, "w1_1d")

    def test_tv_kde_separated_sets(self):
        assert tv_kde_1d(np.linspace(0, 1, 100), np.linspace(50, 51, 100)) == pytest.approx(1.0, abs=1e-6)

    def test_kid_blocks_forwarded(self):
        rng = make_rng(1)
        g = _group("a", rng.normal(size=(60, 2)), rng.normal(size=(60, 2)))
        blocks = {"subset_size": 20, "n_subsets": 3, "seed": 4}
        assert gpi(g, "kid", kid_blocks=blocks) == gpi(g, "kid", kid_blocks=blocks)
        assert gpi(g, "kid", kid_blocks=blocks) != gpi(g, "kid")


def test_hit_rate():
    assert group_precision_hit_rate(["a", "b", "a", "a"], "a") == 0.75
    with pytest.raises(ValueError):
        group_precision_hit_rate([], "a")


class TestKnn:
    def test_identical_sets(self):
        x = make_rng(2).normal(size=(30, 3))
        assert knn_precision_recall(x, x.copy(), 3) == (1.0, 1.0)

    def test_far_apart(self):
        x = make_rng(3).normal(size=(30, 2))
        assert knn_precision_recall(x, x + 100.0, 3) == (0.0, 0.0)

    def test_hand_case(self):
        # real points 0,1,2 on a line; k=1 radii are all 1 (squared 1)
        real = [[0.0], [1.0], [2.0]]
        recon = [[2.9], [3.5], [10.0]]
        # 2.9 lies within 1 of 2 -> precision 1/3; recon k=1 radii: 0.6, 0.6, 6.5
        # nearest real to a recon ball is 2 at 0.9 from 2.9 -> recall 0
        p, r = knn_precision_recall(real, recon, 1)
        assert p == pytest.approx(1 / 3)
        assert r == 0.0
        # moving the far point to 1.0 gives it radius 1.9, covering every real point
        p, r = knn_precision_recall(real, [[2.9], [3.5], [1.0]], 1)
        assert (p, r) == (2 / 3, 1.0)

    def test_inclusive_boundary(self):
        real = [[0.0], [1.0]]
        recon = [[2.0], [3.0]]
        # radius of real point 1 is exactly 1, and recon 2.0 sits on it
        assert knn_precision_recall(real, recon, 1)[0] == 0.5

    def test_validation(self):
        with pytest.raises(ValueError):
            knn_precision_recall(np.zeros((3, 1)), np.zeros((3, 1)), 3)


class TestPsnr:
    def test_value(self):
        real = np.zeros((4, 4))
        recon = np.full((4, 4), 0.1)
        assert psnr(real, recon, 1.0) == pytest.approx(20.0)
        assert psnr(real, recon * 255, 255.0) == pytest.approx(20.0)

    def test_identical_pairs_excluded(self):
        pairs = [(np.zeros(4), np.zeros(4)), (np.zeros(4), np.full(4, 0.1))]
        with pytest.warns(RuntimeWarning, match="1 of 2"):
            assert group_psnr(pairs, 1.0) == pytest.approx(20.0)
        with pytest.warns(RuntimeWarning):
            assert group_psnr(pairs[:1], 1.0) == math.inf

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            psnr(np.zeros(3), np.zeros(4), 1.0)


def test_paired_scalar_mean():
    assert paired_scalar_group_mean([0.1] * 10) == pytest.approx(0.1, abs=1e-17)
    with pytest.raises(ValueError):
        paired_scalar_group_mean([])


class TestDisparity:
    def test_basic(self):
        d = pf_disparity({"a": 0.1, "b": 0.4, "c": 0.2})
        assert d.gap == pytest.approx(0.3)
        assert d.ratio == pytest.approx(4.0)
        assert d.worst == "b"

    def test_ties_and_zero(self):
        d = pf_disparity({"z": 0.5, "m": 0.5, "a": 0.0})
        assert d.worst == "m"
        assert d.ratio is None

    def test_negative_kid(self):
        assert pf_disparity({"a": -0.01, "b": 0.02}).ratio is None

    @settings(max_examples=100, deadline=None)
    @given(st.dictionaries(st.text(min_size=1, max_size=3), st.floats(0, 10), min_size=2, max_size=6))
    def test_properties(self, values):
        d = pf_disparity(values)
        assert d.gap >= 0
        assert values[d.worst] == max(values.values())
        equal = pf_disparity({k: 1.0 for k in values})
        assert equal.gap == 0.0 and equal.ratio == 1.0


class TestLegacyNotions:
    def test_dogcat(self):
        sc, k = th.dogcat_fixture()
        assert abs(rdp_gap(sc, k)) <= 1e-12
        assert abs(pr_gap(sc, k)) <= 1e-12
        assert cpr_residual(sc, k) <= 1e-12

    def test_constant_kernel_breaks_all(self):
        sc = th.DiscreteScenario(DiscretePmf([0.5, 0.5]), np.eye(2), np.eye(2))
        k = th.EstimatorKernel.constant(2, 2, 0)
        assert rdp_gap(sc, k) == 1.0
        assert pr_gap(sc, k) == 0.5
        assert cpr_residual(sc, k) == 1.0

    def test_identity_satisfies_all(self):
        sc = th.random_scenario(4, 3, 5, 5, disjoint=True)
        sc = th.DiscreteScenario(sc.p_a, sc.p_x_given_a, np.eye(5))
        k = th.EstimatorKernel.identity(5)
        assert rdp_gap(sc, k) == 0.0 and pr_gap(sc, k) == 0.0 and cpr_residual(sc, k) == 0.0


def _two_groups(seed=5, n=80):
    rng = make_rng(seed)
    groups = []
    for name, shift in (("b", 0.0), ("a", 1.0)):
        real = rng.normal(size=n)
        recon = rng.normal(shift * 0.5, 1.0, size=n)
        labels = [name if v > -10 else "other" for v in recon]
        images = [(np.full((2, 2), v), np.full((2, 2), v) + 0.01 * (i + 1)) for i, v in enumerate(recon[:n])]
        groups.append(
            _group(name, real, recon, labels=labels, paired_scalars={"lpips": list(np.abs(real - recon))},
                   paired_images=images, peak=1.0)
        )
    return groups


class TestReport:
    def test_evaluate_groups(self):
        report = evaluate_groups(_two_groups(), metrics=("kid", "fid", "w1_1d", "tv_kde_1d"))
        assert list(report.per_group) == ["b", "a"]
        assert report.disparity["w1_1d"].worst == "a"
        m = report.per_group["a"]
        assert m.gp_hit_rate == 1.0
        assert m.gpsnr is not None and math.isfinite(m.gpsnr)
        assert set(m.paired_means) == {"lpips"}

    def test_json_round_trip_is_byte_stable(self):
        report = evaluate_groups(_two_groups(), metrics=("kid", "w1_1d"))
        text = report.to_json()
        again = FairnessReport.from_json(text)
        assert again.to_json() == text
        data = json.loads(text)
        assert data["version"] == 1
        assert "disparity_definition" in data

    def test_negative_kid_flag(self):
        rng = make_rng(6)
        x = rng.normal(size=(20, 2))
        groups = [_group("p", x[:10], x[10:]), _group("q", x[::2], x[1::2])]
        report = evaluate_groups(groups, metrics=("kid",), knn_k=None)
        flagged = [g for g, m in report.per_group.items() if "negative_kid" in m.flags]
        assert flagged
        assert report.per_group["p"].gp_nn is None

    def test_validation(self):
        g = _two_groups()
        with pytest.raises(ValueError):
            evaluate_groups(g[:1])
        with pytest.raises(ValueError):
            evaluate_groups([g[0], g[0]])
        with pytest.raises(ValueError):
            evaluate_groups(g, metrics=("lpips",))

    def test_disparity_dict(self):
        assert Disparity(0.1, None, "a").to_dict() == {"gap": 0.1, "ratio": None, "worst": "a"}


def test_infinite_gpsnr_serialises_as_null():
    groups = [
        _group("x", [0.0, 1.0, 2.0, 3.0], [0.0, 1.0, 2.0, 3.0], paired_images=[(np.zeros(2), np.zeros(2))] * 4),
        _group("y", [0.0, 1.0, 2.0, 3.0], [1.0, 1.0, 2.0, 3.0]),
    ]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        report = evaluate_groups(groups, metrics=("w1_1d",), knn_k=1)
    assert json.loads(report.to_json())["per_group"]["x"]["gpsnr"] is None
