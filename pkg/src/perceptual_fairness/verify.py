"""Seeded property sweeps over random finite scenarios for every theorem check."""

from __future__ import annotations

import math

import numpy as np

from . import theorems as th
from .distributions import make_rng
from .fairness import cpr_residual, pr_gap, rdp_gap

__all__ = ["sweep_theorem1", "sweep_theorem2", "sweep_theorem3", "sweep_theorem4", "dogcat_summary", "verify_all"]


def _seeds(seed: int, stream: int, n: int) -> list[int]:
    rng = make_rng(np.random.SeedSequence([seed, stream]))
    return [int(s) for s in rng.integers(0, 2**63 - 1, size=n)]


def random_pair(seed: int) -> tuple[th.DiscreteScenario, th.EstimatorKernel]:
    """Random scenario and kernel of random sizes; Xhat may exceed the X alphabet."""
    rng = make_rng(seed)
    g = int(rng.integers(1, 5))
    nx = int(rng.integers(1, 9))
    ny = int(rng.integers(1, 9))
    nxhat = nx + int(rng.integers(0, 3))
    disjoint = bool(rng.integers(2)) and nx >= g
    scenario = th.random_scenario(seed, g, nx, ny, disjoint=disjoint)
    return scenario, th.random_kernel(seed + 1, ny, nxhat)


def sweep_theorem1(trials: int, seed: int) -> dict:
    worst = math.inf
    violations = []
    for s in _seeds(seed, 1, trials):
        check = th.check_theorem1(*random_pair(s))
        worst = min(worst, check.worst_margin)
        if not check.holds:
            violations.append(s)
    return {
        "trials": trials,
        "pass": trials - len(violations),
        "violations": violations,
        "worst_margin": worst,
    }


def sweep_theorem4(trials: int, seed: int) -> dict:
    worst = math.inf
    violations = []
    not_applicable = 0
    for s in _seeds(seed, 4, trials):
        check = th.check_theorem4(*th.random_perfect_pi_pair(s))
        if not check.applicable:
            not_applicable += 1
            violations.append(s)
            continue
        worst = min(worst, min(check.slacks.values()))
        if not check.holds:
            violations.append(s)
    swap = th.check_theorem4(*th.swap_fixture())
    return {
        "trials": trials,
        "pass": trials - len(violations),
        "violations": violations,
        "precondition_failures": not_applicable,
        "worst_slack": worst,
        "swap_slacks": swap.slacks,
        "swap_tight": swap.holds and max(abs(v) for v in swap.slacks.values()) <= 1e-12,
    }


def sweep_theorem2(trials: int, seed: int, max_iters: int = 20000) -> dict:
    """Scenarios meeting the overlap hypothesis must have a positive joint-GPI minimum.

    Frank-Wolfe only bounds the minimum from above, so positivity is
    certified by the exact LP value; the Frank-Wolfe excess over it is
    reported as ``max_fw_gap``.
    """
    objectives = []
    certified = []
    gaps = []
    violations = []
    skipped = 0
    for s in _seeds(seed, 2, trials):
        rng = make_rng(s)
        scenario = th.random_scenario(
            s, 2, int(rng.integers(2, 5)), int(rng.integers(1, 4)), disjoint=bool(rng.integers(4))
        )
        if not th.theorem2_hypothesis(scenario):
            skipped += 1
            continue
        result = th.min_joint_gpi(scenario, [1.0, 1.0], max_iters=max_iters)
        exact, _ = th.lp_min_joint_gpi(scenario, [1.0, 1.0])
        objectives.append(result.objective)
        certified.append(exact)
        gaps.append(result.objective - exact)
        if not (result.objective > 1e-6 and exact > 1e-6):
            violations.append(s)
    degraded = th.DiscreteScenario(th.DiscretePmf([0.5, 0.5]), np.eye(2), np.ones((2, 1)))
    degraded_obj = th.min_joint_gpi(degraded, [1.0, 1.0]).objective
    return {
        "trials": trials,
        "hypothesis_met": len(objectives),
        "hypothesis_not_met": skipped,
        "pass": len(objectives) - len(violations),
        "violations": violations,
        "min_objective": min(objectives) if objectives else None,
        "min_certified": min(certified) if certified else None,
        "max_fw_gap": max(gaps) if gaps else None,
        "fully_degraded_objective": degraded_obj,
        "fully_degraded_ok": degraded_obj >= 1.0 - 1e-3,
    }


def sweep_theorem3(trials: int, seed: int) -> dict:
    """Engineered majority fixtures plus random perfect-PI pairs that meet the preconditions."""
    cases = [th.majority_fixture((0.7, 0.3)), th.majority_fixture((0.6, 0.25, 0.15))]
    witnesses = []
    for sc, k in cases:
        v = th.check_theorem3(sc, k)
        witnesses.append({"applicable": v.applicable, "holds": v.holds, "gap": v.gap,
                          "majority": v.majority, "worst": v.worst})
    applicable = 0
    violations = []
    for s in _seeds(seed, 3, trials):
        v = th.check_theorem3(*th.random_perfect_pi_pair(s))
        if v.applicable:
            applicable += 1
            if not v.holds:
                violations.append(s)
    fixtures_ok = all(w["applicable"] and w["holds"] for w in witnesses)
    return {
        "trials": trials,
        "applicable": applicable,
        "pass": applicable - len(violations),
        "violations": violations,
        "fixtures": witnesses,
        "fixtures_ok": fixtures_ok,
    }


def dogcat_summary() -> dict:
    scenario, kernel = th.dogcat_fixture()
    return {
        "rdp_gap": rdp_gap(scenario, kernel),
        "pr_gap": pr_gap(scenario, kernel),
        "cpr_residual": cpr_residual(scenario, kernel),
        "gpi_tv": {name: th.gpi_tv_exact(scenario, kernel, g) for g, name in enumerate(scenario.groups)},
    }


def verify_all(trials: int = 1000, seed: int = 0, theorem2_trials: int = 10) -> dict:
    """Run every sweep; ``all_passed`` is False on any violation."""
    t1 = sweep_theorem1(trials, seed)
    t4 = sweep_theorem4(max(1, trials // 2), seed)
    t2 = sweep_theorem2(theorem2_trials, seed)
    t3 = sweep_theorem3(max(1, trials // 2), seed)
    dc = dogcat_summary()
    dogcat_ok = (
        abs(dc["rdp_gap"]) <= 1e-12
        and abs(dc["pr_gap"]) <= 1e-12
        and abs(dc["cpr_residual"]) <= 1e-12
        and abs(dc["gpi_tv"]["dogs"] - 0.9) <= 1e-12
        and abs(dc["gpi_tv"]["cats"]) <= 1e-12
    )
    all_passed = (
        not t1["violations"]
        and not t4["violations"]
        and t4["swap_tight"]
        and not t2["violations"]
        and t2["fully_degraded_ok"]
        and not t3["violations"]
        and t3["fixtures_ok"]
        and dogcat_ok
    )
    return {
        "seed": seed,
        "theorem1": t1,
        "theorem2": t2,
        "theorem3": t3,
        "theorem4": t4,
        "dogcat": {**dc, "ok": dogcat_ok},
        "all_passed": all_passed,
    }
