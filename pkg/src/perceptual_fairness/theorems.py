"""Finite-alphabet scenario calculus and numerical checks of the GPI theorems.

A :class:`DiscreteScenario` holds ``p_A``, ``p_{X|A}`` and a degradation kernel
``p_{Y|X}``; ``p_{Y|A}`` is derived from them so that ``A -> X -> Y`` holds by
construction.  An :class:`EstimatorKernel` is the row-stochastic ``p_{Xhat|Y}``,
which makes ``A -> Y -> Xhat`` a Markov chain.  Every quantity below is an
exact finite sum.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .distributions import PMF_SUM_TOL, DiscretePmf, make_rng

__all__ = [
    "SUPPORT_THRESHOLD",
    "DiscreteScenario",
    "EstimatorKernel",
    "support",
    "push_forward",
    "posterior",
    "posterior_sampler_kernel",
    "gpi_tv_exact",
    "gp_exact",
    "gr_exact",
    "Theorem1Check",
    "check_theorem1",
    "theorem2_hypothesis",
    "Theorem4Check",
    "check_theorem4",
    "Theorem3Verdict",
    "check_theorem3",
    "MinJointGpiResult",
    "joint_gpi_objective",
    "min_joint_gpi",
    "grid_min_joint_gpi",
    "lp_min_joint_gpi",
    "dogcat_fixture",
    "swap_fixture",
    "majority_fixture",
    "random_scenario",
    "random_kernel",
    "random_perfect_pi_pair",
]

SUPPORT_THRESHOLD = 1e-15
PERFECT_PI_TOL = 1e-9


def _row_stochastic(m: ArrayLike, name: str) -> NDArray[np.float64]:
    m = np.array(m, dtype=np.float64, copy=True)
    if m.ndim != 2 or m.size == 0:
        raise ValueError(f"{name} must be a nonempty matrix")
    if not np.all(np.isfinite(m)) or np.any(m < 0):
        raise ValueError(f"{name} must have finite nonnegative entries")
    bad = np.abs(m.sum(axis=1) - 1.0) > PMF_SUM_TOL
    if np.any(bad):
        row = int(np.flatnonzero(bad)[0])
        raise ValueError(f"{name} row {row} sums to {m[row].sum()!r}")
    m.setflags(write=False)
    return m


def support(p: NDArray[np.float64]) -> NDArray[np.bool_]:
    """Indices with probability strictly above :data:`SUPPORT_THRESHOLD`."""
    return np.asarray(p) > SUPPORT_THRESHOLD


@dataclass(frozen=True)
class DiscreteScenario:
    """Joint model of ``(A, X, Y)`` on finite alphabets.

    ``p_x_given_a`` has one row per group; ``degradation`` is the
    ``|X| x |Y|`` row-stochastic ``p_{Y|X}``.
    """

    p_a: DiscretePmf
    p_x_given_a: NDArray[np.float64]
    degradation: NDArray[np.float64]
    groups: tuple[str, ...] = ()
    p_y_given_a: NDArray[np.float64] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        p_a = self.p_a if isinstance(self.p_a, DiscretePmf) else DiscretePmf(self.p_a)
        pxa = _row_stochastic(self.p_x_given_a, "p_x_given_a")
        deg = _row_stochastic(self.degradation, "degradation")
        if pxa.shape[0] != len(p_a):
            raise ValueError(f"{len(p_a)} groups in p_a but {pxa.shape[0]} rows in p_x_given_a")
        if deg.shape[0] != pxa.shape[1]:
            raise ValueError(f"degradation has {deg.shape[0]} rows, X alphabet has {pxa.shape[1]}")
        groups = tuple(self.groups) or tuple(str(i) for i in range(len(p_a)))
        if len(groups) != len(p_a) or len(set(groups)) != len(groups):
            raise ValueError("group names must be unique, one per group")
        pya = _row_stochastic(pxa @ deg, "p_y_given_a")
        object.__setattr__(self, "p_a", p_a)
        object.__setattr__(self, "p_x_given_a", pxa)
        object.__setattr__(self, "degradation", deg)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "p_y_given_a", pya)

    @property
    def n_groups(self) -> int:
        return self.p_x_given_a.shape[0]

    @property
    def x_size(self) -> int:
        return self.p_x_given_a.shape[1]

    @property
    def y_size(self) -> int:
        return self.degradation.shape[1]

    @property
    def p_x(self) -> NDArray[np.float64]:
        return self.p_a.probs @ self.p_x_given_a

    @property
    def p_y(self) -> NDArray[np.float64]:
        return self.p_a.probs @ self.p_y_given_a

    def active_groups(self) -> list[int]:
        """Groups with ``P(A=a) > 0``."""
        return [int(i) for i in np.flatnonzero(support(self.p_a.probs))]


@dataclass(frozen=True)
class EstimatorKernel:
    """Row-stochastic ``p_{Xhat|Y}`` of shape ``|Y| x |Xhat|``."""

    matrix: NDArray[np.float64]

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrix", _row_stochastic(self.matrix, "kernel"))

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @classmethod
    def identity(cls, n: int) -> EstimatorKernel:
        return cls(np.eye(n))

    @classmethod
    def constant(cls, y_size: int, xhat_size: int, symbol: int) -> EstimatorKernel:
        m = np.zeros((y_size, xhat_size))
        m[:, symbol] = 1.0
        return cls(m)


def _kernel_matrix(kernel) -> NDArray[np.float64]:
    return kernel.matrix if isinstance(kernel, EstimatorKernel) else EstimatorKernel(kernel).matrix


def _check_compatible(scenario: DiscreteScenario, k: NDArray[np.float64]) -> None:
    if k.shape[0] != scenario.y_size:
        raise ValueError(f"kernel has {k.shape[0]} rows, Y alphabet has {scenario.y_size}")
    if k.shape[1] < scenario.x_size:
        raise ValueError("the Xhat alphabet must contain the X alphabet")


def _padded_x(scenario: DiscreteScenario, xhat_size: int) -> NDArray[np.float64]:
    """``p_{X|A}`` embedded into the (possibly larger) Xhat alphabet."""
    out = np.zeros((scenario.n_groups, xhat_size))
    out[:, : scenario.x_size] = scenario.p_x_given_a
    return out


def push_forward(scenario: DiscreteScenario, kernel) -> NDArray[np.float64]:
    """``p_{Xhat|A}(x|a) = sum_y p_{Y|A}(y|a) K[y, x]``, one row per group."""
    k = _kernel_matrix(kernel)
    _check_compatible(scenario, k)
    return scenario.p_y_given_a @ k


def posterior(scenario: DiscreteScenario) -> NDArray[np.float64]:
    """``p_{X|Y}`` as a ``|Y| x |X|`` matrix; rows of unreachable ``y`` are uniform."""
    joint = scenario.p_x[:, None] * scenario.degradation
    p_y = joint.sum(axis=0)
    post = np.full((scenario.y_size, scenario.x_size), 1.0 / scenario.x_size)
    live = p_y > 0
    post[live] = (joint[:, live] / p_y[live]).T
    return post / post.sum(axis=1, keepdims=True)


def posterior_sampler_kernel(scenario: DiscreteScenario) -> EstimatorKernel:
    """The kernel that samples from the posterior; it always attains perfect PI."""
    return EstimatorKernel(posterior(scenario))


def gpi_tv_exact(scenario: DiscreteScenario, kernel, group: int) -> float:
    """Exact TV between ``p_{X|A}(.|a)`` and ``p_{Xhat|A}(.|a)``."""
    q = push_forward(scenario, kernel)
    p = _padded_x(scenario, q.shape[1])
    return 0.5 * float(np.abs(p[group] - q[group]).sum())


def gp_exact(scenario: DiscreteScenario, kernel, group: int) -> float:
    """Group precision ``P(Xhat in X_a | A=a)``."""
    q = push_forward(scenario, kernel)
    p = _padded_x(scenario, q.shape[1])
    return float(q[group][support(p[group])].sum())


def gr_exact(scenario: DiscreteScenario, kernel, group: int) -> float:
    """Group recall ``P(X in Xhat_a | A=a)``."""
    q = push_forward(scenario, kernel)
    p = _padded_x(scenario, q.shape[1])
    return float(p[group][support(q[group])].sum())


@dataclass(frozen=True)
class Theorem1Check:
    """Per-group slacks ``GP - (1 - GPI_TV)`` and ``GR - (1 - GPI_TV)``."""

    holds: bool
    gp_margins: dict[str, float]
    gr_margins: dict[str, float]

    @property
    def worst_margin(self) -> float:
        return min(min(self.gp_margins.values()), min(self.gr_margins.values()))


def check_theorem1(scenario: DiscreteScenario, kernel, slack: float = 1e-12) -> Theorem1Check:
    """Check ``GP(a) >= 1 - GPI_TV(a)`` and ``GR(a) >= 1 - GPI_TV(a)`` for every group."""
    gp_m, gr_m = {}, {}
    for g in scenario.active_groups():
        gpi = gpi_tv_exact(scenario, kernel, g)
        name = scenario.groups[g]
        gp_m[name] = gp_exact(scenario, kernel, g) - (1.0 - gpi)
        gr_m[name] = gr_exact(scenario, kernel, g) - (1.0 - gpi)
    holds = all(m >= -slack for m in itertools.chain(gp_m.values(), gr_m.values()))
    return Theorem1Check(holds, gp_m, gr_m)


def theorem2_hypothesis(scenario: DiscreteScenario) -> list[tuple[int, int]]:
    """Group pairs whose measurements overlap more than their ground truth.

    Returns every pair ``(a1, a2)`` with
    ``P(X in X_a1 & X_a2 | A=a_i) < P(Y in Y_a1 & Y_a2 | A=a_i)`` for both
    ``i``; for such pairs the two GPIs cannot both vanish.
    """
    pairs = []
    sx = support(scenario.p_x_given_a)
    sy = support(scenario.p_y_given_a)
    for a1, a2 in itertools.combinations(scenario.active_groups(), 2):
        x_both = sx[a1] & sx[a2]
        y_both = sy[a1] & sy[a2]
        if all(
            scenario.p_x_given_a[a][x_both].sum() < scenario.p_y_given_a[a][y_both].sum()
            for a in (a1, a2)
        ):
            pairs.append((a1, a2))
    return pairs


def _perfect_pi(scenario: DiscreteScenario, q: NDArray[np.float64], tol: float) -> bool:
    p_xhat = scenario.p_a.probs @ q
    p_x = _padded_x(scenario, q.shape[1])
    return bool(np.max(np.abs(p_xhat - scenario.p_a.probs @ p_x)) <= tol)


@dataclass(frozen=True)
class Theorem4Check:
    """Slack ``bound - GPI_TV(a)`` per group, when perfect PI holds."""

    applicable: bool
    holds: bool
    slacks: dict[str, float]
    gpi: dict[str, float]


def check_theorem4(
    scenario: DiscreteScenario, kernel, slack: float = 1e-12, pi_tol: float = PERFECT_PI_TOL
) -> Theorem4Check:
    """Check ``GPI_TV(a) <= sum_{a' != a} P(a') GPI_TV(a') / P(a)`` under perfect PI.

    If the pushed-forward marginal differs from ``p_X`` by more than
    ``pi_tol`` the check is reported as not applicable.
    """
    q = push_forward(scenario, kernel)
    if not _perfect_pi(scenario, q, pi_tol):
        return Theorem4Check(False, True, {}, {})
    pa = scenario.p_a.probs
    active = scenario.active_groups()
    gpi = {g: gpi_tv_exact(scenario, kernel, g) for g in range(scenario.n_groups)}
    slacks = {}
    for g in active:
        bound = sum(pa[o] * gpi[o] for o in range(scenario.n_groups) if o != g) / pa[g]
        slacks[scenario.groups[g]] = float(bound - gpi[g])
    holds = all(s >= -slack for s in slacks.values())
    names = {scenario.groups[g]: gpi[g] for g in active}
    return Theorem4Check(True, holds, slacks, names)


@dataclass(frozen=True)
class Theorem3Verdict:
    """Outcome of the PF-versus-PI check.

    ``applicable`` is False (with ``reason``) when the preconditions fail.
    Otherwise ``holds`` records whether PF is imperfect, witnessed by the
    majority group scoring strictly better than ``worst``.
    """

    applicable: bool
    reason: str = ""
    holds: bool = True
    gap: float = 0.0
    majority: str | None = None
    worst: str | None = None
    gpi: dict[str, float] = field(default_factory=dict)


def check_theorem3(
    scenario: DiscreteScenario, kernel, pi_tol: float = PERFECT_PI_TOL, gpi_tol: float = 1e-9
) -> Theorem3Verdict:
    """Verify that perfect PI plus a strict majority group rules out perfect PF."""
    q = push_forward(scenario, kernel)
    if not _perfect_pi(scenario, q, pi_tol):
        return Theorem3Verdict(False, "perfect PI does not hold")
    pa = scenario.p_a.probs
    majority = [g for g in scenario.active_groups() if pa[g] > 0.5]
    if not majority:
        return Theorem3Verdict(False, "no group with P(A=a) > 0.5")
    active = scenario.active_groups()
    gpi = {g: gpi_tv_exact(scenario, kernel, g) for g in active}
    if max(gpi.values()) <= gpi_tol:
        return Theorem3Verdict(False, "every group has zero GPI")
    m = majority[0]
    others = [g for g in active if g != m]
    worst = max(others, key=lambda g: (gpi[g], -g))
    gap = max(gpi.values()) - min(gpi.values())
    return Theorem3Verdict(
        True,
        holds=gap > 0 and gpi[m] < gpi[worst],
        gap=gap,
        majority=scenario.groups[m],
        worst=scenario.groups[worst],
        gpi={scenario.groups[g]: v for g, v in gpi.items()},
    )


def _weights(scenario: DiscreteScenario, weights: Sequence[float] | None) -> NDArray[np.float64]:
    w = np.ones(scenario.n_groups) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != (scenario.n_groups,) or np.any(w < 0) or not np.any(w > 0):
        raise ValueError("weights must be nonnegative, one per group, not all zero")
    return w


def joint_gpi_objective(
    scenario: DiscreteScenario, kernel, weights: Sequence[float] | None = None
) -> float:
    """``sum_a w_a GPI_TV(a)`` for a kernel."""
    w = _weights(scenario, weights)
    q = push_forward(scenario, kernel)
    p = _padded_x(scenario, q.shape[1])
    return float(w @ (0.5 * np.abs(q - p).sum(axis=1)))


@dataclass(frozen=True)
class MinJointGpiResult:
    kernel: EstimatorKernel
    objective: float
    iterations: int
    converged: bool
    trace: NDArray[np.float64] = field(repr=False)


def min_joint_gpi(
    scenario: DiscreteScenario,
    weights: Sequence[float] | None = None,
    max_iters: int = 20000,
    tolerance: float = 1e-4,
    window: int = 500,
    seed: int | None = None,
    xhat_size: int | None = None,
) -> MinJointGpiResult:
    """Minimise ``sum_a w_a GPI_TV(a)`` over row-stochastic kernels by Frank-Wolfe.

    Each iteration takes a subgradient of the objective (sign 0 at ties),
    solves the linear subproblem row by row by picking the column with the
    smallest gradient entry, and moves toward that vertex with step
    ``2 / (t + 2)``.  The best kernel seen is returned, so the objective is an
    upper bound on the true minimum.  Iteration stops once the best value has
    improved by less than ``tolerance`` over the last ``window`` iterations;
    hitting ``max_iters`` first sets ``converged=False``.  With ``seed`` the
    start is a random kernel, otherwise the uniform kernel.
    """
    w = _weights(scenario, weights)
    ny = scenario.y_size
    nx = scenario.x_size if xhat_size is None else xhat_size
    if nx < scenario.x_size:
        raise ValueError("the Xhat alphabet must contain the X alphabet")
    if seed is None:
        k = np.full((ny, nx), 1.0 / nx)
    else:
        k = make_rng(seed).dirichlet(np.ones(nx), size=ny)
    pya = scenario.p_y_given_a
    p = _padded_x(scenario, nx)
    rows = np.arange(ny)

    def objective(kk):
        return float(w @ (0.5 * np.abs(pya @ kk - p).sum(axis=1)))

    best_k, best = k.copy(), objective(k)
    trace = [best]
    converged = False
    t = 0
    for t in range(max_iters):
        sign = np.sign(pya @ k - p)
        grad = pya.T @ (0.5 * w[:, None] * sign)
        vertex = np.zeros_like(k)
        vertex[rows, np.argmin(grad, axis=1)] = 1.0
        gamma = 2.0 / (t + 2.0)
        k = (1.0 - gamma) * k + gamma * vertex
        value = objective(k)
        if value < best:
            best, best_k = value, k.copy()
        trace.append(best)
        if best == 0.0:
            converged = True
            break
        if t >= window and trace[-window - 1] - best < tolerance:
            converged = True
            break
    best_k = best_k / best_k.sum(axis=1, keepdims=True)
    return MinJointGpiResult(
        EstimatorKernel(best_k), objective(best_k), t + 1, converged, np.asarray(trace)
    )


def _simplex_grid(dim: int, steps: int) -> NDArray[np.float64]:
    """All points of the probability simplex in ``dim`` coordinates on a ``1/steps`` lattice."""
    pts = []
    for cuts in itertools.combinations(range(steps + dim - 1), dim - 1):
        edges = (-1,) + cuts + (steps + dim - 1,)
        pts.append([edges[i + 1] - edges[i] - 1 for i in range(dim)])
    return np.asarray(pts, dtype=np.float64) / steps


def grid_min_joint_gpi(
    scenario: DiscreteScenario,
    resolution: float = 0.005,
    weights: Sequence[float] | None = None,
    max_points: int = 5_000_000,
) -> float:
    """Exhaustive grid minimum of ``sum_a w_a GPI_TV(a)`` over kernels.

    Every kernel row ranges over the simplex lattice with spacing
    ``resolution``; the Xhat alphabet is the X alphabet.  Only instances with
    at most six free parameters and ``max_points`` grid kernels are accepted.
    """
    w = _weights(scenario, weights)
    ny, nx = scenario.y_size, scenario.x_size
    if ny * (nx - 1) > 6:
        raise ValueError(f"instance too large: {ny * (nx - 1)} free parameters (max 6)")
    steps = round(1.0 / resolution)
    if steps < 1 or not math.isclose(steps * resolution, 1.0, rel_tol=1e-9):
        raise ValueError("1/resolution must be a positive integer")
    row_grid = _simplex_grid(nx, steps)
    total = row_grid.shape[0] ** ny
    if total > max_points:
        raise ValueError(f"instance too large: {total} grid kernels (max {max_points})")
    pya = scenario.p_y_given_a
    p = scenario.p_x_given_a
    # contrib[y] has shape (n_grid, n_groups, nx): p(y|a) * K[y, :].
    contrib = [pya[:, y][None, :, None] * row_grid[:, None, :] for y in range(ny)]
    best = math.inf
    for first in range(row_grid.shape[0]):
        acc = contrib[0][first][None]
        for y in range(1, ny):
            acc = (acc[:, None] + contrib[y][None]).reshape(-1, scenario.n_groups, nx)
        values = (0.5 * np.abs(acc - p[None]).sum(axis=2)) @ w
        best = min(best, float(values.min()))
    return best


def lp_min_joint_gpi(
    scenario: DiscreteScenario,
    weights: Sequence[float] | None = None,
    xhat_size: int | None = None,
) -> tuple[float, EstimatorKernel]:
    """Exact minimum of ``sum_a w_a GPI_TV(a)`` as a linear program.

    Each ``|q_a(x) - p_a(x)|`` is replaced by a slack variable bounded below by
    both signed differences.  Unlike :func:`min_joint_gpi` the value is a
    lower bound as well as an upper bound (to solver precision), so it can
    certify that the minimum is positive on any alphabet size.
    """
    from scipy.optimize import linprog

    w = _weights(scenario, weights)
    g, ny = scenario.n_groups, scenario.y_size
    nx = scenario.x_size if xhat_size is None else xhat_size
    if nx < scenario.x_size:
        raise ValueError("the Xhat alphabet must contain the X alphabet")
    nk = ny * nx
    p = _padded_x(scenario, nx).reshape(-1)
    # q_a(x) = sum_y p(y|a) K[y, x], as a (g*nx) x nk matrix acting on vec(K)
    push = np.kron(scenario.p_y_given_a, np.eye(nx))
    slack = np.eye(g * nx)
    a_ub = np.block([[push, -slack], [-push, -slack]])
    b_ub = np.concatenate([p, -p])
    a_eq = np.hstack([np.kron(np.eye(ny), np.ones((1, nx))), np.zeros((ny, g * nx))])
    c = np.concatenate([np.zeros(nk), np.repeat(0.5 * w, nx)])
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=np.ones(ny), bounds=(0, None), method="highs")
    if not res.success:
        raise RuntimeError(f"linear program failed: {res.message}")
    k = np.clip(res.x[:nk].reshape(ny, nx), 0.0, None)
    k /= k.sum(axis=1, keepdims=True)
    return max(float(res.fun), 0.0), EstimatorKernel(k)


def dogcat_fixture(n_per_species: int = 10) -> tuple[DiscreteScenario, EstimatorKernel]:
    """Two equally likely species whose reconstructions satisfy RDP, PR and CPR.

    Dogs occupy X symbols ``0..n-1`` and cats ``n..2n-1``, each uniformly.
    A measurement is the true symbol or its cyclic neighbour within the same
    species, so the species is always identifiable from ``y``.  The kernel
    sends every dog measurement to the single image ``x_dog = 0`` and samples
    cat measurements from the posterior, which restores cats exactly.
    """
    n = n_per_species
    size = 2 * n
    pxa = np.zeros((2, size))
    pxa[0, :n] = 1.0 / n
    pxa[1, n:] = 1.0 / n
    deg = np.zeros((size, size))
    for x in range(size):
        base = 0 if x < n else n
        deg[x, x] += 0.5
        deg[x, base + (x - base + 1) % n] += 0.5
    scenario = DiscreteScenario(DiscretePmf([0.5, 0.5]), pxa, deg, groups=("dogs", "cats"))
    k = posterior(scenario)
    k[:n] = 0.0
    k[:n, 0] = 1.0
    return scenario, EstimatorKernel(k)


def swap_fixture(p_a: Sequence[float] = (0.5, 0.5)) -> tuple[DiscreteScenario, EstimatorKernel]:
    """Two one-point groups on disjoint symbols, noiseless, kernel swapping them."""
    scenario = DiscreteScenario(DiscretePmf(p_a), np.eye(2), np.eye(2), groups=("g0", "g1"))
    return scenario, EstimatorKernel(np.array([[0.0, 1.0], [1.0, 0.0]]))


def majority_fixture(
    p_a: Sequence[float] = (0.7, 0.3), flip: float = 0.2
) -> tuple[DiscreteScenario, EstimatorKernel]:
    """Perfect-PI scenario with a strict majority group.

    Each group is a single X symbol; the measurement keeps the symbol with
    probability ``1 - flip`` and otherwise moves uniformly to another one.
    The posterior sampler attains perfect PI yet cannot give every group the
    same GPI.
    """
    g = len(p_a)
    deg = np.full((g, g), flip / (g - 1))
    np.fill_diagonal(deg, 1.0 - flip)
    scenario = DiscreteScenario(
        DiscretePmf(p_a), np.eye(g), deg, groups=tuple(f"g{i}" for i in range(g))
    )
    return scenario, posterior_sampler_kernel(scenario)


def _random_rows(rng: np.random.Generator, rows: int, cols: int, sparsity: float) -> NDArray[np.float64]:
    m = rng.dirichlet(np.ones(cols), size=rows)
    if sparsity > 0:
        mask = rng.random((rows, cols)) < sparsity
        mask[np.arange(rows), rng.integers(cols, size=rows)] = False
        m[mask] = 0.0
    return m / m.sum(axis=1, keepdims=True)


def random_scenario(
    seed: int,
    n_groups: int = 2,
    x_alphabet: int = 4,
    y_alphabet: int = 4,
    disjoint: bool = False,
    sparsity: float = 0.4,
) -> DiscreteScenario:
    """Seeded random scenario.

    With ``disjoint`` the X alphabet is split so group supports never
    overlap (requires ``x_alphabet >= n_groups``); otherwise supports overlap
    at random.  ``sparsity`` is the chance that an entry is zeroed.
    """
    if min(n_groups, x_alphabet, y_alphabet) < 1 or max(x_alphabet, y_alphabet) > 64:
        raise ValueError("sizes must be in [1, 64]")
    rng = make_rng(seed)
    p_a = rng.dirichlet(np.ones(n_groups))
    if disjoint:
        if x_alphabet < n_groups:
            raise ValueError("disjoint supports need x_alphabet >= n_groups")
        owner = np.concatenate([np.arange(n_groups), rng.integers(n_groups, size=x_alphabet - n_groups)])
        rng.shuffle(owner)
        pxa = np.zeros((n_groups, x_alphabet))
        for g in range(n_groups):
            cols = np.flatnonzero(owner == g)
            pxa[g, cols] = rng.dirichlet(np.ones(cols.size))
    else:
        pxa = _random_rows(rng, n_groups, x_alphabet, sparsity)
    deg = _random_rows(rng, x_alphabet, y_alphabet, sparsity)
    return DiscreteScenario(DiscretePmf(p_a / p_a.sum()), pxa, deg)


def random_kernel(
    seed: int, y_alphabet: int = 4, xhat_alphabet: int = 4, sparsity: float = 0.4
) -> EstimatorKernel:
    """Seeded random row-stochastic kernel."""
    if min(y_alphabet, xhat_alphabet) < 1 or max(y_alphabet, xhat_alphabet) > 64:
        raise ValueError("sizes must be in [1, 64]")
    return EstimatorKernel(_random_rows(make_rng(seed), y_alphabet, xhat_alphabet, sparsity))


def random_perfect_pi_pair(seed: int, max_groups: int = 4, max_alphabet: int = 8):
    """Seeded (scenario, kernel) pair whose reconstructions have ``p_Xhat = p_X``.

    Even seeds build a noiseless scenario with ``p_X`` constant on the cycles
    of a random permutation and use that permutation as the kernel.  Odd seeds
    draw a noisy random scenario and use the posterior sampler.
    """
    rng = make_rng(seed)
    g = int(rng.integers(2, max_groups + 1))
    nx = int(rng.integers(2, max_alphabet + 1))
    if seed % 2:
        ny = int(rng.integers(1, max_alphabet + 1))
        scenario = random_scenario(seed, g, nx, ny, disjoint=bool(rng.integers(2)) and nx >= g)
        return scenario, posterior_sampler_kernel(scenario)
    perm = rng.permutation(nx)
    cycle = np.arange(nx)
    for start in range(nx):
        j = perm[start]
        while cycle[j] != cycle[start]:
            cycle[j] = cycle[start]
            j = perm[j]
    weight = rng.random(nx) + 0.1
    p_x = np.array([weight[cycle == c].mean() for c in cycle])
    p_x /= p_x.sum()
    split = rng.random((g, nx)) * (rng.random((g, nx)) < 0.6)
    split[rng.integers(g, size=nx), np.arange(nx)] += 1.0
    joint = p_x * split / split.sum(axis=0)
    p_a = joint.sum(axis=1)
    keep = p_a > 0
    joint, p_a = joint[keep], p_a[keep]
    pxa = joint / p_a[:, None]
    pxa /= pxa.sum(axis=1, keepdims=True)
    scenario = DiscreteScenario(DiscretePmf(p_a / p_a.sum()), pxa, np.eye(nx))
    kernel = np.zeros((nx, nx))
    kernel[np.arange(nx), perm] = 1.0
    return scenario, EstimatorKernel(kernel)
