"""Equilibria of the mean-field field: solving, enumeration, uniqueness conditions,
and scalar root oracles for the repelling two- and three-walk examples."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .errors import NoConvergence, NoSmallRoot, NotFoundOnGrid, OutOfRange, SingularNewtonStep
from .flow import Stability, StabilityReport, classify
from .model import (
    InteractionModel,
    as_point,
    equal_beta,
    field_F,
    jacobian_F,
    kernel_pi,
    random_point,
    three_walk_z,
)

DAMPING = 0.5
EQUILIBRIUM_RESIDUAL = 1e-10


@dataclass
class Equilibrium:
    point: np.ndarray
    residual: float
    stability: StabilityReport
    basin_hits: int = 1

    @property
    def stable(self) -> bool:
        return self.stability.classification is Stability.STABLE


def _residual(model, x) -> float:
    return float(np.max(np.abs(field_F(model, x))))


def _renormalise(x):
    return x / x.sum(axis=1, keepdims=True)


def _newton_direction(model: InteractionModel, x) -> np.ndarray:
    """Newton step on the tangent space, in reduced coordinates.

    The last vertex of every walk is eliminated (``x[i, d-1] = 1 - sum``), which
    makes the system square; the returned step has zero row sums.
    """
    m, d = model.m, model.d
    jac = jacobian_F(model, x).reshape(m, d, m, d)
    # columns: e_(j,u) - e_(j,d-1); rows: first d-1 components of each walk
    reduced = jac[:, :-1, :, :-1] - jac[:, :-1, :, -1:]
    reduced = reduced.reshape(m * (d - 1), m * (d - 1))
    rhs = -field_F(model, x)[:, :-1].reshape(-1)
    try:
        step = np.linalg.solve(reduced, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularNewtonStep(str(exc)) from exc
    if not np.all(np.isfinite(step)) or np.linalg.cond(reduced) > 1e14:
        raise SingularNewtonStep("reduced Jacobian is numerically singular")
    step = step.reshape(m, d - 1)
    return np.concatenate([step, -step.sum(axis=1, keepdims=True)], axis=1)


def _newton(model, x, tol, max_newton=100):
    """Damped Newton with a residual line search; falls back to relaxation steps.

    Once the residual is below ``tol`` the iteration keeps going while the
    Newton steps keep shrinking, so degenerate roots are still pinned down as
    tightly as rounding allows.
    """
    res = _residual(model, x)
    last_size = math.inf
    for _ in range(max_newton):
        try:
            delta = _newton_direction(model, x)
        except SingularNewtonStep:
            x = _relax(model, x, 50)
            res = _residual(model, x)
            last_size = math.inf
            continue
        size = float(np.max(np.abs(delta)))
        if res < tol and (size < 1e-15 or size > 0.9 * last_size):
            break
        last_size = size
        t = 1.0
        while t > 1e-10:
            y = x + t * delta
            if np.all(y > 0.0):
                y = _renormalise(y)
                r = _residual(model, y)
                if r < res or (res < tol and r < tol):
                    x, res = y, r
                    break
            t *= 0.5
        else:
            if res < tol:
                break
            x = _relax(model, x, 50)
            res = _residual(model, x)
            last_size = math.inf
    return x, res


def _relax(model, x, max_iter, target=0.0, patience=200):
    """Damped fixed-point steps ``x <- x/2 + pi(x)/2``.

    Stops at ``|F| < target``, after ``max_iter`` steps, or when the residual
    has not improved for ``patience`` steps (stiff directions make the damped
    map oscillate for strong interactions).
    """
    best, since = math.inf, 0
    for _ in range(max_iter):
        p = kernel_pi(model, x)
        r = float(np.max(np.abs(p - x)))
        if r < target:
            break
        if r < best:
            best, since = r, 0
        else:
            since += 1
            if since > patience:
                break
        x = (1 - DAMPING) * x + DAMPING * p
    return x


def solve_from(model: InteractionModel, x0, max_iter: int = 2_000, tol: float = 1e-13,
               relax: bool = True) -> Equilibrium:
    """Solve ``F(x) = 0`` from ``x0``.

    With ``relax=True`` (the default), damped fixed-point steps
    ``x <- x/2 + pi(x)/2`` run until ``|F| < sqrt(tol)`` (or ``max_iter``), then
    Newton polishes to ``tol``. Relaxation only reaches attracting equilibria;
    ``relax=False`` goes straight to Newton, which can also land on saddles.
    """
    if tol < 1e-14:
        raise ValueError("tol must be >= 1e-14")
    x, res = _solve_point(model, x0, max_iter, tol, relax)
    return Equilibrium(x, res, classify(model, x))


def find_all(model: InteractionModel, n_starts: int, seed: int, dedup_tol: float = 1e-6,
             max_iter: int = 2_000, tol: float = 1e-13) -> list[Equilibrium]:
    """Multi-start search over uniformly sampled starts.

    Every start is solved twice, once by relaxation (attracting equilibria) and
    once by plain Newton (any equilibrium in its Newton basin). Solutions are
    sorted lexicographically, merged within ``dedup_tol`` (sup norm), and
    returned sorted by residual, then point. Two solutions up to 1e-3 apart
    are also merged when the field vanishes along the segment between them;
    degenerate roots are only located to about the cube root of machine eps.
    """
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    rng = np.random.default_rng(seed)
    starts = [random_point(rng, model.m, model.d) for _ in range(n_starts)]
    found = []
    for x0, relax in itertools.product(starts, (True, False)):
        try:
            x, res = _solve_point(model, x0, max_iter, tol, relax)
        except NoConvergence:
            continue
        found.append((x, res))
    if not found:
        raise NoConvergence(f"none of the {n_starts} starts converged")

    found.sort(key=lambda item: tuple(item[0].ravel()))
    clusters: list[list] = []
    for x, res in found:
        for cl in clusters:
            if _same_equilibrium(model, cl[0], x, dedup_tol):
                cl[2] += 1
                if res < cl[1]:
                    cl[0], cl[1] = x, res
                break
        else:
            clusters.append([x, res, 1])

    out = [Equilibrium(x, _residual(model, x), classify(model, x), hits) for x, _, hits in clusters]
    out.sort(key=lambda e: (e.residual, tuple(e.point.ravel())))
    return out


def _solve_point(model, x0, max_iter, tol, relax):
    x = as_point(x0, model).copy()
    if relax:
        x = _relax(model, x, max_iter, math.sqrt(tol))
    x, res = _newton(model, x, tol)
    if not res < tol:
        raise NoConvergence(f"residual {res:.3e} after max_iter={max_iter}")
    return x, res


def _same_equilibrium(model, x, y, dedup_tol) -> bool:
    gap = float(np.max(np.abs(x - y)))
    if gap < dedup_tol:
        return True
    if gap > 1e-3:
        return False
    # a degenerate root is only located to ~cbrt(eps); accept a near-zero
    # residual all along the segment as the same root
    return all(
        _residual(model, (1 - s) * x + s * y) < EQUILIBRIUM_RESIDUAL for s in (0.25, 0.5, 0.75)
    )


# -- uniqueness conditions -------------------------------------------------------

@dataclass
class ConditionReport:
    c1: bool
    c2: bool
    c3: bool
    c3_margin: float
    dominance_ok: bool


def c3_margin(model: InteractionModel) -> float:
    """``4 - max_i sum_u sum_{j != i} |alpha[u, i, j]|``."""
    off = np.abs(model.alpha) * (1.0 - np.eye(model.m))
    return float(4.0 - off.sum(axis=(0, 2)).max())


def row_dominant(jac: np.ndarray) -> bool:
    """Strict row diagonal dominance."""
    diag = np.abs(np.diag(jac))
    off = np.abs(jac).sum(axis=1) - diag
    return bool(np.all(diag > off))


def check_conditions(model: InteractionModel, n_samples: int = 100, seed: int = 0) -> ConditionReport:
    beta = equal_beta(model)
    m, d = model.m, model.d
    c1 = beta is not None and d == 2 and m >= 2 and beta <= 2
    c2 = beta is not None and m >= 2 and beta < 4.0 / (d * (m - 1))
    margin = c3_margin(model)
    zero_diag = bool(np.all(np.diagonal(model.alpha, axis1=1, axis2=2) == 0.0))
    c3 = model.symmetric and zero_diag and margin > 0
    rng = np.random.default_rng(seed)
    dominance = all(
        row_dominant(jacobian_F(model, random_point(rng, m, d))) for _ in range(n_samples)
    )
    return ConditionReport(bool(c1), bool(c2), bool(c3), margin, dominance)


# -- scalar root oracles ---------------------------------------------------------

def _g(t: float, beta: float) -> float:
    # fixed-point residual t - 1/(1 + exp(beta (1 - 2t)))
    return t - 1.0 / (1.0 + math.exp(beta * (1.0 - 2.0 * t)))


def _small_root(beta: float) -> float:
    """Root of ``t = 1/(1 + exp(beta (1 - 2t)))`` in ``(0, 1/2)``, by bisection.

    The map has slope ``beta/2`` at 1/2, so such a root exists iff ``beta > 2``;
    the guard matters because near ``beta = 2`` the sign of ``g`` close to 1/2
    is pure rounding noise.
    """
    if not beta > 2:
        raise NoSmallRoot(f"beta={beta} <= 2: the only root is 1/2")
    lo = 0.0
    if not _g(lo, beta) < 0.0:
        raise NoSmallRoot(f"the small root underflows for beta={beta}")
    # g(1/2 - eps) > 0 exactly when a root below 1/2 exists
    for hi in (0.5 - 1e-12, 0.5 - 1e-11, 0.5 - 1e-10, 0.5 - 1e-9):
        if _g(hi, beta) > 0.0:
            break
    else:
        raise NoSmallRoot(f"no root below 1/2 - 1e-9 for beta={beta}")
    return bisect(_g, lo, hi, args=(beta,), xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=2000)


def a_of_beta(beta: float) -> float:
    """``a`` such that ``(a, 1-a, 1-a, a)`` is an equilibrium of the two-walk model (beta > 2)."""
    if not beta > 2:
        raise OutOfRange(f"beta={beta} <= 2: the only root is 1/2")
    return _small_root(beta)


def w_of_beta(beta: float) -> float:
    """Small root of ``w = 1/(1 + exp(2 beta (1/2 - w)))``; the same equation as :func:`a_of_beta`."""
    return _small_root(beta)


def w_contained(beta: float) -> bool:
    """Whether the small root lies in ``(0, 1/beta^3)``."""
    w = w_of_beta(beta)
    return 0.0 < w < beta ** -3


def build_S(beta: float) -> list[np.ndarray]:
    """The six points ``(a,1-a,b,1-b,c,1-c)`` with ``{a,b,c} = {1/2, w, 1-w}``."""
    w = w_of_beta(beta)
    values = (0.5, w, 1.0 - w)
    model = three_walk_z(beta)
    points = []
    for a, b, c in itertools.permutations(values):
        x = np.array([[a, 1 - a], [b, 1 - b], [c, 1 - c]])
        res = _residual(model, x)
        if res >= 1e-9:
            raise NoConvergence(f"S point {x.ravel()} has residual {res:.3e}")
        points.append(x)
    return points


def probe_beta0(beta_grid) -> float:
    """Smallest grid beta where the small root is below ``1/beta^3`` and every S point is stable."""
    grid = [float(b) for b in beta_grid]
    if not grid or any(b <= 2 for b in grid) or any(b2 <= b1 for b1, b2 in zip(grid, grid[1:])):
        raise ValueError("beta_grid must be increasing with every value > 2")
    for beta in grid:
        try:
            if not w_contained(beta):
                continue
            points = build_S(beta)
        except (NoSmallRoot, NoConvergence):
            continue
        model = three_walk_z(beta)
        if all(classify(model, x).classification is Stability.STABLE for x in points):
            return beta
    raise NotFoundOnGrid(f"no beta in {grid} satisfies the probe")
