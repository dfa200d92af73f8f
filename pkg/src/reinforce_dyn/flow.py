"""ODE flow of the mean-field field, Lyapunov diagnostics and linear stability."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .errors import NonFiniteState, NotAnEquilibrium, StepTooLarge, WrongShape
from .model import InteractionModel, as_point, field_F, jacobian_F, lyapunov_L, tangent_basis, three_walk_z

MAX_DT = 0.01


@dataclass
class Trajectory:
    times: np.ndarray
    points: np.ndarray  # (k, m, d)
    lyapunov: np.ndarray | None = None
    min_raw_entry: float = math.inf  # smallest coordinate seen before clipping

    def __len__(self):
        return len(self.times)

    @property
    def final(self) -> np.ndarray:
        return self.points[-1]


def integrate(model: InteractionModel, x0, dt: float, t_end: float, record_every: int = 1) -> Trajectory:
    """Classical RK4 on ``dx/dt = F(x)``.

    After every step each walk's row is clipped at 0 and divided by its sum.
    If ``t_end`` is not a multiple of ``dt`` the step is shrunk slightly so the
    last recorded time is exactly ``t_end``.
    """
    if not dt > 0 or dt > MAX_DT:
        raise StepTooLarge(f"dt must be in (0, {MAX_DT}], got {dt}")
    if t_end < dt:
        raise ValueError(f"t_end={t_end} must be >= dt={dt}")
    if record_every < 1:
        raise ValueError("record_every must be a positive integer")
    x0 = as_point(x0, model)
    n_steps = math.ceil(t_end / dt - 1e-9)
    h = t_end / n_steps
    n_rec = n_steps // record_every + 2
    buf = np.empty((n_rec, model.m, model.d))
    count, min_raw, finite = _kernels.rk4(model.alpha, x0.copy(), h, n_steps, record_every, buf)
    if not finite:
        raise NonFiniteState("non-finite state encountered during integration")
    steps = np.arange(0, n_steps + 1, record_every)
    if steps[-1] != n_steps:
        steps = np.append(steps, n_steps)
    assert len(steps) == count
    points = buf[:count]
    points[0] = x0
    lyap = None if model.allow_asymmetric else np.asarray(lyapunov_L(model, points))
    return Trajectory(steps * h, points, lyap, float(min_raw))


@dataclass
class MonotoneReport:
    violations: int
    max_increase: float


def lyapunov_monotone_check(model: InteractionModel, traj: Trajectory, slack: float = 1e-9) -> MonotoneReport:
    model.require_lyapunov()
    lyap = traj.lyapunov if traj.lyapunov is not None else np.asarray(lyapunov_L(model, traj.points))
    diffs = np.diff(lyap)
    return MonotoneReport(int(np.sum(diffs > slack)), float(max(0.0, diffs.max(initial=0.0))))


class Stability(str, Enum):
    STABLE = "LinearlyStable"
    UNSTABLE = "LinearlyUnstable"
    NON_HYPERBOLIC = "NonHyperbolic"


@dataclass
class StabilityReport:
    eigenvalues: np.ndarray  # full (md) spectrum, complex
    classification: Stability
    hyperbolic_margin: float  # min |Re| over the tangent-space spectrum


def tangent_spectrum(model: InteractionModel, x) -> np.ndarray:
    """Eigenvalues of the Jacobian restricted to the tangent space.

    The tangent space is invariant under the Jacobian, and the ``m`` remaining
    (structural) eigenvalues of the full matrix are exactly -1.
    """
    q = tangent_basis(model.m, model.d)
    return np.linalg.eigvals(q.T @ jacobian_F(model, x) @ q)


def classify(model: InteractionModel, x_star, margin_tol: float = 1e-7) -> StabilityReport:
    x_star = as_point(x_star, model)
    if np.max(np.abs(field_F(model, x_star))) >= 1e-8:
        raise NotAnEquilibrium("|F(x)|_inf >= 1e-8 at the given point")
    eig = np.linalg.eigvals(jacobian_F(model, x_star))
    re = eig.real
    if np.any(np.abs(re) <= margin_tol):
        label = Stability.NON_HYPERBOLIC
    elif np.all(re < -margin_tol):
        label = Stability.STABLE
    else:
        label = Stability.UNSTABLE
    margin = float(np.min(np.abs(tangent_spectrum(model, x_star).real)))
    return StabilityReport(eig, label, margin)


def pcha(lam, a: float, b: float, c: float, beta: float):
    """Closed-form characteristic polynomial for three repelling walks on two vertices.

    Valid at points ``(a, 1-a, b, 1-b, c, 1-c)`` satisfying the fixed-point
    relations; it is the square of the cubic governing the tangent dynamics.
    """
    ca, cb, cc = (-2.0 * beta * t * (1.0 - t) for t in (a, b, c))
    one = 1.0 + lam
    cubic = ca * cb + ca * cc + 2.0 * ca * cb * cc + ca * cb * lam + ca * cc * lam - one * (-cb * cc + one**2)
    return cubic**2


def characteristic_poly_check_3walk(beta: float, equilibrium, spectrum: str = "tangent") -> float:
    """Max ``|pcha(lambda_k)|`` over numerically computed eigenvalues.

    ``spectrum="tangent"`` uses the tangent-space eigenvalues (the roots the
    closed form describes); ``"full"`` uses all six eigenvalues of the full
    Jacobian, whose three structural -1's are roots only when the product of
    the three coefficients is negligible.
    """
    x = np.asarray(equilibrium, dtype=float)
    if x.size != 6:
        raise WrongShape(f"expected a 3-walk, 2-vertex point, got shape {x.shape}")
    x = x.reshape(3, 2)
    model = three_walk_z(beta)
    if spectrum == "tangent":
        eig = tangent_spectrum(model, x)
    elif spectrum == "full":
        eig = np.linalg.eigvals(jacobian_F(model, x))
    else:
        raise ValueError(f"unknown spectrum {spectrum!r}")
    a, b, c = x[:, 0]
    return float(np.max(np.abs(pcha(eig, a, b, c, beta))))
