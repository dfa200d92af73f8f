"""Interaction model and the pointwise mean-field objects built on it.

Conventions used throughout the package:

* ``alpha[v, i, j]`` is the strength between walks ``i`` and ``j`` at vertex ``v``.
* A point of the state space (a product of ``m`` probability simplices over
  ``d`` vertices) is an ``(m, d)`` array ``x[i, v]``; tangent vectors have the
  same shape with zero row sums.
* Whenever a matrix acts on flattened points, entry ``(i, v)`` sits at flat
  index ``i * d + v`` (plain C-order ``reshape``).
"""
from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag, null_space
from scipy.special import rel_entr, xlogy

from .errors import (
    AsymmetricAlpha,
    BadDimension,
    BoundaryInput,
    BoundaryReference,
    LyapunovUnavailable,
    NegativeArgument,
)

SIMPLEX_TOL = 1e-12


@dataclass(frozen=True)
class InteractionModel:
    """``m`` walks on the complete graph with ``d`` vertices.

    Use :func:`make_model` (or a preset) rather than the constructor directly;
    the constructor still validates shape and symmetry.
    """

    m: int
    d: int
    alpha: np.ndarray = field(repr=False)
    allow_asymmetric: bool = False

    def __post_init__(self):
        if self.m < 1 or self.d < 2:
            raise BadDimension(f"need m >= 1 and d >= 2, got m={self.m}, d={self.d}")
        alpha = np.array(self.alpha, dtype=float)
        if alpha.shape != (self.d, self.m, self.m):
            raise BadDimension(f"alpha must have shape (d, m, m) = {(self.d, self.m, self.m)}, got {alpha.shape}")
        if not np.all(np.isfinite(alpha)):
            raise BadDimension("alpha entries must be finite")
        if not self.allow_asymmetric and not np.array_equal(alpha, alpha.transpose(0, 2, 1)):
            v, i, j = np.argwhere(alpha != alpha.transpose(0, 2, 1))[0]
            raise AsymmetricAlpha(
                f"alpha[{v}][{i}][{j}]={alpha[v, i, j]} differs from alpha[{v}][{j}][{i}]={alpha[v, j, i]}"
            )
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)

    @property
    def symmetric(self) -> bool:
        return bool(np.array_equal(self.alpha, self.alpha.transpose(0, 2, 1)))

    @property
    def size(self) -> int:
        return self.m * self.d

    def require_lyapunov(self):
        if self.allow_asymmetric:
            raise LyapunovUnavailable("model was built with the asymmetric override")


def make_model(m: int, d: int, alpha_entries=None, *, allow_asymmetric: bool = False) -> InteractionModel:
    """Build a validated model.

    ``alpha_entries`` is either an array-like of shape ``(d, m, m)`` or a
    mapping ``{(v, i, j): value}`` with 0-based indices (missing entries are 0).
    Nothing is symmetrised: a mapping must list both ``(v, i, j)`` and
    ``(v, j, i)``.
    """
    if m < 1 or d < 2:
        raise BadDimension(f"need m >= 1 and d >= 2, got m={m}, d={d}")
    if alpha_entries is None:
        alpha = np.zeros((d, m, m))
    elif isinstance(alpha_entries, Mapping):
        alpha = np.zeros((d, m, m))
        for key, value in alpha_entries.items():
            v, i, j = key
            if not (0 <= v < d and 0 <= i < m and 0 <= j < m):
                raise BadDimension(f"index {key} out of range for m={m}, d={d}")
            alpha[v, i, j] = value
    else:
        alpha = np.asarray(alpha_entries, dtype=float)
    return InteractionModel(m, d, alpha, allow_asymmetric)


def repelling(m: int, d: int, beta: float) -> InteractionModel:
    """Equal-strength repulsion: ``alpha[v, i, j] = -beta`` for ``i != j``, 0 on the diagonal."""
    pair = -beta * (1.0 - np.eye(m))
    return make_model(m, d, np.broadcast_to(pair, (d, m, m)))


def two_walk_k2(beta: float) -> InteractionModel:
    return repelling(2, 2, beta)


def three_walk_z(beta: float) -> InteractionModel:
    return repelling(3, 2, beta)


def equal_beta(model: InteractionModel) -> float | None:
    """Return ``beta`` if ``model`` is the equal-strength repelling preset, else ``None``."""
    alpha = model.alpha
    if np.any(np.diagonal(alpha, axis1=1, axis2=2) != 0.0):
        return None
    if model.m == 1:
        return 0.0
    off = alpha[:, ~np.eye(model.m, dtype=bool)]
    if np.all(off == off.flat[0]):
        return float(-off.flat[0])
    return None


def random_model(rng: np.random.Generator, m: int, d: int, scale: float = 1.0,
                 zero_diagonal: bool = False) -> InteractionModel:
    """Symmetric model with entries uniform on ``[-scale, scale]``."""
    a = rng.uniform(-scale, scale, size=(d, m, m))
    a = np.triu(a) + np.triu(a, 1).transpose(0, 2, 1)
    if zero_diagonal:
        a[:, np.arange(m), np.arange(m)] = 0.0
    return make_model(m, d, a)


# -- points ------------------------------------------------------------------

def uniform_point(m: int, d: int) -> np.ndarray:
    return np.full((m, d), 1.0 / d)


def random_point(rng: np.random.Generator, m: int, d: int) -> np.ndarray:
    """Uniform sample of the state space (Dirichlet(1, ..., 1) per walk)."""
    return rng.dirichlet(np.ones(d), size=m)


def as_point(x, model: InteractionModel | None = None) -> np.ndarray:
    """Validate ``x`` as a point of the state space and return it as an array."""
    x = np.asarray(x, dtype=float)
    if model is not None and x.shape != (model.m, model.d):
        if x.size == model.size:
            x = x.reshape(model.m, model.d)
        else:
            raise BadDimension(f"point shape {x.shape} does not match (m, d) = {(model.m, model.d)}")
    if x.ndim != 2:
        raise BadDimension(f"point must be 2-d (m, d), got shape {x.shape}")
    if np.any(x < 0.0) or not np.all(np.isfinite(x)):
        raise BadDimension("point entries must be finite and non-negative")
    if np.max(np.abs(x.sum(axis=1) - 1.0)) > SIMPLEX_TOL:
        raise BadDimension("every walk's row of the point must sum to 1")
    return x


def is_tangent(v, tol: float = SIMPLEX_TOL) -> bool:
    return bool(np.max(np.abs(np.asarray(v).sum(axis=-1))) <= tol)


def tangent_basis(m: int, d: int) -> np.ndarray:
    """Orthonormal basis (columns) of the flattened tangent space."""
    sums = np.kron(np.eye(m), np.ones((1, d)))
    return null_space(sums)


# -- kernel and field ----------------------------------------------------------

def exponents(model: InteractionModel, x) -> np.ndarray:
    """``s[i, v] = sum_j alpha[v, i, j] * x[j, v]``."""
    return np.einsum("vij,jv->iv", model.alpha, x)


def kernel_pi(model: InteractionModel, x) -> np.ndarray:
    s = exponents(model, x)
    s = s - s.max(axis=1, keepdims=True)
    e = np.exp(s)
    return e / e.sum(axis=1, keepdims=True)


def field_F(model: InteractionModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return kernel_pi(model, x) - x


def jacobian_F(model: InteractionModel, x) -> np.ndarray:
    """Analytic ``(md, md)`` Jacobian of the field.

    ``dF[i,v]/dx[j,u] = -[u==v][i==j] + pi[i,v] * (alpha[v,i,j] [u==v] - alpha[u,i,j] pi[i,u])``,
    valid for any ``alpha`` (self-interaction included).
    """
    m, d = model.m, model.d
    p = kernel_pi(model, x)
    a = model.alpha
    jac = np.zeros((m, d, m, d))
    # [u == v] part: pi[i,v] * alpha[v,i,j]
    diag_part = p[:, :, None] * a.transpose(1, 0, 2)  # (i, v, j)
    vv = np.arange(d)
    jac[:, vv, :, vv] = diag_part.transpose(1, 0, 2)
    # -pi[i,v] * alpha[u,i,j] * pi[i,u]
    cross = a.transpose(1, 2, 0) * p[:, None, :]  # (i, j, u)
    jac -= p[:, :, None, None] * cross[:, None, :, :]
    jac = jac.reshape(m * d, m * d)
    jac -= np.eye(m * d)
    return jac


def lyapunov_L(model: InteractionModel, x) -> float | np.ndarray:
    """Entropy-plus-quadratic Lyapunov function; broadcasts over leading axes of ``x``."""
    model.require_lyapunov()
    x = np.asarray(x, dtype=float)
    entropy = xlogy(x, x).sum(axis=(-2, -1))
    quad = np.einsum("vij,...iv,...jv->...", model.alpha, x, x)
    return entropy - 0.5 * quad


def lyapunov_gradient(model: InteractionModel, x) -> np.ndarray:
    """``dL/dx[i,v] = log x[i,v] + 1 - sum_j alpha[v,i,j] x[j,v]`` at interior points."""
    model.require_lyapunov()
    x = np.asarray(x, dtype=float)
    return np.log(x) + 1.0 - exponents(model, x)


def relative_entropy(x, y) -> float:
    """``sum_i sum_v x[i,v] log(x[i,v] / y[i,v])`` with ``0 log 0 = 0``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0.0):
        raise BoundaryReference("reference point must be strictly interior")
    return float(rel_entr(x, y).sum())


def gamma_matrix(model: InteractionModel, x) -> np.ndarray:
    """Block-diagonal ``-I + Pi(x)``; block ``i`` has every row equal to ``pi[i, :]``."""
    p = kernel_pi(model, x)
    d = model.d
    return block_diag(*[np.tile(row, (d, 1)) for row in p]) - np.eye(model.size)


def ell(z):
    """``z log z - z + 1``, extended by ``ell(0) = 1``."""
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr < 0.0):
        raise NegativeArgument("ell is defined for z >= 0 only")
    out = xlogy(z_arr, z_arr) - z_arr + 1.0
    return float(out) if out.ndim == 0 else out


def entropy_derivative_identity_residual(model: InteractionModel, x) -> float:
    """Compare two expressions for d/dt Ent(x(t) / pi(w)) at t = now, w = x frozen.

    Left: chain rule with ``dx/dt = F(x)``. Right: the ``ell``-weighted sum over
    ordered vertex pairs ``u != v`` using the entries of ``Gamma``. Returns
    ``|left - right|`` with both sides summed over the walks.
    """
    model.require_lyapunov()
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise BoundaryInput("identity requires a strictly interior point")
    p = kernel_pi(model, x)
    f = p - x
    left = float(np.sum((np.log(x / p) + 1.0) * f))

    d = model.d
    gam = gamma_matrix(model, x)
    right = 0.0
    for i in range(model.m):
        block = gam[i * d:(i + 1) * d, i * d:(i + 1) * d]
        xi, pii = x[i], p[i]
        # z[v, u] = x_v pi_u / (x_u pi_v)
        z = (xi[:, None] * pii[None, :]) / (xi[None, :] * pii[:, None])
        weight = xi[None, :] * pii[:, None] / pii[None, :]
        terms = ell(z) * weight * block
        np.fill_diagonal(terms, 0.0)
        right -= float(terms.sum())
    return abs(left - right)
