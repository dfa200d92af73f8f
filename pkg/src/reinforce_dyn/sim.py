"""Monte Carlo simulation of the interacting walks and their occupation measures.

Every run owns one counter-based generator (Philox) seeded from an integer.
Each step consumes exactly one uniform per walk, in walk order, and maps it
to a vertex by inverse-CDF on the kernel row; the bulk loop is compiled
with numba and the single-step API goes through the very same kernel.
"""
from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import digamma

from . import _kernels
from .model import InteractionModel, field_F, kernel_pi, three_walk_z

CHUNK = 1 << 15
THREADS_ENV = "REINFORCE_DYN_THREADS"


def gamma_n(n, d: int):
    """Step size ``1 / (n + d + 1)``."""
    return 1.0 / (np.asarray(n) + d + 1.0)


def tau_n(n, d: int):
    """``sum_{k < n} gamma_k``, i.e. ``H(n + d) - H(d)``."""
    return digamma(np.asarray(n, dtype=float) + d + 1.0) - digamma(d + 1.0)


@dataclass
class WalkState:
    """Live state of a run. ``counts`` include the initial phantom visit per vertex."""

    n: int
    counts: np.ndarray  # (m, d) int64
    positions: np.ndarray  # (m,) current vertex; -1 before the first step
    rng: np.random.Generator = field(repr=False)
    msum: np.ndarray = field(repr=False)  # running sum of gamma_k U_k
    mmax: float = 0.0  # running max of |msum|_inf

    @property
    def occupation(self) -> np.ndarray:
        return self.counts / float(self.counts.shape[1] + self.n)


def init_walks(model: InteractionModel, seed: int) -> WalkState:
    m, d = model.m, model.d
    return WalkState(
        n=0,
        counts=np.ones((m, d), dtype=np.int64),
        positions=np.full(m, -1, dtype=np.int64),
        rng=np.random.Generator(np.random.Philox(seed)),
        msum=np.zeros((m, d)),
    )


@dataclass
class _Records:
    n: list = field(default_factory=list)
    counts: list = field(default_factory=list)
    ck_n: list = field(default_factory=list)
    ck_m: list = field(default_factory=list)


def _advance(model: InteractionModel, state: WalkState, n_steps: int, stride: int = 0,
             records: _Records | None = None) -> WalkState:
    m, d = model.m, model.d
    remaining = n_steps
    while remaining > 0:
        k = min(CHUNK, remaining)
        uniforms = state.rng.random((k, m))
        n_rec = k // stride + 1 if stride > 0 else 0
        rec_counts = np.empty((n_rec, m, d), dtype=np.int64)
        rec_n = np.empty(n_rec, dtype=np.int64)
        ck_n = np.empty(64, dtype=np.int64)
        ck_m = np.empty((64, m, d))
        n, rec_pos, ck_pos, mmax = _kernels.walk_chunk(
            model.alpha, state.counts, state.n, uniforms, state.positions, state.msum,
            state.mmax, stride, rec_counts, rec_n, 0, ck_n, ck_m, 0,
        )
        state.n, state.mmax = int(n), float(mmax)
        if records is not None:
            records.n.extend(rec_n[:rec_pos].tolist())
            records.counts.extend(rec_counts[:rec_pos])
            records.ck_n.extend(ck_n[:ck_pos].tolist())
            records.ck_m.extend(ck_m[:ck_pos])
        remaining -= k
    return state


def step(model: InteractionModel, state: WalkState) -> WalkState:
    """Advance every walk by one step (in place) and return the state."""
    return _advance(model, state, 1)


@dataclass
class SaAudit:
    gamma_n: float
    xi_n: np.ndarray  # one-hot (m, d) of the vertices just visited
    u_n: np.ndarray  # xi_n - pi(X(n))
    reconstruction_residual: float  # |X(n+1) - X(n) - gamma_n (F(X(n)) + U_n)|_inf


def audited_step(model: InteractionModel, state: WalkState) -> tuple[WalkState, SaAudit]:
    """One step plus the stochastic-approximation decomposition of the increment."""
    n, d = state.n, model.d
    x_before = state.occupation
    p = kernel_pi(model, x_before)
    f = field_F(model, x_before)
    step(model, state)
    xi = np.zeros((model.m, d))
    xi[np.arange(model.m), state.positions] = 1.0
    u = xi - p
    g = float(gamma_n(n, d))
    resid = float(np.max(np.abs(state.occupation - x_before - g * (f + u))))
    return state, SaAudit(g, xi, u, resid)


@dataclass
class RunResult:
    final: WalkState
    sample_n: np.ndarray  # step indices of the records
    sample_counts: np.ndarray  # (k, m, d)
    martingale_sum: np.ndarray  # M_n at the end of the run
    martingale_max_norm: float
    checkpoint_n: np.ndarray  # powers of two
    checkpoint_m: np.ndarray  # M at those steps

    @property
    def samples(self) -> np.ndarray:
        d = self.sample_counts.shape[-1]
        return self.sample_counts / (d + self.sample_n)[:, None, None].astype(float)

    @property
    def sample_tau(self) -> np.ndarray:
        return tau_n(self.sample_n, self.sample_counts.shape[-1])

    def dyadic_increments(self) -> np.ndarray:
        """``|M_{2n} - M_n|_inf`` across consecutive power-of-two checkpoints."""
        if len(self.checkpoint_m) < 2:
            return np.empty(0)
        return np.max(np.abs(np.diff(self.checkpoint_m, axis=0)), axis=(1, 2))


def run(model: InteractionModel, seed: int, n_steps: int, record_stride: int = 1000) -> RunResult:
    """Simulate ``n_steps`` steps from the initial state, recording every ``record_stride`` steps.

    The initial state (n = 0) is always the first record.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if record_stride < 1:
        raise ValueError("record_stride must be >= 1")
    state = init_walks(model, seed)
    rec = _Records(n=[0], counts=[state.counts.copy()])
    _advance(model, state, n_steps, record_stride, rec)
    if rec.n[-1] != state.n:
        rec.n.append(state.n)
        rec.counts.append(state.counts.copy())
    return RunResult(
        final=state,
        sample_n=np.asarray(rec.n, dtype=np.int64),
        sample_counts=np.asarray(rec.counts),
        martingale_sum=state.msum.copy(),
        martingale_max_norm=state.mmax,
        checkpoint_n=np.asarray(rec.ck_n, dtype=np.int64),
        checkpoint_m=np.asarray(rec.ck_m).reshape(-1, model.m, model.d),
    )


# -- noise lower bound -----------------------------------------------------------

def noise_bound_s(model: InteractionModel, x) -> float:
    """``(min_{i,v} pi[i,v](x))^(m+1) / (2 m d)``."""
    p_min = float(kernel_pi(model, x).min())
    return p_min ** (model.m + 1) / (2.0 * model.m * model.d)


def expected_positive_projection(model: InteractionModel, x, theta, max_outcomes: int = 10_000) -> float:
    """Exact ``E[<theta, U>^+ | X(n) = x]`` by enumerating all ``d^m`` joint moves."""
    m, d = model.m, model.d
    if d ** m > max_outcomes:
        raise ValueError(f"d^m = {d ** m} outcomes exceeds max_outcomes={max_outcomes}")
    p = kernel_pi(model, x)
    theta = np.asarray(theta, dtype=float).reshape(m, d)
    outcomes = np.array(list(itertools.product(range(d), repeat=m)))  # (d^m, m)
    walks = np.arange(m)
    prob = np.prod(p[walks, outcomes], axis=1)
    value = theta[walks, outcomes].sum(axis=1) - float(np.sum(theta * p))
    return float(np.sum(prob * np.maximum(value, 0.0)))


def random_unit_tangent(rng: np.random.Generator, m: int, d: int) -> np.ndarray:
    """Random tangent vector (zero row sums) with unit L1 norm."""
    theta = rng.standard_normal((m, d))
    theta -= theta.mean(axis=1, keepdims=True)
    return theta / np.abs(theta).sum()


# -- three walks on Z --------------------------------------------------------------

@dataclass
class ZWalkState:
    s: np.ndarray  # (3,) positions on Z
    s0: np.ndarray
    inner: WalkState

    def bookkeeping_gap(self) -> int:
        """``S_n - S_0 - (2 (right visits) - n)``; always 0."""
        expected = 2 * (self.inner.counts[:, 1] - 1) - self.inner.n
        return int(np.max(np.abs(self.s - self.s0 - expected)))


@dataclass
class ZWalkResult:
    sample_n: np.ndarray
    z_path: np.ndarray  # (k, 3)
    final: ZWalkState
    empirical_step_probs: np.ndarray  # right-move frequency over the trailing window
    window: int

    @property
    def drift(self) -> np.ndarray:
        st = self.final
        return (st.s - st.s0) / st.inner.n


def run_z_walks(beta: float, seed: int, n_steps: int, s0=(0, 0, 0), record_stride: int = 1000) -> ZWalkResult:
    """Three repelling walks on Z, driven by the 3-walk, 2-vertex model.

    Vertex 2 is a step right, vertex 1 a step left. The trailing window used for
    the empirical step probabilities is the last 10% of steps.
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    model = three_walk_z(beta)
    s0 = np.asarray(s0, dtype=np.int64)
    window = max(1, n_steps // 10)
    state = init_walks(model, seed)
    rec = _Records(n=[0], counts=[state.counts.copy()])
    _advance(model, state, n_steps - window, record_stride, rec)
    right_before = state.counts[:, 1].copy()
    n_before = state.n
    _advance(model, state, window, record_stride, rec)
    if rec.n[-1] != state.n:
        rec.n.append(state.n)
        rec.counts.append(state.counts.copy())
    # records restart their stride count after the split; keep them sorted and unique
    sample_n, idx = np.unique(np.asarray(rec.n), return_index=True)
    counts = np.asarray(rec.counts)[idx]
    z_path = s0 + 2 * (counts[:, :, 1] - 1) - sample_n[:, None]
    s = s0 + 2 * (state.counts[:, 1] - 1) - state.n
    probs = (state.counts[:, 1] - right_before) / float(state.n - n_before)
    return ZWalkResult(sample_n, z_path, ZWalkState(s, s0, state), probs, window)


# -- ensembles ---------------------------------------------------------------------

def worker_count(default: int | None = None) -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return default or os.cpu_count() or 1


def ensemble(fn, seeds, workers: int | None = None) -> dict:
    """Run ``fn(seed)`` for every seed, concurrently; results keyed by seed.

    The compiled kernels release the GIL, so threads overlap the heavy part.
    """
    seeds = list(seeds)
    with ThreadPoolExecutor(max_workers=workers or worker_count()) as pool:
        results = list(pool.map(fn, seeds))
    return dict(zip(seeds, results))
