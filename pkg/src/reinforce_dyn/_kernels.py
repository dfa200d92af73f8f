"""Compiled inner loops (numba) for the walk simulation and the RK4 flow.

Array layout matches the rest of the package: ``alpha[v, i, j]`` and
occupation-like arrays ``x[i, v]``.
"""
import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def pi_into(alpha, x, out):
    m, d = x.shape
    for i in range(m):
        smax = -np.inf
        for v in range(d):
            s = 0.0
            for j in range(m):
                s += alpha[v, i, j] * x[j, v]
            out[i, v] = s
            if s > smax:
                smax = s
        z = 0.0
        for v in range(d):
            e = math.exp(out[i, v] - smax)
            out[i, v] = e
            z += e
        for v in range(d):
            out[i, v] /= z


@njit(cache=True, nogil=True)
def walk_chunk(alpha, counts, n, uniforms, positions, msum, mmax, stride,
               rec_counts, rec_n, rec_pos, ck_n, ck_m, ck_pos):
    """Advance the walks by ``uniforms.shape[0]`` steps, in place.

    One uniform per walk per step, consumed in walk order. Returns the
    updated ``(n, rec_pos, ck_pos, mmax)``.
    """
    m, d = counts.shape
    x = np.empty((m, d))
    p = np.empty((m, d))
    for k in range(uniforms.shape[0]):
        scale = 1.0 / (d + n)
        for i in range(m):
            for v in range(d):
                x[i, v] = counts[i, v] * scale
        pi_into(alpha, x, p)
        gamma = 1.0 / (n + d + 1)
        for i in range(m):
            u = uniforms[k, i]
            chosen = d - 1
            cum = 0.0
            for v in range(d - 1):
                cum += p[i, v]
                if u < cum:
                    chosen = v
                    break
            positions[i] = chosen
            counts[i, chosen] += 1
            for v in range(d):
                xi = 1.0 if v == chosen else 0.0
                msum[i, v] += gamma * (xi - p[i, v])
        n += 1
        for i in range(m):
            for v in range(d):
                a = abs(msum[i, v])
                if a > mmax:
                    mmax = a
        if stride > 0 and n % stride == 0 and rec_pos < rec_n.shape[0]:
            rec_n[rec_pos] = n
            for i in range(m):
                for v in range(d):
                    rec_counts[rec_pos, i, v] = counts[i, v]
            rec_pos += 1
        if (n & (n - 1)) == 0 and ck_pos < ck_n.shape[0]:
            ck_n[ck_pos] = n
            for i in range(m):
                for v in range(d):
                    ck_m[ck_pos, i, v] = msum[i, v]
            ck_pos += 1
    return n, rec_pos, ck_pos, mmax


@njit(cache=True, nogil=True)
def _field_into(alpha, x, out):
    pi_into(alpha, x, out)
    m, d = x.shape
    for i in range(m):
        for v in range(d):
            out[i, v] -= x[i, v]


@njit(cache=True, nogil=True)
def rk4(alpha, x0, dt, n_steps, record_every, out_points):
    """Fixed-step RK4 with clip-and-renormalise after each step.

    Writes ``x0`` and every ``record_every``-th state (plus the last one)
    into ``out_points``. Returns ``(n_recorded, min_raw_entry, finite)``.
    """
    m, d = x0.shape
    x = x0.copy()
    k1 = np.empty((m, d))
    k2 = np.empty((m, d))
    k3 = np.empty((m, d))
    k4 = np.empty((m, d))
    tmp = np.empty((m, d))
    out_points[0] = x
    pos = 1
    min_raw = np.inf
    for step in range(1, n_steps + 1):
        _field_into(alpha, x, k1)
        for i in range(m):
            for v in range(d):
                tmp[i, v] = x[i, v] + 0.5 * dt * k1[i, v]
        _field_into(alpha, tmp, k2)
        for i in range(m):
            for v in range(d):
                tmp[i, v] = x[i, v] + 0.5 * dt * k2[i, v]
        _field_into(alpha, tmp, k3)
        for i in range(m):
            for v in range(d):
                tmp[i, v] = x[i, v] + dt * k3[i, v]
        _field_into(alpha, tmp, k4)
        for i in range(m):
            total = 0.0
            for v in range(d):
                y = x[i, v] + dt / 6.0 * (k1[i, v] + 2.0 * k2[i, v] + 2.0 * k3[i, v] + k4[i, v])
                if not math.isfinite(y):
                    return pos, min_raw, False
                if y < min_raw:
                    min_raw = y
                if y < 0.0:
                    y = 0.0
                x[i, v] = y
                total += y
            for v in range(d):
                x[i, v] /= total
        if step % record_every == 0 or step == n_steps:
            out_points[pos] = x
            pos += 1
    return pos, min_raw, True
