"""Hot inner loops, each in a numba and a pure-numpy flavour.

The numba path is used when numba imports cleanly and the environment
variable ``CMC_LAB_NUMBA`` is not set to a false-like value (``0``, ``false``,
``off``, ``no``).  Both flavours are always importable so they can be
compared against each other (see ``benchmarks/bench_kernels.py``).
"""

import math
import os

import numpy as np

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False


def _env_wants_numba():
    flag = os.environ.get("CMC_LAB_NUMBA", "1").strip().lower()
    return flag not in {"0", "false", "off", "no"}


USE_NUMBA = HAS_NUMBA and _env_wants_numba()


def backend():
    """Name of the active kernel backend, ``"numba"`` or ``"numpy"``."""
    return "numba" if USE_NUMBA else "numpy"


def _maybe_njit(func):
    if HAS_NUMBA:
        return numba.njit(cache=True)(func)
    return func


# ---------------------------------------------------------------------------
# Fixed-step RK4 for (S, P) with S' = P / x, P' = q S.
# Coefficients are sampled on a grid of half the step size (2n + 1 points).


def _rk4_sl_loop(h, x_fine, q_fine, S0, P0):
    n = (x_fine.shape[0] - 1) // 2
    S = np.empty(n + 1)
    P = np.empty(n + 1)
    S[0] = S0
    P[0] = P0
    for i in range(n):
        x0 = x_fine[2 * i]
        xm = x_fine[2 * i + 1]
        x1 = x_fine[2 * i + 2]
        q0 = q_fine[2 * i]
        qm = q_fine[2 * i + 1]
        q1 = q_fine[2 * i + 2]
        s = S[i]
        p = P[i]
        k1s = p / x0
        k1p = q0 * s
        k2s = (p + 0.5 * h * k1p) / xm
        k2p = qm * (s + 0.5 * h * k1s)
        k3s = (p + 0.5 * h * k2p) / xm
        k3p = qm * (s + 0.5 * h * k2s)
        k4s = (p + h * k3p) / x1
        k4p = q1 * (s + h * k3s)
        S[i + 1] = s + h * (k1s + 2.0 * k2s + 2.0 * k3s + k4s) / 6.0
        P[i + 1] = p + h * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0
    return S, P


_rk4_sl_nb = _maybe_njit(_rk4_sl_loop)


def _rk4_sl_lists(h, xf, qf, S0, P0):
    n = (len(xf) - 1) // 2
    S = [0.0] * (n + 1)
    P = [0.0] * (n + 1)
    S[0], P[0] = S0, P0
    s, p = S0, P0
    hh = 0.5 * h
    for i in range(n):
        x0, xm, x1 = xf[2 * i], xf[2 * i + 1], xf[2 * i + 2]
        q0, qm, q1 = qf[2 * i], qf[2 * i + 1], qf[2 * i + 2]
        k1s = p / x0
        k1p = q0 * s
        k2s = (p + hh * k1p) / xm
        k2p = qm * (s + hh * k1s)
        k3s = (p + hh * k2p) / xm
        k3p = qm * (s + hh * k2s)
        k4s = (p + h * k3p) / x1
        k4p = q1 * (s + h * k3s)
        s = s + h * (k1s + 2.0 * k2s + 2.0 * k3s + k4s) / 6.0
        p = p + h * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0
        S[i + 1] = s
        P[i + 1] = p
    return np.asarray(S), np.asarray(P)


def rk4_sturm_liouville(h, x_fine, q_fine, S0, P0, use_numba=None):
    """Integrate ``S' = P/x``, ``P' = q S`` with classical RK4.

    ``x_fine`` and ``q_fine`` hold the coefficients on the half-step grid, so
    their length must be odd; the returned arrays live on the full-step grid.
    """
    x_fine = np.ascontiguousarray(x_fine, dtype=np.float64)
    q_fine = np.ascontiguousarray(q_fine, dtype=np.float64)
    if x_fine.shape != q_fine.shape or x_fine.shape[0] % 2 != 1:
        raise ValueError("coefficient arrays must share an odd length")
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba and HAS_NUMBA:
        return _rk4_sl_nb(float(h), x_fine, q_fine, float(S0), float(P0))
    return _rk4_sl_lists(float(h), x_fine.tolist(), q_fine.tolist(),
                         float(S0), float(P0))


# ---------------------------------------------------------------------------
# Cube-average extension: composite midpoint rule on a clamped linear
# interpolant of the sampled data.


def _n_sub(z, dx, m_min):
    return max(m_min, int(math.ceil(m_min * z / dx)))


def _whitney_1d_loop(values, x0, dx, xs, zs, m_min):
    nx = values.shape[0]
    F = np.zeros((xs.shape[0], zs.shape[0]))
    for k in range(zs.shape[0]):
        z = zs[k]
        if z <= 0.0:
            continue
        m = max(m_min, int(math.ceil(m_min * z / dx)))
        w = z / m
        for i in range(xs.shape[0]):
            acc = 0.0
            left = xs[i] - 0.5 * z
            for j in range(m):
                u = (left + (j + 0.5) * w - x0) / dx
                if u <= 0.0:
                    acc += values[0]
                elif u >= nx - 1:
                    acc += values[nx - 1]
                else:
                    i0 = int(u)
                    f = u - i0
                    acc += (1.0 - f) * values[i0] + f * values[i0 + 1]
            F[i, k] = acc * w
    return F


def _whitney_2d_loop(values, x0, y0, dx, dy, xs, ys, zs, m_min):
    ny = values.shape[0]
    nx = values.shape[1]
    F = np.zeros((ys.shape[0], xs.shape[0], zs.shape[0]))
    col = np.empty(nx)
    for k in range(zs.shape[0]):
        z = zs[k]
        if z <= 0.0:
            continue
        mx = max(m_min, int(math.ceil(m_min * z / dx)))
        my = max(m_min, int(math.ceil(m_min * z / dy)))
        wx = z / mx
        wy = z / my
        for a in range(ys.shape[0]):
            # the bilinear weights factor, so sum over y first
            for c in range(nx):
                col[c] = 0.0
            bottom = ys[a] - 0.5 * z
            for jy in range(my):
                v = (bottom + (jy + 0.5) * wy - y0) / dy
                if v <= 0.0:
                    iy = 0
                    fy = 0.0
                elif v >= ny - 1:
                    iy = ny - 2
                    fy = 1.0
                else:
                    iy = int(v)
                    fy = v - iy
                for c in range(nx):
                    col[c] += (1.0 - fy) * values[iy, c] + fy * values[iy + 1, c]
            for b in range(xs.shape[0]):
                left = xs[b] - 0.5 * z
                acc = 0.0
                for jx in range(mx):
                    u = (left + (jx + 0.5) * wx - x0) / dx
                    if u <= 0.0:
                        acc += col[0]
                    elif u >= nx - 1:
                        acc += col[nx - 1]
                    else:
                        ix = int(u)
                        fx = u - ix
                        acc += (1.0 - fx) * col[ix] + fx * col[ix + 1]
                F[a, b, k] = acc * wx * wy / z
    return F


_whitney_1d_nb = _maybe_njit(_whitney_1d_loop)
_whitney_2d_nb = _maybe_njit(_whitney_2d_loop)


def _clamped_interp(values, origin, step, t):
    u = np.clip((t - origin) / step, 0.0, values.shape[-1] - 1)
    i0 = np.minimum(np.floor(u).astype(np.int64), values.shape[-1] - 2)
    f = u - i0
    return i0, f


def _whitney_1d_np(values, x0, dx, xs, zs, m_min):
    F = np.zeros((xs.shape[0], zs.shape[0]))
    for k, z in enumerate(zs):
        if z <= 0.0:
            continue
        m = _n_sub(z, dx, m_min)
        w = z / m
        t = xs[:, None] - 0.5 * z + (np.arange(m) + 0.5) * w
        i0, f = _clamped_interp(values, x0, dx, t)
        F[:, k] = ((1.0 - f) * values[i0] + f * values[i0 + 1]).sum(axis=1) * w
    return F


def _whitney_2d_np(values, x0, y0, dx, dy, xs, ys, zs, m_min):
    F = np.zeros((ys.shape[0], xs.shape[0], zs.shape[0]))
    ny, nx = values.shape
    for k, z in enumerate(zs):
        if z <= 0.0:
            continue
        mx = _n_sub(z, dx, m_min)
        my = _n_sub(z, dy, m_min)
        wx, wy = z / mx, z / my
        tx = xs[:, None] - 0.5 * z + (np.arange(mx) + 0.5) * wx
        ty = ys[:, None] - 0.5 * z + (np.arange(my) + 0.5) * wy
        ix, fx = _clamped_interp(values[0], x0, dx, tx)
        iy, fy = _clamped_interp(values[:, 0], y0, dy, ty)
        # bilinear weights factor across axes: sum_y sum_x wy(y) wx(x) v[y, x]
        for a in range(ys.shape[0]):
            rows0 = values[iy[a]]            # (my, nx)
            rows1 = values[iy[a] + 1]
            rows = (1.0 - fy[a])[:, None] * rows0 + fy[a][:, None] * rows1
            col = rows.sum(axis=0)           # (nx,)
            vals = (1.0 - fx) * col[ix] + fx * col[ix + 1]
            F[a, :, k] = vals.sum(axis=1) * wx * wy / z
    return F


def whitney_1d(values, x0, dx, xs, zs, m_min=4, use_numba=None):
    """Interval integrals ``int_{x - z/2}^{x + z/2} h`` for every ``(x, z)``."""
    args = (np.ascontiguousarray(values, dtype=np.float64), float(x0), float(dx),
            np.ascontiguousarray(xs, dtype=np.float64),
            np.ascontiguousarray(zs, dtype=np.float64), int(m_min))
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba and HAS_NUMBA:
        return _whitney_1d_nb(*args)
    return _whitney_1d_np(*args)


def whitney_2d(values, x0, y0, dx, dy, xs, ys, zs, m_min=4, use_numba=None):
    """Square averages ``z**-1 * int_Q h`` for every ``(y, x, z)``."""
    args = (np.ascontiguousarray(values, dtype=np.float64), float(x0), float(y0),
            float(dx), float(dy),
            np.ascontiguousarray(xs, dtype=np.float64),
            np.ascontiguousarray(ys, dtype=np.float64),
            np.ascontiguousarray(zs, dtype=np.float64), int(m_min))
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba and HAS_NUMBA:
        return _whitney_2d_nb(*args)
    return _whitney_2d_np(*args)
