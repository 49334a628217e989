"""Cube-average extension of boundary data and the Robin lift built from it.

For ``h`` on ``R^d`` the extension is

    F_h(x, z) = z^(1-d) * int_{Q(x, z)} h,   Q(x, z) = prod [x_i - z/2, x_i + z/2],

with ``F_h(x, 0) = 0``; then ``dF/dz(x, 0) = h(x)``.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import DomainError, GridMismatchError


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples on a uniform tensor grid.

    ``values[i0, i1, ...]`` sits at ``origin[k] + i_k * spacing[k]``.
    """

    values: np.ndarray
    origin: tuple
    spacing: tuple
    axis_names: tuple

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        k = v.ndim
        if not (len(self.origin) == len(self.spacing) == len(self.axis_names) == k):
            raise GridMismatchError("origin, spacing and axis_names must match values.ndim")
        if any(not h > 0 for h in self.spacing):
            raise DomainError("grid spacing must be positive")
        if not np.all(np.isfinite(v)):
            raise DomainError("grid values must be finite")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        object.__setattr__(self, "spacing", tuple(float(h) for h in self.spacing))
        object.__setattr__(self, "axis_names", tuple(self.axis_names))

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def shape(self):
        return self.values.shape

    def coords(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.spacing[axis] * np.arange(self.shape[axis])

    @classmethod
    def sample(cls, func, bounds, counts, axis_names=None) -> "GridFunction":
        """Sample ``func(*coords)`` on ``counts[k]`` points spanning ``bounds[k]``."""
        axes = [np.linspace(lo, hi, n) for (lo, hi), n in zip(bounds, counts)]
        mesh = np.meshgrid(*axes, indexing="ij")
        vals = np.asarray(func(*mesh), dtype=float) * np.ones(mesh[0].shape)
        names = axis_names or tuple(f"x{k + 1}" for k in range(len(axes)))
        return cls(vals, tuple(a[0] for a in axes), tuple(a[1] - a[0] for a in axes), names)

    def same_grid(self, other: "GridFunction") -> bool:
        return (self.shape == other.shape
                and np.allclose(self.origin, other.origin, rtol=0, atol=1e-12)
                and np.allclose(self.spacing, other.spacing, rtol=1e-12, atol=0))

    def __add__(self, other):
        if not self.same_grid(other):
            raise GridMismatchError("grid functions live on different grids")
        return GridFunction(self.values + other.values, self.origin, self.spacing, self.axis_names)

    def __mul__(self, a):
        return GridFunction(a * self.values, self.origin, self.spacing, self.axis_names)

    __rmul__ = __mul__

    def to_csv(self, path) -> None:
        axes = [self.coords(k) for k in range(self.ndim)]
        with Path(path).open("w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(list(self.axis_names) + ["value"])
            for idx in itertools.product(*(range(n) for n in self.shape)):
                row = [axes[k][i] for k, i in enumerate(idx)] + [self.values[idx]]
                out.writerow([f"{v:.17g}" for v in row])

    @classmethod
    def from_csv(cls, path) -> "GridFunction":
        with Path(path).open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = np.array([[float(t) for t in r] for r in reader if r])
        if not header or header[-1] != "value" or rows.ndim != 2 or rows.shape[1] != len(header):
            raise DomainError(f"{path}: expected axis columns followed by 'value'")
        names = tuple(header[:-1])
        axes = [np.unique(rows[:, k]) for k in range(len(names))]
        shape = tuple(a.size for a in axes)
        if int(np.prod(shape)) != rows.shape[0]:
            raise GridMismatchError(f"{path}: samples do not form a full tensor grid")
        order = np.lexsort(tuple(rows[:, k] for k in reversed(range(len(names)))))
        vals = rows[order, -1].reshape(shape)
        steps = []
        for a in axes:
            if a.size < 2:
                raise GridMismatchError(f"{path}: each axis needs at least two samples")
            d = np.diff(a)
            if not np.allclose(d, d[0], rtol=1e-9, atol=0):
                raise GridMismatchError(f"{path}: axis spacing is not uniform")
            steps.append(d[0])
        return cls(vals, tuple(a[0] for a in axes), tuple(steps), names)


def whitney_extend(h: GridFunction, z_max: float, n_z: int, m_min: int = 4) -> GridFunction:
    """Extension ``F_h`` on the slab ``box x [0, z_max]`` with ``n_z + 1`` levels.

    Cube integrals use a composite midpoint rule on the linear interpolant of
    ``h`` with at least ``m_min`` points per grid cell.  Outside the sampled
    box ``h`` is continued by its nearest sample.
    """
    if h.ndim not in (1, 2):
        raise DomainError(f"extension is implemented for d in (1, 2), got d={h.ndim}")
    if not z_max > 0 or n_z < 1:
        raise DomainError("need z_max > 0 and n_z >= 1")
    if m_min < 4:
        raise DomainError("at least 4 quadrature points per cell are required")
    zs = np.linspace(0.0, z_max, n_z + 1)
    if h.ndim == 1:
        F = _kernels.whitney_1d(h.values, h.origin[0], h.spacing[0], h.coords(0), zs, m_min)
    else:
        F = _kernels.whitney_2d(h.values, h.origin[1], h.origin[0], h.spacing[1], h.spacing[0],
                                h.coords(1), h.coords(0), zs, m_min)
    return GridFunction(F, h.origin + (0.0,), h.spacing + (zs[1] - zs[0],),
                        h.axis_names + ("z",))


def normal_derivative_check(F: GridFunction, h: GridFunction) -> float:
    """``max |(F(x, dz) - F(x, 0)) / dz - h(x)|``."""
    if F.ndim != h.ndim + 1 or F.shape[:-1] != h.shape:
        raise GridMismatchError("F must be a slab extension of h's grid")
    dz = F.spacing[-1]
    d = (F.values[..., 1] - F.values[..., 0]) / dz
    return float(np.max(np.abs(d - h.values)))


# ---------------------------------------------------------------------------
# Robin lift on a single collar chart


def cutoff(t, width: float):
    """Smooth ``chi`` with ``chi = 1`` on ``t <= width/2`` and ``chi = 0`` on ``t >= width``."""
    t = np.asarray(t, dtype=float)
    u = np.clip(2.0 * t / width - 1.0, 0.0, 1.0)

    def bump(v):
        out = np.zeros_like(v)
        pos = v > 0
        out[pos] = np.exp(-1.0 / v[pos])
        return out

    a, b = bump(1.0 - u), bump(u)
    return a / (a + b)


def robin_lift_interval(g_left: float, g_right: float, a: float = -1.0, b: float = 1.0,
                        n: int = 401, width: float | None = None) -> GridFunction:
    """``F`` on ``[a, b]`` with ``F(a) = F(b) = 0`` and inward derivatives ``g_left``, ``g_right``.

    At a point boundary the extension reduces to ``t g`` in the inward
    distance ``t``; a cutoff keeps each collar away from the other end.
    """
    L = b - a
    if not L > 0:
        raise DomainError("interval must satisfy a < b")
    width = 0.5 * L if width is None else width
    if not 0 < width <= L:
        raise DomainError("chart-coverage error: collar width must lie in (0, b - a]")
    s = np.linspace(a, b, n)
    tl, tr = s - a, b - s
    vals = g_left * tl * cutoff(tl, width) + g_right * tr * cutoff(tr, width)
    vals[0] = vals[-1] = 0.0
    return GridFunction(vals, (a,), (s[1] - s[0],), ("s",))


def robin_lift_circle(g: GridFunction, n_r: int = 101, width: float = 0.5) -> GridFunction:
    """Lift periodic boundary data ``g(theta)`` into the unit disk.

    In the collar coordinates ``t = 1 - r`` the value at ``(t, theta)`` is the
    one-dimensional extension ``F_g(theta, t)`` (periodic ``g``) times a cutoff
    in ``t``.  The result lives on the polar grid ``(r, theta)`` with
    ``r`` running from ``1 - width`` to 1.
    """
    if g.ndim != 1:
        raise DomainError("circle data must be one-dimensional")
    m = g.shape[0]
    period = g.spacing[0] * m
    if abs(period - 2 * np.pi) > 1e-9:
        raise DomainError("circle data must sample [0, 2 pi) periodically")
    if not 0 < width <= 1:
        raise DomainError("chart-coverage error: collar width must lie in (0, 1]")
    pad = int(np.ceil(0.5 * width / g.spacing[0])) + 2
    padded = np.concatenate([g.values[-pad:], g.values, g.values[:pad]])
    t = np.linspace(0.0, width, n_r)
    F = _kernels.whitney_1d(padded, g.origin[0] - pad * g.spacing[0], g.spacing[0],
                            g.coords(0), t)
    vals = (F * cutoff(t, width)[None, :]).T[::-1]       # rows ordered by increasing r
    r0 = 1.0 - width
    return GridFunction(vals, (r0, g.origin[0]), (t[1] - t[0], g.spacing[0]), ("r", "theta"))


def robin_lift(g, **kwargs) -> GridFunction:
    """Dispatch to :func:`robin_lift_interval` (a pair of endpoint values) or :func:`robin_lift_circle`."""
    if isinstance(g, GridFunction):
        return robin_lift_circle(g, **kwargs)
    g_left, g_right = g
    return robin_lift_interval(float(g_left), float(g_right), **kwargs)
