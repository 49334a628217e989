"""The flat disk in the unit ball: Robin kernel, nullity and the foliation function.

Laplacians here use the analyst sign ``sum d^2/dx_i^2``.  With that sign the
Robin problem ``lap psi = 0``, ``d psi/d nu = psi`` has the coordinate
functions as kernel, and ``psi = (|x|^2 + 1) / (2n)`` solves
``lap psi = 1`` with the same boundary condition.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import DomainError, GridMismatchError
from .foliation import solve_jpsi
from .jacobi import SturmLiouvilleProblem


@dataclass(frozen=True)
class DiskGrid:
    """Tensor polar grid of the unit disk, ``r_i = (i+1) h`` and ``theta_j = 2 pi j / m``.

    ``n`` is the disk dimension.  Only ``n = 2`` has sampled nodes; other
    dimensions are handled through radial reductions.
    """

    spacing: float
    n_theta: int
    n: int = 2

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("disk dimension must be >= 2")
        if not 0 < self.spacing <= 0.5:
            raise DomainError("spacing must lie in (0, 1/2]")
        k = 1.0 / self.spacing
        if abs(k - round(k)) > 1e-9:
            raise DomainError("1/spacing must be an integer")
        if self.n_theta < 4:
            raise DomainError("n_theta must be >= 4")

    @property
    def n_r(self) -> int:
        return int(round(1.0 / self.spacing))

    @property
    def r(self) -> np.ndarray:
        return np.arange(1, self.n_r + 1) * (1.0 / self.n_r)

    @property
    def theta(self) -> np.ndarray:
        return np.arange(self.n_theta) * (2.0 * np.pi / self.n_theta)

    @property
    def shape(self):
        return (self.n_r, self.n_theta)

    def mesh(self):
        R, T = np.meshgrid(self.r, self.theta, indexing="ij")
        return R, T

    def cartesian(self):
        R, T = self.mesh()
        return R * np.cos(T), R * np.sin(T)

    @property
    def boundary(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[-1] = True
        return mask

    def sample(self, func) -> np.ndarray:
        """Evaluate ``func(x, y)`` on the nodes."""
        self._require_planar()
        X, Y = self.cartesian()
        return np.asarray(func(X, Y), dtype=float) * np.ones(self.shape)

    def _require_planar(self):
        if self.n != 2:
            raise DomainError("sampled disk grids exist for n = 2 only")


def disk_grid(spacing: float = 0.02, n_theta: int | None = None, n: int = 2) -> DiskGrid:
    if not 0 < spacing <= 0.5:
        raise DomainError("spacing must lie in (0, 1/2]")
    if n_theta is None:
        n_theta = 4 * max(2, int(round(2 * np.pi / spacing / 4)))
    return DiskGrid(spacing=spacing, n_theta=n_theta, n=n)


def disk_kernel_basis(grid: DiskGrid) -> list:
    """The coordinate functions ``x`` and ``y`` on the grid."""
    grid._require_planar()
    X, Y = grid.cartesian()
    return [X, Y]


def laplacian(grid: DiskGrid, psi) -> np.ndarray:
    """Polar Laplacian on rows ``1 .. n_r - 2`` (rows with both radial neighbours).

    Central differences in ``r``; the periodic ``theta`` derivative is spectral.
    """
    psi = np.asarray(psi, dtype=float)
    if psi.shape != grid.shape:
        raise GridMismatchError(f"expected shape {grid.shape}, got {psi.shape}")
    h = 1.0 / grid.n_r
    r = grid.r[1:-1, None]
    mid = psi[1:-1]
    d2r = (psi[2:] - 2 * mid + psi[:-2]) / h**2
    d1r = (psi[2:] - psi[:-2]) / (2 * h)
    k = np.fft.rfftfreq(grid.n_theta, d=1.0 / grid.n_theta)
    d2t = np.fft.irfft(-(k**2) * np.fft.rfft(mid, axis=1), n=grid.n_theta, axis=1)
    return d2r + d1r / r + d2t / r**2


def robin_defect(grid: DiskGrid, psi):
    """``(lap psi, d psi/dr - psi on r = 1)``.

    The radial derivative at the boundary is the one-sided second-order
    difference ``(3 u_N - 4 u_{N-1} + u_{N-2}) / (2h)``.
    """
    lap = laplacian(grid, psi)
    psi = np.asarray(psi, dtype=float)
    h = 1.0 / grid.n_r
    dr = (3 * psi[-1] - 4 * psi[-2] + psi[-3]) / (2 * h)
    return lap, dr - psi[-1]


def foliation_function(r, n: int = 2):
    """``(r^2 + 1) / (2n)``."""
    r = np.asarray(r, dtype=float)
    return (r * r + 1.0) / (2.0 * n)


def disk_foliation_solution(grid: DiskGrid) -> np.ndarray:
    R, _ = grid.mesh()
    return foliation_function(R, grid.n)


# ---------------------------------------------------------------------------
# Radial reductions in dimension n


def radial_problem(n: int) -> SturmLiouvilleProblem:
    """``-(r^{n-1} u')' / r^{n-1}`` on ``[0, 1]`` with a regular axis and ``u' = u`` at ``r = 1``."""
    if n < 2:
        raise DomainError("disk dimension must be >= 2")

    def x(r):
        return np.asarray(r, dtype=float) ** (n - 1)

    def dx(r):
        r = np.asarray(r, dtype=float)
        return (n - 1) * r ** (n - 2)

    def w(r):
        return np.zeros_like(np.asarray(r, dtype=float))

    return SturmLiouvilleProblem(x=x, w=w, dx=dx, a=0.0, b=1.0, left_bc="axis",
                                 axis_exponent=n - 1, label=f"disk(n={n})")


def solve_radial_foliation(n: int = 2, n_intervals: int = 400):
    """Finite-difference solution of ``u'' + (n-1)/r u' = 1``, ``u'(1) = u(1)``.

    Returns ``(r, u)``; the exact answer is :func:`foliation_function`.
    """
    return solve_jpsi(radial_problem(n), rhs=-1.0, n_intervals=n_intervals)


def harmonic_multiplicity(n: int, k: int) -> int:
    """Dimension of degree-``k`` spherical harmonics on ``S^{n-1}``."""
    if k < 0:
        return 0
    top = math.comb(k + n - 1, n - 1)
    low = math.comb(k + n - 3, n - 1) if k >= 2 else 0
    return top - low


def radial_shooting_defect(n: int = 2, k: int = 0, n_steps: int = 2000) -> float:
    """Robin defect ``u'(1) - u(1)`` of the regular degree-``k`` solution.

    The regular solution of ``(r^{n-1} u')' = k(k+n-2) r^{n-3} u`` is started
    one step off the axis from its leading term ``r^k`` and normalized by
    ``max |u|``.  The exact value is ``k - 1``.
    """
    if n < 2 or k < 0:
        raise DomainError("need n >= 2 and k >= 0")
    h = 1.0 / n_steps
    fine = np.linspace(h, 1.0, 2 * (n_steps - 1) + 1)
    x = fine ** (n - 1)
    q = k * (k + n - 2) * fine ** (n - 3)
    S0 = h**k
    P0 = (h ** (n - 1)) * k * h ** (k - 1) if k > 0 else 0.0
    S, P = _kernels.rk4_sturm_liouville(h, x, q, S0, P0)
    dS_end = P[-1] / x[-1]
    scale = np.max(np.abs(S))
    return float((dS_end - S[-1]) / scale)


def disk_nullity(n: int = 2, k_max: int = 6, tol: float = 1e-6) -> dict:
    """Robin-compatible harmonic modes of ``D^n`` up to degree ``k_max``."""
    modes = []
    for k in range(k_max + 1):
        d = radial_shooting_defect(n, k)
        dim = harmonic_multiplicity(n, k) if abs(d) < tol else 0
        modes.append({"k": k, "kernel_dim": dim, "defect": d})
    return {"n": n, "modes": modes, "total": sum(m["kernel_dim"] for m in modes)}


# ---------------------------------------------------------------------------
# Serialization


def write_polar_csv(grid: DiskGrid, values, path) -> None:
    values = np.asarray(values, dtype=float)
    if values.shape != grid.shape:
        raise GridMismatchError(f"expected shape {grid.shape}, got {values.shape}")
    R, T = grid.mesh()
    with Path(path).open("w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["r", "theta", "value"])
        for r, t, v in zip(R.ravel(), T.ravel(), values.ravel()):
            out.writerow([f"{r:.17g}", f"{t:.17g}", f"{v:.17g}"])


def write_radial_csv(r, values, path) -> None:
    r = np.asarray(r, dtype=float)
    values = np.asarray(values, dtype=float)
    if r.shape != values.shape:
        raise GridMismatchError("r and values must have the same shape")
    with Path(path).open("w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["r", "value"])
        for a, b in zip(r, values):
            out.writerow([f"{a:.17g}", f"{b:.17g}"])
