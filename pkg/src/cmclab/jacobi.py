"""Separated Jacobi problem on surfaces of revolution.

For a profile with radius ``x(s)`` and ``w = |II|^2`` the Jacobi operator is

    J = -(1/x) d/ds (x d/ds) - (1/x^2) d^2/dtheta^2 - w,

and the linearized free boundary condition on the unit sphere is the Robin
condition ``dpsi/dnu = psi`` (outward conormal ``nu``).  Separating
``psi = S(s) cos(n theta)`` gives the Sturm-Liouville problem

    -(x S')' + (n^2/x - x w) S = 0,  -S'(a) = S(a),  S'(b) = S(b).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import ndimage

from . import _kernels
from .delaunay import CriticalCatenoid, DelaunayAnnulus
from .errors import DomainError, EmbeddednessError, GridMismatchError
from .profile import ProfileCurve

KERNEL_TOL = 1e-6
DEFAULT_STEPS = 2000

Func = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SturmLiouvilleProblem:
    """Mode-``n`` Jacobi problem on ``[a, b]``.

    ``robin`` is the coefficient ``beta`` of the outward Robin condition
    ``dS/dnu = beta S`` imposed at both ends.  ``left_bc="axis"`` replaces the
    left condition by regularity at a point where ``x`` vanishes (radial
    reductions of a disk); ``axis_exponent`` is then ``lim r x'/x``.
    """

    x: Func
    w: Func
    a: float
    b: float
    mode: int = 0
    robin: float = 1.0
    dx: Func | None = None
    left_bc: str = "robin"
    axis_exponent: float = 0.0
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.b > self.a:
            raise DomainError("problem interval must satisfy a < b")
        if self.mode < 0 or int(self.mode) != self.mode:
            raise DomainError("mode must be a nonnegative integer")
        if self.left_bc not in {"robin", "axis"}:
            raise DomainError(f"unknown left boundary condition {self.left_bc!r}")

    @property
    def half_length(self) -> float:
        return 0.5 * (self.b - self.a)

    def with_mode(self, n: int) -> "SturmLiouvilleProblem":
        return replace(self, mode=n)

    def grid(self, n_points: int) -> np.ndarray:
        return np.linspace(self.a, self.b, n_points)

    def potential(self, s):
        """``q = n^2/x - x w`` so that the equation reads ``(x S')' = q S``."""
        x = self.x(s)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.mode**2 / x - x * self.w(s)

    @classmethod
    def from_profile(cls, profile: ProfileCurve, mode: int = 0, s_lo=None, s_hi=None,
                     robin: float = 1.0, label: str = "") -> "SturmLiouvilleProblem":
        lo, hi = profile.s_range
        a = lo if s_lo is None else s_lo
        b = hi if s_hi is None else s_hi

        def x(s):
            return profile.evaluate(s)[0]

        def w(s):
            xs, _, th, k = profile.evaluate(s)
            return k**2 + (np.sin(th) / xs) ** 2

        def dx(s):
            return np.cos(profile.evaluate(s)[2])

        return cls(x=x, w=w, dx=dx, a=a, b=b, mode=mode, robin=robin, label=label)


def catenoid_problem(c: float, half_length: float, mode: int = 0,
                     robin: float = 1.0) -> SturmLiouvilleProblem:
    """Closed-form coefficients of the catenoid ``x = sqrt(c^2 + s^2)``, ``w = 2c^2/(c^2+s^2)^2``."""
    def x(s):
        return np.sqrt(c * c + np.asarray(s) ** 2)

    def w(s):
        return 2.0 * c * c / (c * c + np.asarray(s) ** 2) ** 2

    def dx(s):
        s = np.asarray(s)
        return s / np.sqrt(c * c + s * s)

    return SturmLiouvilleProblem(x=x, w=w, dx=dx, a=-half_length, b=half_length,
                                 mode=mode, robin=robin, label=f"catenoid(c={c:.17g})")


def problem_for(surface, mode: int = 0) -> SturmLiouvilleProblem:
    """Jacobi problem of the critical catenoid or of a Delaunay annulus."""
    if isinstance(surface, CriticalCatenoid):
        return catenoid_problem(surface.c, surface.s_star, mode)
    if isinstance(surface, DelaunayAnnulus):
        return SturmLiouvilleProblem.from_profile(surface.profile, mode,
                                                  -surface.s_star, surface.s_star,
                                                  label=f"delaunay(e={surface.e:.17g})")
    if isinstance(surface, SturmLiouvilleProblem):
        return surface.with_mode(mode)
    raise DomainError(f"no Jacobi problem for {type(surface).__name__}")


# ---------------------------------------------------------------------------
# Residuals and boundary defects


def _uniform_step(s):
    d = np.diff(s)
    if d.size == 0 or not np.allclose(d, d[0], rtol=1e-9, atol=0.0):
        raise GridMismatchError("samples must lie on a uniform grid")
    return float(d[0])


def derivative(f, h: float, order: int = 4) -> np.ndarray:
    """Finite-difference derivative on a uniform grid.

    ``order=4`` uses the five-point centred stencil with one-sided
    fourth-order closures at the two nodes nearest each end; ``order=2`` is
    :func:`numpy.gradient` with second-order ends.
    """
    f = np.asarray(f, dtype=float)
    if order == 2:
        return np.gradient(f, h, edge_order=2)
    if order != 4:
        raise DomainError("order must be 2 or 4")
    if f.size < 5:
        raise GridMismatchError("fourth-order differences need at least 5 samples")
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    d[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * h)
    d[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * h)
    return d


def reduced_residual(problem: SturmLiouvilleProblem, S, dS, order: int = 4) -> np.ndarray:
    """``-(x S')' + (n^2/x - x w) S`` on the uniform problem grid.

    ``S`` and ``dS`` are samples on ``problem.grid(len(S))``; the outer
    derivative is taken by :func:`derivative` of the given ``order``.
    """
    S = np.asarray(S, dtype=float)
    dS = np.asarray(dS, dtype=float)
    if S.shape != dS.shape or S.ndim != 1 or S.size < 5:
        raise GridMismatchError("S and S' must be 1-D samples of equal length >= 5")
    s = problem.grid(S.size)
    h = _uniform_step(s)
    flux = problem.x(s) * dS
    return -derivative(flux, h, order) + problem.potential(s) * S


def robin_defects(problem: SturmLiouvilleProblem, S_ends, dS_ends) -> tuple[float, float]:
    """Left and right defects ``dS/dnu - beta S`` with outward conormals."""
    beta = problem.robin
    left = -dS_ends[0] - beta * S_ends[0]
    right = dS_ends[1] - beta * S_ends[1]
    return float(left), float(right)


def explicit_solutions(profile: ProfileCurve):
    """Translation field ``nu3 = dx/ds`` and support function ``q = x z' - z x'``.

    Returns a mapping ``name -> (S, dS)`` sampled on ``profile.s``; both solve
    the mode-0 equation when the profile is minimal.
    """
    x, z, th, k = profile.x, profile.z, profile.theta, profile.kappa
    c, s = np.cos(th), np.sin(th)
    return {
        "nu3": (c, -k * s),
        "q": (x * s - z * c, k * (x * c + z * s)),
    }


# ---------------------------------------------------------------------------
# Shooting


@dataclass(frozen=True)
class Shot:
    """Solution of the mode-``n`` ODE satisfying the left boundary condition."""

    s: np.ndarray
    S: np.ndarray
    dS: np.ndarray
    mismatch: float


def shoot(problem: SturmLiouvilleProblem, n_steps: int = DEFAULT_STEPS) -> Shot:
    """Shoot from the left end with ``(S, S') = (1, -beta)`` using fixed-step RK4.

    The mismatch is the right Robin defect ``S'(b) - beta S(b)``; it vanishes
    exactly when the mode carries a Robin-compatible Jacobi field.
    """
    if n_steps < 4:
        raise DomainError("n_steps must be >= 4")
    a, b = problem.a, problem.b
    h = (b - a) / n_steps
    fine = np.linspace(a, b, 2 * n_steps + 1)
    x_fine = np.asarray(problem.x(fine), dtype=float)
    q_fine = np.asarray(problem.potential(fine), dtype=float)
    if problem.left_bc == "robin":
        S0, P0 = 1.0, -problem.robin * x_fine[0]
        S, P = _kernels.rk4_sturm_liouville(h, x_fine, q_fine, S0, P0)
        s = fine[::2]
    else:
        # regular mode-0 start one step off the axis
        S, P = _kernels.rk4_sturm_liouville(h, x_fine[2:], q_fine[2:], 1.0, 0.0)
        s = fine[2::2]
    x_nodes = x_fine[::2] if problem.left_bc == "robin" else x_fine[2::2]
    dS = P / x_nodes
    return Shot(s=s, S=S, dS=dS, mismatch=float(dS[-1] - problem.robin * S[-1]))


def shoot_robin(problem: SturmLiouvilleProblem, n_steps: int = DEFAULT_STEPS) -> float:
    """Right-end Robin defect of the left-normalized solution."""
    return shoot(problem, n_steps).mismatch


@dataclass(frozen=True)
class ModeNullity:
    n: int
    kernel_dim: int
    mismatch: float
    mismatch_refined: float

    def __post_init__(self):
        allowed = {0, 1} if self.n == 0 else {0, 2}
        if self.kernel_dim not in allowed:
            raise ValueError(f"kernel_dim {self.kernel_dim} impossible for mode {self.n}")


@dataclass(frozen=True)
class NullityReport:
    surface: str
    modes: tuple

    @property
    def total(self) -> int:
        return sum(m.kernel_dim for m in self.modes)

    def to_dict(self) -> dict:
        return {
            "surface": self.surface,
            "modes": [{"n": m.n, "kernel_dim": m.kernel_dim, "mismatch": m.mismatch}
                      for m in self.modes],
            "total": self.total,
        }

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def nullity(surface, n_max: int = 5, n_steps: int = DEFAULT_STEPS,
            name: str | None = None) -> NullityReport:
    """Robin-compatible Jacobi fields per mode ``n = 0..n_max``.

    A mode counts when the shooting mismatch is below ``1e-6`` both at
    ``n_steps`` and at ``2 n_steps``; it contributes 1 (``n = 0``) or 2
    (the ``sin``/``cos`` pair) to the total.
    """
    if n_max < 2:
        raise DomainError("n_max must be >= 2")
    modes = []
    for n in range(n_max + 1):
        problem = problem_for(surface, n)
        m1 = shoot_robin(problem, n_steps)
        m2 = shoot_robin(problem, 2 * n_steps)
        hit = abs(m1) < KERNEL_TOL and abs(m2) < KERNEL_TOL
        modes.append(ModeNullity(n, (1 if n == 0 else 2) if hit else 0, m1, m2))
    if name is None:
        name = getattr(problem_for(surface, 0), "label", "") or type(surface).__name__
    return NullityReport(name, tuple(modes))


# ---------------------------------------------------------------------------
# Killing-Jacobi fields


def _as_annulus(surface) -> DelaunayAnnulus:
    if isinstance(surface, CriticalCatenoid):
        return surface.as_annulus()
    return surface


def killing_jacobi_field(surface, axis) -> Callable:
    """``f(s, theta) = <E x X, n>`` for the rotation about ``axis``.

    ``axis`` must be orthogonal to the symmetry axis ``e_z``; for
    ``axis = e_x`` this is ``-(x x' + z z')(s) sin(theta)``.
    """
    E = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(E)
    if E.shape != (3,) or norm == 0:
        raise DomainError("axis must be a nonzero 3-vector")
    E = E / norm
    if abs(E[2]) > 1e-12:
        raise DomainError("axis must be orthogonal to the rotation axis e_z")
    profile = _as_annulus(surface).profile

    def f(s, theta):
        s, theta = np.broadcast_arrays(np.asarray(s, float), np.asarray(theta, float))
        x, z, th, _ = profile.evaluate(s)
        ct, st = np.cos(theta), np.sin(theta)
        X = np.stack([x * ct, x * st, z], axis=-1)
        n = np.stack([np.sin(th) * ct, np.sin(th) * st, -np.cos(th)], axis=-1)
        return np.einsum("...i,...i->...", np.cross(E, X), n)

    return f


def jacobi_operator_grid(profile: ProfileCurve, values: np.ndarray,
                         n_theta: int) -> np.ndarray:
    """Apply ``J`` to samples on ``profile.s x theta_j`` (``theta_j = 2 pi j / n_theta``).

    Conservative second-order differences in ``s`` (with ``x`` at cell
    midpoints) and a spectral ``theta`` derivative; rows at the two ends of
    the profile are returned as NaN.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (profile.s.size, n_theta):
        raise GridMismatchError("values must have shape (len(profile.s), n_theta)")
    h = _uniform_step(profile.s)
    x = profile.x
    xm, _, _, _ = profile.evaluate(0.5 * (profile.s[1:] + profile.s[:-1]))
    flux = xm[:, None] * np.diff(values, axis=0) / h
    div = np.diff(flux, axis=0) / h
    k = np.fft.rfftfreq(n_theta, d=1.0 / n_theta)
    lap_th = np.fft.irfft(-(k**2) * np.fft.rfft(values, axis=1), n=n_theta, axis=1)
    w = profile.second_fundamental_norm_sq
    xi = x[1:-1, None]
    out = np.full_like(values, np.nan)
    out[1:-1] = -div / xi - lap_th[1:-1] / xi**2 - w[1:-1, None] * values[1:-1]
    return out


def count_nodal_domains(values: np.ndarray, rel_tol: float = 1e-9) -> int:
    """Connected components of ``{f > 0}`` and ``{f < 0}`` on an (s, theta) grid.

    The theta axis (axis 1) is periodic; samples with ``|f| <= rel_tol max|f|``
    count as nodal set.
    """
    values = np.asarray(values, dtype=float)
    cut = rel_tol * np.max(np.abs(values))
    total = 0
    for mask in (values > cut, values < -cut):
        labels, count = ndimage.label(mask)
        # glue components across the theta seam
        parent = list(range(count + 1))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for a, b in zip(labels[:, 0], labels[:, -1]):
            if a and b:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[ra] = rb
        total += len({find(i) for i in range(1, count + 1)})
    return total


# ---------------------------------------------------------------------------
# Linearization of the mean curvature


def _perturbed_mean_curvature(x, z, th, k, dk, S, dS, d2S, n, eps):
    cx, sz = np.cos(th), np.sin(th)
    xdd, zdd = -k * sz, k * cx
    xddd = -dk * sz - k * k * cx
    zddd = dk * cx - k * k * sz
    rho = x + eps * S * sz
    rho_s = cx + eps * (dS * sz + S * zdd)
    Z_s = sz - eps * (dS * cx + S * xdd)
    rho_ss = xdd + eps * (d2S * sz + 2 * dS * zdd + S * zddd)
    Z_ss = zdd - eps * (d2S * cx + 2 * dS * xdd + S * xddd)
    rho_tt = -n * n * eps * S * sz
    Z_tt = n * n * eps * S * cx
    E = rho_s**2 + Z_s**2
    root = np.sqrt(E)
    L = (-rho_ss * Z_s + Z_ss * rho_s) / root
    N = (-(rho_tt - rho) * Z_s + Z_tt * rho_s) / root
    return L / E + N / rho**2


def jacobi_apply(profile: ProfileCurve, S, n: int) -> np.ndarray:
    """Reduced operator ``-(1/x)(x S')' + (n^2/x^2 - w) S`` on the profile grid."""
    h = _uniform_step(profile.s)
    S = np.asarray(S, dtype=float)
    dS = np.gradient(S, h, edge_order=2)
    d2S = np.gradient(dS, h, edge_order=2)
    x = profile.x
    return (-d2S - np.cos(profile.theta) / x * dS
            + (n * n / x**2 - profile.second_fundamental_norm_sq) * S)


def linearization_check(profile: ProfileCurve, S, n: int, eps: float):
    """Finite-difference ``dH/deps`` against ``J S`` along ``theta = 0``.

    The surface is moved by ``eps S(s) cos(n theta)`` along the Gauss map
    ``(z' cos, z' sin, -x')`` and its mean curvature is evaluated in closed
    form from the first and second fundamental forms.  Returns
    ``(dH, JS)`` sampled on ``profile.s``.
    """
    S = np.asarray(S, dtype=float)
    if S.shape != profile.s.shape:
        raise GridMismatchError("S must be sampled on the profile grid")
    if np.min(profile.x - abs(eps) * np.abs(S * np.sin(profile.theta))) <= 0:
        raise EmbeddednessError(f"eps={eps} pushes the perturbed surface onto the axis")
    h = _uniform_step(profile.s)
    dS = np.gradient(S, h, edge_order=2)
    d2S = np.gradient(dS, h, edge_order=2)
    dk = np.gradient(profile.kappa, h, edge_order=2)
    args = (profile.x, profile.z, profile.theta, profile.kappa, dk, S, dS, d2S, n)
    H0 = _perturbed_mean_curvature(*args, 0.0)
    H1 = _perturbed_mean_curvature(*args, eps)
    return (H1 - H0) / eps, jacobi_apply(profile, S, n)


def mode_one_kernel(surface, n_steps: int = DEFAULT_STEPS) -> Shot:
    """Shot solution of the ``n = 1`` problem (the rotation Killing mode)."""
    return shoot(problem_for(surface, 1), n_steps)


def killing_profile_function(profile: ProfileCurve) -> np.ndarray:
    """``x x' + z z'``: the ``s``-factor of the rotation Killing-Jacobi field."""
    return profile.x * np.cos(profile.theta) + profile.z * np.sin(profile.theta)


__all__ = [
    "SturmLiouvilleProblem", "catenoid_problem", "problem_for", "derivative", "reduced_residual",
    "robin_defects", "explicit_solutions", "Shot", "shoot", "shoot_robin", "ModeNullity",
    "NullityReport", "nullity", "killing_jacobi_field", "jacobi_operator_grid",
    "count_nodal_domains", "jacobi_apply", "linearization_check", "mode_one_kernel",
    "killing_profile_function",
]
