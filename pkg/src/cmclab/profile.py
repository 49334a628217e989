"""Planar generatrices of surfaces of revolution.

A profile is a unit-speed curve ``s -> (x(s), z(s))`` in the half plane
``x > 0``; the surface is obtained by rotating it about the ``z`` axis.  Along
the curve ``(dx/ds, dz/ds) = (cos theta, sin theta)`` and ``kappa = dtheta/ds``.
The two principal curvatures of the revolved surface are ``kappa`` (meridian)
and ``sin(theta) / x`` (parallel); their sum is the mean curvature ``H``.  With
this choice the c = 1 catenoid has meridian curvature ``-1/(1 + s**2)`` and
parallel curvature ``+1/(1 + s**2)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import bisect, brentq

from .errors import (AxisCollisionError, BranchError, DomainError,
                     IntegrationError, NoRootError, RangeError)

ODE_RTOL = 1e-11
ODE_ATOL = 1e-12
ROOT_XTOL = 1e-12

Evaluator = Callable[[np.ndarray], tuple]


# ---------------------------------------------------------------------------
# Conics


@dataclass(frozen=True)
class Conic:
    """Conic with one focus at the origin, ``r = e p / (1 + e cos(theta))``."""

    e: float
    p: float

    def __post_init__(self):
        for name in ("e", "p"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"conic parameter {name} must be finite and > 0, got {value!r}")

    @property
    def vertex_distance(self) -> float:
        """Distance from the focus to the nearest vertex, ``e p / (1 + e)``."""
        return self.e * self.p / (1.0 + self.e)

    @property
    def theta_limit(self) -> float:
        """Supremum of the polar angle on the branch through ``theta = 0``."""
        if self.e < 1.0:
            return math.inf
        return math.acos(-1.0 / self.e)

    def polar(self, theta):
        """Return ``r, dr/dtheta, d2r/dtheta2`` at ``theta``."""
        e, p = self.e, self.p
        c, s = np.cos(theta), np.sin(theta)
        d = 1.0 + e * c
        r = e * p / d
        rp = e * e * p * s / d**2
        rpp = e * e * p * (c * d + 2.0 * e * s * s) / d**3
        return r, rp, rpp


def conic_polar(conic: Conic, theta: float) -> float:
    """Polar radius of ``conic`` at angle ``theta``.

    Raises
    ------
    BranchError
        If ``1 + e cos(theta) <= 0``: the ray misses the branch.
    """
    d = 1.0 + conic.e * math.cos(theta)
    if d <= 1e-15:
        raise BranchError(
            f"angle {theta!r} does not meet the conic branch (1 + e cos(theta) = {d:.3g})")
    return conic.e * conic.p / d


def _conic_speed(conic, theta):
    r, rp, _ = conic.polar(theta)
    return np.hypot(r, rp)


def _conic_curvature(conic, theta):
    r, rp, rpp = conic.polar(theta)
    return (r * r + 2.0 * rp * rp - r * rpp) / np.hypot(r, rp) ** 3


def _polar_arclength(conic, theta):
    val, _ = quad(lambda t: _conic_speed(conic, t), 0.0, abs(theta),
                  epsabs=1e-14, epsrel=1e-13, limit=200)
    return math.copysign(val, theta)


def _polar_angle_at(conic, s):
    """Invert the conic arclength (measured from the vertex) for the angle."""
    target = abs(s)
    if target == 0.0:
        return 0.0
    lim = conic.theta_limit
    if math.isinf(lim):
        hi = 2.0 * math.pi
        if _polar_arclength(conic, hi) < target:
            raise RangeError(f"arclength {s!r} exceeds one perimeter of the ellipse")
    else:
        hi = None
        for k in range(1, 13):
            cand = lim * (1.0 - 10.0 ** (-k))
            if _polar_arclength(conic, cand) >= target:
                hi = cand
                break
        if hi is None:
            raise RangeError(f"arclength {s!r} is beyond the integrable branch length")
    theta = brentq(lambda t: _polar_arclength(conic, t) - target, 0.0, hi,
                   xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return math.copysign(theta, s)


def conic_arclength(conic: Conic, s: float) -> tuple[float, float]:
    """Point at conic arclength ``s`` from the vertex ``theta = 0``.

    The arclength function is integrated by adaptive quadrature of the polar
    speed and inverted with a bracketed root finder.  Positive ``s`` runs
    counterclockwise around the focus.
    """
    theta = _polar_angle_at(conic, s)
    r = conic_polar(conic, theta)
    return r * math.cos(theta), r * math.sin(theta)


def roulette(conic: Conic, s: float) -> tuple[float, float]:
    """Position of the rolling focus after the conic rolled a length ``s``.

    The conic rolls on the line ``l(s) = e p/(1 + e) + i s`` and the focus
    starts at the origin.  The traced point is
    ``gamma = l - (l'/beta') * beta``.  The result is returned in profile
    coordinates: ``x`` is the distance from the rolling line (the rotation
    axis of the Delaunay surface) and ``z`` the height along it.
    """
    theta = _polar_angle_at(conic, s)
    r, rp, _ = conic.polar(theta)
    beta = r * complex(math.cos(theta), math.sin(theta))
    dbeta = complex(rp, r) * complex(math.cos(theta), math.sin(theta))
    dbeta /= abs(dbeta)
    line = complex(conic.vertex_distance, s)
    gamma = line - (1j / dbeta) * beta
    return conic.vertex_distance - gamma.real, gamma.imag


# ---------------------------------------------------------------------------
# Profile curves


@dataclass(frozen=True, eq=False)
class ProfileCurve:
    """Unit-speed sampled generatrix.

    ``evaluator`` (optional) maps arclength arrays to ``(x, z, theta, kappa)``
    exactly, or at least to integrator accuracy; without it, queries between
    samples use cubic splines through the samples.
    """

    s: np.ndarray
    x: np.ndarray
    z: np.ndarray
    theta: np.ndarray
    kappa: np.ndarray
    evaluator: Evaluator | None = field(default=None, repr=False)

    def __post_init__(self):
        arrays = [np.asarray(getattr(self, k), dtype=float)
                  for k in ("s", "x", "z", "theta", "kappa")]
        n = arrays[0].shape
        if any(a.shape != n or a.ndim != 1 for a in arrays):
            raise DomainError("profile sample arrays must be 1-D and of equal length")
        if n[0] < 3:
            raise DomainError("a profile needs at least 3 samples")
        if np.any(np.diff(arrays[0]) <= 0):
            raise DomainError("profile arclength must be strictly increasing")
        for k, a in zip(("s", "x", "z", "theta", "kappa"), arrays):
            a.setflags(write=False)
            object.__setattr__(self, k, a)

    @property
    def half_length(self) -> float:
        return 0.5 * (self.s[-1] - self.s[0])

    @property
    def s_range(self) -> tuple[float, float]:
        return float(self.s[0]), float(self.s[-1])

    @property
    def parallel_curvature(self) -> np.ndarray:
        return np.sin(self.theta) / self.x

    @property
    def mean_curvature(self) -> np.ndarray:
        """Pointwise ``kappa + sin(theta)/x``."""
        return self.kappa + self.parallel_curvature

    @property
    def second_fundamental_norm_sq(self) -> np.ndarray:
        return self.kappa**2 + self.parallel_curvature**2

    def _splines(self):
        cache = self.__dict__.get("_spline_cache")
        if cache is None:
            cache = tuple(CubicSpline(self.s, v) for v in (self.x, self.z, self.theta, self.kappa))
            object.__setattr__(self, "_spline_cache", cache)
        return cache

    def evaluate(self, s):
        """``(x, z, theta, kappa)`` at arclength(s) ``s``."""
        s_arr = np.asarray(s, dtype=float)
        lo, hi = self.s_range
        tol = 1e-12 * max(1.0, hi - lo)
        if np.any(s_arr < lo - tol) or np.any(s_arr > hi + tol):
            raise RangeError(f"arclength outside profile domain [{lo}, {hi}]")
        flat = np.clip(s_arr, lo, hi).ravel()
        if self.evaluator is not None:
            out = self.evaluator(flat)
        else:
            out = [sp(flat) for sp in self._splines()]
        return tuple(np.asarray(v).reshape(s_arr.shape) for v in out)

    def resample(self, s_lo: float, s_hi: float, n_samples: int) -> "ProfileCurve":
        s = np.linspace(s_lo, s_hi, n_samples)
        x, z, th, k = self.evaluate(s)
        return ProfileCurve(s, x, z, th, k, evaluator=self.evaluator)

    def scaled(self, alpha: float) -> "ProfileCurve":
        """Image under the homothety ``X -> alpha X``."""
        if alpha <= 0:
            raise DomainError("homothety factor must be positive")
        ev = None
        if self.evaluator is not None:
            base = self.evaluator

            def ev(s):
                x, z, th, k = base(np.asarray(s) / alpha)
                return alpha * x, alpha * z, th, k / alpha

        return ProfileCurve(alpha * self.s, alpha * self.x, alpha * self.z,
                            self.theta, self.kappa / alpha, evaluator=ev)

    def unit_speed_defect(self) -> float:
        """Max of ``| |d(x, z)| / ds - 1 |`` over consecutive samples."""
        chord = np.hypot(np.diff(self.x), np.diff(self.z))
        return float(np.max(np.abs(chord / np.diff(self.s) - 1.0)))

    def to_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["s", "x", "z", "theta", "kappa"])
            for row in zip(self.s, self.x, self.z, self.theta, self.kappa):
                writer.writerow([f"{v:.17g}" for v in row])

    @classmethod
    def from_csv(cls, path) -> "ProfileCurve":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(*data.T)


# ---------------------------------------------------------------------------
# Catenary / catenoid


def catenary(c: float, z: float) -> float:
    """Radius ``c cosh(z/c)`` of the catenary generating a catenoid."""
    if not c > 0:
        raise DomainError(f"catenary parameter c must be > 0, got {c!r}")
    return c * math.cosh(z / c)


def _catenoid_evaluator(c):
    def ev(s):
        s = np.asarray(s, dtype=float)
        root = np.sqrt(c * c + s * s)
        return root, c * np.arcsinh(s / c), np.arctan2(c, s), -c / (c * c + s * s)
    return ev


def catenoid_profile(c: float, s_max: float, n_samples: int) -> ProfileCurve:
    """Unit-speed catenary ``x = sqrt(c^2 + s^2)``, ``z = c asinh(s/c)`` on ``[-s_max, s_max]``."""
    if not c > 0:
        raise DomainError(f"catenary parameter c must be > 0, got {c!r}")
    if n_samples < 3:
        raise DomainError("n_samples must be >= 3")
    if not s_max > 0:
        raise DomainError("s_max must be > 0")
    ev = _catenoid_evaluator(c)
    s = np.linspace(-s_max, s_max, n_samples)
    return ProfileCurve(s, *ev(s), evaluator=ev)


# ---------------------------------------------------------------------------
# Roulettes of conics (Delaunay generatrices)


def _roulette_state(conic, theta, s_conic):
    """Profile quantities at polar angle ``theta`` and conic arclength ``s_conic``.

    With ``beta`` the unit-speed conic and ``beta'`` its tangent, the
    profile is ``x = beta x beta'``, ``z = s - beta . beta'``; its tangent is
    ``(r', r)/|(r', r)|`` and its parallel curvature is ``1/r``.
    """
    r, rp, rpp = conic.polar(theta)
    speed = np.hypot(r, rp)
    kb = (r * r + 2.0 * rp * rp - r * rpp) / speed**3
    x = r * r / speed
    z = s_conic - r * rp / speed
    psi = np.arctan2(r, rp)
    kappa = 1.0 / r - x / (kb * r**3)
    return x, z, psi, kappa


def _roulette_rhs(conic):
    def rhs(_sigma, y):
        r, rp, rpp = conic.polar(y[0])
        speed2 = r * r + rp * rp
        dsigma_dtheta = r * (r * r + 2.0 * rp * rp - r * rpp) / speed2
        return [1.0 / dsigma_dtheta, math.sqrt(speed2) / dsigma_dtheta]
    return rhs


def _default_theta_stop(conic):
    if conic.e < 1.0:
        return math.pi
    return 0.98 * conic.theta_limit


def roulette_profile(conic: Conic, n_samples: int = 2001,
                     s_max: float | None = None) -> ProfileCurve:
    """Unit-speed Delaunay generatrix from the roulette of ``conic``.

    The curve is symmetric about ``z = 0`` with its neck (radius
    ``e p / (1 + e)``) at ``s = 0``.  Profile arclength ``sigma`` is tied to
    the polar angle by ``dsigma/dtheta = kappa_conic * r * |dbeta/dtheta|``,
    which is integrated with an embedded 8(5,3) Runge-Kutta pair.

    By default ``s_max`` stops at the bulge (ellipses, ``theta = pi``), at
    six neck radii (parabola) or close to the asymptote direction
    (hyperbolas), whichever comes first.
    """
    if n_samples < 3:
        raise DomainError("n_samples must be >= 3")
    theta_stop = _default_theta_stop(conic)
    explicit = s_max is not None
    span = s_max if explicit else 6.0 * conic.vertex_distance
    if conic.e < 1.0 and not explicit:
        span = 1e3 * conic.p / max(1.0 - conic.e, 1e-9)

    def hit_stop(_sigma, y):
        return y[0] - theta_stop
    hit_stop.terminal = True

    sol = solve_ivp(_roulette_rhs(conic), (0.0, span), [0.0, 0.0], method="DOP853",
                    rtol=1e-12, atol=1e-13, dense_output=True, events=hit_stop)
    if sol.status == -1:
        raise IntegrationError(f"roulette integration failed: {sol.message}")
    reached = sol.t[-1]
    if sol.status == 1:
        if explicit and reached < s_max * (1 - 1e-12):
            raise RangeError(
                f"s_max={s_max} exceeds the usable roulette length {reached:.6g}")
        span = reached if not explicit else s_max
    dense = sol.sol
    hi = min(span, reached)

    def ev(s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        th, sc = dense(np.minimum(a, hi))
        x, z, psi, kappa = _roulette_state(conic, th, sc)
        neg = s < 0
        z = np.where(neg, -z, z)
        psi = np.where(neg, np.pi - psi, psi)
        return x, z, psi, kappa

    s = np.linspace(-hi, hi, n_samples)
    return ProfileCurve(s, *ev(s), evaluator=ev)


# ---------------------------------------------------------------------------
# CMC profile ODE


def cmc_profile_ode(h: float, x0: float, theta0: float,
                    s_span: tuple[float, float], n_samples: int) -> ProfileCurve:
    """Integrate ``x' = cos t, z' = sin t, t' = h - sin(t)/x`` from ``s = 0``.

    Initial data ``(x0, 0, theta0)`` sits at ``s = 0``; ``s_span = (a, b)``
    with ``a <= 0 <= b`` is covered by integrating in both directions.

    Raises
    ------
    AxisCollisionError
        If the curve reaches ``x = 0`` inside ``s_span``.
    IntegrationError
        If the integrator fails for another reason.
    """
    if not x0 > 0:
        raise DomainError(f"x0 must be > 0, got {x0!r}")
    a, b = map(float, s_span)
    if not a <= 0.0 <= b or a == b:
        raise DomainError("s_span must satisfy a <= 0 <= b with a < b")
    if n_samples < 3:
        raise DomainError("n_samples must be >= 3")

    def rhs(_s, y):
        x, _z, t = y
        return [math.cos(t), math.sin(t), h - math.sin(t) / x]

    def near_axis(_s, y):
        return y[0] - 1e-9 * x0
    near_axis.terminal = True

    pieces = []
    for end in (b, a):
        if end == 0.0:
            pieces.append(None)
            continue
        sol = solve_ivp(rhs, (0.0, end), [x0, 0.0, theta0], method="DOP853",
                        rtol=ODE_RTOL, atol=ODE_ATOL, dense_output=True, events=near_axis)
        if sol.status == 1:
            raise AxisCollisionError(f"profile reaches the axis at s = {sol.t[-1]:.6g}")
        if sol.status != 0:
            raise IntegrationError(f"profile integration failed: {sol.message}")
        pieces.append(sol.sol)
    fwd, bwd = pieces

    def ev(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.empty((3, s.size))
        pos = s >= 0
        if np.any(pos):
            out[:, pos] = fwd(s[pos]) if fwd is not None else np.array([[x0], [0.0], [theta0]])
        if np.any(~pos):
            out[:, ~pos] = bwd(s[~pos])
        x, z, t = out
        return x, z, t, h - np.sin(t) / x

    s = np.linspace(a, b, n_samples)
    return ProfileCurve(s, *ev(s), evaluator=ev)


# ---------------------------------------------------------------------------
# Support function and free-boundary contact


def support_function(curve: ProfileCurve, s):
    """``q = x sin(theta) - z cos(theta)``, the normal component of the position."""
    x, z, th, _ = curve.evaluate(s)
    q = x * np.sin(th) - z * np.cos(th)
    return float(q) if np.ndim(q) == 0 else q


def free_boundary_arclength(curve: ProfileCurve) -> float:
    """Smallest positive root of the support function.

    At that arclength the tangent line passes through the origin, so the
    sphere of radius ``|gamma(s*)|`` about the origin meets the revolved
    surface orthogonally.  A scan with step ``L/1000`` brackets the root,
    bisection refines it to ``1e-12``.
    """
    lo, hi = curve.s_range
    start = max(lo, 0.0)
    if hi <= start:
        raise NoRootError("profile has no positive arclength range")
    step = (hi - lo) / 1000.0
    grid = np.arange(start, hi, step)
    grid = np.append(grid, hi)
    q = np.asarray(support_function(curve, grid))
    if q[0] == 0.0 and start > 0:
        return float(start)
    sign_change = np.nonzero(np.sign(q[1:]) != np.sign(q[:-1]))[0]
    if sign_change.size == 0:
        raise NoRootError("support function keeps one sign on the profile")
    i = int(sign_change[0])
    if q[i + 1] == 0.0:
        return float(grid[i + 1])
    return float(bisect(lambda t: support_function(curve, t), grid[i], grid[i + 1],
                        xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps, maxiter=200))
