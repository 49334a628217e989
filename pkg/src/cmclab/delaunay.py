"""Delaunay surfaces, their free-boundary radius and the annuli they cut from the ball."""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import bisect

from .errors import CMCLabError, DomainError, NoRootError
from .profile import (Conic, ProfileCurve, catenoid_profile, free_boundary_arclength,
                      roulette_profile)

DEFAULT_PROFILE_SAMPLES = 2001


class DelaunayType(enum.Enum):
    UNDULOID = "unduloid"
    CATENOID = "catenoid"
    NODOID = "nodoid"


def classify(e: float) -> DelaunayType:
    if not e > 0:
        raise DomainError(f"eccentricity must be > 0, got {e!r}")
    if e < 1.0:
        return DelaunayType.UNDULOID
    if e == 1.0:
        return DelaunayType.CATENOID
    return DelaunayType.NODOID


def delaunay_mean_curvature(conic: Conic) -> float:
    """Mean curvature ``|e^2 - 1| / (e p)`` (sum of principal curvatures)."""
    return abs(conic.e**2 - 1.0) / (conic.e * conic.p)


def mean_curvature_sign(e: float) -> int:
    """Sign of the pointwise mean curvature of the roulette profile.

    The profile normal points towards the axis at the neck; unduloids then
    have positive and nodoids negative mean curvature.
    """
    kind = classify(e)
    return {DelaunayType.UNDULOID: 1, DelaunayType.CATENOID: 0, DelaunayType.NODOID: -1}[kind]


def delaunay_profile(conic: Conic, n_samples: int = DEFAULT_PROFILE_SAMPLES,
                     s_max: float | None = None) -> ProfileCurve:
    """Generatrix of ``D(e, p)`` centred on its neck.

    The catenoid uses the closed form with ``c = p/2`` (the focal distance of
    the rolling parabola) instead of the roulette limit.
    """
    if conic.e == 1.0:
        c = 0.5 * conic.p
        return catenoid_profile(c, 6.0 * c if s_max is None else s_max, n_samples)
    return roulette_profile(conic, n_samples=n_samples, s_max=s_max)


@dataclass(frozen=True)
class FreeBoundaryContact:
    s_star: float
    rho: float
    profile: ProfileCurve


def free_boundary_contact(conic: Conic) -> FreeBoundaryContact:
    profile = delaunay_profile(conic)
    s_star = free_boundary_arclength(profile)
    x, z, _, _ = profile.evaluate(s_star)
    return FreeBoundaryContact(s_star, float(math.hypot(x, z)), profile)


def free_boundary_radius(conic: Conic) -> float:
    """Radius ``rho(e, p)`` of the ball centred at the origin met orthogonally by ``D(e, p)``."""
    return free_boundary_contact(conic).rho


@dataclass(frozen=True, eq=False)
class DelaunayAnnulus:
    """Free boundary CMC annulus cut from a Delaunay surface by the unit ball.

    ``h`` is the unsigned mean curvature ``|e^2 - 1|/(e p)``;
    ``orientation`` is the sign of the pointwise ``kappa + sin(theta)/x``
    on ``profile`` (0 for the catenoid).
    """

    conic: Conic
    rho: float
    h: float
    profile: ProfileCurve
    s_star: float
    orientation: int

    @property
    def e(self) -> float:
        return self.conic.e

    @property
    def signed_h(self) -> float:
        return self.orientation * self.h

    def invariant_defects(self) -> dict:
        """Boundary radius, support function and CMC defects (all should vanish)."""
        ends = np.array([-self.s_star, self.s_star])
        x, z, th, _ = self.profile.evaluate(ends)
        return {
            "boundary_radius": float(np.max(np.abs(np.hypot(x, z) - self.rho))),
            "support_function": float(np.max(np.abs(x * np.sin(th) - z * np.cos(th)))),
            "mean_curvature": float(np.max(np.abs(self.profile.mean_curvature - self.signed_h))),
        }

    def sidecar(self) -> dict:
        return {"e": self.conic.e, "p": self.conic.p, "h": self.h,
                "rho": self.rho, "s_star": self.s_star}

    def write(self, csv_path, json_path=None) -> None:
        """Profile CSV plus a JSON sidecar ``{e, p, h, rho, s_star}``."""
        csv_path = Path(csv_path)
        self.profile.to_csv(csv_path)
        json_path = Path(json_path) if json_path else csv_path.with_suffix(".json")
        json_path.write_text(json.dumps(self.sidecar(), indent=2) + "\n")


def annulus(e: float, n_samples: int = DEFAULT_PROFILE_SAMPLES) -> DelaunayAnnulus:
    """The annulus ``A_e``: ``D(e, p)`` scaled so its free-boundary radius is 1.

    Built at ``p = 1`` and rescaled by ``1/rho(e, 1)``, using that ``rho`` is
    linear in ``p``; the conic of the result therefore has
    ``p = 1/rho(e, 1)``.
    """
    classify(e)
    contact = free_boundary_contact(Conic(e, 1.0))
    alpha = 1.0 / contact.rho
    conic = Conic(e, alpha)
    scaled = contact.profile.scaled(alpha)
    s_star = contact.s_star * alpha
    clipped = scaled.resample(-s_star, s_star, n_samples)
    return DelaunayAnnulus(conic=conic, rho=1.0, h=delaunay_mean_curvature(conic),
                           profile=clipped, s_star=s_star,
                           orientation=mean_curvature_sign(e))


def clip_to_radius(profile: ProfileCurve, radius: float,
                   n_samples: int = DEFAULT_PROFILE_SAMPLES) -> ProfileCurve:
    """Symmetric piece of an even profile inside the ball of the given radius.

    The cut is at the first ``s > 0`` with ``|gamma(s)| = radius``; unless
    ``radius`` is the free-boundary radius the piece meets the sphere
    at a non-right angle.
    """
    lo, hi = profile.s_range
    start = max(lo, 0.0)
    s = np.linspace(start, hi, 2001)
    x, z, _, _ = profile.evaluate(s)
    g = np.hypot(x, z) - radius
    if g[0] >= 0:
        raise DomainError(f"radius {radius} does not exceed the neck distance")
    hits = np.nonzero(g > 0)[0]
    if hits.size == 0:
        raise NoRootError(f"profile never reaches radius {radius}")
    k = int(hits[0])

    def dist(t):
        xt, zt, _, _ = profile.evaluate(t)
        return float(math.hypot(xt, zt) - radius)

    s_cut = float(bisect(dist, s[k - 1], s[k], xtol=1e-14, maxiter=200))
    return profile.resample(-s_cut, s_cut, n_samples)


# ---------------------------------------------------------------------------
# Critical catenoid


@dataclass(frozen=True)
class CriticalCatenoid:
    """Catenoid piece meeting the unit sphere orthogonally.

    ``z1`` is the positive root of ``z = coth z`` (the half height at c = 1).
    """

    c: float
    z_c: float
    r_c: float
    s_star: float
    z1: float

    @property
    def half_length(self) -> float:
        return self.s_star

    def profile(self, n_samples: int = DEFAULT_PROFILE_SAMPLES) -> ProfileCurve:
        return catenoid_profile(self.c, self.s_star, n_samples)

    def as_annulus(self, n_samples: int = DEFAULT_PROFILE_SAMPLES) -> DelaunayAnnulus:
        conic = Conic(1.0, 2.0 * self.c)
        return DelaunayAnnulus(conic=conic, rho=self.r_c, h=0.0,
                               profile=self.profile(n_samples), s_star=self.s_star,
                               orientation=0)


def coth_root(xtol: float = 1e-14) -> float:
    """Positive solution of ``z = coth(z)`` by bisection on ``[1, 2]``."""
    return float(bisect(lambda z: z - 1.0 / math.tanh(z), 1.0, 2.0,
                        xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200))


def critical_catenoid() -> CriticalCatenoid:
    z1 = coth_root()
    c = 1.0 / math.sqrt(z1 * z1 + math.cosh(z1) ** 2)
    z_c = c * z1
    r_c = math.sqrt(z_c**2 + (c * math.cosh(z_c / c)) ** 2)
    return CriticalCatenoid(c=c, z_c=z_c, r_c=r_c, s_star=c * math.sinh(z1), z1=z1)


# ---------------------------------------------------------------------------
# Family sweep


@dataclass(frozen=True)
class SweepRow:
    e: float
    h: float
    rho: float
    s_star: float
    error: str | None = None


def sweep_grid(e_min: float, e_max: float, n: int) -> np.ndarray:
    """``n`` equispaced eccentricities, with ``e = 1`` added when it lies inside."""
    if not 0 < e_min < e_max:
        raise DomainError("sweep needs 0 < e_min < e_max")
    if n < 2:
        raise DomainError("sweep needs n >= 2")
    grid = np.linspace(e_min, e_max, n)
    if e_min <= 1.0 <= e_max and not np.any(grid == 1.0):
        grid = np.sort(np.append(grid, 1.0))
    return grid


def annulus_family_sweep(e_min: float = 0.8, e_max: float = 1.2, n: int = 21) -> list[SweepRow]:
    """Tabulate ``(e, h(e), rho(e, 1), s*)`` for the annuli ``A_e``.

    ``h`` is the mean curvature of the unit-ball annulus and ``s_star`` its
    boundary arclength; ``rho`` is the free-boundary radius at ``p = 1``.
    Rows whose construction fails carry the error message instead of raising.
    """
    rows = []
    for e in sweep_grid(e_min, e_max, n):
        e = float(e)
        try:
            contact = free_boundary_contact(Conic(e, 1.0))
            h = abs(e * e - 1.0) * contact.rho / e
            rows.append(SweepRow(e, h, contact.rho, contact.s_star / contact.rho))
        except CMCLabError as exc:
            rows.append(SweepRow(e, math.nan, math.nan, math.nan, error=str(exc)))
    return rows


def write_sweep_csv(rows, path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["e", "h", "rho", "s_star"])
        for row in rows:
            writer.writerow([f"{v:.17g}" for v in (row.e, row.h, row.rho, row.s_star)])
