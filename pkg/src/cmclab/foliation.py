"""Jacobi fields with ``J psi = 1`` and the foliation certificate for the critical catenoid.

On the catenoid rescaled to neck radius 1 (``x = sqrt(1 + s^2)``) the
rotationally symmetric solutions of ``J S = 1`` are

    S(s) = c1 - s^2/4 + g(s) (c2 - (c1 + 1/4) asinh s),   g = s / sqrt(1 + s^2).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import minimize_scalar

from .delaunay import coth_root
from .errors import CertificateError, DomainError, SingularSystemError
from .jacobi import KERNEL_TOL, SturmLiouvilleProblem, catenoid_problem, shoot_robin

CERTIFICATE_SAMPLES = 10_001
ROBIN_TOL = 1e-10
MARGIN = -0.15


def general_solution(c1, c2, s):
    s = np.asarray(s, dtype=float)
    g = s / np.sqrt(1.0 + s * s)
    return c1 - 0.25 * s * s + g * (c2 - (c1 + 0.25) * np.arcsinh(s))


def general_solution_derivative(c1, c2, s):
    s = np.asarray(s, dtype=float)
    r2 = 1.0 + s * s
    g = s / np.sqrt(r2)
    dg = r2**-1.5
    k = c1 + 0.25
    return -0.5 * s + dg * (c2 - k * np.arcsinh(s)) - g * k / np.sqrt(r2)


def boundary_arclength(z1: float | None = None) -> float:
    """``s1 = sinh z1``: arclength from the neck to the boundary at neck radius 1."""
    return math.sinh(coth_root() if z1 is None else z1)


def c1_constant(z1: float | None = None) -> float:
    """``c1 = -(cosh 2 z1 - cosh^2 z1 sinh z1) / 4``."""
    z1 = coth_root() if z1 is None else z1
    return -0.25 * (math.cosh(2 * z1) - math.cosh(z1) ** 2 * math.sinh(z1))


def c1_constant_alt(z1: float | None = None) -> float:
    """Algebraic form ``-((z1^2+1)/(z1^2-1) - z1^2/(z1^2-1)^(3/2)) / 4``."""
    z1 = coth_root() if z1 is None else z1
    q = z1 * z1 - 1.0
    return -0.25 * ((z1 * z1 + 1.0) / q - z1 * z1 / q**1.5)


def robin_constant(robin: float = 1.0, z1: float | None = None) -> float:
    """Even solution (``c2 = 0``) meeting ``S'(s1) = robin * S(s1)``.

    ``S = c1 A + B`` is affine in ``c1``; the condition is solved exactly.
    With ``robin = 1`` this reproduces :func:`c1_constant`.
    """
    s1 = boundary_arclength(z1)
    A = general_solution(1.0, 0.0, s1) - general_solution(0.0, 0.0, s1)
    dA = general_solution_derivative(1.0, 0.0, s1) - general_solution_derivative(0.0, 0.0, s1)
    B = general_solution(0.0, 0.0, s1)
    dB = general_solution_derivative(0.0, 0.0, s1)
    denom = dA - robin * A
    if abs(denom) < 1e-14:
        raise SingularSystemError("Robin condition does not determine c1")
    return float(-(dB - robin * B) / denom)


@dataclass(frozen=True)
class FoliationCertificate:
    """Negativity and boundary data of the even solution ``S0`` of ``J S = 1``."""

    c1: float
    s1: float
    max_value: float
    argmax: float
    robin_defects: tuple
    n_samples: int
    value_at_neck: float
    value_at_boundary: float
    extras: dict = field(default_factory=dict)

    @property
    def negative(self) -> bool:
        return self.max_value < 0.0

    def to_dict(self) -> dict:
        return {"c1": self.c1, "s1": self.s1, "max_value": self.max_value,
                "argmax": self.argmax, "robin_defects": list(self.robin_defects)}

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def catenoid_foliation_certificate(n_samples: int = CERTIFICATE_SAMPLES,
                                   margin: float = MARGIN,
                                   robin_tol: float = ROBIN_TOL) -> FoliationCertificate:
    """Certify that ``S0 = S(c1, 0, .)`` is negative on ``[-s1, s1]`` and Robin at both ends.

    ``S0`` is sampled on ``n_samples`` points, then the largest sample is
    polished by a bounded scalar maximization on its neighbouring cells.

    Raises
    ------
    CertificateError
        If the maximum is not below ``margin`` or a Robin defect exceeds
        ``robin_tol``.
    """
    if n_samples < 3:
        raise DomainError("n_samples must be >= 3")
    z1 = coth_root()
    s1 = boundary_arclength(z1)
    c1 = c1_constant(z1)
    s = np.linspace(-s1, s1, n_samples)
    S = general_solution(c1, 0.0, s)
    i = int(np.argmax(S))
    lo, hi = s[max(i - 1, 0)], s[min(i + 1, n_samples - 1)]
    res = minimize_scalar(lambda t: -float(general_solution(c1, 0.0, t)),
                          bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13})
    if -res.fun > S[i]:
        max_value, argmax = float(-res.fun), float(res.x)
    else:
        max_value, argmax = float(S[i]), float(s[i])
    ends = np.array([-s1, s1])
    Se = general_solution(c1, 0.0, ends)
    dSe = general_solution_derivative(c1, 0.0, ends)
    defects = (float(abs(-dSe[0] - Se[0])), float(abs(dSe[1] - Se[1])))
    cert = FoliationCertificate(c1=c1, s1=s1, max_value=max_value, argmax=argmax,
                                robin_defects=defects, n_samples=n_samples,
                                value_at_neck=float(general_solution(c1, 0.0, 0.0)),
                                value_at_boundary=float(Se[1]))
    if not max_value < margin:
        raise CertificateError(f"S0 reaches {max_value:.17g} >= {margin}")
    if max(defects) > robin_tol:
        raise CertificateError(f"Robin defects {defects} exceed {robin_tol}")
    return cert


def unit_neck_problem(mode: int = 0) -> SturmLiouvilleProblem:
    """Jacobi problem of the critical catenoid rescaled to neck radius 1."""
    return catenoid_problem(1.0, boundary_arclength(), mode)


# ---------------------------------------------------------------------------
# Finite-difference solve of J S = f


def solve_jpsi(problem: SturmLiouvilleProblem, rhs=1.0, n_intervals: int = 2000,
               check_kernel: bool = True):
    """Solve ``-S'' - (x'/x) S' + (n^2/x^2 - w) S = rhs`` with Robin (or axis) ends.

    Central differences with ghost points eliminated through the boundary
    conditions; second order on smooth data.  ``rhs`` is a constant or a
    callable of ``s``.  Returns ``(s, S)``.

    Raises
    ------
    SingularSystemError
        When the homogeneous problem has a Robin-compatible solution, detected
        by shooting before the solve.
    """
    if problem.dx is None:
        raise DomainError("finite-difference solve needs x'(s)")
    if check_kernel and problem.left_bc == "robin":
        m1 = shoot_robin(problem, 2000)
        m2 = shoot_robin(problem, 4000)
        if abs(m1) < KERNEL_TOL and abs(m2) < KERNEL_TOL:
            raise SingularSystemError(f"mode {problem.mode} carries a Jacobi field")
    N = int(n_intervals)
    s = np.linspace(problem.a, problem.b, N + 1)
    h = s[1] - s[0]
    f = np.asarray(rhs(s) if callable(rhs) else np.full(N + 1, float(rhs)), dtype=float)
    beta = problem.robin
    with np.errstate(divide="ignore", invalid="ignore"):
        x = problem.x(s)
        p = problem.dx(s) / x
        c = problem.mode**2 / x**2 - problem.w(s)
    lower = -1.0 / h**2 + p / (2 * h)      # coefficient of S_{i-1}
    diag = 2.0 / h**2 + c
    upper = -1.0 / h**2 - p / (2 * h)      # coefficient of S_{i+1}
    # right ghost: S_{N+1} = S_{N-1} + 2 h beta S_N
    diag = diag.copy()
    lower = lower.copy()
    upper = upper.copy()
    diag[N] += 2 * h * beta * upper[N]
    lower[N] += upper[N]
    if problem.left_bc == "robin":
        # left ghost: S_{-1} = S_1 + 2 h beta S_0
        diag[0] += 2 * h * beta * lower[0]
        upper[0] += lower[0]
    else:
        # regular axis: p S' -> k S''(0) and S''(0) ~ 2 (S_1 - S_0) / h^2
        if problem.mode != 0:
            raise DomainError("axis condition is implemented for mode 0 only")
        k = 1.0 + problem.axis_exponent
        diag[0] = 2 * k / h**2 - problem.w(s[:1])[0]
        upper[0] = -2 * k / h**2
    ab = np.zeros((3, N + 1))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    if not np.all(np.isfinite(ab)):
        raise DomainError("coefficients are not finite on the grid")
    S = solve_banded((1, 1), ab, f)
    return s, S


def solve_jpsi_eq_one(problem: SturmLiouvilleProblem, n_intervals: int = 2000, rhs=1.0):
    """``J S = rhs`` (default 1) for a mode problem; see :func:`solve_jpsi`."""
    return solve_jpsi(problem, rhs=rhs, n_intervals=n_intervals)


def convergence_orders(errors, steps) -> np.ndarray:
    """Observed orders ``log(e_i/e_{i+1}) / log(h_i/h_{i+1})``."""
    e = np.asarray(errors, float)
    h = np.asarray(steps, float)
    return np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:])
