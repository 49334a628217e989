"""Surfaces of revolution as meshes, Killing fields of the ball and flux integrals."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import quad

from .errors import DomainError
from .profile import ProfileCurve

AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}


def _trapezoid_weights(s: np.ndarray) -> np.ndarray:
    w = np.zeros_like(s)
    d = np.diff(s)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


@dataclass(frozen=True, eq=False)
class RevolutionMesh:
    """Product mesh of a revolved profile; vertex ``(i, j)`` sits at ``i * n_theta + j``.

    ``theta_j = 2 pi (j + 1/2) / n_theta`` (midpoint rule in ``theta``) and the
    ``s`` weights are trapezoidal, so ``weights`` integrates against ``dA``.
    ``mean_curvature`` carries the profile's ``kappa + sin(theta)/x`` per vertex.
    """

    vertices: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    mean_curvature: np.ndarray
    n_s: int
    n_theta: int

    @property
    def n_vertices(self) -> int:
        return self.n_s * self.n_theta

    @property
    def boundary_loops(self):
        idx = np.arange(self.n_theta)
        return idx.copy(), (self.n_s - 1) * self.n_theta + idx

    @property
    def area(self) -> float:
        return float(self.weights.sum())

    def faces(self) -> np.ndarray:
        """Triangles ``(a, b, c)`` whose ``(b - a) x (c - a)`` follows the vertex normals."""
        i, j = np.meshgrid(np.arange(self.n_s - 1), np.arange(self.n_theta), indexing="ij")
        jn = (j + 1) % self.n_theta
        v00 = i * self.n_theta + j
        v01 = i * self.n_theta + jn
        v10 = (i + 1) * self.n_theta + j
        v11 = (i + 1) * self.n_theta + jn
        first = np.stack([v00, v01, v10], axis=-1).reshape(-1, 3)
        second = np.stack([v01, v11, v10], axis=-1).reshape(-1, 3)
        out = np.empty((2 * first.shape[0], 3), dtype=np.int64)
        out[0::2] = first
        out[1::2] = second
        return out


def revolve(profile: ProfileCurve, n_theta: int = 256, offset=(0.0, 0.0, 0.0)) -> RevolutionMesh:
    """Revolve ``profile`` about the ``z`` axis.

    ``offset`` translates the finished mesh; it exists to build non-symmetric
    control surfaces and is zero for every surface centred in the ball.
    """
    if n_theta < 8:
        raise DomainError("n_theta must be >= 8")
    if np.any(profile.x <= 0):
        raise DomainError("degenerate profile: x must stay positive")
    th = 2.0 * np.pi * (np.arange(n_theta) + 0.5) / n_theta
    ct, st = np.cos(th)[None, :], np.sin(th)[None, :]
    x, z = profile.x[:, None], profile.z[:, None]
    dz, dx = np.sin(profile.theta)[:, None], np.cos(profile.theta)[:, None]
    shape = (profile.s.size, n_theta)
    verts = np.stack([x * ct, x * st, np.broadcast_to(z, shape)], axis=-1)
    verts = verts + np.asarray(offset, dtype=float)
    normals = np.stack([dz * ct, dz * st, np.broadcast_to(-dx, shape)], axis=-1)
    weights = (_trapezoid_weights(profile.s) * profile.x)[:, None] * (2 * np.pi / n_theta)
    H = np.broadcast_to(profile.mean_curvature[:, None], shape)
    return RevolutionMesh(vertices=verts.reshape(-1, 3), normals=normals.reshape(-1, 3),
                          weights=np.broadcast_to(weights, shape).reshape(-1).copy(),
                          mean_curvature=H.reshape(-1).copy(),
                          n_s=profile.s.size, n_theta=n_theta)


def profile_area(profile: ProfileCurve) -> float:
    """``2 pi int x ds`` by adaptive quadrature of the profile interpolant."""
    lo, hi = profile.s_range
    val, _ = quad(lambda s: float(profile.evaluate(s)[0]), lo, hi, limit=200,
                  epsabs=1e-13, epsrel=1e-12)
    return 2 * np.pi * val


@dataclass(frozen=True)
class KillingField:
    """Rotation field ``K(x) = A x`` with ``A`` antisymmetric."""

    generator: np.ndarray

    def __post_init__(self):
        A = np.array(self.generator, dtype=float)
        if A.shape != (3, 3) or np.any(A + A.T != 0):
            raise DomainError("generator must be an antisymmetric 3x3 matrix")
        A.setflags(write=False)
        object.__setattr__(self, "generator", A)

    @classmethod
    def rotation(cls, axis) -> "KillingField":
        """Infinitesimal rotation about ``axis``: ``K(x) = axis x x``."""
        if isinstance(axis, str):
            if axis not in AXES:
                raise DomainError(f"unknown axis {axis!r}")
            axis = AXES[axis]
        a = np.asarray(axis, dtype=float)
        if a.shape != (3,):
            raise DomainError("axis must be a 3-vector")
        return cls(np.array([[0.0, -a[2], a[1]],
                             [a[2], 0.0, -a[0]],
                             [-a[1], a[0], 0.0]]))

    def __call__(self, points) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.generator.T

    def __add__(self, other: "KillingField") -> "KillingField":
        return KillingField(self.generator + other.generator)

    def scaled(self, a: float) -> "KillingField":
        return KillingField(a * self.generator)


def flux_mean_curvature(mesh: RevolutionMesh, K: KillingField) -> float:
    """``sum w <K, H n>`` with ``H`` the pointwise sum of principal curvatures."""
    Kv = K(mesh.vertices)
    dots = np.einsum("ij,ij->i", Kv, mesh.normals)
    return float(np.sum(mesh.weights * mesh.mean_curvature * dots))


def flux_normal(mesh: RevolutionMesh, K: KillingField) -> float:
    """``sum w <K, n>``."""
    Kv = K(mesh.vertices)
    return float(np.sum(mesh.weights * np.einsum("ij,ij->i", Kv, mesh.normals)))


# ---------------------------------------------------------------------------
# I/O


def export_obj(mesh: RevolutionMesh, path) -> None:
    """Write ``v``, ``vn`` and triangle ``f a//a b//b c//c`` records."""
    path = Path(path)
    lines = [f"# revolution mesh {mesh.n_s} x {mesh.n_theta}"]
    lines += [f"v {a:.17g} {b:.17g} {c:.17g}" for a, b, c in mesh.vertices]
    lines += [f"vn {a:.17g} {b:.17g} {c:.17g}" for a, b, c in mesh.normals]
    lines += [f"f {a}//{a} {b}//{b} {c}//{c}" for a, b, c in mesh.faces() + 1]
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write mesh to {path}: {exc.strerror or exc}") from exc


def read_obj(path):
    """Return ``(vertices, normals, faces)`` from a file written by :func:`export_obj`."""
    verts, norms, faces = [], [], []
    with Path(path).open() as fh:
        for line in fh:
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                verts.append([float(t) for t in parts[1:4]])
            elif parts[0] == "vn":
                norms.append([float(t) for t in parts[1:4]])
            elif parts[0] == "f":
                faces.append([int(t.split("/")[0]) - 1 for t in parts[1:4]])
    return np.array(verts), np.array(norms), np.array(faces, dtype=np.int64)


def flux_table(mesh: RevolutionMesh, surface: str, axes=("x", "y", "z")) -> list:
    return [(surface, a, flux_mean_curvature(mesh, KillingField.rotation(a)),
             flux_normal(mesh, KillingField.rotation(a))) for a in axes]


def write_flux_csv(rows, path) -> None:
    with Path(path).open("w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["surface", "axis", "flux_H", "flux_n"])
        for surface, axis, fh_, fn in rows:
            out.writerow([surface, axis, f"{fh_:.17g}", f"{fn:.17g}"])

