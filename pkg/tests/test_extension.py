import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmclab import _kernels
from cmclab import extension as E
from cmclab.errors import DomainError, GridMismatchError


def line(f, n=201, lo=-2.0, hi=2.0):
    return E.GridFunction.sample(f, [(lo, hi)], [n], ("x",))


def interior(F, h, zmax):
    """Slab rows whose cube never leaves the sampled box."""
    margin = 0.5 * zmax
    out = []
    for k in range(h.ndim):
        c = h.coords(k)
        out.append((c >= c[0] + margin) & (c <= c[-1] - margin))
    return np.ix_(*out) if len(out) > 1 else out[0]


class TestExtension1D:
    def test_constant(self):
        h = line(lambda x: 1.0 + 0 * x)
        F = E.whitney_extend(h, 0.5, 10)
        zs = F.coords(1)
        np.testing.assert_allclose(F.values, np.broadcast_to(zs, F.shape), atol=1e-14)

    def test_linear(self):
        h = line(lambda x: 3 * x - 1)
        F = E.whitney_extend(h, 0.4, 8)
        X, Z = np.meshgrid(F.coords(0), F.coords(1), indexing="ij")
        sel = interior(F, h, 0.4)
        np.testing.assert_allclose(F.values[sel], ((3 * X - 1) * Z)[sel], atol=1e-13)

    def test_vanishes_on_boundary(self):
        F = E.whitney_extend(line(np.sin), 0.3, 6)
        assert not F.values[:, 0].any()

    def test_normal_derivative_first_order(self):
        errs = []
        for n in (101, 201, 401):
            h = line(np.sin, n)
            dx = h.spacing[0]
            F = E.whitney_extend(h, 4 * dx, 4)
            errs.append(E.normal_derivative_check(F, h))
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(orders > 0.9)

    @settings(max_examples=20, deadline=None)
    @given(st.floats(-3, 3), st.floats(-3, 3))
    def test_linear_in_data(self, a, b):
        f, g = line(np.sin, 51), line(lambda x: x * x, 51)
        lhs = E.whitney_extend(a * f + b * g, 0.3, 5).values
        rhs = a * E.whitney_extend(f, 0.3, 5).values + b * E.whitney_extend(g, 0.3, 5).values
        np.testing.assert_allclose(lhs, rhs, atol=1e-12 * (1 + abs(a) + abs(b)))


class TestExtension2D:
    def test_bilinear(self):
        h = E.GridFunction.sample(lambda x, y: x * y + 2 * x - y, [(-1, 1), (-1.5, 1.5)], [41, 61])
        F = E.whitney_extend(h, 0.2, 4)
        X, Y, Z = np.meshgrid(F.coords(0), F.coords(1), F.coords(2), indexing="ij")
        sel = interior(F, h, 0.2)
        exact = (X * Y + 2 * X - Y) * Z
        np.testing.assert_allclose(F.values[sel], exact[sel], atol=1e-13)

    def test_normal_derivative(self):
        h = E.GridFunction.sample(lambda x, y: np.sin(x) * np.cos(y), [(-1, 1), (-1, 1)], [81, 81])
        F = E.whitney_extend(h, 0.05, 2)
        assert E.normal_derivative_check(F, h) < 0.02
        assert F.axis_names == ("x1", "x2", "z")

    def test_three_dimensions_rejected(self):
        h = E.GridFunction(np.zeros((3, 3, 3)), (0, 0, 0), (1, 1, 1), ("a", "b", "c"))
        with pytest.raises(DomainError):
            E.whitney_extend(h, 1.0, 2)


class TestGridFunction:
    def test_mismatch(self):
        with pytest.raises(GridMismatchError):
            line(np.sin, 11) + line(np.sin, 12)
        with pytest.raises(GridMismatchError):
            E.GridFunction(np.zeros(3), (0, 0), (1,), ("x",))

    def test_bad_values(self):
        with pytest.raises(DomainError):
            E.GridFunction(np.array([0.0, np.nan]), (0,), (1,), ("x",))
        with pytest.raises(DomainError):
            E.GridFunction(np.zeros(2), (0,), (0,), ("x",))

    def test_csv_round_trip(self, tmp_path):
        h = E.GridFunction.sample(lambda x, y: np.exp(x) - y, [(0, 1), (-1, 0.5)], [5, 7], ("u", "v"))
        h.to_csv(tmp_path / "h.csv")
        g = E.GridFunction.from_csv(tmp_path / "h.csv")
        assert g.same_grid(h) and g.axis_names == ("u", "v")
        np.testing.assert_array_equal(g.values, h.values)

    def test_csv_incomplete(self, tmp_path):
        (tmp_path / "bad.csv").write_text("x,y,value\n0,0,1\n0,1,1\n1,0,1\n")
        with pytest.raises(GridMismatchError):
            E.GridFunction.from_csv(tmp_path / "bad.csv")

    def test_normal_check_mismatch(self):
        with pytest.raises(GridMismatchError):
            E.normal_derivative_check(E.whitney_extend(line(np.sin, 11), 0.1, 2), line(np.sin, 12))


class TestRobinLift:
    def test_cutoff(self):
        t = np.array([0.0, 0.1, 0.25, 0.4, 0.5, 0.7])
        c = E.cutoff(t, 0.5)
        assert c[0] == c[1] == c[2] == 1.0 and c[4] == c[5] == 0.0 and 0 < c[3] < 1

    def test_interval(self):
        F = E.robin_lift((0.7, -1.3))
        s, v = F.coords(0), F.values
        h = F.spacing[0]
        assert v[0] == v[-1] == 0.0
        assert (v[1] - v[0]) / h == pytest.approx(0.7, abs=1e-12)
        assert (v[-2] - v[-1]) / h == pytest.approx(-1.3, abs=1e-12)
        assert np.all(v[np.abs(s) < 1e-9] == 0)

    def test_interval_zero_data(self):
        assert not E.robin_lift((0.0, 0.0)).values.any()

    def test_interval_chart_coverage(self):
        with pytest.raises(DomainError):
            E.robin_lift((1.0, 1.0), width=3.0)

    def test_circle(self):
        m = 256
        g = E.GridFunction.sample(lambda t: np.cos(t) + 0.5, [(0, 2 * np.pi * (m - 1) / m)], [m], ("theta",))
        L = E.robin_lift(g, n_r=401, width=0.5)
        dr = L.spacing[0]
        assert not L.values[-1].any()
        inward = (L.values[-2] - L.values[-1]) / dr
        assert np.max(np.abs(inward - g.values)) < 5e-3
        assert not L.values[0].any()

    def test_circle_needs_period(self):
        g = line(np.sin, 10)
        with pytest.raises(DomainError):
            E.robin_lift(g)


@pytest.mark.skipif(not _kernels.HAS_NUMBA, reason="numba unavailable")
def test_backends_agree():
    rng = np.random.default_rng(3)
    v = rng.normal(size=61)
    xs, zs = np.linspace(-1, 1, 61), np.linspace(0, 0.3, 7)
    a = _kernels.whitney_1d(v, -1.0, xs[1] - xs[0], xs, zs, 4, use_numba=True)
    b = _kernels.whitney_1d(v, -1.0, xs[1] - xs[0], xs, zs, 4, use_numba=False)
    np.testing.assert_allclose(a, b, atol=1e-13)
