import json
import math

import numpy as np
import pytest

from cmclab.delaunay import (CriticalCatenoid, DelaunayType, annulus, annulus_family_sweep,
                             classify, clip_to_radius, critical_catenoid, delaunay_mean_curvature,
                             free_boundary_radius, mean_curvature_sign, sweep_grid,
                             write_sweep_csv)
from cmclab.errors import DomainError
from cmclab.profile import Conic

# Regression constants (first computation, frozen)
RHO_1_1 = 1.0858114904437621
H_09 = 0.23975840691351386
H_11 = 0.20224036527119477


def test_mean_curvature_formula():
    assert delaunay_mean_curvature(Conic(1.0, 3.7)) == 0.0
    assert delaunay_mean_curvature(Conic(2.0, 1.0)) == 1.5
    assert delaunay_mean_curvature(Conic(0.5, 2.0)) == 0.75


@pytest.mark.parametrize("e,kind", [(0.5, DelaunayType.UNDULOID), (1.0, DelaunayType.CATENOID),
                                    (3.0, DelaunayType.NODOID)])
def test_classify(e, kind):
    assert classify(e) is kind


@pytest.mark.parametrize("e", [0.0, -0.3])
def test_classify_rejects(e):
    with pytest.raises(DomainError):
        classify(e)


def test_signs():
    assert [mean_curvature_sign(e) for e in (0.5, 1.0, 2.0)] == [1, 0, -1]


class TestCriticalCatenoid:
    def test_constants(self, cc):
        # independent oracle: mpmath findroot on z - coth z, 30 digits
        assert cc.z1 == pytest.approx(1.1996786402577338, abs=1e-14)
        assert abs(cc.z1 - 1 / math.tanh(cc.z1)) < 1e-12
        assert cc.c == pytest.approx(0.4604, abs=1e-4)
        assert cc.c == pytest.approx(1 / math.sqrt(cc.z1**2 + math.cosh(cc.z1) ** 2), abs=1e-15)

    def test_invariants(self, cc):
        assert abs(cc.z_c - cc.c / math.tanh(cc.z_c / cc.c)) < 1e-12
        r = math.sqrt(cc.z_c**2 + (cc.c * math.cosh(cc.z_c / cc.c)) ** 2)
        assert abs(r - 1) < 1e-10 and abs(cc.r_c - 1) < 1e-10

    def test_profile_boundary(self, cc):
        p = cc.profile(501)
        assert np.hypot(p.x[-1], p.z[-1]) == pytest.approx(1.0, abs=1e-12)
        assert p.z[-1] == pytest.approx(cc.z_c, abs=1e-12)


class TestFreeBoundaryRadius:
    def test_critical_p_gives_unit_radius(self, cc):
        assert free_boundary_radius(Conic(1.0, 2 * cc.c)) == pytest.approx(1.0, abs=1e-8)

    def test_regression_and_oracle(self):
        rho = free_boundary_radius(Conic(1.0, 1.0))
        assert rho == pytest.approx(RHO_1_1, abs=1e-10)
        # catenoid of parameter 1/2 meets the sphere of radius (1/2) sqrt(z1^2 + cosh^2 z1)
        z1 = 1.1996786402577338
        assert rho == pytest.approx(0.5 * math.sqrt(z1**2 + math.cosh(z1) ** 2), abs=1e-10)

    @pytest.mark.parametrize("e", [0.9, 1.0, 1.1])
    @pytest.mark.parametrize("alpha", [0.5, 2.0, 10.0])
    def test_homothety(self, e, alpha):
        base = free_boundary_radius(Conic(e, 1.0))
        assert abs(free_boundary_radius(Conic(e, alpha)) - alpha * base) < 1e-8


class TestAnnulus:
    def test_catenoid_case(self, cc):
        a = annulus(1.0)
        assert a.h == 0.0 and a.orientation == 0
        assert a.s_star == pytest.approx(cc.s_star, abs=1e-10)

    @pytest.mark.parametrize("e,h", [(0.9, H_09), (1.1, H_11)])
    def test_invariants(self, e, h, a09, a11):
        a = a09 if e == 0.9 else a11
        assert a.h > 0
        assert a.h == pytest.approx(h, abs=1e-9)
        d = a.invariant_defects()
        assert d["boundary_radius"] < 1e-8
        assert d["support_function"] < 1e-8
        assert d["mean_curvature"] < 1e-6

    def test_scaling_of_conic(self, a09):
        assert a09.conic.p == pytest.approx(1 / free_boundary_radius(Conic(0.9, 1.0)), rel=1e-12)
        assert a09.h == pytest.approx(delaunay_mean_curvature(a09.conic), rel=1e-14)

    def test_write(self, a09, tmp_path):
        a09.write(tmp_path / "a.csv")
        side = json.loads((tmp_path / "a.json").read_text())
        assert set(side) == {"e", "p", "h", "rho", "s_star"}
        assert side["rho"] == 1.0

    def test_clip(self, a09):
        piece = clip_to_radius(a09.profile, 0.8)
        assert np.hypot(piece.x[-1], piece.z[-1]) == pytest.approx(0.8, abs=1e-10)
        q = piece.x[-1] * np.sin(piece.theta[-1]) - piece.z[-1] * np.cos(piece.theta[-1])
        assert abs(q) > 1e-2


class TestSweep:
    def test_grid_contains_one(self):
        g = sweep_grid(0.8, 1.25, 4)
        assert 1.0 in g and np.all(np.diff(g) > 0)

    def test_bad_range(self):
        with pytest.raises(DomainError):
            sweep_grid(-0.1, 1.0, 3)
        with pytest.raises(DomainError):
            sweep_grid(1.2, 0.8, 3)

    def test_family(self, tmp_path):
        rows = annulus_family_sweep(0.8, 1.2, 9)
        e = np.array([r.e for r in rows])
        h = np.array([r.h for r in rows])
        assert all(r.error is None for r in rows)
        assert h[e == 1.0][0] == 0.0
        assert np.any(e < 1) and np.any(e > 1)
        left, right = h[e <= 1], h[e >= 1]
        assert np.all(np.diff(left) < 0) and np.all(np.diff(right) > 0)
        # h from the sweep agrees with the full annulus construction
        assert h[np.isclose(e, 0.9)][0] == pytest.approx(H_09, abs=1e-9)
        write_sweep_csv(rows, tmp_path / "s.csv")
        lines = (tmp_path / "s.csv").read_text().splitlines()
        assert lines[0] == "e,h,rho,s_star" and len(lines) == len(rows) + 1

    def test_failures_are_recorded(self):
        rows = annulus_family_sweep(0.1, 0.2, 2)
        assert all(r.error for r in rows) and all(math.isnan(r.h) for r in rows)


def test_critical_catenoid_is_frozen(cc):
    assert isinstance(cc, CriticalCatenoid)
    with pytest.raises(Exception):
        cc.c = 1.0
