import csv

import numpy as np
import pytest

from cmclab import disk as D
from cmclab.errors import DomainError, GridMismatchError


@pytest.fixture(scope="module")
def grid():
    return D.disk_grid(0.02)


class TestGrid:
    def test_layout(self, grid):
        assert grid.n_r == 50 and grid.shape == (50, grid.n_theta)
        assert grid.r[-1] == 1.0 and grid.r[0] == pytest.approx(0.02)
        assert grid.n_theta % 4 == 0
        assert grid.boundary.sum() == grid.n_theta

    @pytest.mark.parametrize("kw", [dict(spacing=0.03), dict(spacing=0.0), dict(spacing=0.02, n_theta=3),
                                    dict(spacing=0.02, n=1)])
    def test_rejects(self, kw):
        with pytest.raises(DomainError):
            D.disk_grid(**kw)

    def test_sampling_needs_plane(self):
        with pytest.raises(DomainError):
            D.disk_grid(0.1, n=3).sample(lambda x, y: x)


class TestRobinKernel:
    def test_basis(self, grid):
        assert len(D.disk_kernel_basis(grid)) == 2

    def test_coordinates_are_robin_harmonic(self):
        for h in (0.05, 0.025, 0.0125):
            g = D.disk_grid(h)
            for f in D.disk_kernel_basis(g):
                lap, bd = D.robin_defect(g, f)
                # the stencils are exact on x and y; only roundoff is left
                assert np.max(np.abs(lap)) <= max(10 * h, 1e-10)
                assert np.max(np.abs(bd)) <= max(10 * h, 1e-12)

    def test_quadratic_is_not(self, grid):
        lap, bd = D.robin_defect(grid, grid.sample(lambda x, y: x * x - y * y))
        assert np.max(np.abs(lap)) < 1e-9
        assert np.max(np.abs(bd)) > 0.5

    def test_norm_squared(self, grid):
        lap, _ = D.robin_defect(grid, grid.sample(lambda x, y: x * x + y * y))
        np.testing.assert_allclose(lap, 4.0, atol=1e-9)

    def test_zero(self, grid):
        lap, bd = D.robin_defect(grid, np.zeros(grid.shape))
        assert not lap.any() and not bd.any()

    def test_mismatch(self, grid):
        with pytest.raises(GridMismatchError):
            D.laplacian(grid, np.zeros((3, 3)))


class TestFoliationFunction:
    def test_examples(self):
        assert D.foliation_function(0.0, 2) == 0.25
        assert D.foliation_function(1.0, 2) == 0.5
        assert D.foliation_function(1.0, 4) == 0.25

    def test_solves_robin_problem(self, grid):
        psi = D.disk_foliation_solution(grid)
        lap, bd = D.robin_defect(grid, psi)
        np.testing.assert_allclose(lap, 1.0, atol=1e-9)
        assert np.max(np.abs(bd)) < 1e-12

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_radial_solver(self, n):
        r, u = D.solve_radial_foliation(n, 100)
        np.testing.assert_allclose(u, D.foliation_function(r, n), atol=1e-12)


class TestNullity:
    @pytest.mark.parametrize("n,total", [(2, 2), (3, 3), (4, 4)])
    def test_total_is_n(self, n, total):
        rep = D.disk_nullity(n, 6)
        assert rep["total"] == total
        assert [m["k"] for m in rep["modes"] if m["kernel_dim"]] == [1]

    @pytest.mark.parametrize("k", [0, 1, 2, 3, 5])
    def test_defect_is_k_minus_one(self, k):
        assert D.radial_shooting_defect(3, k) == pytest.approx(k - 1, abs=1e-6)

    def test_multiplicity(self):
        assert [D.harmonic_multiplicity(2, k) for k in range(4)] == [1, 2, 2, 2]
        assert [D.harmonic_multiplicity(3, k) for k in range(4)] == [1, 3, 5, 7]
        assert D.harmonic_multiplicity(4, 1) == 4
        assert D.harmonic_multiplicity(3, -1) == 0

    def test_bad_input(self):
        with pytest.raises(DomainError):
            D.radial_shooting_defect(1, 0)
        with pytest.raises(DomainError):
            D.radial_problem(1)


class TestCSV:
    def test_polar(self, tmp_path):
        g = D.disk_grid(0.25)
        D.write_polar_csv(g, D.disk_foliation_solution(g), tmp_path / "p.csv")
        rows = list(csv.reader(open(tmp_path / "p.csv")))
        assert rows[0] == ["r", "theta", "value"] and len(rows) == 1 + g.n_r * g.n_theta
        r, t, v = map(float, rows[-1])
        assert v == D.foliation_function(r)

    def test_radial(self, tmp_path):
        r, u = D.solve_radial_foliation(2, 10)
        D.write_radial_csv(r, u, tmp_path / "r.csv")
        rows = list(csv.reader(open(tmp_path / "r.csv")))
        assert rows[0] == ["r", "value"] and len(rows) == 12
        with pytest.raises(GridMismatchError):
            D.write_radial_csv(r, u[:-1], tmp_path / "x.csv")
