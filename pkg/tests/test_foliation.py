import json

import numpy as np
import pytest

from cmclab import foliation as F
from cmclab.disk import foliation_function, solve_radial_foliation
from cmclab.errors import CertificateError, DomainError, SingularSystemError
from cmclab.jacobi import catenoid_problem, derivative

# mpmath, 30 digits
C1 = -0.15231573766295122
S1 = 1.5088795615383199
S0_BOUNDARY = -0.8191793828070231


def _fd_residual(c1, c2, s, h=1e-3):
    """Fourth-order differences of J S - 1 on the unit-neck catenoid."""
    f = lambda t: F.general_solution(c1, c2, t)
    d1 = (-f(s + 2 * h) + 8 * f(s + h) - 8 * f(s - h) + f(s - 2 * h)) / (12 * h)
    d2 = (-f(s + 2 * h) + 16 * f(s + h) - 30 * f(s) + 16 * f(s - h) - f(s - 2 * h)) / (12 * h * h)
    r2 = 1 + s * s
    return -d2 - s / r2 * d1 - 2 / r2**2 * f(s) - 1


class TestClosedForm:
    def test_ode_residual(self):
        rng = np.random.default_rng(7)
        s = rng.uniform(-S1, S1, 100)
        for c1, c2 in [(C1, 0.0), (0.3, -1.2), (-2.0, 0.5)]:
            assert np.max(np.abs(_fd_residual(c1, c2, s))) < 1e-8

    def test_derivative_formula(self):
        s = np.linspace(-S1, S1, 4001)
        S = F.general_solution(0.2, 0.7, s)
        d = derivative(S, s[1] - s[0])
        np.testing.assert_allclose(d, F.general_solution_derivative(0.2, 0.7, s), atol=1e-10)

    def test_c1(self):
        c1 = F.c1_constant()
        assert c1 == pytest.approx(C1, abs=1e-14)
        assert abs(c1 - (-0.152)) < 5e-4
        assert -0.25 < c1 < 0

    def test_c1_forms_agree(self):
        assert F.c1_constant_alt() == pytest.approx(F.c1_constant(), abs=1e-12)

    def test_robin_constant(self):
        assert F.robin_constant(1.0) == pytest.approx(F.c1_constant(), abs=1e-12)

    def test_boundary_arclength(self):
        assert F.boundary_arclength() == pytest.approx(S1, rel=1e-15)


class TestCertificate:
    @pytest.fixture(scope="class")
    @staticmethod
    def cert():
        return F.catenoid_foliation_certificate()

    def test_values(self, cert):
        assert cert.value_at_boundary == pytest.approx(S0_BOUNDARY, abs=1e-13)
        assert cert.value_at_neck == pytest.approx(C1, abs=1e-14)
        assert cert.max_value == pytest.approx(C1, abs=1e-12)
        assert abs(cert.argmax) < 1e-5

    def test_negative(self, cert):
        assert cert.negative and cert.max_value < -0.15

    def test_robin(self, cert):
        assert max(cert.robin_defects) < 1e-10

    def test_even(self):
        s = np.linspace(0, S1, 501)
        np.testing.assert_array_equal(F.general_solution(C1, 0.0, s), F.general_solution(C1, 0.0, -s))

    def test_json(self, cert, tmp_path):
        cert.write_json(tmp_path / "c.json")
        d = json.loads((tmp_path / "c.json").read_text())
        assert set(d) == {"c1", "s1", "max_value", "argmax", "robin_defects"}
        assert len(d["robin_defects"]) == 2

    def test_margin_failure(self):
        with pytest.raises(CertificateError):
            F.catenoid_foliation_certificate(margin=-0.2)

    def test_robin_failure(self):
        with pytest.raises(CertificateError):
            F.catenoid_foliation_certificate(robin_tol=0.0)

    def test_bad_samples(self):
        with pytest.raises(DomainError):
            F.catenoid_foliation_certificate(n_samples=2)


class TestFiniteDifference:
    def test_matches_closed_form(self):
        s, S = F.solve_jpsi_eq_one(F.unit_neck_problem(0), 2000)
        assert np.max(np.abs(S - F.general_solution(C1, 0.0, s))) < 1e-6

    def test_order(self):
        steps, errs = [], []
        for N in (250, 500, 1000, 2000):
            s, S = F.solve_jpsi_eq_one(F.unit_neck_problem(0), N)
            steps.append(s[1] - s[0])
            errs.append(np.max(np.abs(S - F.general_solution(C1, 0.0, s))))
        orders = F.convergence_orders(errs, steps)
        assert np.all(orders > 1.9)

    def test_linear_in_rhs(self):
        pb = F.unit_neck_problem(2)
        s, a = F.solve_jpsi(pb, rhs=1.0, n_intervals=400)
        _, b = F.solve_jpsi(pb, rhs=np.cos, n_intervals=400)
        _, ab = F.solve_jpsi(pb, rhs=lambda t: 2.0 - 3.0 * np.cos(t), n_intervals=400)
        np.testing.assert_allclose(ab, 2 * a - 3 * b, atol=1e-10)

    def test_kernel_mode_is_singular(self, cc):
        from cmclab.jacobi import problem_for
        with pytest.raises(SingularSystemError):
            F.solve_jpsi(problem_for(cc, 1), n_intervals=200)

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_radial_disk(self, n):
        r, u = solve_radial_foliation(n, 200)
        np.testing.assert_allclose(u, foliation_function(r, n), atol=1e-12)

    def test_needs_dx(self):
        pb = catenoid_problem(1.0, 1.0)
        from dataclasses import replace
        with pytest.raises(DomainError):
            F.solve_jpsi(replace(pb, dx=None), n_intervals=10)

    def test_orders_helper(self):
        np.testing.assert_allclose(F.convergence_orders([4.0, 1.0, 0.25], [0.2, 0.1, 0.05]), [2, 2])
