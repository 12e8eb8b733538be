"""phi-functions, the ETDRK4-B step, amplification factor and stability regions."""

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from fracrd.integrator import (BlowUpError, StepperState, amplification_factor, build_phi_table,
                               etdrk4_step, integrate, phi, stability_boundary)
from fracrd.reactions import ManufacturedSolution, sourced_allen_cahn_model
from fracrd.solver import make_stepper

from conftest import disc


def mp_phi(z, k):
    with mpmath.workdps(80):
        z = mpmath.mpmathify(z)
        s = sum(z ** j / mpmath.factorial(j) for j in range(k))
        return complex((mpmath.exp(z) - s) / z ** k)


def test_phi_at_zero():
    for k in (1, 2, 3):
        assert phi(0.0, k) == 1.0 / math.factorial(k)


def test_phi_rejects_k():
    with pytest.raises(ValueError):
        phi(1.0, 4)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_phi_against_extended_precision(k):
    z = -np.geomspace(1e-12, 1e6, 200)
    z = np.concatenate([z, -z[:60], [0.49999, 0.5, 0.50001, -0.5]])
    got = phi(z, k)
    ref = np.array([mp_phi(float(v), k).real for v in z])
    assert np.max(np.abs(got - ref) / np.abs(ref)) < 1e-13


@pytest.mark.parametrize("k", [1, 2, 3])
def test_phi_complex(k):
    z = np.array([0.3j, -1 + 0.2j, 1e-5 - 1e-5j, -4 + 3j, 0.45 * np.exp(2.0j)])
    got = phi(z, k)
    ref = np.array([mp_phi(complex(v), k) for v in z])
    np.testing.assert_allclose(got, ref, rtol=1e-14)


@settings(max_examples=200, deadline=None)
@given(st.floats(-1e4, 5.0))
def test_phi_recurrence(z):
    # z phi_{k+1}(z) + 1/k! = phi_k(z); for large |z| the left side cancels,
    # so the residual is measured against the size of its terms
    for k in (1, 2):
        zp = z * phi(z, k + 1)
        resid = zp + 1.0 / math.factorial(k) - phi(z, k)
        assert abs(resid) <= 1e-14 * (abs(zp) + 1.0 / math.factorial(k))


def test_phi_table_shapes():
    sig = -np.arange(12.0).reshape(3, 4)
    p = build_phi_table(sig, 0.1)
    assert p.phi3_half.shape == (3, 4)
    np.testing.assert_allclose(p.exp_half ** 2, p.exp_full, rtol=1e-15)
    with pytest.raises(ValueError):
        build_phi_table(sig, 0.0)


def test_linear_problem_is_exact():
    sigma = -np.geomspace(1e-3, 1e5, 30)
    st_ = StepperState(u=np.ones(30), sigma=sigma, tau=0.3, rhs=lambda u, t: np.zeros_like(u))
    integrate(st_, 10)
    np.testing.assert_allclose(st_.u, np.exp(3.0 * sigma), rtol=1e-13, atol=1e-300)
    assert st_.step == 10 and st_.t == pytest.approx(3.0)


def test_constant_forcing_is_exact():
    sigma = -np.geomspace(1e-3, 1e5, 30)
    c = 0.7
    st_ = StepperState(u=np.ones(30), sigma=sigma, tau=0.25, rhs=lambda u, t: np.full_like(u, c))
    integrate(st_, 8)
    exact = np.exp(2 * sigma) + c * np.expm1(2 * sigma) / sigma
    np.testing.assert_allclose(st_.u, exact, rtol=1e-13)


def test_logistic_ode_fourth_order():
    # u' = -u + u^2, u(0) = 0.5, stiff part diagonal
    ref = solve_ivp(lambda t, u: -u + u * u, (0, 2), [0.5], rtol=1e-13, atol=1e-15).y[0, -1]
    exact = 1.0 / (1.0 + math.exp(2.0))  # u = 1 / (1 + e^t)
    assert ref == pytest.approx(exact, rel=1e-10)
    errs = []
    for n in (8, 16, 32, 64):
        s = StepperState(u=np.array([0.5]), sigma=np.array([-1.0]), tau=2.0 / n, rhs=lambda u, t: u * u)
        integrate(s, n)
        errs.append(abs(s.u[0] - exact))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 3.8), orders


def test_nonautonomous_fourth_order():
    # u' = -10 u + cos t, exact solution known in closed form
    def exact(t):
        return (10 * math.cos(t) + math.sin(t)) / 101 + (1 - 10 / 101) * math.exp(-10 * t)

    errs = []
    for n in (10, 20, 40, 80):
        s = StepperState(u=np.array([1.0]), sigma=np.array([-10.0]), tau=1.0 / n,
                         rhs=lambda u, t: np.full_like(u, math.cos(t)))
        integrate(s, n)
        errs.append(abs(s.u[0] - exact(1.0)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 3.7), orders


def one_step_ratio(x, y):
    # u' = (lam + rho) u with lam tau = y in the stiff part and rho tau = x
    # in the nonlinear slot; complex rho as a real 2-vector
    a, b = x.real, x.imag
    rhs = lambda u, t: np.array([a * u[0] - b * u[1], b * u[0] + a * u[1]])  # noqa: E731
    s = StepperState(u=np.array([1.0, 0.0]), sigma=np.array([y, y]), tau=1.0, rhs=rhs)
    etdrk4_step(s)
    return complex(s.u[0], s.u[1])


@pytest.mark.parametrize("x,y", [(0.3j, -1.0), (-0.5 + 0.2j, -5.0), (1.2, 0.0), (-2 - 3j, -20.0)])
def test_amplification_matches_one_step(x, y):
    assert abs(amplification_factor(x, y) - one_step_ratio(x, y)) < 1e-12 * max(1, abs(one_step_ratio(x, y)))


def test_rk4_recovered_at_y0():
    th = np.linspace(0, 2 * np.pi, 41)
    for k in range(1, 31):
        x = 0.1 * k * np.exp(1j * th)
        rk4 = 1 + x + x ** 2 / 2 + x ** 3 / 6 + x ** 4 / 24
        assert np.max(np.abs(amplification_factor(x, 0.0) - rk4)) < 1e-12


def test_amplification_rejects_positive_y():
    with pytest.raises(ValueError):
        amplification_factor(0.1, 0.5)


def test_stability_boundary_y0_is_rk4():
    b = stability_boundary(0.0, n_angles=64)
    # RK4's real-axis stability limit
    assert b.radius[32] == pytest.approx(2.7852935634, rel=1e-9)
    assert np.all(b.bounded)


def test_stability_regions_grow_with_stiffness():
    areas = [stability_boundary(y, n_angles=64).area() for y in (0.0, -5.0, -20.0)]
    # frozen from a 256-ray trace: 12.23, 77.02, 716.7
    assert areas[0] == pytest.approx(12.23, rel=0.01)
    assert areas[1] == pytest.approx(77.0, rel=0.02)
    assert areas[2] == pytest.approx(716.7, rel=0.02)


def test_stability_boundary_points_on_unit_level():
    b = stability_boundary(-5.0, n_angles=32)
    assert np.allclose(np.abs(amplification_factor(b.points, -5.0)), 1.0, atol=1e-9)


def test_stability_boundary_guards():
    with pytest.raises(ValueError):
        stability_boundary(1.0)
    with pytest.raises(ValueError):
        stability_boundary(0.0, n_angles=4)


def test_blow_up_reports_time():
    s = StepperState(u=np.ones(3), sigma=-np.ones(3), tau=0.5, rhs=lambda u, t: u ** 40)
    s.u[:] = 1e10
    with np.errstate(over="ignore"), pytest.raises(BlowUpError) as info:
        integrate(s, 5)
    assert info.value.step == 0 and info.value.t == 0.0


def test_phi_table_mismatch_rejected():
    p = build_phi_table(-np.ones(3), 0.1)
    with pytest.raises(ValueError):
        StepperState(u=np.ones(3), sigma=-np.ones(3), tau=0.2, rhs=None, phi=p)


def test_temporal_order_against_fine_reference():
    # at fixed N the time error alone converges at fourth order
    D = disc(64)
    ms = ManufacturedSolution(1.0, 0.6, 0.01)
    model = sourced_allen_cahn_model(ms)
    u0 = ms.exact(D.coords(), 0.0)[None]

    def run(n):
        s = make_stepper(model, D, 1.0 / n, u0)
        integrate(s, n)
        return D.inverse(s.u[0])

    ref = run(1024)
    errs = [np.abs(run(n) - ref).max() for n in (16, 32, 64, 128)]
    slope = -np.polyfit(np.log([16, 32, 64, 128]), np.log(errs), 1)[0]
    assert 3.8 < slope < 4.3, (slope, errs)


def test_error_floor_at_small_tau_is_spatial():
    # against the exact solution, the error at small tau is dominated by the
    # spatial truncation of the algebraically decaying source; refining N
    # lowers it while refining tau does not
    ms = ManufacturedSolution(1.0, 0.6, 0.01)
    model = sourced_allen_cahn_model(ms)

    def err(N, n):
        D = disc(N)
        s = make_stepper(model, D, 1.0 / n, ms.exact(D.coords(), 0.0)[None])
        integrate(s, n)
        ex = ms.exact(D.coords(), 1.0)
        return np.abs(D.inverse(s.u[0]) - ex).max() / np.abs(ex).max()

    e200 = err(200, 256)
    assert err(200, 128) == pytest.approx(e200, rel=0.05)
    assert err(400, 256) < 0.4 * e200
