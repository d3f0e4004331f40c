import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slms import (
    PerPieceConstant,
    boundary_forms,
    build_grid,
    omega,
    omega_scaled,
    reference_problem,
    shoot_chi,
    shoot_phi,
    volterra_residual,
    wronskian_at,
)
from slms.problem import Piece
from slms.solver import envelope_exponent

from conftest import stepped_params
from oracles import ivp_omega, reference_chi, reference_omega, reference_phi, stepped_omega


def test_phi_closed_form_lambda_one(ref):
    sol = shoot_phi(ref, 1.0, grid=True)
    for p in Piece:
        x = sol.grid.nodes[p]
        assert np.allclose(sol.u[p], np.cos(x), atol=1e-9)
        assert np.allclose(sol.du[p], -np.sin(x), atol=1e-9)


def test_phi_constants_with_jumps():
    P = reference_problem(delta=2.0, gamma=3.0)
    sol = shoot_phi(P, 0.0, grid=True)
    for p, c in zip(Piece, (1.0, 0.5, 1 / 3)):
        assert np.allclose(sol.u[p], c, atol=1e-14)
        assert np.allclose(sol.du[p], 0.0, atol=1e-14)


def test_initial_data_exact(any_problem):
    s = any_problem.spec
    lam = 3.7
    phi = shoot_phi(any_problem, lam)
    chi = shoot_chi(any_problem, lam)
    assert phi.at_a() == (s.beta2, -s.beta1)
    assert chi.at_b() == (lam * s.alpha2p + s.alpha2, lam * s.alpha1p + s.alpha1)


def test_chi_closed_form_lambda_zero(ref):
    sol = shoot_chi(ref, 0.0, grid=True)
    for p in Piece:
        x = sol.grid.nodes[p]
        assert np.allclose(sol.u[p], x - math.pi, atol=1e-12)
        assert np.allclose(sol.du[p], 1.0, atol=1e-12)


@pytest.mark.parametrize("lam", [-2.0, 0.3, 17.0, 2.0 + 3.0j])
def test_phi_chi_closed_form_reference(ref, lam):
    xs = np.array([0.2, 1.0, 2.0, 3.0])
    phi = shoot_phi(ref, lam, points=xs)
    chi = shoot_chi(ref, lam, points=xs)
    u, du = reference_phi(lam, xs)
    assert np.allclose(phi.points_u, u, rtol=1e-8) and np.allclose(phi.points_du, du, rtol=1e-8)
    u, du = reference_chi(lam, xs)
    scale = max(1.0, abs(lam))
    assert np.allclose(chi.points_u, u, atol=1e-8 * scale, rtol=1e-8)
    assert np.allclose(chi.points_du, du, atol=1e-8 * scale, rtol=1e-8)


@pytest.mark.parametrize("kind", ["phi", "chi"])
def test_transmission_at_interfaces(stepped, kind):
    d, g = stepped.spec.delta, stepped.spec.gamma
    shoot = shoot_phi if kind == "phi" else shoot_chi
    geo = stepped.geometry
    pts = [geo.theta_minus, geo.theta_minus, geo.theta_plus, geo.theta_plus]
    sol = shoot(stepped, 5.5, points=pts, pieces=[0, 1, 1, 2])
    assert sol.points_u[0] == pytest.approx(d * sol.points_u[1], rel=1e-14)
    assert sol.points_du[0] == pytest.approx(d * sol.points_du[1], rel=1e-14)
    assert d * sol.points_u[2] == pytest.approx(g * sol.points_u[3], rel=1e-14)
    assert d * sol.points_du[2] == pytest.approx(g * sol.points_du[3], rel=1e-14)


def test_boundary_forms_trivial(ref):
    assert boundary_forms(ref, (1.0, 0.0)) == (1.0, 0.0)
    assert boundary_forms(ref, (0.0, 1.0)) == (0.0, 1.0)


@settings(max_examples=30, deadline=None)
@given(lam=st.floats(-20, 500))
def test_chi_satisfies_lambda_condition(tabulated, lam):
    R, Rp = boundary_forms(tabulated, shoot_chi(tabulated, lam))
    assert abs(lam * Rp + R) <= 1e-12 * max(1.0, abs(lam)) ** 2


def test_omega_at_zero(ref):
    assert omega(ref, 0.0) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("lam", [-9.0, -1.0, 0.5, 3.3, 40.0, 400.0, 1.0 + 1.0j, -4.0 + 20.0j])
def test_omega_closed_form(ref, lam):
    exact = reference_omega(lam)
    scale = max(1.0, abs(lam) ** 1.5) * (math.cosh(abs(np.sqrt(complex(lam)).imag) * math.pi))
    assert abs(omega(ref, lam) - exact) / scale < 1e-9


@pytest.mark.parametrize("lam", [-4.0, 0.7, 12.0, 150.0, 3.0 - 2.0j])
def test_omega_transfer_matrix_oracle(stepped, lam):
    exact = stepped_omega(stepped_params(), lam)
    assert abs(omega(stepped, lam) - exact) <= 1e-8 * max(1.0, abs(exact), abs(lam) ** 1.5)


@pytest.mark.parametrize("lam", [-3.0, 2.0, 77.7])
def test_omega_scipy_oracle(tabulated, lam):
    exact = ivp_omega(tabulated, lam)
    assert omega(tabulated, lam) == pytest.approx(exact, rel=1e-8)


def test_wronskian_piece_relations(stepped):
    geo = stepped.geometry
    xs, pcs = [], []
    for p in Piece:
        lo, hi = geo.piece_bounds(p)
        xs += [lo + 0.25 * (hi - lo), lo + 0.75 * (hi - lo)]
        pcs += [p, p]
    W = wronskian_at(stepped, 33.3, xs, pcs)
    w = np.repeat(stepped.weights, 2) * W
    assert np.allclose(w, omega(stepped, 33.3), rtol=1e-8)


def test_omega_scaled_sign(ref):
    rng = np.random.default_rng(7)
    for lam in rng.uniform(0, 1000, 100):
        assert np.sign(omega_scaled(ref, lam)) == np.sign(omega(ref, lam))


def test_omega_scaled_bounded_reference(ref):
    for lam in np.geomspace(1, 1e4, 60):
        assert abs(omega_scaled(ref, lam)) <= 10


@pytest.mark.parametrize(
    "beta2, alpha2p, expected",
    [(1.0, -1.0, 1.5), (1.0, 0.0, 1.0), (0.0, -1.0, 1.0), (0.0, 0.0, 0.5)],
)
def test_envelope_exponent_cases(beta2, alpha2p, expected):
    kw = dict(beta1=1.0 - beta2, beta2=beta2, alpha2p=alpha2p)
    if alpha2p == 0:
        kw.update(alpha1=0.0, alpha2=1.0, alpha1p=1.0)
    assert envelope_exponent(reference_problem(**kw)) == expected


def test_envelope_exponent_matches_growth():
    # rho = alpha1p alpha2 - alpha1 alpha2p > 0 in every case
    for kw in (dict(), dict(beta1=1.0, beta2=0.0),
               dict(alpha1=0.0, alpha2=1.0, alpha1p=1.0, alpha2p=0.0)):
        P = reference_problem(**kw)
        mags = [max(abs(omega_scaled(P, lam)) for lam in np.linspace(L, L * 1.2, 40))
                for L in (400.0, 4000.0)]
        assert 0.05 < mags[1] / mags[0] < 20


def test_volterra_q_zero(ref):
    assert volterra_residual(ref, shoot_phi(ref, 1.0, grid=True)) <= 1e-10


def test_volterra_constant_q():
    P = reference_problem(potential=PerPieceConstant(1.0, 1.0, 1.0))
    assert volterra_residual(P, shoot_phi(P, 4.0, grid=True)) <= 1e-8


def test_volterra_stepped(stepped):
    assert volterra_residual(stepped, shoot_phi(stepped, 50.0, grid=True)) <= 1e-8


def test_volterra_detects_wrong_jump(stepped):
    sol = shoot_phi(stepped, 4.0, grid=True)
    good = volterra_residual(stepped, sol)
    ends = sol.ends.copy()
    ends[Piece.LEFT, 1] *= 2
    bad = dataclasses.replace(sol, ends=ends)
    assert volterra_residual(stepped, bad) > 1e4 * max(good, 1e-15)


def test_volterra_requires_positive_lambda(ref):
    with pytest.raises(ValueError):
        volterra_residual(ref, shoot_phi(ref, -1.0, grid=True))
