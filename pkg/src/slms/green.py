"""Green's function and resolvent.

G(x, y, lam) = chi(x_>) phi(x_<) / omega(lam), where x_< / x_> are the
smaller / larger of (x, y) ordered by (abscissa, piece).  The resolvent is

    u(x) = [phi(x) int_x^b chi f w + chi(x) int_a^x phi f w + gamma^2 f1 phi(x)] / omega

with piece weights w = 1, delta^2, gamma^2, and R'(u) as second component.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NearEigenvaluePole
from .numerics import Grid, GridFunction, HVector, build_grid, inner_product_H
from .problem import Piece, ValidatedProblem
from .solver import ATOL, RTOL, boundary_forms, omega_envelope, shoot_chi, shoot_phi

__all__ = [
    "POLE_GUARD",
    "GreenEval",
    "ResolventInput",
    "ResolventOutput",
    "green_function",
    "green_matrix",
    "resolvent_apply",
    "eigenfunction_expansion_check",
]

POLE_GUARD = 1e-8


@dataclass(frozen=True)
class GreenEval:
    x: float
    y: float
    lam: complex
    value: complex


@dataclass(frozen=True, eq=False)
class ResolventInput:
    """Right-hand side (f, f1); ``f`` is a callable, 3-tuple of callables or GridFunction."""

    f: object
    f1: complex = 0.0


@dataclass(frozen=True, eq=False)
class ResolventOutput:
    grid: Grid
    u: tuple
    du: tuple
    ends: np.ndarray  # (piece, left/right end, (u, u'))
    Rp_u: complex
    residuals: dict

    def as_grid_function(self) -> GridFunction:
        return GridFunction(self.grid, self.u)


def _check_pole(problem, lam, w):
    scaled = abs(w) / omega_envelope(problem, float(np.real(lam)))
    if scaled < POLE_GUARD:
        raise NearEigenvaluePole(
            f"lam={lam} is within the pole guard of an eigenvalue (|omega_scaled|={scaled:.2e})",
            eigenvalue=lam,
        )


def _omega_from(problem, chi):
    u, du = chi.at_a()
    return problem.spec.beta2 * du + problem.spec.beta1 * u


def _pieces_for(problem, xs, sides):
    if sides is None:
        sides = [None] * len(xs)
    return np.array([problem.geometry.piece_of(float(x), s) for x, s in zip(xs, sides)],
                    dtype=int)


def green_matrix(problem: ValidatedProblem, lam, xs, ys, xsides=None, ysides=None,
                 rtol: float = RTOL, atol: float = ATOL) -> np.ndarray:
    """G(x_i, y_j, lam) for all pairs; one phi and one chi shot in total."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    px = _pieces_for(problem, xs, xsides)
    py = _pieces_for(problem, ys, ysides)
    pts = np.concatenate([xs, ys])
    pcs = np.concatenate([px, py])
    phi = shoot_phi(problem, lam, points=pts, pieces=pcs, rtol=rtol, atol=atol)
    chi = shoot_chi(problem, lam, points=pts, pieces=pcs, rtol=rtol, atol=atol)
    w = _omega_from(problem, chi)
    _check_pole(problem, lam, w)
    nx = len(xs)
    phx, phy = phi.points_u[:nx], phi.points_u[nx:]
    chx, chy = chi.points_u[:nx], chi.points_u[nx:]
    # x is the larger point unless (x, piece) < (y, piece); ties -> y is the min point
    x_first = (xs[:, None] < ys[None, :]) | ((xs[:, None] == ys[None, :]) & (px[:, None] < py[None, :]))
    G = np.where(x_first, phx[:, None] * chy[None, :], chx[:, None] * phy[None, :]) / w
    return G


def green_function(problem: ValidatedProblem, lam, x: float, y: float,
                   side_x: int | None = None, side_y: int | None = None, **kw):
    """Green's function value at one pair (x, y)."""
    return green_matrix(problem, lam, [x], [y], [side_x], [side_y], **kw)[0, 0]


def _values_on_grid(grid: Grid, f):
    if isinstance(f, GridFunction):
        return f.values
    return grid.sample(f).values


def resolvent_apply(problem: ValidatedProblem, lam, inp: ResolventInput,
                    grid: Grid | None = None, rtol: float = RTOL,
                    atol: float = ATOL) -> ResolventOutput:
    """Apply (lam I - A)^{-1} to (f, f1) and verify the defining equations."""
    if grid is None:
        grid = inp.f.grid if isinstance(inp.f, GridFunction) else build_grid(problem)
    spec = problem.spec
    phi = shoot_phi(problem, lam, grid=grid, rtol=rtol, atol=atol)
    chi = shoot_chi(problem, lam, grid=grid, rtol=rtol, atol=atol)
    w = _omega_from(problem, chi)
    _check_pole(problem, lam, w)
    fvals = _values_on_grid(grid, inp.f)
    f1 = inp.f1
    weights = problem.weights

    # D(x) = int_a^x phi f w, C(x) = int_x^b chi f w, accumulated across pieces
    tot_phi = [weights[p] * grid.integrate(p, phi.u[p] * fvals[p]) for p in Piece]
    tot_chi = [weights[p] * grid.integrate(p, chi.u[p] * fvals[p]) for p in Piece]
    g2f1 = spec.gamma**2 * f1
    u, du = [], []
    ends = np.zeros((3, 2, 2), dtype=np.result_type(phi.ends, chi.ends, np.asarray(f1), fvals[0]))
    for p in Piece:
        d_before = sum(tot_phi[:p])
        c_after = sum(tot_chi[p + 1:])
        D = d_before + weights[p] * grid.cumulative(p, phi.u[p] * fvals[p])
        C = c_after + tot_chi[p] - weights[p] * grid.cumulative(p, chi.u[p] * fvals[p])
        u.append((phi.u[p] * C + chi.u[p] * D + g2f1 * phi.u[p]) / w)
        du.append((phi.du[p] * C + chi.du[p] * D + g2f1 * phi.du[p]) / w)
        for which, (Dend, Cend) in enumerate(((d_before, c_after + tot_chi[p]),
                                              (d_before + tot_phi[p], c_after))):
            ph, dph = phi.end(p, which)
            ch, dch = chi.end(p, which)
            ends[p, which, 0] = (ph * Cend + ch * Dend + g2f1 * ph) / w
            ends[p, which, 1] = (dph * Cend + dch * Dend + g2f1 * dph) / w

    ub, dub = ends[Piece.RIGHT, 1]
    R, Rp = boundary_forms(problem, (ub, dub))
    ua, dua = ends[Piece.LEFT, 0]

    ode = 0.0
    for p in Piece:
        q = problem.q_on_piece(p, grid.nodes[p])
        upp = grid.differentiate(p, du[p])
        ode = max(ode, float(np.max(np.abs(upp - ((q - lam) * u[p] + fvals[p])))))
    d, g = spec.delta, spec.gamma
    trans = max(
        abs(ends[0, 1, 0] - d * ends[1, 0, 0]),
        abs(ends[0, 1, 1] - d * ends[1, 0, 1]),
        abs(d * ends[1, 1, 0] - g * ends[2, 0, 0]),
        abs(d * ends[1, 1, 1] - g * ends[2, 0, 1]),
    )
    residuals = {
        "ode": ode,
        "bc_a": float(abs(spec.beta1 * ua + spec.beta2 * dua)),
        "bc_lambda": float(abs(lam * Rp + R - f1)),
        "transmission": float(trans),
    }
    return ResolventOutput(grid, tuple(u), tuple(du), ends, Rp, residuals)


def eigenfunction_expansion_check(problem: ValidatedProblem, spectrum, lam, inp: ResolventInput,
                                  N: int | None = None) -> float:
    """Max grid deviation between the resolvent and its truncated eigen-expansion
    sum_{n<N} <f, Psi_n>_H Psi_n(x) / (lam - lam_n)."""
    N = len(spectrum) if N is None else N
    if spectrum.grid is None:
        spectrum.grid = build_grid(problem)
    grid = spectrum.grid
    out = resolvent_apply(problem, lam, inp, grid=grid)
    fvec = HVector(GridFunction(grid, _values_on_grid(grid, inp.f)), inp.f1)
    approx = [np.zeros(len(n), dtype=complex) for n in grid.nodes]
    for n in range(N):
        psi = spectrum.eigenvector(n).normalized()
        c = inner_product_H(problem, fvec, psi.as_hvector()) / (lam - spectrum[n].lambda_n)
        for p in Piece:
            approx[p] += c * psi.phi.values[p]
    return max(float(np.max(np.abs(out.u[p] - approx[p]))) for p in Piece)
