"""Fundamental solutions, boundary forms and the characteristic function.

``phi`` starts at ``a`` with (u, u') = (beta2, -beta1) and is marched to the
right; ``chi`` starts at ``b`` with (lam*alpha2p + alpha2, lam*alpha1p + alpha1)
and is marched to the left.  Integration halts exactly at both interfaces,
where the transmission jumps are applied algebraically.

The characteristic function ``omega`` is the Wronskian on the Left piece,
evaluated at ``x = a`` where ``phi`` equals its initial data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _rk
from .errors import IntegratorFailure
from .numerics import Grid, GridFunction, build_grid
from .problem import Piece, ValidatedProblem

__all__ = [
    "RTOL",
    "ATOL",
    "SolutionSample",
    "ShotSolution",
    "shoot_phi",
    "shoot_chi",
    "boundary_forms",
    "omega",
    "wronskian_at",
    "envelope_exponent",
    "omega_envelope",
    "omega_scaled",
    "volterra_residual",
]

RTOL = 1e-10
ATOL = 1e-12


@dataclass(frozen=True)
class SolutionSample:
    x: float
    piece: Piece
    u: complex
    du: complex


@dataclass(frozen=True, eq=False)
class ShotSolution:
    """A shot solution: dense grid values plus both-sided interface values.

    ``ends[p, 0]`` is (u, u') at the left end of piece ``p`` and ``ends[p, 1]``
    at its right end; the two sides of an interface therefore sit in adjacent
    pieces.  ``points_*`` hold values at extra caller-requested abscissae.
    """

    kind: str
    lam: complex
    grid: Grid | None
    u: tuple
    du: tuple
    ends: np.ndarray
    points_x: np.ndarray
    points_piece: np.ndarray
    points_u: np.ndarray
    points_du: np.ndarray

    def end(self, piece, which: int) -> tuple:
        return self.ends[piece, which, 0], self.ends[piece, which, 1]

    def at_a(self):
        return self.end(Piece.LEFT, 0)

    def at_b(self):
        return self.end(Piece.RIGHT, 1)

    def samples(self, piece) -> list[SolutionSample]:
        p = Piece(piece)
        return [SolutionSample(float(x), p, u, du)
                for x, u, du in zip(self.grid.nodes[p], self.u[p], self.du[p])]

    def as_grid_function(self, derivative: bool = False) -> GridFunction:
        return GridFunction(self.grid, self.du if derivative else self.u)


@lru_cache(maxsize=256)
def _segments(problem: ValidatedProblem, piece: int):
    breaks, coef, origin = problem.segment_table(piece)
    return (np.ascontiguousarray(breaks, dtype=float),
            np.ascontiguousarray(coef, dtype=float),
            np.ascontiguousarray(origin, dtype=float))


def _march_piece(problem, piece, y0, lam, start, stop, extra, rtol, atol):
    """March one piece from ``start`` to ``stop``; returns {x: (u, du)} at all stops."""
    breaks, coef, origin = _segments(problem, int(piece))
    lo, hi = min(start, stop), max(start, stop)
    pts = [start, stop, *breaks[(breaks > lo) & (breaks < hi)]]
    pts.extend(extra)
    stops = np.unique(np.asarray(pts, dtype=float))
    if stop < start:
        stops = stops[::-1]
    mids = 0.5 * (stops[1:] + stops[:-1])
    seg = np.clip(np.searchsorted(breaks, mids, side="right") - 1, 0, len(coef) - 1)
    out, status, _ = _rk.march(y0, lam, stops, seg.astype(np.int64), coef, origin,
                               rtol, atol, 0.0)
    if status != 0:
        reason = {1: "step-size underflow", 2: "non-finite state", 3: "step budget exhausted"}
        raise IntegratorFailure(
            f"integration of piece {Piece(piece).name} failed at lam={lam}: {reason[status]}"
        )
    if not np.all(np.isfinite(out)):
        raise IntegratorFailure(f"non-finite solution on piece {Piece(piece).name} at lam={lam}")
    return stops, out


def _shoot(problem: ValidatedProblem, lam, kind: str, grid: Grid | None, points, pieces,
           rtol: float, atol: float) -> ShotSolution:
    s = problem.spec
    is_complex = isinstance(lam, complex) or np.iscomplexobj(lam)
    dtype = np.complex128 if is_complex else np.float64
    lam = complex(lam) if is_complex else float(lam)

    points = np.atleast_1d(np.asarray(points if points is not None else [], dtype=float))
    if pieces is None:
        pieces = np.array([problem.geometry.piece_of(x, None) for x in points], dtype=int)
    pieces = np.atleast_1d(np.asarray(pieces, dtype=int))

    ends = np.zeros((3, 2, 2), dtype=dtype)
    u_grid, du_grid = [None] * 3, [None] * 3
    pu = np.zeros(len(points), dtype=dtype)
    pdu = np.zeros(len(points), dtype=dtype)

    if kind == "phi":
        order = (Piece.LEFT, Piece.MID, Piece.RIGHT)
        y = np.array([s.beta2, -s.beta1], dtype=dtype)
        jumps = (1.0 / s.delta, s.delta / s.gamma)
    else:
        order = (Piece.RIGHT, Piece.MID, Piece.LEFT)
        y = np.array([lam * s.alpha2p + s.alpha2, lam * s.alpha1p + s.alpha1], dtype=dtype)
        jumps = (s.gamma / s.delta, s.delta)

    for k, p in enumerate(order):
        lo, hi = problem.geometry.piece_bounds(p)
        start, stop = (lo, hi) if kind == "phi" else (hi, lo)
        extra = list(points[pieces == p])
        if grid is not None:
            extra.extend(grid.nodes[p])
            extra.extend(grid.edges[p])
        stops, out = _march_piece(problem, p, y, lam, start, stop, extra, rtol, atol)
        if stop < start:
            stops, out = stops[::-1], out[::-1]
        ends[p, 0] = out[0]
        ends[p, 1] = out[-1]
        if grid is not None:
            idx = np.searchsorted(stops, grid.nodes[p])
            u_grid[p], du_grid[p] = out[idx, 0], out[idx, 1]
        sel = np.flatnonzero(pieces == p)
        if len(sel):
            idx = np.searchsorted(stops, points[sel])
            pu[sel], pdu[sel] = out[idx, 0], out[idx, 1]
        if k < 2:
            y = (out[-1] if kind == "phi" else out[0]) * jumps[k]
            y = np.ascontiguousarray(y, dtype=dtype)

    return ShotSolution(kind, lam, grid, tuple(u_grid), tuple(du_grid), ends,
                        points, pieces, pu, pdu)


def shoot_phi(problem: ValidatedProblem, lam, grid: Grid | None = None, points=None,
              pieces=None, rtol: float = RTOL, atol: float = ATOL) -> ShotSolution:
    """Left-normalised solution; pass ``grid=True`` for the default dense grid."""
    if grid is True:
        grid = build_grid(problem)
    return _shoot(problem, lam, "phi", grid, points, pieces, rtol, atol)


def shoot_chi(problem: ValidatedProblem, lam, grid: Grid | None = None, points=None,
              pieces=None, rtol: float = RTOL, atol: float = ATOL) -> ShotSolution:
    """Right-normalised solution; pass ``grid=True`` for the default dense grid."""
    if grid is True:
        grid = build_grid(problem)
    return _shoot(problem, lam, "chi", grid, points, pieces, rtol, atol)


def boundary_forms(problem: ValidatedProblem, sol: ShotSolution | tuple):
    """(R(u), R'(u)) = (alpha1 u(b) - alpha2 u'(b), alpha1p u(b) - alpha2p u'(b))."""
    ub, dub = sol.at_b() if isinstance(sol, ShotSolution) else sol
    s = problem.spec
    return s.alpha1 * ub - s.alpha2 * dub, s.alpha1p * ub - s.alpha2p * dub


def omega(problem: ValidatedProblem, lam, rtol: float = RTOL, atol: float = ATOL):
    """Characteristic function; its zeros are the eigenvalues."""
    chi = _shoot(problem, lam, "chi", None, None, None, rtol, atol)
    u, du = chi.at_a()
    s = problem.spec
    return s.beta2 * du + s.beta1 * u


def wronskian_at(problem: ValidatedProblem, lam, points, pieces=None,
                 rtol: float = RTOL, atol: float = ATOL) -> np.ndarray:
    """Raw Wronskian phi chi' - phi' chi at each point, on the tagged piece."""
    phi = shoot_phi(problem, lam, points=points, pieces=pieces, rtol=rtol, atol=atol)
    chi = shoot_chi(problem, lam, points=points, pieces=pieces, rtol=rtol, atol=atol)
    return phi.points_u * chi.points_du - phi.points_du * chi.points_u


def envelope_exponent(problem: ValidatedProblem) -> float:
    """Growth power p of |omega| ~ |lam|^p along the positive axis.

    Keyed on the leading term of the q = 0 closed form,
    ``gamma * lam * (alpha1p c(b) - alpha2p c'(b))`` with
    ``c = beta2 cos(s(x-a)) - beta1 sin(s(x-a))/s``: beta2 and alpha2p decide.
    """
    s = problem.spec
    if s.beta2 != 0:
        return 1.5 if s.alpha2p != 0 else 1.0
    return 1.0 if s.alpha2p != 0 else 0.5


def omega_envelope(problem: ValidatedProblem, lam: float) -> float:
    p = envelope_exponent(problem)
    env = max(1.0, abs(lam) ** p)
    if lam < 0:
        env *= math.cosh(math.sqrt(-lam) * (problem.geometry.b - problem.geometry.a))
    return env


def omega_scaled(problem: ValidatedProblem, lam: float, rtol: float = RTOL,
                 atol: float = ATOL) -> float:
    """omega(lam) divided by a positive growth envelope, for scanning."""
    lam = float(lam)
    return omega(problem, lam, rtol, atol) / omega_envelope(problem, lam)


def volterra_residual(problem: ValidatedProblem, sol: ShotSolution) -> float:
    """Max defect of the Volterra integral equations satisfied by phi (k = 0 and 1).

    On each piece with start x_p,
        phi(x) = U cos(s(x-x_p)) + V sin(s(x-x_p))/s + (1/s) int_{x_p}^x sin(s(x-y)) q phi dy,
    where (U, V) is (beta2, -beta1) on the Left piece and the jump-scaled
    left limits delta^-1 phi(theta_-) resp. delta gamma^-1 phi(theta_+) on the
    others.  The integral uses the computed phi, so the check is independent
    of the marching scheme.
    """
    if sol.kind != "phi" or sol.grid is None:
        raise ValueError("volterra_residual needs a phi solution shot on a grid")
    lam = sol.lam
    if np.iscomplexobj(lam) or not lam > 0:
        raise ValueError("volterra_residual is defined for real lam > 0")
    s = math.sqrt(lam)
    spec = problem.spec
    grid = sol.grid
    starts = (
        (spec.beta2, -spec.beta1),
        tuple(v / spec.delta for v in sol.end(Piece.LEFT, 1)),
        tuple(v * spec.delta / spec.gamma for v in sol.end(Piece.MID, 1)),
    )
    worst = 0.0
    for p in Piece:
        x0 = problem.geometry.piece_bounds(p)[0]
        t = grid.nodes[p] - x0
        qphi = problem.q_on_piece(p, grid.nodes[p]) * sol.u[p]
        C = grid.cumulative(p, np.cos(s * t) * qphi)
        S = grid.cumulative(p, np.sin(s * t) * qphi)
        U, V = starts[p]
        rhs0 = U * np.cos(s * t) + V * np.sin(s * t) / s + (np.sin(s * t) * C - np.cos(s * t) * S) / s
        rhs1 = -U * s * np.sin(s * t) + V * np.cos(s * t) + np.cos(s * t) * C + np.sin(s * t) * S
        worst = max(worst, float(np.max(np.abs(sol.u[p] - rhs0))),
                    float(np.max(np.abs(sol.du[p] - rhs1)) / max(1.0, s)))
    return worst
