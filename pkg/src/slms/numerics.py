"""Shared numerical kernels.

* :class:`Grid` -- composite Gauss-Legendre nodes per piece.  Panel edges
  include the piece ends, potential breakpoints and any caller-supplied
  breaks, so every grid integrand is smooth on each panel.  The same nodes
  serve as the dense output grid of the shooting solver.
* :func:`integrate_piecewise` -- adaptive composite Gauss-Legendre for
  callables.
* :func:`inner_product_H` -- the weighted inner product on L2 (+) C.
* :func:`refine_root`, :func:`derivative_of_analytic`.
"""

from __future__ import annotations

import heapq
import inspect
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence, Union

import numpy as np
from numpy.polynomial import legendre as L
from scipy import optimize

from .errors import MaxIterations, NoSignChange, NonFiniteValue, ToleranceNotReached
from .problem import Piece, ValidatedProblem

__all__ = [
    "DEFAULT_RTOL",
    "GL_ORDER",
    "Grid",
    "GridFunction",
    "HVector",
    "build_grid",
    "integrate_piecewise",
    "inner_product_H",
    "refine_root",
    "derivative_of_analytic",
]

DEFAULT_RTOL = 1e-10
GL_ORDER = 16


@lru_cache(maxsize=None)
def _reference_rule(order: int):
    """Nodes, weights, cumulative-integration and differentiation matrices on [-1, 1]."""
    t, w = L.leggauss(order)
    eye = np.eye(order)
    V = L.legvander(t, order - 1)
    Vinv = np.linalg.inv(V)
    Vint = np.column_stack([L.legval(t, L.legint(eye[j], lbnd=-1)) for j in range(order)])
    Vder = np.column_stack([L.legval(t, L.legder(eye[j])) for j in range(order)])
    return t, w, Vint @ Vinv, Vder @ Vinv


# --------------------------------------------------------------------------
# Grid
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Grid:
    """Composite Gauss-Legendre grid on the three pieces.

    ``edges[p]`` are the panel edges of piece ``p``; ``nodes[p]`` and
    ``weights[p]`` have length ``order * (len(edges[p]) - 1)``.
    """

    edges: tuple
    nodes: tuple
    weights: tuple
    order: int

    @property
    def size(self) -> int:
        return sum(len(n) for n in self.nodes)

    def all_nodes(self) -> np.ndarray:
        return np.concatenate(self.nodes)

    def sample(self, func) -> "GridFunction":
        """Evaluate ``func`` (callable or 3-tuple of callables) on the grid."""
        vals = []
        for p in Piece:
            f = func[p] if isinstance(func, (tuple, list)) else func
            vals.append(np.asarray(_call(f, self.nodes[p], p)) * np.ones(len(self.nodes[p])))
        return GridFunction(self, tuple(vals))

    def integrate(self, piece, values) -> complex | float:
        return np.dot(self.weights[piece], values)

    def cumulative(self, piece, values) -> np.ndarray:
        """Integral from the start of ``piece`` to every node of that piece."""
        _, w, S, _ = _reference_rule(self.order)
        half = 0.5 * np.diff(self.edges[piece])
        v = np.asarray(values).reshape(len(half), self.order)
        inner = (v @ S.T) * half[:, None]
        panel_tot = (v @ w) * half
        offset = np.concatenate([[0.0], np.cumsum(panel_tot)[:-1]])
        return (inner + offset[:, None]).ravel()

    def differentiate(self, piece, values) -> np.ndarray:
        """Spectral derivative panel by panel."""
        _, _, _, D = _reference_rule(self.order)
        half = 0.5 * np.diff(self.edges[piece])
        v = np.asarray(values).reshape(len(half), self.order)
        return ((v @ D.T) / half[:, None]).ravel()


def _call(f, x, piece):
    """f(x, piece) if f has two required positional parameters, else f(x)."""
    try:
        params = inspect.signature(f).parameters.values()
    except (TypeError, ValueError):
        return f(x)
    required = [p for p in params
                if p.default is p.empty and p.kind in (p.POSITIONAL_ONLY, p.POSITIONAL_OR_KEYWORD)]
    return f(x, piece) if len(required) >= 2 else f(x)


def build_grid(problem: ValidatedProblem, panels: int = 32, order: int = GL_ORDER,
               breaks: Sequence[float] = ()) -> Grid:
    """Grid with about ``panels`` panels per piece (more if breakpoints force it)."""
    return _build_grid(problem, int(panels), int(order), tuple(sorted(float(b) for b in breaks)))


@lru_cache(maxsize=64)
def _build_grid(problem, panels, order, breaks):
    t, w, *_ = _reference_rule(order)
    edges, nodes, weights = [], [], []
    for p in Piece:
        lo, hi = problem.geometry.piece_bounds(p)
        seg_breaks = problem.segment_table(p)[0]
        cuts = {lo, hi, *seg_breaks}
        cuts.update(b for b in breaks if lo < b < hi)
        cuts = np.array(sorted(cuts))
        hmax = (hi - lo) / panels
        e = [lo]
        for c0, c1 in zip(cuts[:-1], cuts[1:]):
            m = max(1, int(math.ceil((c1 - c0) / hmax - 1e-9)))
            e.extend(c0 + (c1 - c0) * np.arange(1, m + 1) / m)
        e = np.array(e)
        e[-1] = hi
        mid = 0.5 * (e[1:] + e[:-1])
        half = 0.5 * np.diff(e)
        edges.append(e)
        nodes.append((mid[:, None] + half[:, None] * t).ravel())
        weights.append((half[:, None] * w).ravel())
    return Grid(tuple(edges), tuple(nodes), tuple(weights), order)


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: tuple  # one array per piece

    def __add__(self, other):
        return GridFunction(self.grid, tuple(a + b for a, b in zip(self.values, other.values)))

    def __mul__(self, c):
        return GridFunction(self.grid, tuple(c * a for a in self.values))

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(v))) for v in self.values)


Func = Union[Callable, Sequence[Callable], GridFunction]


@dataclass(frozen=True, eq=False)
class HVector:
    """Element (f, h) of L2(a, b) (+) C."""

    f: Func
    h: complex = 0.0


# --------------------------------------------------------------------------
# Quadrature
# --------------------------------------------------------------------------


def integrate_piecewise(problem: ValidatedProblem, integrand, rel_tol: float = DEFAULT_RTOL,
                        abs_tol: float = 1e-14, max_panels: int = 4096,
                        weighted: bool = False):
    """Sum of the three per-piece integrals of ``integrand``.

    ``integrand`` is a vectorised callable ``f(x)`` or ``f(x, piece)``, or a
    3-tuple of such callables.  Panels are bisected adaptively (largest error
    first) until the error estimate meets ``max(rel_tol*|I|, abs_tol)``.
    Nodes are strictly interior, so interface points are never sampled.
    With ``weighted`` the pieces are weighted by 1, delta**2, gamma**2.
    """
    t, w, *_ = _reference_rule(GL_ORDER)
    pw = problem.weights if weighted else (1.0, 1.0, 1.0)

    def panel(f, p, lo, hi):
        half = 0.5 * (hi - lo)
        vals = np.asarray(_call(f, 0.5 * (lo + hi) + half * t, p))
        return half * np.dot(w, vals * np.ones_like(t))

    total, err_total = 0.0, 0.0
    heap = []
    counter = 0
    for p in Piece:
        f = integrand[p] if isinstance(integrand, (tuple, list)) else integrand
        lo, hi = problem.geometry.piece_bounds(p)
        cuts = np.linspace(lo, hi, 5)
        for c0, c1 in zip(cuts[:-1], cuts[1:]):
            coarse = panel(f, p, c0, c1)
            cm = 0.5 * (c0 + c1)
            fine = panel(f, p, c0, cm) + panel(f, p, cm, c1)
            err = pw[p] * abs(fine - coarse)
            total = total + pw[p] * fine
            err_total += err
            heapq.heappush(heap, (-err, counter, p, c0, c1, fine))
            counter += 1
    n_panels = len(heap)
    while err_total > max(rel_tol * abs(total), abs_tol):
        if n_panels >= max_panels:
            raise ToleranceNotReached(
                f"quadrature error estimate {err_total:.3e} above target after {n_panels} panels",
                estimate=err_total,
            )
        negerr, _, p, c0, c1, fine = heapq.heappop(heap)
        f = integrand[p] if isinstance(integrand, (tuple, list)) else integrand
        total = total - pw[p] * fine
        err_total -= -negerr
        cm = 0.5 * (c0 + c1)
        for s0, s1 in ((c0, cm), (cm, c1)):
            coarse = panel(f, p, s0, s1)
            sm = 0.5 * (s0 + s1)
            fine2 = panel(f, p, s0, sm) + panel(f, p, sm, s1)
            err = pw[p] * abs(fine2 - coarse)
            total = total + pw[p] * fine2
            err_total += err
            heapq.heappush(heap, (-err, counter, p, s0, s1, fine2))
            counter += 1
        n_panels += 1
    return total


def inner_product_H(problem: ValidatedProblem, u: HVector, v: HVector,
                    rel_tol: float = DEFAULT_RTOL):
    """<u, v>_H = int_L f conj(g) + delta^2 int_M ... + gamma^2 int_R ... + (gamma^2/rho) h conj(k)."""
    tail = problem.spec.gamma**2 / problem.rho * u.h * np.conj(v.h)
    fu, fv = u.f, v.f
    if isinstance(fu, GridFunction) or isinstance(fv, GridFunction):
        grid = fu.grid if isinstance(fu, GridFunction) else fv.grid
        gu = fu if isinstance(fu, GridFunction) else grid.sample(fu)
        gv = fv if isinstance(fv, GridFunction) else grid.sample(fv)
        body = sum(
            wp * grid.integrate(p, gu.values[p] * np.conj(gv.values[p]))
            for p, wp in zip(Piece, problem.weights)
        )
    else:
        def prod(p):
            f = fu[p] if isinstance(fu, (tuple, list)) else fu
            g = fv[p] if isinstance(fv, (tuple, list)) else fv
            return lambda x: np.asarray(_call(f, x, p)) * np.conj(_call(g, x, p))

        body = integrate_piecewise(problem, tuple(prod(p) for p in Piece),
                                   rel_tol=rel_tol, weighted=True)
    val = body + tail
    if np.iscomplexobj(val) and np.imag(val) == 0:
        return float(np.real(val))
    return val


# --------------------------------------------------------------------------
# Scalar helpers
# --------------------------------------------------------------------------


def refine_root(f: Callable[[float], float], bracket, tol: float = 1e-14,
                maxiter: int = 200) -> float:
    """Bracketed root of ``f`` (Brent's method) with final bracket width <= ``tol``."""
    lo, hi = map(float, bracket)
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if not (np.isfinite(flo) and np.isfinite(fhi)):
        raise NonFiniteValue(f"non-finite function value on bracket ({lo}, {hi})")
    if np.sign(flo) == np.sign(fhi):
        raise NoSignChange(f"f({lo})={flo:.3e} and f({hi})={fhi:.3e} share a sign")
    try:
        root, info = optimize.brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps,
                                     maxiter=maxiter, full_output=True, disp=False)
    except ValueError as exc:
        raise NoSignChange(str(exc)) from exc
    if not info.converged:
        raise MaxIterations(f"root refinement did not converge in {maxiter} iterations ({info.flag})")
    return root


def derivative_of_analytic(f: Callable, x0: float, scale: float = 1.0) -> float:
    """f'(x0) by the complex step Im f(x0 + ih)/h, h = scale*max(1,|x0|)*1e-100.

    Falls back to a central difference when ``f`` cannot take complex input.
    """
    h = scale * max(1.0, abs(x0)) * 1e-100
    try:
        val = f(complex(x0, h))
    except (TypeError, ValueError):
        val = None
    if val is not None and np.iscomplexobj(val):
        d = float(np.imag(val)) / h
    else:
        hf = scale * max(1.0, abs(x0)) * np.finfo(float).eps ** (1 / 3)
        d = (float(np.real(f(x0 + hf))) - float(np.real(f(x0 - hf)))) / (2 * hf)
    if not math.isfinite(d):
        raise NonFiniteValue(f"derivative at {x0} is not finite")
    return d
