"""Integral transforms and their Lagrange-type sampling reconstructions.

Two kernels are supported:

* ``phi``: F(lam) = sum_p w_p int_p g(x) phi_lam(x) dx
* ``green``: F(lam) = sum_p w_p int_p K(x, lam) conj(g(x)) dx with
  K(x, lam) = omega(lam) G(x, y0, lam) = chi_lam(x_>) phi_lam(x_<),
  entire in lam (the pole of G is cancelled by the zero of omega).  With
  ``product="canonical"`` the prefactor is the truncated canonical product
  instead of omega.

Both transforms are recovered from their values at the eigenvalues by
F(lam) = sum_n F(lam_n) W(lam) / ((lam - lam_n) W'(lam_n)), W = omega or the
canonical product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import MismatchedProvenance
from .green import green_matrix
from .numerics import Grid, GridFunction, build_grid, derivative_of_analytic
from .problem import Piece, ValidatedProblem
from .solver import omega, shoot_chi, shoot_phi
from .spectrum import Spectrum, canonical_product

__all__ = [
    "TransformSpec",
    "TransformSamples",
    "ReconstructionReport",
    "g_preset",
    "transform_direct",
    "transform_via_green",
    "sample_at_spectrum",
    "reconstruct",
    "canonical_series_basis",
    "reconstruction_report",
    "default_eval_points",
    "exponential_type_profile",
]


# --------------------------------------------------------------------------
# g presets
# --------------------------------------------------------------------------


def g_preset(problem: ValidatedProblem, name: str, k: float = 1.0, table=None):
    """Built-in transform densities.

    ``one``, ``zero``, ``bump_mid`` (C-infinity bump filling the Mid piece),
    ``sin_k`` (sin(k pi (x-a)/(b-a))) and ``custom-table`` (per-piece (x, g)
    samples, linearly interpolated; ``table`` maps left/mid/right to pairs).
    """
    geo = problem.geometry
    if name == "one":
        return lambda x: np.ones_like(x)
    if name == "zero":
        return lambda x: np.zeros_like(x)
    if name == "bump_mid":
        c, r = geo.theta, geo.theta_plus - geo.theta

        def bump(x):
            t = (np.asarray(x, dtype=float) - c) / r
            out = np.zeros_like(t)
            inside = np.abs(t) < 1
            out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
            return out

        return bump
    if name == "sin_k":
        return lambda x: np.sin(k * np.pi * (x - geo.a) / (geo.b - geo.a))
    if name == "custom-table":
        if table is None:
            raise ValueError("custom-table preset needs a table")
        fns = []
        for key in ("left", "mid", "right"):
            xs, gs = (np.asarray(v, dtype=float) for v in table[key])
            fns.append(lambda x, xs=xs, gs=gs: np.interp(x, xs, gs))
        return tuple(fns)
    raise ValueError(f"unknown g preset {name!r}")


# --------------------------------------------------------------------------
# Types
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TransformSpec:
    kernel: str  # "phi" | "green"
    g: object  # callable, 3-tuple of callables, or GridFunction
    y0: float | None = None
    y0_side: int | None = None
    product: str = "omega"  # "omega" | "canonical" (green kernel only)
    panels: int = 32

    def __post_init__(self):
        if self.kernel not in ("phi", "green"):
            raise ValueError(f"kernel must be 'phi' or 'green', got {self.kernel!r}")
        if self.kernel == "green" and self.y0 is None:
            raise ValueError("green kernel needs y0")
        if self.product not in ("omega", "canonical"):
            raise ValueError(f"product must be 'omega' or 'canonical', got {self.product!r}")

    def grid(self, problem: ValidatedProblem) -> Grid:
        if isinstance(self.g, GridFunction):
            return self.g.grid
        breaks = (self.y0,) if self.kernel == "green" else ()
        return build_grid(problem, panels=self.panels, breaks=breaks)


@dataclass(frozen=True, eq=False)
class TransformSamples:
    spec: TransformSpec
    lambdas: np.ndarray
    values: np.ndarray
    provenance: tuple

    def __len__(self):
        return len(self.lambdas)


@dataclass(frozen=True, eq=False)
class ReconstructionReport:
    kernel: str
    N: int
    points: np.ndarray
    direct: np.ndarray
    series: np.ndarray
    abs_error: np.ndarray
    rel_error: np.ndarray
    tail: np.ndarray
    alternate_series: np.ndarray | None = None
    alternate_discrepancy: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def max_rel_error(self) -> float:
        return float(np.max(self.rel_error)) if len(self.rel_error) else 0.0

    def to_dict(self) -> dict:
        def enc(a):
            if a is None:
                return None
            a = np.asarray(a)
            if np.iscomplexobj(a):
                return {"re": a.real.tolist(), "im": a.imag.tolist()}
            return a.tolist()

        return {
            "kernel": self.kernel,
            "N": self.N,
            "points": enc(self.points),
            "direct": enc(self.direct),
            "series": enc(self.series),
            "abs_error": enc(self.abs_error),
            "rel_error": enc(self.rel_error),
            "tail": enc(self.tail),
            "max_rel_error": self.max_rel_error,
            "alternate_series": enc(self.alternate_series),
            "alternate_discrepancy": enc(self.alternate_discrepancy),
            "diagnostics": self.diagnostics,
        }


# --------------------------------------------------------------------------
# Direct transforms
# --------------------------------------------------------------------------


def _g_values(grid: Grid, g):
    return g.values if isinstance(g, GridFunction) else grid.sample(g).values


def _y0_piece(problem, spec):
    return int(problem.geometry.piece_of(float(spec.y0), spec.y0_side))


def _green_kernel_sum(problem, spec, grid, gvals, phi, chi):
    """sum_p w_p int K conj(g) with K = chi(x_>) phi(x_<) about y0."""
    py = _y0_piece(problem, spec)
    phi_y0, chi_y0 = phi.points_u[0], chi.points_u[0]
    total = 0.0
    for p, wp in zip(Piece, problem.weights):
        x = grid.nodes[p]
        before = (p < py) | ((p == py) & (x < spec.y0))
        K = np.where(before, chi_y0 * phi.u[p], phi_y0 * chi.u[p])
        total = total + wp * grid.integrate(p, K * np.conj(gvals[p]))
    return total


def transform_direct(problem: ValidatedProblem, spec: TransformSpec, lam,
                     spectrum: Spectrum | None = None, N: int | None = None):
    """F(lam) by quadrature of the chosen kernel.

    For ``product="canonical"`` the kernel is scaled by W(lam)/omega(lam), W
    the canonical product truncated at ``N`` eigenvalues of ``spectrum``; at
    an eigenvalue that ratio is replaced by its limit W'(lam_n)/omega'(lam_n).
    """
    grid = spec.grid(problem)
    gvals = _g_values(grid, spec.g)
    if spec.kernel == "phi":
        phi = shoot_phi(problem, lam, grid=grid)
        return sum(wp * grid.integrate(p, gvals[p] * phi.u[p])
                   for p, wp in zip(Piece, problem.weights))
    pts, pcs = [spec.y0], [_y0_piece(problem, spec)]
    phi = shoot_phi(problem, lam, grid=grid, points=pts, pieces=pcs)
    chi = shoot_chi(problem, lam, grid=grid, points=pts, pieces=pcs)
    F = _green_kernel_sum(problem, spec, grid, gvals, phi, chi)
    if spec.product == "canonical":
        if spectrum is None:
            raise ValueError("canonical product needs a spectrum")
        F = F * _canonical_over_omega(problem, spectrum, lam, N)
    return F


def _canonical_over_omega(problem, spectrum, lam, N):
    lams = spectrum.eigenvalues[:N]
    k = int(np.argmin(np.abs(lams - lam)))
    W = lambda z: canonical_product(lams, z)[0]
    if abs(lam - lams[k]) <= 1e-12 * max(1.0, abs(lams[k])):
        return derivative_of_analytic(W, float(lams[k])) / spectrum[k].omega_prime
    return W(lam) / omega(problem, lam)


def transform_via_green(problem: ValidatedProblem, spec: TransformSpec, lam):
    """Green-kernel transform computed as omega(lam) * int G(x, y0, lam) conj(g):
    the pole-carrying route, used to approach an eigenvalue from outside."""
    grid = spec.grid(problem)
    gvals = _g_values(grid, spec.g)
    xs = grid.all_nodes()
    sizes = [len(n) for n in grid.nodes]
    G = green_matrix(problem, lam, xs, [spec.y0], xsides=[None] * len(xs),
                     ysides=[spec.y0_side])[:, 0]
    total, start = 0.0, 0
    for p, wp in zip(Piece, problem.weights):
        total = total + wp * grid.integrate(p, G[start:start + sizes[p]] * np.conj(gvals[p]))
        start += sizes[p]
    return omega(problem, lam) * total


# --------------------------------------------------------------------------
# Sampling and reconstruction
# --------------------------------------------------------------------------


def sample_at_spectrum(problem: ValidatedProblem, spec: TransformSpec, spectrum: Spectrum,
                       N: int) -> TransformSamples:
    """F(lam_n) for n < N.

    For the green kernel the product form chi(x_>) phi(x_<) is already the
    analytic limit of omega*G at lam_n, so no 0 * inf evaluation occurs.
    """
    if N > len(spectrum):
        raise ValueError(f"N={N} exceeds spectrum length {len(spectrum)}")
    lams = spectrum.eigenvalues[:N]
    vals = [transform_direct(problem, spec, float(l), spectrum=spectrum, N=N) for l in lams]
    vals = np.array(vals) if N else np.zeros(0)
    return TransformSamples(spec, lams, vals, tuple(lams.tolist()))


def reconstruct(samples: TransformSamples, omega_eval: Callable, omega_prime: Sequence[float],
                lam, provenance: tuple | None = None, coincide_tol: float = 1e-12):
    """Truncated sampling series at ``lam``; returns (value, tail_indicator).

    ``omega_eval`` is omega or the canonical product, ``omega_prime`` the
    matching derivatives at the sample points.  Summation runs in ascending n.
    ``tail_indicator`` is |last term| / |partial sum|.
    """
    omega_prime = np.asarray(omega_prime)
    if len(omega_prime) != len(samples) or (
            provenance is not None and tuple(provenance) != samples.provenance):
        raise MismatchedProvenance("derivative values do not belong to the sampled spectrum")
    if len(samples) == 0:
        return 0.0, 0.0
    lams = samples.lambdas
    for k, lk in enumerate(lams):
        if abs(lam - lk) <= coincide_tol * max(1.0, abs(lk)):
            return samples.values[k], 0.0
    W = omega_eval(lam)
    acc = 0.0
    last = 0.0
    for Fn, ln, wp in zip(samples.values, lams, omega_prime):
        last = Fn / ((lam - ln) * wp)
        acc = acc + last
    value = W * acc
    tail = abs(W * last) / abs(value) if value != 0 else (0.0 if last == 0 else math.inf)
    return value, tail


def canonical_series_basis(spectrum: Spectrum, N: int):
    """(W, W'(lam_n)) for the canonical product truncated at N eigenvalues."""
    lams = spectrum.eigenvalues[:N]
    W = lambda z: canonical_product(lams, z)[0]
    Wp = np.array([derivative_of_analytic(W, float(l)) for l in lams])
    return W, Wp


def default_eval_points(spectrum: Spectrum, lo: int = 5, hi: int = 15) -> np.ndarray:
    """Midpoints (lam_n + lam_{n+1})/2 for lo <= n < hi."""
    lams = spectrum.eigenvalues
    hi = min(hi, len(lams) - 1)
    return np.array([(lams[n] + lams[n + 1]) / 2 for n in range(lo, hi)])


def reconstruction_report(problem: ValidatedProblem, spec: TransformSpec, spectrum: Spectrum,
                          N: int, eval_points=None, with_canonical: bool = True,
                          samples: TransformSamples | None = None) -> ReconstructionReport:
    """Direct vs series values at ``eval_points`` (default: gap midpoints).

    The series uses the basis matching ``spec.product``.  For the omega basis
    the canonical-product series is evaluated alongside as ``alternate_series``.
    A truncated canonical product turns the series into polynomial
    interpolation, so that discrepancy is a diagnostic, not an accuracy measure.
    """
    if eval_points is None:
        eval_points = default_eval_points(spectrum)
    pts = np.asarray(eval_points)
    samples = samples or sample_at_spectrum(problem, spec, spectrum, N)
    w_basis = (lambda z: omega(problem, z)), spectrum.omega_primes[:N]
    if spec.product == "canonical":
        # samples already carry the W/omega factor; an omega-basis rerun is meaningless
        primary, secondary = canonical_series_basis(spectrum, N), None
    else:
        primary = w_basis
        secondary = canonical_series_basis(spectrum, N) if with_canonical and N > 0 else None
    direct, series, tail, other = [], [], [], []
    for lam in pts:
        lam = complex(lam) if np.iscomplexobj(lam) else float(lam)
        direct.append(transform_direct(problem, spec, lam, spectrum=spectrum, N=N))
        v, t = reconstruct(samples, *primary, lam)
        series.append(v)
        tail.append(t)
        if secondary is not None:
            other.append(reconstruct(samples, *secondary, lam)[0])
    direct = np.array(direct)
    series = np.array(series)
    tiny = np.finfo(float).tiny
    abs_err = np.abs(series - direct)
    rel_err = abs_err / np.maximum(np.abs(direct), tiny)
    other = np.array(other) if secondary is not None else None
    disc = np.abs(other - series) / np.maximum(np.abs(series), tiny) if other is not None else None
    diagnostics = {}
    if disc is not None and len(disc):
        diagnostics["omega_vs_canonical_max_rel"] = float(np.max(disc))
    return ReconstructionReport(spec.kernel, N, pts, direct, series, abs_err, rel_err,
                                np.array(tail), other, disc, diagnostics)


def exponential_type_profile(problem: ValidatedProblem, spec: TransformSpec, ts) -> np.ndarray:
    """log|F(-t^2)| / t for the given t > 0 (sqrt(lam) = i t); a growth diagnostic only."""
    return np.array([math.log(abs(transform_direct(problem, spec, -float(t) ** 2))) / t for t in ts])
