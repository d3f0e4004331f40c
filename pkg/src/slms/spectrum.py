"""Eigenvalues, norming and coupling constants, eigenvectors, canonical product."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateRatio, ScanRangeExhausted, SuspectedDoubleRoot
from .numerics import Grid, GridFunction, HVector, build_grid, derivative_of_analytic, inner_product_H, refine_root
from .problem import Piece, ValidatedProblem
from .solver import (
    ATOL,
    RTOL,
    ShotSolution,
    boundary_forms,
    omega,
    omega_envelope,
    omega_scaled,
    shoot_chi,
    shoot_phi,
)

log = logging.getLogger(__name__)

__all__ = [
    "ScanOptions",
    "EigenRecord",
    "EigenVectorH",
    "Spectrum",
    "predict_sqrt_eigenvalue",
    "find_eigenvalues",
    "norm_squared",
    "coupling_constant",
    "orthogonality_matrix",
    "canonical_product",
]


@dataclass(frozen=True)
class ScanOptions:
    """Search settings.

    ``points_per_spacing`` grid points per predicted gap pi/(b-a) in sqrt(lam);
    negative eigenvalues are sought down to ``floor``; the scan gives up above
    ``max_lambda`` (default: generous multiple of the predicted last root).
    """

    floor: float = -100.0
    points_per_spacing: int = 8
    max_lambda: float | None = None
    rtol: float = RTOL
    atol: float = ATOL
    root_tol: float = 1e-13
    panels: int = 32
    with_vectors: bool = True
    strict: bool = False


@dataclass(frozen=True)
class EigenRecord:
    n: int
    lambda_n: float
    omega_prime: float
    norm_sq: float
    k_n: float
    bracket: tuple
    residual: float
    k_deviation: float = float("nan")

    @property
    def sqrt_lambda(self) -> float:
        """sign(lam) * sqrt(|lam|)."""
        return math.copysign(math.sqrt(abs(self.lambda_n)), self.lambda_n)


@dataclass(frozen=True, eq=False)
class EigenVectorH:
    """Phi_n = (phi_{lam_n}, R'(phi_{lam_n})) on the dense grid."""

    phi: GridFunction
    h: float
    norm: float

    def as_hvector(self) -> HVector:
        return HVector(self.phi, self.h)

    def normalized(self) -> "EigenVectorH":
        return EigenVectorH(self.phi * (1.0 / self.norm), self.h / self.norm, 1.0)


@dataclass(eq=False)
class Spectrum:
    problem: ValidatedProblem
    records: list
    grid: Grid | None = None
    scan_range: tuple = (float("nan"), float("nan"))
    grid_density: int = 0
    warnings: list = field(default_factory=list)
    _shots: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i) -> EigenRecord:
        return self.records[i]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([r.lambda_n for r in self.records])

    @property
    def omega_primes(self) -> np.ndarray:
        return np.array([r.omega_prime for r in self.records])

    def shots(self, n: int) -> tuple[ShotSolution, ShotSolution]:
        """(phi, chi) at lam_n on the spectrum grid (cached)."""
        if n not in self._shots:
            if self.grid is None:
                self.grid = build_grid(self.problem)
            lam = self.records[n].lambda_n
            self._shots[n] = (shoot_phi(self.problem, lam, grid=self.grid),
                              shoot_chi(self.problem, lam, grid=self.grid))
        return self._shots[n]

    def eigenvector(self, n: int) -> EigenVectorH:
        phi, _ = self.shots(n)
        _, rp = boundary_forms(self.problem, phi)
        nsq = self.records[n].norm_sq
        if not nsq > 0:
            nsq = norm_squared(self.problem, phi)
        return EigenVectorH(phi.as_grid_function(), float(rp), math.sqrt(nsq))

    def truncated(self, count: int) -> "Spectrum":
        sp = Spectrum(self.problem, self.records[:count], self.grid, self.scan_range,
                      self.grid_density, list(self.warnings))
        sp._shots = {k: v for k, v in self._shots.items() if k < count}
        return sp


def predict_sqrt_eigenvalue(problem: ValidatedProblem, n: int) -> float:
    """Leading-order sqrt(lam_n); used only to size the scan grid.

    The case is chosen by whether beta2 and alpha2p vanish (the coefficients
    of the dominant term of omega): offsets n-1, n-1/2, n-1/2, n.
    """
    s = problem.spec
    L = problem.geometry.b - problem.geometry.a
    if s.beta2 != 0:
        shift = 1.0 if s.alpha2p != 0 else 0.5
    else:
        shift = 0.5 if s.alpha2p != 0 else 0.0
    return (n - shift) * math.pi / L


def _scan_grid(problem: ValidatedProblem, opts: ScanOptions, s_lo: float, s_hi: float):
    """Grid in lam, uniform in signed sqrt(lam) on [s_lo, s_hi]."""
    L = problem.geometry.b - problem.geometry.a
    ds = math.pi / L / opts.points_per_spacing
    m = max(2, int(math.ceil((s_hi - s_lo) / ds)) + 1)
    sgrid = np.linspace(s_lo, s_hi, m)
    return np.sign(sgrid) * sgrid**2


def find_eigenvalues(problem: ValidatedProblem, count: int,
                     scan_opts: ScanOptions | None = None) -> Spectrum:
    """First ``count`` real zeros of omega, scanning upward from ``floor``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    opts = scan_opts or ScanOptions()
    L = problem.geometry.b - problem.geometry.a
    spacing = math.pi / L
    s_floor = -math.sqrt(max(0.0, -opts.floor))
    s_max = (math.sqrt(opts.max_lambda) if opts.max_lambda is not None
             else 4.0 * abs(predict_sqrt_eigenvalue(problem, count + 4)) + 20 * spacing)

    def f(lam):
        return omega_scaled(problem, lam, opts.rtol, opts.atol)

    roots, brackets, warnings = [], [], []
    chunk = 16 * spacing
    s_lo = s_floor
    prev_lam, prev_val = None, None
    hist = []  # last few (lam, val) pairs for dip detection
    while len(roots) < count:
        if s_lo >= s_max:
            raise ScanRangeExhausted(
                f"found {len(roots)} of {count} eigenvalues below lam={s_max**2:.6g}"
            )
        s_hi = min(s_lo + chunk, s_max)
        lams = _scan_grid(problem, opts, s_lo, s_hi)
        if prev_lam is not None:
            lams = lams[1:]
        for lam in lams:
            val = f(lam)
            if prev_lam is not None:
                if val == 0.0:
                    roots.append(float(lam))
                    brackets.append((float(lam), float(lam)))
                elif prev_val != 0.0 and np.sign(val) != np.sign(prev_val):
                    r = refine_root(f, (prev_lam, lam), tol=opts.root_tol * max(1.0, abs(lam)))
                    roots.append(r)
                    brackets.append((float(prev_lam), float(lam)))
            hist.append((lam, val))
            if len(hist) >= 3:
                (l0, v0), (l1, v1), (l2, v2) = hist[-3:]
                if (abs(v1) < 1e-6 and abs(v1) <= abs(v0) and abs(v1) <= abs(v2)
                        and np.sign(v0) == np.sign(v1) == np.sign(v2)):
                    msg = f"suspected double root near lam={l1:.12g} (|omega_scaled|={abs(v1):.2e})"
                    if opts.strict:
                        raise SuspectedDoubleRoot(msg)
                    log.warning(msg)
                    warnings.append(msg)
                del hist[:-3]
            prev_lam, prev_val = lam, val
            if len(roots) >= count:
                break
        s_lo = s_hi

    roots = roots[:count]
    brackets = brackets[:count]
    sroots = [math.copysign(math.sqrt(abs(r)), r) for r in roots]
    for i in range(1, len(sroots)):
        if sroots[i - 1] >= 0 and sroots[i] - sroots[i - 1] > 1.5 * spacing:
            msg = (f"possible missed root between lam_{i - 1}={roots[i - 1]:.10g} "
                   f"and lam_{i}={roots[i]:.10g}")
            log.warning(msg)
            warnings.append(msg)
    n_big = [i for i, s in enumerate(sroots) if s > 0]
    if n_big:
        i = n_big[-1]
        pred = predict_sqrt_eigenvalue(problem, i)
        if abs(pred - sroots[i]) > 0.75 * spacing:
            warnings.append(f"index offset: sqrt(lam_{i})={sroots[i]:.6g} vs leading-order "
                            f"prediction {pred:.6g}")

    grid = build_grid(problem, panels=opts.panels) if opts.with_vectors else None
    spec = Spectrum(problem, [], grid, (float(np.sign(s_floor) * s_floor**2), float(s_max**2)),
                    opts.points_per_spacing, warnings)
    records = []
    for n, (lam, br) in enumerate(zip(roots, brackets)):
        wprime = derivative_of_analytic(lambda z: omega(problem, z, opts.rtol, opts.atol), lam)
        resid = abs(omega(problem, lam, opts.rtol, opts.atol)) / omega_envelope(problem, lam)
        rec = EigenRecord(n, lam, wprime, float("nan"), float("nan"), br, resid)
        if opts.with_vectors:
            spec.records = records + [rec]
            phi, chi = spec.shots(n)
            nsq = norm_squared(problem, phi)
            k, dev = coupling_constant(problem, phi, chi)
            rec = EigenRecord(n, lam, wprime, nsq, k, br, resid, dev)
        records.append(rec)
    spec.records = records
    return spec


def norm_squared(problem: ValidatedProblem, rec) -> float:
    """||Phi_n||_H^2 = <phi, phi>_H-body + (gamma^2/rho) R'(phi)^2.

    ``rec`` is a phi :class:`ShotSolution` on a grid, or an :class:`EigenRecord`
    (phi is then re-shot on the default grid).
    """
    phi = rec if isinstance(rec, ShotSolution) else shoot_phi(problem, rec.lambda_n, grid=True)
    _, rp = boundary_forms(problem, phi)
    v = HVector(phi.as_grid_function(), rp)
    return float(np.real(inner_product_H(problem, v, v)))


def coupling_constant(problem: ValidatedProblem, phi, chi=None, mask_level: float = 1e-3):
    """Least-squares k with chi = k phi at an eigenvalue, and the max relative
    deviation of the pointwise ratio chi/phi from k.

    The ratio is examined only where |phi| >= ``mask_level`` * max|phi|; at
    zeros of phi it is 0/0.
    """
    if isinstance(phi, EigenRecord):
        lam = phi.lambda_n
        phi = shoot_phi(problem, lam, grid=True)
        chi = shoot_chi(problem, lam, grid=phi.grid)
    p = np.concatenate(phi.u)
    c = np.concatenate(chi.u)
    denom = float(np.dot(p, p))
    if denom == 0.0 or not np.any(p):
        raise DegenerateRatio("phi vanishes on the whole grid")
    k = float(np.dot(c, p) / denom)
    if k == 0.0:
        raise DegenerateRatio("chi is orthogonal to phi on the grid; not an eigenvalue?")
    keep = np.abs(p) >= mask_level * np.max(np.abs(p))
    dev = float(np.max(np.abs(c[keep] / p[keep] - k)) / abs(k))
    return k, dev


def orthogonality_matrix(problem: ValidatedProblem, spectrum: Spectrum, upto: int) -> np.ndarray:
    """Gram matrix <Psi_n, Psi_m>_H of the first ``upto`` normalised eigenvectors."""
    if upto > len(spectrum):
        raise ValueError(f"upto={upto} exceeds spectrum length {len(spectrum)}")
    vecs = [spectrum.eigenvector(n).normalized().as_hvector() for n in range(upto)]
    G = np.empty((upto, upto))
    for i in range(upto):
        for j in range(i, upto):
            G[i, j] = G[j, i] = np.real(inner_product_H(problem, vecs[i], vecs[j]))
    return G


def canonical_product(spectrum, lam, N: int | None = None, zero_tol: float = 1e-12):
    """Truncated canonical product over the first ``N`` eigenvalues.

    Returns (value, tail) where ``tail`` is the product of the last 10% of
    the factors (close to 1 when the truncation has settled).
    """
    lams = spectrum.eigenvalues if isinstance(spectrum, Spectrum) else np.asarray(spectrum, float)
    if N is not None:
        lams = lams[:N]
    prefactor = 1.0
    if len(lams) and abs(lams[0]) < zero_tol:
        prefactor = lam
        lams = lams[1:]
    factors = [1.0 - lam / ln for ln in lams]
    value = prefactor
    for fct in factors:
        value = value * fct
    m = max(1, len(factors) // 10) if factors else 0
    tail = 1.0
    for fct in factors[len(factors) - m:]:
        tail = tail * fct
    return value, tail
