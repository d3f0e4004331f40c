"""Problem data: boundary/transmission constants, potential catalog, geometry.

The interval [a, b] is split at ``theta -/+ epsilon`` (``theta`` the midpoint)
into three pieces, indexed 0 (Left), 1 (Mid) and 2 (Right).  At the two
interface points a side flag (-1 or +1) selects the one-sided limit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Any, Mapping, Sequence, Union

import numpy as np

from .errors import (
    BadInterval,
    BadPotentialTable,
    DegenerateLeftBC,
    EpsilonOutOfRange,
    MissingSideFlag,
    OutOfDomain,
    RhoNotPositive,
    ValidationError,
    ZeroTransmission,
)

__all__ = [
    "Piece",
    "ZeroPotential",
    "PerPieceConstant",
    "PerPiecePolynomial",
    "Tabulated",
    "PotentialSpec",
    "ProblemSpec",
    "IntervalGeometry",
    "ValidatedProblem",
    "validate",
    "eval_potential",
    "problem_from_dict",
    "problem_to_dict",
    "load_problem",
    "reference_problem",
]


class Piece(IntEnum):
    LEFT = 0
    MID = 1
    RIGHT = 2


# --------------------------------------------------------------------------
# Potential catalog
#
# Every variant lowers itself to a per-piece "segment table": breakpoints
# lo = s_0 < s_1 < ... < s_m = hi and, on [s_k, s_{k+1}], a polynomial in
# (x - origin_k) with ascending coefficients coef[k].  The integrator only
# ever sees this form.
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroPotential:
    kind = "zero"

    def segments(self, piece, lo, hi):
        return np.array([lo, hi]), np.zeros((1, 1)), np.zeros(1)

    def check(self, geometry):
        pass

    def parameters(self):
        return {}


@dataclass(frozen=True)
class PerPieceConstant:
    left: float
    mid: float
    right: float
    kind = "piecewise_constant"

    def segments(self, piece, lo, hi):
        c = (self.left, self.mid, self.right)[piece]
        return np.array([lo, hi]), np.array([[float(c)]]), np.zeros(1)

    def check(self, geometry):
        if not all(math.isfinite(v) for v in (self.left, self.mid, self.right)):
            raise BadPotentialTable("piecewise constant potential must be finite")

    def parameters(self):
        return {"left": self.left, "mid": self.mid, "right": self.right}


@dataclass(frozen=True)
class PerPiecePolynomial:
    """Polynomial per piece, coefficients in ascending powers of the global x."""

    left: tuple
    mid: tuple
    right: tuple
    kind = "piecewise_polynomial"

    def __post_init__(self):
        for name in ("left", "mid", "right"):
            object.__setattr__(self, name, tuple(float(c) for c in getattr(self, name)))

    def segments(self, piece, lo, hi):
        c = (self.left, self.mid, self.right)[piece] or (0.0,)
        return np.array([lo, hi]), np.array([c], dtype=float), np.zeros(1)

    def check(self, geometry):
        for c in (self.left, self.mid, self.right):
            if not all(math.isfinite(v) for v in c):
                raise BadPotentialTable("polynomial coefficients must be finite")

    def parameters(self):
        return {"left": list(self.left), "mid": list(self.mid), "right": list(self.right)}


@dataclass(frozen=True)
class Tabulated:
    """Per-piece samples (x, q), linearly interpolated inside a piece.

    Outside the first/last abscissa of a piece the nearest sample value is
    held constant.
    """

    left: tuple
    mid: tuple
    right: tuple
    kind = "tabulated"

    def __post_init__(self):
        for name in ("left", "mid", "right"):
            xs, qs = getattr(self, name)
            object.__setattr__(
                self, name, (tuple(float(v) for v in xs), tuple(float(v) for v in qs))
            )

    def _table(self, piece):
        return (self.left, self.mid, self.right)[piece]

    def segments(self, piece, lo, hi):
        xs, qs = (np.asarray(t, dtype=float) for t in self._table(piece))
        breaks, coef, origin = [lo], [], []
        if xs[0] > lo:
            coef.append([qs[0], 0.0])
            origin.append(lo)
            breaks.append(xs[0])
        for k in range(len(xs) - 1):
            slope = (qs[k + 1] - qs[k]) / (xs[k + 1] - xs[k])
            coef.append([qs[k], slope])
            origin.append(xs[k])
            breaks.append(xs[k + 1])
        if xs[-1] < hi or len(coef) == 0:
            coef.append([qs[-1], 0.0])
            origin.append(xs[-1] if xs[-1] < hi else lo)
            breaks.append(hi)
        breaks[-1] = hi
        return np.array(breaks), np.array(coef), np.array(origin)

    def check(self, geometry):
        for piece in Piece:
            xs, qs = self._table(piece)
            lo, hi = geometry.piece_bounds(piece)
            if len(xs) == 0 or len(xs) != len(qs):
                raise BadPotentialTable(
                    f"{piece.name.lower()} table needs matching, non-empty x and q arrays"
                )
            if not (all(map(math.isfinite, xs)) and all(map(math.isfinite, qs))):
                raise BadPotentialTable(f"{piece.name.lower()} table has non-finite entries")
            if any(x1 <= x0 for x0, x1 in zip(xs, xs[1:])):
                raise BadPotentialTable(
                    f"{piece.name.lower()} abscissae must be strictly increasing"
                )
            if xs[0] < lo or xs[-1] > hi:
                raise BadPotentialTable(
                    f"{piece.name.lower()} abscissae leave the piece [{lo}, {hi}]"
                )

    def parameters(self):
        return {
            name: {"x": list(t[0]), "q": list(t[1])}
            for name, t in zip(("left", "mid", "right"), (self.left, self.mid, self.right))
        }


PotentialSpec = Union[ZeroPotential, PerPieceConstant, PerPiecePolynomial, Tabulated]


# --------------------------------------------------------------------------
# Problem data
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ProblemSpec:
    """Raw problem constants.

    ``beta1 u(a) + beta2 u'(a) = 0`` on the left,
    ``lam (alpha1p u(b) - alpha2p u'(b)) + (alpha1 u(b) - alpha2 u'(b)) = 0`` on the
    right, and jumps ``u(t-) = delta u(t+)`` at ``t = theta - epsilon``,
    ``delta u(t-) = gamma u(t+)`` at ``t = theta + epsilon`` (same for ``u'``).
    """

    a: float
    b: float
    epsilon: float
    beta1: float
    beta2: float
    alpha1: float
    alpha2: float
    alpha1p: float
    alpha2p: float
    delta: float = 1.0
    gamma: float = 1.0
    potential: PotentialSpec = field(default_factory=ZeroPotential)

    @property
    def rho(self) -> float:
        return self.alpha1p * self.alpha2 - self.alpha1 * self.alpha2p


@dataclass(frozen=True)
class IntervalGeometry:
    a: float
    b: float
    theta: float
    theta_minus: float
    theta_plus: float

    @property
    def interfaces(self):
        return (self.theta_minus, self.theta_plus)

    def piece_bounds(self, piece) -> tuple[float, float]:
        return (
            (self.a, self.theta_minus),
            (self.theta_minus, self.theta_plus),
            (self.theta_plus, self.b),
        )[piece]

    def piece_of(self, x: float, side: int | None = None) -> Piece:
        """Piece containing ``x``; ``side`` is required exactly at an interface."""
        if not (self.a <= x <= self.b) or math.isnan(x):
            raise OutOfDomain(f"x={x} outside [{self.a}, {self.b}]")
        if x == self.theta_minus or x == self.theta_plus:
            if side not in (-1, 1):
                raise MissingSideFlag(f"x={x} is an interface point; pass side=-1 or +1")
            if x == self.theta_minus:
                return Piece.LEFT if side < 0 else Piece.MID
            return Piece.MID if side < 0 else Piece.RIGHT
        if x < self.theta_minus:
            return Piece.LEFT
        if x < self.theta_plus:
            return Piece.MID
        return Piece.RIGHT


@dataclass(frozen=True)
class ValidatedProblem:
    spec: ProblemSpec
    geometry: IntervalGeometry
    rho: float

    # convenience pass-throughs used throughout the numerical modules
    def __getattr__(self, name):
        if name in ("spec", "geometry", "rho"):
            raise AttributeError(name)
        try:
            return getattr(self.spec, name)
        except AttributeError:
            return getattr(self.geometry, name)

    @property
    def weights(self) -> tuple[float, float, float]:
        """Piece weights of the H inner product: 1, delta**2, gamma**2."""
        return (1.0, self.spec.delta**2, self.spec.gamma**2)

    def segment_table(self, piece):
        lo, hi = self.geometry.piece_bounds(piece)
        return self.spec.potential.segments(int(piece), lo, hi)

    def q_on_piece(self, piece, x) -> np.ndarray:
        """Vectorised potential on one piece (``x`` assumed inside the closed piece)."""
        breaks, coef, origin = self.segment_table(piece)
        x = np.asarray(x, dtype=float)
        k = np.clip(np.searchsorted(breaks, x, side="right") - 1, 0, len(coef) - 1)
        t = x - origin[k]
        out = np.zeros_like(t)
        for j in range(coef.shape[1] - 1, -1, -1):
            out = out * t + coef[k, j]
        return out


def validate(spec: ProblemSpec | ValidatedProblem) -> ValidatedProblem:
    """Check every structural constraint and attach the interval geometry."""
    if isinstance(spec, ValidatedProblem):
        spec = spec.spec
    vals = [spec.a, spec.b, spec.epsilon, spec.beta1, spec.beta2, spec.alpha1,
            spec.alpha2, spec.alpha1p, spec.alpha2p, spec.delta, spec.gamma]
    if not all(math.isfinite(float(v)) for v in vals):
        raise ValidationError("all problem constants must be finite")
    if not spec.b > spec.a:
        raise BadInterval(f"need b > a, got a={spec.a}, b={spec.b}")
    if not 0.0 < spec.epsilon < (spec.b - spec.a) / 2:
        raise EpsilonOutOfRange(
            f"need 0 < epsilon < (b-a)/2 = {(spec.b - spec.a) / 2}, got {spec.epsilon}"
        )
    if spec.beta1 == 0 and spec.beta2 == 0:
        raise DegenerateLeftBC("beta1 and beta2 cannot both vanish")
    if spec.delta == 0 or spec.gamma == 0:
        raise ZeroTransmission(f"delta and gamma must be nonzero (delta={spec.delta}, gamma={spec.gamma})")
    rho = spec.rho
    if not rho > 0:
        raise RhoNotPositive(
            f"rho = alpha1p*alpha2 - alpha1*alpha2p must be positive, got {rho}"
        )
    theta = (spec.a + spec.b) / 2
    geom = IntervalGeometry(spec.a, spec.b, theta, theta - spec.epsilon, theta + spec.epsilon)
    if not (geom.a < geom.theta_minus < geom.theta < geom.theta_plus < geom.b):
        raise EpsilonOutOfRange("epsilon too close to the admissible limits to resolve the pieces")
    spec.potential.check(geom)
    return ValidatedProblem(spec, geom, rho)


def eval_potential(problem: ValidatedProblem, x: float, side: int | None = None) -> float:
    """q(x); at an interface point ``side`` picks the one-sided limit."""
    piece = problem.geometry.piece_of(float(x), side)
    return float(problem.q_on_piece(piece, np.array([float(x)]))[0])


# --------------------------------------------------------------------------
# JSON configuration
# --------------------------------------------------------------------------

_POTENTIAL_KINDS = {
    "zero": ZeroPotential,
    "piecewise_constant": PerPieceConstant,
    "piecewise_polynomial": PerPiecePolynomial,
    "tabulated": Tabulated,
}


def _potential_from_dict(d: Mapping[str, Any] | None) -> PotentialSpec:
    if not d:
        return ZeroPotential()
    kind = d.get("kind", "zero")
    p = d.get("parameters", {}) or {}
    try:
        if kind == "zero":
            return ZeroPotential()
        if kind == "piecewise_constant":
            if isinstance(p, Sequence):
                return PerPieceConstant(*map(float, p))
            return PerPieceConstant(float(p["left"]), float(p["mid"]), float(p["right"]))
        if kind == "piecewise_polynomial":
            return PerPiecePolynomial(p["left"], p["mid"], p["right"])
        if kind == "tabulated":
            return Tabulated(*((p[k]["x"], p[k]["q"]) for k in ("left", "mid", "right")))
    except (KeyError, TypeError) as exc:
        raise BadPotentialTable(f"malformed parameters for potential kind {kind!r}: {exc}") from exc
    raise ValidationError(f"unknown potential kind {kind!r}; expected one of {sorted(_POTENTIAL_KINDS)}")


def problem_from_dict(d: Mapping[str, Any]) -> ValidatedProblem:
    try:
        spec = ProblemSpec(
            a=float(d["interval"]["a"]),
            b=float(d["interval"]["b"]),
            epsilon=float(d["epsilon"]),
            beta1=float(d["left_bc"]["beta1"]),
            beta2=float(d["left_bc"]["beta2"]),
            alpha1=float(d["right_bc"]["alpha1"]),
            alpha2=float(d["right_bc"]["alpha2"]),
            alpha1p=float(d["right_bc"]["alpha1p"]),
            alpha2p=float(d["right_bc"]["alpha2p"]),
            delta=float(d.get("transmission", {}).get("delta", 1.0)),
            gamma=float(d.get("transmission", {}).get("gamma", 1.0)),
            potential=_potential_from_dict(d.get("potential")),
        )
    except KeyError as exc:
        raise ValidationError(f"missing configuration key {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed configuration: {exc}") from exc
    return validate(spec)


def problem_to_dict(problem: ValidatedProblem | ProblemSpec) -> dict:
    s = problem.spec if isinstance(problem, ValidatedProblem) else problem
    return {
        "interval": {"a": s.a, "b": s.b},
        "epsilon": s.epsilon,
        "left_bc": {"beta1": s.beta1, "beta2": s.beta2},
        "right_bc": {"alpha1": s.alpha1, "alpha2": s.alpha2,
                     "alpha1p": s.alpha1p, "alpha2p": s.alpha2p},
        "transmission": {"delta": s.delta, "gamma": s.gamma},
        "potential": {"kind": s.potential.kind, "parameters": s.potential.parameters()},
    }


def load_problem(path: str | Path) -> ValidatedProblem:
    with open(path) as fh:
        return problem_from_dict(json.load(fh))


def reference_problem(**overrides) -> ValidatedProblem:
    """q = 0 on [0, pi] with u'(0) = 0 and lam u'(pi) + u(pi) = 0, epsilon = pi/4."""
    params = dict(a=0.0, b=math.pi, epsilon=math.pi / 4, beta1=0.0, beta2=1.0,
                  alpha1=1.0, alpha2=0.0, alpha1p=0.0, alpha2p=-1.0,
                  delta=1.0, gamma=1.0, potential=ZeroPotential())
    params.update(overrides)
    return validate(ProblemSpec(**params))
