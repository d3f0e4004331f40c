"""Eigenvalues of the reference problem and a stepped variant.

For q = 0, u'(0) = 0 and lam u'(pi) + u(pi) = 0 the characteristic function
has the closed form cos(s pi) - lam s sin(s pi) with s = sqrt(lam), so the
shooting result can be checked against a direct root search of that formula.
"""

import math

import numpy as np
from scipy.optimize import brentq

from slms import PerPieceConstant, find_eigenvalues, orthogonality_matrix, reference_problem


def closed_form_roots(count):
    f = lambda s: math.cos(s * math.pi) - s**3 * math.sin(s * math.pi)
    g = lambda t: math.cosh(t * math.pi) - t**3 * math.sinh(t * math.pi)  # lam = -t^2
    roots = [-brentq(g, 0.5, 2.0)]
    grid = np.linspace(1e-6, count + 2, 20000)
    vals = [f(s) for s in grid]
    for lo, hi, a, b in zip(grid, grid[1:], vals, vals[1:]):
        if a * b < 0:
            roots.append(brentq(f, lo, hi, xtol=1e-15))
    return np.array(roots[:count])


ref = reference_problem()
spec = find_eigenvalues(ref, 12)
s = np.array([r.sqrt_lambda for r in spec.records])
exact = closed_form_roots(12)
print("reference problem: signed sqrt(lambda_n)")
for n, (a, b) in enumerate(zip(s, exact)):
    print(f"  n={n:2d}  shooting {a: .12f}  closed form {b: .12f}  diff {abs(a - b):.1e}")

# The negative eigenvalue comes from the lam-dependent boundary condition.
print(f"lowest eigenvalue {spec[0].lambda_n:.10f}")

# Jumps at the interfaces and a stepped potential shift the spectrum, but the
# gaps between sqrt(lambda_n) still approach pi / (b - a) = 1.
stepped = reference_problem(delta=2.0, gamma=3.0, potential=PerPieceConstant(1.0, 0.0, -1.0))
sspec = find_eigenvalues(stepped, 30)
gaps = np.diff([r.sqrt_lambda for r in sspec.records])
print("stepped problem: gaps of sqrt(lambda_n) minus 1")
for n in (1, 5, 10, 20, 28):
    print(f"  n={n:2d}  {gaps[n] - 1: .3e}")

# Eigenvectors (phi_n, R'(phi_n)) are orthogonal in the weighted product space.
G = orthogonality_matrix(stepped, sspec, 8)
off = np.max(np.abs(G - np.diag(np.diag(G))))
print(f"stepped problem: max off-diagonal Gram entry over 8 modes {off:.1e}")
