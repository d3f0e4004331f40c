"""Green's function: symmetry, the lambda = 0 closed form, and the resolvent.

At lambda = 0 the reference problem has G(x, y) = max(x, y) - pi, which makes
a convenient exact check of the two-solution construction.
"""

import math

import numpy as np

from slms import ResolventInput, find_eigenvalues, green_matrix, reference_problem, resolvent_apply
from slms.errors import NearEigenvaluePole

ref = reference_problem()
xs = np.linspace(0.1, 3.0, 7)
G0 = green_matrix(ref, 0.0, xs, xs)
print(f"lambda=0: max |G - (max(x,y) - pi)| = {np.max(np.abs(G0 - (np.maximum.outer(xs, xs) - math.pi))):.1e}")

lam = 2.5 + 0.5j
G = green_matrix(ref, lam, xs, xs)
print(f"lambda={lam}: max |G - G^T| = {np.max(np.abs(G - G.T)):.1e}")

# u = (lam - A)^{-1}(f, f1) satisfies the equation, both boundary conditions
# and the transmission conditions; the residuals are reported alongside u.
out = resolvent_apply(ref, 3.3, ResolventInput(lambda x: np.sin(x), 0.5))
for name, r in out.residuals.items():
    print(f"  resolvent residual {name:12s} {r:.1e}")

# Evaluating exactly at an eigenvalue is refused rather than returning garbage.
lam0 = find_eigenvalues(ref, 3)[2].lambda_n
try:
    green_matrix(ref, lam0, [0.5], [1.0])
except NearEigenvaluePole as exc:
    print(f"at lambda_2 = {lam0:.8f}: {type(exc).__name__}")
