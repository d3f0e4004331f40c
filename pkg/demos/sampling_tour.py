"""Recovering a spectral transform from its values at the eigenvalues.

F(lam) = int g(x) phi(x, lam) w(x) dx is entire in lam.  Knowing F only at
lambda_n, the series sum F(lam_n) omega(lam) / (omega'(lam_n) (lam - lam_n))
rebuilds it between the eigenvalues; the error falls as more samples are used.
"""

import numpy as np

from slms import PerPieceConstant, TransformSpec, find_eigenvalues, g_preset, reconstruction_report, reference_problem
from slms.sampling import exponential_type_profile

problem = reference_problem(delta=2.0, gamma=3.0, potential=PerPieceConstant(1.0, 0.0, -1.0))
spectrum = find_eigenvalues(problem, 120)

for kernel, y0 in (("phi", None), ("green", problem.geometry.theta)):
    spec = TransformSpec(kernel, g_preset(problem, "bump_mid"), y0=y0)
    print(f"kernel={kernel}")
    for N in (15, 30, 60, 120):
        rep = reconstruction_report(problem, spec, spectrum, N)
        print(f"  N={N:3d}  max relative error {rep.max_rel_error:.1e}")

# The canonical product over the same eigenvalues gives an alternative basis;
# with finitely many terms it acts as polynomial interpolation, so it is shown
# only as a comparison.
spec = TransformSpec("phi", g_preset(problem, "bump_mid"))
rep = reconstruction_report(problem, spec, spectrum, 30)
print(f"omega vs canonical-product basis, N=30: {rep.diagnostics['omega_vs_canonical_max_rel']:.2e}")

# Growth along lam = -t^2: log|F| / t creeps up towards the right end of the
# support of g, here theta + epsilon = 3 pi / 4.
ts = np.array([10.0, 20.0, 40.0])
print("log|F(-t^2)|/t:", np.round(exponential_type_profile(problem, spec, ts), 3))
