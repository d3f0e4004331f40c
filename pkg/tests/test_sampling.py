import math

import numpy as np
import pytest

from slms import find_eigenvalues
from slms.errors import MismatchedProvenance
from slms.sampling import (
    TransformSpec,
    canonical_series_basis,
    default_eval_points,
    exponential_type_profile,
    g_preset,
    reconstruct,
    reconstruction_report,
    sample_at_spectrum,
    transform_direct,
    transform_via_green,
)
from slms.solver import omega


@pytest.fixture(scope="module")
def ref_spec120(ref):
    return find_eigenvalues(ref, 120)


def _phi(problem, name="one", **kw):
    return TransformSpec("phi", g_preset(problem, name, **kw))


def _green(problem, name="one", **kw):
    return TransformSpec("green", g_preset(problem, name), y0=problem.geometry.theta, **kw)


def test_zero_density(ref, ref_spec120):
    for spec in (_phi(ref, "zero"), _green(ref, "zero")):
        assert transform_direct(ref, spec, 3.3) == 0
        samples = sample_at_spectrum(ref, spec, ref_spec120, 20)
        assert np.all(samples.values == 0)
        rep = reconstruction_report(ref, spec, ref_spec120, 20, with_canonical=False)
        assert np.all(rep.series == 0)


def test_phi_kernel_at_zero(ref):
    assert transform_direct(ref, _phi(ref), 0.0) == pytest.approx(math.pi, rel=1e-12)


def test_green_kernel_limit_at_eigenvalue(ref, ref_spec120):
    spec = _green(ref)
    for n in (0, 2, 6):
        ln = ref_spec120[n].lambda_n
        lim = transform_direct(ref, spec, ln)
        assert math.isfinite(lim)
        for d in (1e-3, 1e-4):
            app = 0.5 * (transform_via_green(ref, spec, ln + d) + transform_via_green(ref, spec, ln - d))
            assert app == pytest.approx(lim, rel=1e-4 if d == 1e-4 else 1e-2)


def test_green_kernel_bounded_on_small_circles(stepped):
    spec = find_eigenvalues(stepped, 3)
    ln = spec[2].lambda_n
    ts = _green(stepped)
    spans = []
    for r in (1e-1, 1e-2, 1e-3):
        vals = [abs(transform_direct(stepped, ts, ln + r * np.exp(1j * t)))
                for t in np.linspace(0, 2 * np.pi, 8, endpoint=False)]
        spans.append(max(vals) - min(vals))
    assert spans[2] < spans[1] < spans[0]


def test_empty_samples(ref, ref_spec120):
    s = sample_at_spectrum(ref, _phi(ref), ref_spec120, 0)
    assert len(s) == 0
    assert reconstruct(s, lambda z: 1.0, [], 2.0) == (0.0, 0.0)


def test_samples_real_for_real_density(tabulated):
    spec = find_eigenvalues(tabulated, 8)
    s = sample_at_spectrum(tabulated, _green(tabulated, "sin_k"), spec, 8)
    assert np.isrealobj(s.values)


def test_sample_count_bounded_by_spectrum(ref, ref_spec120):
    with pytest.raises(ValueError):
        sample_at_spectrum(ref, _phi(ref), ref_spec120, 121)


def test_interpolation_property(stepped):
    spec = find_eigenvalues(stepped, 30)
    for ts in (_phi(stepped, "bump_mid"), _green(stepped)):
        s = sample_at_spectrum(stepped, ts, spec, 30)
        w = lambda z: omega(stepped, z)
        for k in range(30):
            value, tail = reconstruct(s, w, spec.omega_primes[:30], spec[k].lambda_n)
            assert value == s.values[k] and tail == 0.0
        near, _ = reconstruct(s, w, spec.omega_primes[:30], spec[4].lambda_n + 1e-7)
        assert near == pytest.approx(s.values[4], rel=1e-4, abs=1e-8)


def test_mismatched_provenance(ref, ref_spec120):
    s = sample_at_spectrum(ref, _phi(ref), ref_spec120, 10)
    w = lambda z: omega(ref, z)
    with pytest.raises(MismatchedProvenance):
        reconstruct(s, w, ref_spec120.omega_primes[:9], 2.0)
    foreign = tuple((ref_spec120.eigenvalues[:10] + 1e-6).tolist())
    with pytest.raises(MismatchedProvenance):
        reconstruct(s, w, ref_spec120.omega_primes[:10], 2.0, provenance=foreign)
    assert reconstruct(s, w, ref_spec120.omega_primes[:10], 2.0, provenance=s.provenance)


@pytest.mark.parametrize("kernel", ["phi", "green"])
def test_reconstruction_converges(ref, ref_spec120, kernel):
    ts = _phi(ref) if kernel == "phi" else _green(ref)
    errs = [reconstruction_report(ref, ts, ref_spec120, N, with_canonical=False).max_rel_error
            for N in (30, 60, 120)]
    assert errs[1] <= 1e-3
    assert errs[0] > errs[1] > errs[2]


def test_canonical_product_variant(ref, ref_spec120):
    ts = _green(ref, product="canonical")
    rep = reconstruction_report(ref, ts, ref_spec120, 60)
    assert rep.max_rel_error <= 1e-3
    assert rep.alternate_series is None


def test_omega_vs_canonical_reported(ref, ref_spec120):
    rep = reconstruction_report(ref, _phi(ref, "bump_mid"), ref_spec120, 60)
    assert "omega_vs_canonical_max_rel" in rep.diagnostics
    assert len(rep.alternate_discrepancy) == len(rep.points)


def test_linearity(ref, ref_spec120):
    g1, g2 = g_preset(ref, "one"), g_preset(ref, "sin_k", k=3.0)
    ts1, ts2 = TransformSpec("phi", g1), TransformSpec("phi", g2)
    ts12 = TransformSpec("phi", lambda x: g1(x) + g2(x))
    lam = 7.7
    direct = [transform_direct(ref, t, lam) for t in (ts1, ts2, ts12)]
    assert direct[2] == pytest.approx(direct[0] + direct[1], rel=1e-12)
    w = lambda z: omega(ref, z)
    wp = ref_spec120.omega_primes[:40]
    series = [reconstruct(sample_at_spectrum(ref, t, ref_spec120, 40), w, wp, lam)[0]
              for t in (ts1, ts2, ts12)]
    assert series[2] == pytest.approx(series[0] + series[1], rel=1e-12)


def test_conjugate_symmetry(stepped):
    spec = find_eigenvalues(stepped, 40)
    s = sample_at_spectrum(stepped, _phi(stepped), spec, 40)
    w = lambda z: omega(stepped, z)
    a = reconstruct(s, w, spec.omega_primes[:40], 5.0 + 2.0j)[0]
    b = reconstruct(s, w, spec.omega_primes[:40], 5.0 - 2.0j)[0]
    assert a == pytest.approx(np.conj(b), rel=1e-12)
    direct = transform_direct(stepped, _phi(stepped), 5.0 + 2.0j)
    assert a == pytest.approx(direct, rel=1e-4)


def test_report_deterministic(ref, ref_spec120):
    a = reconstruction_report(ref, _green(ref, "bump_mid"), ref_spec120, 30).to_dict()
    b = reconstruction_report(ref, _green(ref, "bump_mid"), ref_spec120, 30).to_dict()
    assert a == b


def test_report_empty_points(ref, ref_spec120):
    rep = reconstruction_report(ref, _phi(ref), ref_spec120, 10, eval_points=[])
    assert len(rep.series) == 0 and rep.max_rel_error == 0.0


def test_default_eval_points(ref_spec120):
    pts = default_eval_points(ref_spec120)
    lams = ref_spec120.eigenvalues
    assert len(pts) == 10
    assert np.all((pts > lams[5:15]) & (pts < lams[6:16]))


def test_canonical_basis_derivatives(ref_spec120):
    W, Wp = canonical_series_basis(ref_spec120, 20)
    lams = ref_spec120.eigenvalues[:20]
    n = 3
    exact = -1 / lams[n] * np.prod([1 - lams[n] / l for m, l in enumerate(lams) if m != n])
    assert Wp[n] == pytest.approx(exact, rel=1e-12)


def test_custom_table_density(ref):
    geo = ref.geometry
    table = {}
    for key, p in zip(("left", "mid", "right"), range(3)):
        lo, hi = geo.piece_bounds(p)
        table[key] = ([lo, hi], [1.0, 1.0])
    ts = TransformSpec("phi", g_preset(ref, "custom-table", table=table))
    assert transform_direct(ref, ts, 0.0) == pytest.approx(math.pi, rel=1e-12)


def test_unknown_preset(ref):
    with pytest.raises(ValueError):
        g_preset(ref, "gauss")


def test_transform_spec_validation(ref):
    with pytest.raises(ValueError):
        TransformSpec("green", g_preset(ref, "one"))
    with pytest.raises(ValueError):
        TransformSpec("laplace", g_preset(ref, "one"))


def test_exponential_type_profile(ref):
    prof = exponential_type_profile(ref, _phi(ref), [5.0, 10.0, 20.0])
    assert np.all(np.isfinite(prof))
    assert np.all(np.diff(prof) > 0) and prof[-1] < math.pi
