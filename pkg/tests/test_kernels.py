import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from singpoints import kernels as K
from singpoints.errors import DomainError, KernelError
from singpoints.kernels import KernelFamily, MobiusMap, mobius_apply, sphere_rotation_from_invariance_pair
from singpoints.linalg import INFINITY

FAMILIES = [
    KernelFamily.planar(3), KernelFamily.spherical(4), KernelFamily.hyperbolic(2), KernelFamily.truncated(7, 3),
]
unit = st.floats(0, 1, allow_nan=False)


def _pts(g, k, rad):
    return rad * np.sqrt(g.uniform(size=k)) * np.exp(2j * np.pi * g.uniform(size=k))


# --- families ---------------------------------------------------------------------


def test_family_validation():
    with pytest.raises(DomainError):
        KernelFamily("toroidal", 1)
    with pytest.raises(DomainError):
        KernelFamily.planar(0)
    with pytest.raises(DomainError):
        KernelFamily("truncated", 2)


def test_truncated_coefficients_recurrence():
    for n in (1, 2, 5):
        C = K.truncated_kernel_coefficients(10, n)
        assert np.allclose(C, [math.comb(n + k, k) for k in range(10)], rtol=0)


# --- kernel values -------------------------------------------------------------------


def test_kernel_examples():
    assert K.kernel_eval(KernelFamily.planar(3), 0, 0) == 1
    w = 0.7 - 2.1j
    for n in (1, 2, 5):
        assert K.kernel_eval(KernelFamily.spherical(n), 0, w) == 1
    z = 0.4 + 0.3j
    t = abs(z) ** 2
    assert K.kernel_eval(KernelFamily.truncated(3, 1), z, z) == pytest.approx(1 + 2 * t + 3 * t**2, rel=1e-14)


@pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: f.tag)
def test_kernel_hermitian(fam):
    g = np.random.default_rng(1)
    rad = 0.95 if fam.on_disk else 3
    z, w = _pts(g, 1000, rad), _pts(g, 1000, rad)
    a, b = K.kernel_eval(fam, z, w), K.kernel_eval(fam, w, z)
    assert np.max(np.abs(a - np.conj(b)) / np.maximum(1, np.abs(a))) <= 1e-12


def test_disk_kernels_reject_outside():
    with pytest.raises(DomainError):
        K.kernel_eval(KernelFamily.hyperbolic(1), 1.0, 0)


def test_reference_density_examples():
    assert K.reference_density(KernelFamily.planar(2), 0) == pytest.approx(1 / math.pi)
    assert K.reference_density(KernelFamily.spherical(1), 0) == pytest.approx(1 / math.pi)
    assert K.reference_density(KernelFamily.hyperbolic(2), math.sqrt(0.5)) == pytest.approx(1 / math.pi)


# --- joint intensities ------------------------------------------------------------------


def test_joint_intensity_examples():
    fam = KernelFamily.planar(2)
    z = 0.3 + 0.1j
    assert K.joint_intensity(fam, [z]) == pytest.approx(K.kernel_eval(fam, z, z).real)
    assert K.joint_intensity(fam, [z, z]) == 0.0
    assert K.joint_intensity(fam, [0, 1]) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: f.tag)
def test_gram_psd(fam):
    g = np.random.default_rng(2)
    rad = 0.95 if fam.on_disk else 3
    for _ in range(200):
        pts = _pts(g, int(g.integers(1, 7)), rad)
        assert K.normalized_gram_det(fam, pts) >= -1e-10
        assert K.joint_intensity(fam, pts) >= 0


def test_broken_kernel_detected(monkeypatch):
    monkeypatch.setattr(K, "normalized_gram_det", lambda fam, p: -0.5)
    with pytest.raises(KernelError):
        K.joint_intensity(KernelFamily.planar(2), [0, 1])


def test_spherical_density_examples():
    assert K.spherical_joint_density([0], 1) == 1
    assert K.spherical_joint_density([0.5, 0.5, 1j], 3) == 0


def test_spherical_density_proportional_to_kernel_form():
    g = np.random.default_rng(3)
    n = 3
    fam = KernelFamily.spherical(n)
    ratios = []
    for _ in range(100):
        p = _pts(g, n, 2.5)
        det_form = K.joint_intensity(fam, p) * np.prod(K.reference_density(fam, p))
        ratios.append(K.spherical_joint_density(p, n) / det_form)
    ratios = np.array(ratios)
    assert np.ptp(ratios) / ratios.mean() <= 1e-8


# --- first moments ------------------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 4])
@pytest.mark.parametrize("r", [0.2, 0.6, 0.9])
def test_hyperbolic_count(n, r):
    fam = KernelFamily.hyperbolic(n)
    assert K.expected_count(fam, r) == pytest.approx(n * r * r / (1 - r * r), rel=1e-12)
    assert K.expected_count_quadrature(fam, r) == pytest.approx(n * r * r / (1 - r * r), rel=1e-8)


def test_counts_at_full_domain():
    assert K.expected_count(KernelFamily.spherical(5), math.inf) == 5
    assert K.expected_count_quadrature(KernelFamily.spherical(5), math.inf) == pytest.approx(5, rel=1e-8)
    assert K.expected_count(KernelFamily.truncated(9, 2), 1.0) == pytest.approx(9, rel=1e-8)
    assert K.expected_count(KernelFamily.planar(6), math.inf) == 6


def test_planar_count_examples():
    assert K.expected_count(KernelFamily.planar(1), 1.0) == pytest.approx(1 - math.exp(-1), rel=1e-12)
    fam = KernelFamily.planar(20)
    assert K.expected_count(fam, 3.0) == pytest.approx(K.expected_count_quadrature(fam, 3.0), rel=1e-8)


def test_count_domain_errors():
    with pytest.raises(DomainError):
        K.expected_count(KernelFamily.hyperbolic(1), 1.0)
    with pytest.raises(DomainError):
        K.expected_count(KernelFamily.planar(1), -1)
    with pytest.raises(DomainError):
        K.expected_count_closed_form(KernelFamily.truncated(3, 1), 0.5)


def test_predicted_count_moments_examples():
    assert K.predicted_count_moments(7, 3, 1.0) == (7, 0)
    assert K.predicted_count_moments(7, 3, 0.0) == (0, 0)
    m, v = K.predicted_count_moments(32, 1, 0.5)
    assert m == pytest.approx(1 - 2.0**-32, rel=1e-14)
    with pytest.raises(DomainError):
        K.predicted_count_moments(3, 1, 1.5)


@given(unit)
def test_predicted_moments_uniform_case(t):
    m, v = K.predicted_count_moments(1, 1, t)
    assert m == pytest.approx(t, abs=1e-15) and v == pytest.approx(t * (1 - t), abs=1e-15)


@given(st.integers(1, 6), st.integers(1, 6), unit)
@settings(max_examples=50)
def test_beta_cdf_matches_scipy(a, b, t):
    assert K.beta_cdf_integer(a, b, t) == pytest.approx(stats.beta(a, b).cdf(t), abs=1e-12)


@pytest.mark.parametrize("N,n", [(8, 1), (16, 2), (10, 4)])
def test_two_count_routes_agree(N, n):
    for t in (0.1, 0.5, 0.9):
        assert abs(K.expected_count(KernelFamily.truncated(N, n), math.sqrt(t)) - K.predicted_count_moments(N, n, t)[0]) <= 1e-6


def test_truncated_normalization():
    for n in (1, 3):
        C = K.truncated_kernel_coefficients(21, n)
        fam = KernelFamily.truncated(21, n)
        for j in range(21):
            assert C[j] * K.radial_moment(fam, j) == pytest.approx(1, abs=1e-8)


def test_blaschke_zero_moment_examples():
    assert K.blaschke_zero_moment(2, 1) == pytest.approx(1 / 3)
    assert K.blaschke_zero_moment(16, 2) == pytest.approx(1 / 153)
    assert K.blaschke_zero_moment(1, 1) == pytest.approx(1 / 2)
    assert 1000 * K.blaschke_zero_moment(1000, 1) == pytest.approx(1, rel=1e-3)


def test_limit_second_moments():
    assert [K.limit_coefficient_second_moment(1, k) for k in range(4)] == [1, 1, 1, 1]
    assert K.limit_coefficient_second_moment(2, 0) == 2
    assert K.limit_coefficient_second_moment(2, 3) == 8


# --- Mobius maps -------------------------------------------------------------------------


def test_mobius_validation():
    with pytest.raises(DomainError):
        MobiusMap(1, 1, "sphere")
    with pytest.raises(DomainError):
        MobiusMap(0.5, 0, "disk")
    with pytest.raises(DomainError):
        MobiusMap(1, 0, "torus")


@pytest.mark.parametrize("geom", ["sphere", "disk"])
def test_mobius_identity(geom):
    z = np.array([0.1 + 0.2j, -0.5j, 0.0])
    assert np.allclose(mobius_apply(MobiusMap.identity(geom), z), z)


def test_sphere_map_metric_identity():
    g = np.random.default_rng(4)
    for _ in range(100):
        v = g.standard_normal(4)
        v /= np.linalg.norm(v)
        a, b = complex(v[0], v[1]), complex(v[2], v[3])
        m = MobiusMap(a, b)
        z = complex(*g.standard_normal(2))
        lhs = (1 + abs(mobius_apply(m, z)) ** 2) * abs(-b.conjugate() * z + a.conjugate()) ** 2
        assert abs(lhs - (1 + abs(z) ** 2)) <= 1e-12 * max(1, 1 + abs(z) ** 2)


def test_sphere_map_poles():
    m = MobiusMap(0.6, 0.8)
    pole = m.alpha.conjugate() / m.beta.conjugate()
    assert mobius_apply(m, pole) == INFINITY
    assert mobius_apply(m, INFINITY) == pytest.approx(m.alpha / (-m.beta.conjugate()))


@given(st.floats(-2, 2), unit, unit)
def test_disk_map_preserves_disk(s, r, th):
    m = MobiusMap(math.cosh(s), math.sinh(s), "disk")
    z = 0.999 * r * complex(math.cos(6.28 * th), math.sin(6.28 * th))
    assert abs(mobius_apply(m, z)) < 1


def test_disk_map_rejects_outside():
    with pytest.raises(DomainError):
        mobius_apply(MobiusMap.identity("disk"), 1.5)


def test_rotation_from_invariance_pair():
    alpha, beta = 0.6, 0.8j
    m = sphere_rotation_from_invariance_pair(alpha, beta)
    lam = 0.3 - 1.1j
    assert mobius_apply(m, lam) == pytest.approx((lam * alpha - np.conj(beta)) / (lam * beta + np.conj(alpha)))
    G1 = np.array([[1.0, 0.3], [0.2j, 0.7]])
    G2 = np.array([[0.5, -1j], [0.4, 1.3]])
    H1, H2 = alpha * G1 - beta * G2, np.conj(beta) * G1 + np.conj(alpha) * G2
    old = np.linalg.eigvals(np.linalg.solve(G1, G2))
    new = np.linalg.eigvals(np.linalg.solve(H1, H2))
    # the new zeros are the preimages of the old ones
    mapped = mobius_apply(m, new)
    assert all(np.min(np.abs(old - w)) < 1e-10 for w in mapped)
