"""Closed-form kernels, reference measures and predicted statistics.

Four families of determinantal processes:

========== ============================== ===================================
tag        kernel K(z, w)                 reference density (w.r.t. area)
========== ============================== ===================================
planar     sum_{k<n} (z w*)^k / k!        exp(-|z|^2) / pi
spherical  (1 + z w*)^(n-1)               (n/pi) (1 + |z|^2)^-(n+1)
hyperbolic (1 - z w*)^-(n+1)              (n/pi) (1 - |z|^2)^(n-1),  |z| < 1
truncated  sum_{k<N} C_k (z w*)^k         (n/pi) (1 - |z|^2)^(n-1),  |z| < 1
========== ============================== ===================================

with C_0 = 1, C_{k+1} = C_k (n + k + 1) / (k + 1), i.e. C_k = binom(n + k, k).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate, special

from .errors import DimensionError, DomainError, KernelError
from .linalg import INFINITY

FAMILIES = ("planar", "spherical", "hyperbolic", "truncated")
PSD_TOL = 1e-10
QUAD_TOL = 1e-9


@dataclass(frozen=True)
class KernelFamily:
    tag: str
    n: int
    N: int | None = None

    def __post_init__(self):
        if self.tag not in FAMILIES:
            raise DomainError(f"unknown kernel family {self.tag!r}; expected one of {FAMILIES}")
        if self.n < 1:
            raise DomainError("n must be >= 1")
        if self.tag == "truncated" and (self.N is None or self.N < 1):
            raise DomainError("truncated family requires N >= 1")

    @classmethod
    def planar(cls, n):
        return cls("planar", n)

    @classmethod
    def spherical(cls, n):
        return cls("spherical", n)

    @classmethod
    def hyperbolic(cls, n):
        return cls("hyperbolic", n)

    @classmethod
    def truncated(cls, N, n):
        return cls("truncated", n, N)

    @property
    def on_disk(self) -> bool:
        return self.tag in ("hyperbolic", "truncated")


def truncated_kernel_coefficients(N: int, n: int) -> np.ndarray:
    """C_0..C_{N-1} with C_k = (-1)^k binom(-n-1, k) = binom(n+k, k), by recurrence."""
    C = np.empty(N)
    C[0] = 1.0
    for k in range(N - 1):
        C[k + 1] = C[k] * (n + k + 1) / (k + 1)
    return C


def _check_domain(family: KernelFamily, *zs):
    if not family.on_disk:
        return
    for z in zs:
        if np.any(np.abs(np.asarray(z)) >= 1.0):
            raise DomainError(f"{family.tag} kernel is defined on the open unit disk")


def kernel_eval(family: KernelFamily, z, w):
    """K(z, w). Vectorised over broadcastable ``z`` and ``w``."""
    _check_domain(family, z, w)
    x = np.asarray(z, dtype=complex) * np.conj(np.asarray(w, dtype=complex))
    n = family.n
    if family.tag == "planar":
        coeffs = 1.0 / np.array([math.factorial(k) for k in range(n)], dtype=float)
        return np.polynomial.polynomial.polyval(x, coeffs)
    if family.tag == "spherical":
        return (1.0 + x) ** (n - 1)
    if family.tag == "hyperbolic":
        return (1.0 - x) ** (-(n + 1))
    return np.polynomial.polynomial.polyval(x, truncated_kernel_coefficients(family.N, n))


def reference_density(family: KernelFamily, z):
    """Density of the reference measure mu with respect to Lebesgue measure on the plane."""
    _check_domain(family, z)
    t = np.abs(np.asarray(z)) ** 2
    n = family.n
    if family.tag == "planar":
        return np.exp(-t) / np.pi
    if family.tag == "spherical":
        return (n / np.pi) * (1.0 + t) ** (-(n + 1))
    return (n / np.pi) * (1.0 - t) ** (n - 1)


def gram_matrix(family: KernelFamily, points: Sequence[complex]) -> np.ndarray:
    p = np.asarray(points, dtype=complex)
    return kernel_eval(family, p[:, None], p[None, :])


def normalized_gram_det(family: KernelFamily, points: Sequence[complex]) -> float:
    """det(K(z_i, z_j)) / prod_i K(z_i, z_i).

    Lies in [0, 1] for a genuine kernel (Hadamard), so round-off is on an
    absolute scale regardless of how large the kernel values are.
    """
    G = gram_matrix(family, points)
    d = np.sqrt(np.real(np.diagonal(G)))
    if np.any(d <= 0):
        return 0.0
    Gn = G / np.outer(d, d)
    return float(np.real(np.linalg.det(Gn)))


def joint_intensity(family: KernelFamily, points: Sequence[complex]) -> float:
    """rho_k(z_1..z_k) = det(K(z_i, z_j)) (relative to mu^{otimes k}).

    Round-off negatives down to -1e-10 (after normalising by the diagonal) are
    clamped to zero; anything more negative means the kernel is broken.
    """
    p = np.asarray(points, dtype=complex)
    if p.size == 0:
        return 1.0
    diag = np.real(kernel_eval(family, p, p))
    nd = normalized_gram_det(family, p)
    if nd < 0:
        if nd < -PSD_TOL:
            raise KernelError(f"Gram matrix determinant {nd:.3e} is significantly negative")
        return 0.0
    return float(nd * np.prod(diag))


def spherical_joint_density(points: Sequence[complex], n: int) -> float:
    """Unnormalised n-point density prod_{i<j} |z_i - z_j|^2 prod_k (1 + |z_k|^2)^-(n+1)."""
    p = np.asarray(points, dtype=complex)
    if p.size != n:
        raise DimensionError(f"expected exactly {n} points, got {p.size}")
    if not np.all(np.isfinite(p)):
        raise DomainError("points must be finite")
    iu = np.triu_indices(n, 1)
    diff = p[:, None] - p[None, :]
    vdm = np.prod(np.abs(diff[iu]) ** 2)
    return float(vdm * np.prod((1.0 + np.abs(p) ** 2) ** (-(n + 1))))


# ---------------------------------------------------------------------------
# first moments


def first_intensity_radial(family: KernelFamily, t):
    """pi * K(z, z) * density(z) as a function of t = |z|^2.

    Integrating this in t over [0, r^2] gives the expected count in |z| < r.
    """
    t = np.asarray(t, dtype=float)
    if family.on_disk:
        t = np.minimum(t, 1.0)
    n = family.n
    if family.tag == "planar":
        K = np.polynomial.polynomial.polyval(t, 1.0 / np.array([math.factorial(k) for k in range(n)], float))
        return K * np.exp(-t)
    if family.tag == "spherical":
        return n * (1.0 + t) ** (n - 1) * (1.0 + t) ** (-(n + 1))
    if family.tag == "hyperbolic":
        return n * (1.0 - t) ** (-(n + 1)) * (1.0 - t) ** (n - 1)
    K = np.polynomial.polynomial.polyval(t, truncated_kernel_coefficients(family.N, n))
    return n * K * (1.0 - t) ** (n - 1)


def _count_domain(family: KernelFamily, r: float):
    if r < 0:
        raise DomainError("radius must be nonnegative")
    if family.tag == "hyperbolic" and r >= 1:
        raise DomainError("hyperbolic counts need r < 1")
    if family.tag == "truncated" and r > 1:
        raise DomainError("truncated counts need r <= 1")


def expected_count_quadrature(family: KernelFamily, r: float) -> float:
    """Expected number of points in |z| < r by adaptive radial quadrature.

    The angular integral is done analytically; the remaining integral in
    t = |z|^2 uses Gauss-Kronrod (QUADPACK) to 1e-9.
    """
    _count_domain(family, r)
    upper = np.inf if np.isinf(r) else r * r
    val, _ = integrate.quad(
        lambda t: float(first_intensity_radial(family, t)), 0.0, upper, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200
    )
    return val


def expected_count_closed_form(family: KernelFamily, r: float) -> float:
    _count_domain(family, r)
    n = family.n
    if family.tag == "planar":
        if np.isinf(r):
            return float(n)
        return float(sum(special.gammainc(k + 1, r * r) for k in range(n)))
    if family.tag == "spherical":
        if np.isinf(r):
            return float(n)
        return n * r * r / (1.0 + r * r)
    if family.tag == "hyperbolic":
        return n * r * r / (1.0 - r * r)
    raise DomainError("no independent closed form for the truncated family; use predicted_count_moments")


def expected_count(family: KernelFamily, r: float) -> float:
    """Integral of K(z, z) d mu(z) over |z| < r.

    Closed forms for planar/spherical/hyperbolic; quadrature for the
    truncated family (whose closed form is the Beta-law route in
    :func:`predicted_count_moments`, kept independent on purpose).
    """
    if family.tag == "truncated":
        return expected_count_quadrature(family, r)
    return expected_count_closed_form(family, r)


def radial_moment(family: KernelFamily, j: int) -> float:
    """int |z|^{2j} d mu(z) by quadrature in t = |z|^2."""
    if j < 0:
        raise DomainError("j must be nonnegative")
    n = family.n
    if family.tag == "planar":
        f, upper = lambda t: t**j * math.exp(-t), np.inf
    elif family.tag == "spherical":
        f, upper = lambda t: n * t**j * (1.0 + t) ** (-(n + 1)), np.inf
    else:
        f, upper = lambda t: n * t**j * (1.0 - t) ** (n - 1), 1.0
    val, _ = integrate.quad(f, 0.0, upper, epsabs=QUAD_TOL * 1e-3, epsrel=QUAD_TOL, limit=200)
    return val


def beta_cdf_integer(a: int, b: int, t: float) -> float:
    """CDF of Beta(a, b) at t for positive integers: P(Binomial(a+b-1, t) >= a)."""
    if t <= 0:
        return 0.0
    if t >= 1:
        return 1.0
    m = a + b - 1
    return math.fsum(math.comb(m, i) * t**i * (1 - t) ** (m - i) for i in range(a, m + 1))


def predicted_count_moments(N: int, n: int, t: float) -> tuple[float, float]:
    """Mean and variance of #{k : |lam_k|^2 <= t} for the truncated-unitary ensemble.

    The squared moduli are independent Beta(k+1, n), k = 0..N-1.
    """
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    F = [beta_cdf_integer(k + 1, n, t) for k in range(N)]
    return math.fsum(F), math.fsum(f * (1.0 - f) for f in F)


def blaschke_zero_moment(N: int, n: int) -> float:
    """E|f_N(0)|^2 = prod_{k<N} (k+1)/(n+k+1) = n! N! / (N+n)!."""
    if N < 1 or n < 1:
        raise DomainError("N and n must be positive")
    out = 1.0
    for k in range(N):
        out *= (k + 1) / (n + k + 1)
    return out


def limit_coefficient_second_moment(n: int, k: int) -> float:
    """E|c_k|^2 for det(G_0 + z G_1 + ...): n! * binom(k + n - 1, n - 1).

    Distinct (permutation, degree-split) monomials are products of distinct
    independent Gaussians, hence orthonormal.
    """
    return float(math.factorial(n) * math.comb(k + n - 1, n - 1))


# ---------------------------------------------------------------------------
# Moebius maps


@dataclass(frozen=True)
class MobiusMap:
    """Isometry of the sphere or of the hyperbolic disk.

    sphere: z -> (alpha z + beta) / (-conj(beta) z + conj(alpha)), |alpha|^2 + |beta|^2 = 1
    disk:   z -> (alpha z + beta) / (conj(beta) z + conj(alpha)),  |alpha|^2 - |beta|^2 = 1
    """

    alpha: complex
    beta: complex
    geometry: str = "sphere"

    def __post_init__(self):
        a2, b2 = abs(self.alpha) ** 2, abs(self.beta) ** 2
        if self.geometry == "sphere":
            if abs(a2 + b2 - 1.0) > 1e-12:
                raise DomainError("sphere maps need |alpha|^2 + |beta|^2 = 1")
        elif self.geometry == "disk":
            if abs(a2 - b2 - 1.0) > 1e-12:
                raise DomainError("disk maps need |alpha|^2 - |beta|^2 = 1")
        else:
            raise DomainError(f"unknown geometry {self.geometry!r}")

    @classmethod
    def identity(cls, geometry="sphere"):
        return cls(1.0 + 0j, 0j, geometry)

    @property
    def coefficients(self) -> tuple[complex, complex, complex, complex]:
        """(a, b, c, d) with map z -> (a z + b)/(c z + d); ad - bc = 1."""
        a, b = complex(self.alpha), complex(self.beta)
        c = -b.conjugate() if self.geometry == "sphere" else b.conjugate()
        return a, b, c, a.conjugate()

    def denominator(self, z):
        _, _, c, d = self.coefficients
        return c * np.asarray(z, dtype=complex) + d

    def derivative(self, z):
        a, b, c, d = self.coefficients
        return (a * d - b * c) / (c * np.asarray(z, dtype=complex) + d) ** 2


def mobius_apply(m: MobiusMap, z):
    """Image of z; the sphere chart sends poles to :data:`INFINITY` (and INFINITY to a/c)."""
    a, b, c, d = m.coefficients
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if m.geometry == "disk" and np.any(np.abs(z) > 1.0 + 1e-12):
        raise DomainError("disk maps act on the closed unit disk")
    out = np.empty_like(z)
    inf = np.isinf(z)
    den = c * z[~inf] + d
    num = a * z[~inf] + b
    with np.errstate(divide="ignore", invalid="ignore"):
        img = np.where(den == 0, INFINITY, num / np.where(den == 0, 1.0, den))
    out[~inf] = img
    out[inf] = INFINITY if c == 0 else a / c
    return complex(out[0]) if scalar else out


def sphere_rotation_from_invariance_pair(alpha: complex, beta: complex) -> MobiusMap:
    """The rotation lam -> (lam alpha - conj(beta)) / (lam beta + conj(alpha)).

    Under the unitary change (G_1, G_2) -> (alpha G_1 - beta G_2,
    conj(beta) G_1 + conj(alpha) G_2) the zeros of det(zG_1 - G_2) move to
    their preimages under this map. Invariance in law under the group makes
    the direction immaterial for testing.
    """
    return MobiusMap(complex(alpha), -complex(beta).conjugate(), "sphere")
