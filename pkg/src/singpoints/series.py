"""Truncated power series for det(zI + V) / det(I + zV^*) and matrix-series determinants.

Two independent routes to the Taylor coefficients of

    f(z) = det(zI + V) / det(I + z V^*)

are provided:

* :func:`blaschke_derivative` -- the cycle-sum formula: f^(k)(0) is det(V)
  times a signed sum over permutations of k letters of products, over cycles
  c, of Tr(V^{-|c|}) - Tr(V^{*|c|}). The sum is grouped by cycle type.
* :func:`series_ratio` -- plain series division of the two characteristic
  polynomials.

A third, :func:`blaschke_product_series`, multiplies out the Blaschke factors
(z + lam) / (1 + z conj(lam)) directly from the spectrum.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import mpmath
import numpy as np

from .errors import DimensionError, DomainError, SingularMatrixError
from .linalg import _square, char_poly_coefficients, eigenvalues, reversed_char_poly_coefficients

MAX_DERIVATIVE_ORDER = 64
MAX_LEIBNIZ_SIZE = 8
SINGULAR_RTOL = 1e-12


@dataclass
class TruncatedSeries:
    """Coefficients c_0..c_K of a power series cut at order K (ascending powers)."""

    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if self.coeffs.ndim != 1 or self.coeffs.size == 0:
            raise DimensionError("a truncated series needs at least one coefficient")
        if not np.all(np.isfinite(self.coeffs)):
            raise DomainError("series coefficients must be finite")

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    def __len__(self):
        return self.coeffs.size

    def __getitem__(self, k):
        return self.coeffs[k]

    def __call__(self, z):
        """Evaluate the partial sum at z (Horner)."""
        acc = np.zeros_like(np.asarray(z, dtype=complex))
        for c in self.coeffs[::-1]:
            acc = acc * z + c
        return acc

    def truncate(self, kmax: int) -> "TruncatedSeries":
        c = np.zeros(kmax + 1, dtype=complex)
        m = min(kmax, self.order) + 1
        c[:m] = self.coeffs[:m]
        return TruncatedSeries(c)

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        K = min(self.order, other.order)
        return TruncatedSeries(np.convolve(self.coeffs[: K + 1], other.coeffs[: K + 1])[: K + 1])

    def scale(self, s: complex) -> "TruncatedSeries":
        return TruncatedSeries(self.coeffs * s)

    def inverse(self) -> "TruncatedSeries":
        return TruncatedSeries(series_inverse(self.coeffs, self.order))

    def to_json(self) -> dict:
        return {"order": self.order, "re": self.coeffs.real.tolist(), "im": self.coeffs.imag.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "TruncatedSeries":
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
        if re.size != int(obj["order"]) + 1 or im.size != re.size:
            raise DimensionError("coefficient arrays must have length order + 1")
        return cls(re + 1j * im)


def series_inverse(b: Sequence[complex], kmax: int) -> np.ndarray:
    """Coefficients of 1/b(z) up to z^kmax; requires b[0] != 0."""
    b = np.asarray(b, dtype=complex)
    if b[0] == 0:
        raise SingularMatrixError("series with zero constant term has no inverse")
    c = np.zeros(kmax + 1, dtype=complex)
    c[0] = 1.0 / b[0]
    for k in range(1, kmax + 1):
        m = min(k, b.size - 1)
        c[k] = -np.dot(b[1 : m + 1], c[k - 1 :: -1][:m]) / b[0]
    return c


# ---------------------------------------------------------------------------
# cycle types


@dataclass(frozen=True)
class CycleType:
    """A conjugacy class of S_k: ``multiplicities[j]`` cycles of length j."""

    k: int
    multiplicities: tuple[tuple[int, int], ...]  # sorted (j, m_j) pairs, m_j >= 1

    @property
    def num_cycles(self) -> int:
        return sum(m for _, m in self.multiplicities)

    @property
    def sign(self) -> int:
        return -1 if (self.k - self.num_cycles) % 2 else 1

    @property
    def count(self) -> int:
        """Number of permutations with this cycle type: k! / prod j^m_j m_j!."""
        denom = 1
        for j, m in self.multiplicities:
            denom *= j**m * math.factorial(m)
        return math.factorial(self.k) // denom

    def as_dict(self) -> dict[int, int]:
        return dict(self.multiplicities)


def _partitions(k: int, largest: int):
    if k == 0:
        yield ()
        return
    for p in range(min(k, largest), 0, -1):
        for rest in _partitions(k - p, p):
            yield (p,) + rest


@lru_cache(maxsize=None)
def _cycle_types_cached(k: int) -> tuple[CycleType, ...]:
    out = []
    for part in _partitions(k, k):
        mult: dict[int, int] = {}
        for p in part:
            mult[p] = mult.get(p, 0) + 1
        out.append(CycleType(k, tuple(sorted(mult.items()))))
    return tuple(out)


def cycle_types(k: int) -> list[CycleType]:
    """All cycle types of S_k (integer partitions of k). ``cycle_types(0)`` is the empty type."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    return list(_cycle_types_cached(k))


# ---------------------------------------------------------------------------
# cycle-sum route


def _check_invertible(V: np.ndarray):
    s = np.linalg.svd(V, compute_uv=False)
    if s[-1] <= SINGULAR_RTOL * s[0]:
        raise SingularMatrixError(
            f"matrix is numerically singular (sigma_min/sigma_max = {s[-1] / s[0]:.2e}); resample"
        )


def trace_power_differences(V, kmax: int) -> np.ndarray:
    """d_j = Tr(V^{-j}) - Tr(V^{*j}) for j = 1..kmax (index 0 of the result is d_1).

    Computed from the spectrum: d_j = sum_i lam_i^{-j} - conj(lam_i)^j.
    """
    V = _square(V)
    _check_invertible(V)
    lam = eigenvalues(V)
    j = np.arange(1, kmax + 1)[:, None]
    return np.sum(lam[None, :] ** (-j) - np.conj(lam)[None, :] ** j, axis=1)


def _cycle_sum(d, k: int, one):
    total = 0 * one
    for ct in cycle_types(k):
        term = one * (ct.sign * ct.count)
        for j, m in ct.multiplicities:
            term = term * d[j - 1] ** m
        total = total + term
    return total


def blaschke_derivatives(V, kmax: int, dps: int | None = None) -> np.ndarray:
    """f^(k)(0) for k = 0..kmax via the cycle-sum formula.

    The signed sum has heavy cancellation when V has eigenvalues of very
    different moduli; the loss is roughly the ratio of the largest term to the
    result. With ``dps`` set, eigenvalues, traces and the sum are evaluated in
    mpmath at that many decimal digits (the input matrix is taken as exact).
    """
    V = _square(V)
    if kmax > MAX_DERIVATIVE_ORDER:
        raise DomainError(f"k <= {MAX_DERIVATIVE_ORDER} required (partition count explodes)")
    _check_invertible(V)
    if dps is None:
        lam = eigenvalues(V)
        det = np.prod(lam)
        d = trace_power_differences(V, kmax) if kmax else np.zeros(0)
        return np.array([det * _cycle_sum(d, k, 1.0 + 0j) for k in range(kmax + 1)])
    with mpmath.workdps(dps):
        Vm = mpmath.matrix(V.tolist())
        lam, _ = mpmath.eig(Vm)
        det = mpmath.fprod(lam)
        d = [mpmath.fsum(l ** (-j) - mpmath.conj(l) ** j for l in lam) for j in range(1, kmax + 1)]
        one = mpmath.mpc(1)
        return np.array([complex(det * _cycle_sum(d, k, one)) for k in range(kmax + 1)])


def blaschke_derivative(V, k: int, dps: int | None = None) -> complex:
    """f^(k)(0) for f(z) = det(zI + V) / det(I + zV^*), by the cycle-sum formula."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    return complex(blaschke_derivatives(V, k, dps)[k])


# ---------------------------------------------------------------------------
# series-division route


def series_ratio(V, kmax: int) -> TruncatedSeries:
    """det(zI + V) / det(I + zV^*) expanded to order kmax by series division."""
    V = _square(V)
    n = V.shape[0]
    num = np.zeros(kmax + 1, dtype=complex)
    a = char_poly_coefficients(V, kmax=min(n, kmax))
    num[: a.size] = a[: kmax + 1]
    # det(I + z V^*) = conj-coefficients of det(I + z V)
    den = np.conj(reversed_char_poly_coefficients(V, min(n, kmax)))
    inv = series_inverse(den, kmax)
    return TruncatedSeries(np.convolve(num, inv)[: kmax + 1])


def blaschke_product_series(lam: Sequence[complex], kmax: int) -> TruncatedSeries:
    """prod_i (z + lam_i) / (1 + z conj(lam_i)) expanded to order kmax."""
    s = np.zeros(kmax + 1, dtype=complex)
    s[0] = 1.0
    powers = np.arange(kmax + 1)
    for l in np.asarray(lam, dtype=complex):
        s = np.convolve(s, [l, 1.0])[: kmax + 1]
        s = np.convolve(s, (-np.conj(l)) ** powers)[: kmax + 1]
    return TruncatedSeries(s)


# ---------------------------------------------------------------------------
# matrix-series determinants


def _perm_sign(p: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(p)
    for i in range(len(p)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _as_coeff_array(entries, kmax: int) -> np.ndarray:
    if isinstance(entries, np.ndarray) and entries.dtype != object:
        arr = np.asarray(entries, dtype=complex)
        if arr.ndim != 3:
            raise DimensionError("expected an (n, n, K+1) coefficient array")
    else:
        rows = [[e.coeffs if isinstance(e, TruncatedSeries) else np.atleast_1d(e) for e in row] for row in entries]
        n = len(rows)
        K = max(c.size for row in rows for c in row)
        arr = np.zeros((n, n, K), dtype=complex)
        for i, row in enumerate(rows):
            if len(row) != n:
                raise DimensionError("entries must form a square array")
            for j, c in enumerate(row):
                arr[i, j, : c.size] = c
    n = arr.shape[0]
    if arr.shape[1] != n:
        raise DimensionError("entries must form a square array")
    out = np.zeros((n, n, kmax + 1), dtype=complex)
    m = min(kmax + 1, arr.shape[2])
    out[:, :, :m] = arr[:, :, :m]
    return out


def det_series(entries, kmax: int) -> TruncatedSeries:
    """Determinant of an n x n matrix of power series, truncated at z^kmax.

    ``entries`` is either an n x n nested sequence of :class:`TruncatedSeries`
    (or coefficient arrays / scalars) or an ``(n, n, K+1)`` array with the
    coefficient index last. Leibniz expansion; n <= 8.
    """
    C = _as_coeff_array(entries, kmax)
    n = C.shape[0]
    if n > MAX_LEIBNIZ_SIZE:
        raise DomainError(f"Leibniz expansion limited to n <= {MAX_LEIBNIZ_SIZE}, got {n}")
    total = np.zeros(kmax + 1, dtype=complex)
    for perm in itertools.permutations(range(n)):
        term = C[0, perm[0]]
        for i in range(1, n):
            term = np.convolve(term, C[i, perm[i]])[: kmax + 1]
        total += _perm_sign(perm) * term
    return TruncatedSeries(total)


def matrix_series_det(G: np.ndarray, kmax: int | None = None) -> TruncatedSeries:
    """Coefficients of det(G_0 + z G_1 + ... + z^M G_M) for a stack G of shape (M+1, n, n).

    Default truncation is the full degree n*M.
    """
    G = np.asarray(G, dtype=complex)
    M1, n, _ = G.shape
    if kmax is None:
        kmax = n * (M1 - 1)
    return det_series(np.moveaxis(G, 0, -1), kmax)


def scaled_fN_coefficients(V, n: int, kmax: int, sign_convention: bool = True) -> TruncatedSeries:
    """N^{n/2} times the Taylor coefficients of det(zI + V) / det(I + zV^*).

    With ``sign_convention`` the function is replaced by (-1)^n f(-z), the
    normalisation under which the large-N limit is det(G_0 + z G_1 + ...).
    """
    V = _square(V)
    N = V.shape[0]
    s = series_ratio(V, kmax).coeffs * N ** (n / 2)
    if sign_convention:
        k = np.arange(kmax + 1)
        s = s * np.where((k + n) % 2 == 0, 1.0, -1.0)
    return TruncatedSeries(s)
