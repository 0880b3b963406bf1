"""Complex dense linear algebra and randomness primitives.

Matrices are plain ``numpy`` complex128 arrays; the JSON helpers at the bottom
give them a stable wire format.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DegeneratePencilError, DimensionError, SolverError

#: Distinguished value for generalized eigenvalues at infinity.
INFINITY = complex(np.inf, 0.0)

UNITARITY_TOL = 1e-12
EIGEN_REL_TOL = 1e-8


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream identified by ``(seed, stream_index)``.

    Streams are built on :class:`numpy.random.SeedSequence` spawn keys, so
    distinct indices give statistically independent PCG64 generators. Nested
    substreams extend the key, e.g. ``RngStream(7, 3).substream(1)`` has key
    ``(3, 1)``.
    """

    seed: int
    stream_index: int = 0
    path: tuple[int, ...] = ()
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.stream_index < 0:
            raise ValueError("stream_index must be nonnegative")
        ss = np.random.SeedSequence(self.seed, spawn_key=self.key)
        object.__setattr__(self, "generator", np.random.Generator(np.random.PCG64(ss)))

    @property
    def key(self) -> tuple[int, ...]:
        return (self.stream_index, *self.path)

    def substream(self, j: int) -> "RngStream":
        return RngStream(self.seed, self.stream_index, (*self.path, int(j)))


def as_generator(rng: RngStream | np.random.Generator) -> np.random.Generator:
    return rng.generator if isinstance(rng, RngStream) else rng


def complex_gaussian_array(shape, rng: RngStream | np.random.Generator) -> np.ndarray:
    """Standard complex Gaussians (E|g|^2 = 1) of the given shape.

    Real and imaginary parts are interleaved along a trailing axis, so a
    larger leading dimension extends rather than reshuffles an earlier draw.
    """
    shape = tuple(np.atleast_1d(shape)) if not isinstance(shape, tuple) else shape
    xy = as_generator(rng).standard_normal(shape + (2,))
    return (xy[..., 0] + 1j * xy[..., 1]) / np.sqrt(2.0)


def sample_complex_gaussian(rng: RngStream | np.random.Generator) -> complex:
    return complex(complex_gaussian_array((), rng))


def sample_ginibre_matrix(n: int, rng: RngStream | np.random.Generator) -> np.ndarray:
    if n < 1:
        raise DimensionError(f"matrix size must be positive, got {n}")
    return complex_gaussian_array((n, n), rng)


def sample_haar_unitary(N: int, rng: RngStream | np.random.Generator) -> np.ndarray:
    """Haar-distributed N x N unitary.

    QR of a Ginibre matrix, with the columns of Q rotated so that R has a
    positive real diagonal. Without that phase fix the law is not Haar.
    """
    Z = sample_ginibre_matrix(N, rng)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def _square(M, name="matrix") -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise SolverError(f"{name} has non-finite entries")
    return M


def eigenvalues(M) -> np.ndarray:
    """Eigenvalues (with multiplicity) via LAPACK's Hessenberg/shifted-QR path."""
    M = _square(M)
    try:
        return np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise SolverError(
            f"eigenvalue iteration failed to converge for {M.shape[0]}x{M.shape[0]} "
            f"matrix (max |entry| = {np.abs(M).max():.3g}): {exc}"
        ) from exc


def generalized_eigenvalues(A, B, tol: float = 1e-13) -> np.ndarray:
    """Roots z of det(zB - A) = 0, computed by QZ.

    Roots at infinity (beta == 0) are returned as :data:`INFINITY`. If some
    pair (alpha, beta) is zero in both components relative to the matrix
    scales, the pencil is singular and :class:`DegeneratePencilError` is raised.
    """
    A = _square(A, "A")
    B = _square(B, "B")
    if A.shape != B.shape:
        raise DimensionError(f"pencil shapes differ: {A.shape} vs {B.shape}")
    try:
        ab = scipy.linalg.eigvals(A, B, homogeneous_eigvals=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"QZ iteration failed: {exc}") from exc
    alpha, beta = ab[0], ab[1]
    scale_a = max(np.linalg.norm(A, 2), 1e-300)
    scale_b = max(np.linalg.norm(B, 2), 1e-300)
    small_a = np.abs(alpha) <= tol * scale_a
    small_b = np.abs(beta) <= tol * scale_b
    if np.any(small_a & small_b):
        raise DegeneratePencilError("singular pencil: alpha and beta both vanish")
    out = np.empty(alpha.shape, dtype=complex)
    out[small_b] = INFINITY
    out[~small_b] = alpha[~small_b] / beta[~small_b]
    return out


def schur_decompose(M) -> tuple[np.ndarray, np.ndarray]:
    """Complex Schur form: returns (U, T) with M = U T U^*, T upper triangular."""
    M = _square(M)
    try:
        T, U = scipy.linalg.schur(M, output="complex")
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"Schur iteration failed: {exc}") from exc
    return U, T


def hessenberg_det_series(H: np.ndarray, kmax: int, reverse: bool = False) -> np.ndarray:
    """Low-order coefficients of det(zI + H) (or det(I + zH) when ``reverse``).

    ``H`` must be upper Hessenberg. Uses the row-expansion recurrence for
    Hessenberg determinants with every intermediate polynomial cut at degree
    ``kmax``; since all updates are multiplications by polynomials in z with
    nonnegative powers, the truncation is exact.
    """
    n = H.shape[0]
    P = np.zeros((n + 1, kmax + 1), dtype=complex)
    P[0, 0] = 1.0
    # prods[i] = prod_{j=i+1}^{k} h_{j,j-1} (0-based rows), for the current k.
    prods = np.zeros(0, dtype=complex)
    for k in range(1, n + 1):
        hkk = H[k - 1, k - 1]
        p = np.zeros(kmax + 1, dtype=complex)
        if reverse:
            p += P[k - 1]
            p[1:] += hkk * P[k - 1][:-1]
        else:
            p[1:] += P[k - 1][:-1]
            p += hkk * P[k - 1]
        if k > 1:
            sub = H[k - 1, k - 2]
            prods = np.append(prods * sub, sub)  # length k-1, index i-1 for i=1..k-1
            i = np.arange(1, k)
            signs = np.where((k - i) % 2 == 0, 1.0, -1.0)
            c = signs * H[i - 1, k - 1] * prods
            if reverse:
                # term carries z^{k-i+1}; only shifts <= kmax survive truncation
                for ii in range(max(1, k - kmax), k):
                    s = k - ii + 1
                    if s <= kmax:
                        p[s:] += c[ii - 1] * P[ii - 1][: kmax + 1 - s]
            else:
                p += c @ P[: k - 1]
        P[k] = p
    return P[n]


def char_poly_coefficients(M, kmax: int | None = None) -> np.ndarray:
    """Coefficients a_0..a_n of det(zI + M), ascending; a_n = 1 and a_0 = det(M).

    With ``kmax`` only a_0..a_kmax are computed (cheaper for large matrices).
    """
    M = _square(M)
    n = M.shape[0]
    H = scipy.linalg.hessenberg(M)
    return hessenberg_det_series(H, n if kmax is None else kmax)


def reversed_char_poly_coefficients(M, kmax: int) -> np.ndarray:
    """Coefficients e_0..e_kmax of det(I + zM) (elementary symmetric functions of the spectrum)."""
    M = _square(M)
    H = scipy.linalg.hessenberg(M)
    return hessenberg_det_series(H, kmax, reverse=True)


def companion_roots(coeffs: Sequence[complex]) -> np.ndarray:
    """Roots of sum_k coeffs[k] z^k via eigenvalues of the companion matrix."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=complex), "b")
    if c.size <= 1:
        return np.zeros(0, dtype=complex)
    # factor out exact zero roots
    nz = 0
    while c[nz] == 0:
        nz += 1
    c = c[nz:]
    d = c.size - 1
    if d == 0:
        return np.zeros(nz, dtype=complex)
    C = np.zeros((d, d), dtype=complex)
    C[1:, :-1] = np.eye(d - 1)
    C[:, -1] = -c[:-1] / c[-1]
    return np.concatenate([np.zeros(nz, dtype=complex), eigenvalues(C)])


def matrix_to_json(M) -> dict:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise DimensionError("expected a 2-D matrix")
    return {
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "re": M.real.ravel().tolist(),
        "im": M.imag.ravel().tolist(),
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    if rows < 1 or cols < 1:
        raise DimensionError("rows and cols must be positive")
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros(rows * cols)), dtype=float)
    if re.size != rows * cols or im.size != rows * cols:
        raise DimensionError(f"expected {rows * cols} entries, got {re.size}/{im.size}")
    M = (re + 1j * im).reshape(rows, cols)
    if not np.all(np.isfinite(M)):
        raise DimensionError("matrix entries must be finite")
    return M
