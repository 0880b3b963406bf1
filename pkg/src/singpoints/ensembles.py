"""Samplers for the four point-process ensembles and the structured contraction."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import DegeneratePencilError, DimensionError, DomainError, SolverError
from .linalg import (
    RngStream,
    companion_roots,
    complex_gaussian_array,
    eigenvalues,
    generalized_eigenvalues,
    sample_ginibre_matrix,
    sample_haar_unitary,
)
from .series import matrix_series_det

log = logging.getLogger(__name__)

ENSEMBLES = ("planar", "spherical", "hyperbolic-det-gaf", "truncated-unitary")
MAX_RESAMPLES = 16
CONTRACTION_TOL = 1e-8
MIN_GAF_DEGREE, MAX_GAF_DEGREE = 8, 512


@dataclass
class PointConfiguration:
    family: str
    params: dict[str, Any]
    points: np.ndarray
    infinity_count: int = 0
    seed: int | None = None
    stream: list[int] | None = None
    resamples: int = 0

    def __post_init__(self):
        if self.family not in ENSEMBLES:
            raise DomainError(f"unknown ensemble {self.family!r}")
        self.points = np.asarray(self.points, dtype=complex).ravel()

    def __len__(self):
        return self.points.size

    @property
    def total_count(self) -> int:
        return self.points.size + self.infinity_count

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "params": self.params,
            "points": [[float(z.real), float(z.imag)] for z in self.points],
            "infinity_count": self.infinity_count,
            "seed": self.seed,
            "stream": self.stream,
        }

    def to_json_line(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    @classmethod
    def from_json(cls, obj: dict) -> "PointConfiguration":
        pts = np.array([complex(re, im) for re, im in obj["points"]], dtype=complex)
        return cls(
            family=obj["family"],
            params=dict(obj["params"]),
            points=pts,
            infinity_count=int(obj.get("infinity_count", 0)),
            seed=obj.get("seed"),
            stream=obj.get("stream"),
        )

    @classmethod
    def from_json_line(cls, line: str) -> "PointConfiguration":
        return cls.from_json(json.loads(line))


def _tag(rng: RngStream) -> dict:
    return {"seed": rng.seed, "stream": list(rng.key)}


def ginibre_points(n: int, rng: RngStream) -> PointConfiguration:
    """Eigenvalues of one n x n Ginibre matrix."""
    G = sample_ginibre_matrix(n, rng)
    return PointConfiguration("planar", {"n": n}, eigenvalues(G), **_tag(rng))


def spherical_points(n: int, rng: RngStream) -> PointConfiguration:
    """Zeros of det(z G_1 - G_2), i.e. generalized eigenvalues of the pencil (G_2, G_1).

    The QZ route avoids forming G_1^{-1} G_2. A degenerate pencil (a
    probability-zero event) is redrawn from the next substream and counted in
    ``resamples``.
    """
    if n < 1:
        raise DimensionError("n must be >= 1")
    source = rng
    for attempt in range(MAX_RESAMPLES + 1):
        G = complex_gaussian_array((2, n, n), source)
        try:
            lam = generalized_eigenvalues(G[1], G[0])
        except DegeneratePencilError:
            log.warning("degenerate spherical pencil (seed=%s key=%s); resampling", rng.seed, source.key)
            source = rng.substream(attempt + 1)
            continue
        inf = np.isinf(lam)
        return PointConfiguration(
            "spherical", {"n": n}, lam[~inf], int(inf.sum()), resamples=attempt, **_tag(rng)
        )
    raise SolverError(f"pencil degenerate after {MAX_RESAMPLES} resamples")


def truncated_unitary_block(N: int, n: int, rng: RngStream) -> np.ndarray:
    """Lower-right N x N block of a Haar (N+n) x (N+n) unitary."""
    if N < 1 or n < 1:
        raise DimensionError("N and n must be >= 1")
    U = sample_haar_unitary(N + n, rng)
    return U[n:, n:]


def truncated_unitary_points(N: int, n: int, rng: RngStream) -> PointConfiguration:
    lam = eigenvalues(truncated_unitary_block(N, n, rng))
    if np.any(np.abs(lam) > 1.0 + CONTRACTION_TOL):
        raise SolverError("truncated-unitary eigenvalue outside the unit disk")
    return PointConfiguration("truncated-unitary", {"N": N, "n": n}, lam, **_tag(rng))


def gaf_truncation_degree(radius: float, tail_eps: float) -> int:
    """M = ceil(log(tail_eps (1 - radius)) / log(radius)), clamped to [8, 512].

    For unit-variance coefficients, sum_{k > M} radius^k = radius^{M+1} / (1 - radius)
    is then at most tail_eps * radius.
    """
    if not 0.0 < radius < 1.0:
        raise DomainError(f"radius must lie in (0, 1), got {radius}")
    if tail_eps <= 0:
        raise DomainError("tail_eps must be positive")
    M = math.ceil(math.log(tail_eps * (1.0 - radius)) / math.log(radius))
    return int(min(max(M, MIN_GAF_DEGREE), MAX_GAF_DEGREE))


def sample_gaussian_stack(degree: int, n: int, rng: RngStream) -> np.ndarray:
    """G_0..G_degree, shape (degree+1, n, n).

    A longer stack from the same stream extends a shorter one.
    """
    return complex_gaussian_array((degree + 1, n, n), rng)


def det_gaf_roots(G: np.ndarray, degree: int, radius: float) -> np.ndarray:
    """Zeros in |z| < radius of det(sum_{k<=degree} G_k z^k)."""
    poly = matrix_series_det(G[: degree + 1])
    roots = companion_roots(poly.coeffs)
    return roots[np.abs(roots) < radius]


def det_gaf_zeros(n: int, radius: float, tail_eps: float, rng: RngStream) -> PointConfiguration:
    """Zeros inside |z| < radius of the truncated matrix Gaussian power series determinant."""
    if n < 1:
        raise DimensionError("n must be >= 1")
    M = gaf_truncation_degree(radius, tail_eps)
    G = sample_gaussian_stack(M, n, rng)
    pts = det_gaf_roots(G, M, radius)
    params = {"n": n, "radius": radius, "tail_eps": tail_eps, "degree": M}
    return PointConfiguration("hyperbolic-det-gaf", params, pts, **_tag(rng))


def structured_contraction(A, N: int, rng: RngStream) -> np.ndarray:
    """V = Q^* diag(A, I_{N-n}) P^* with P, Q independent Haar(N)."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise DimensionError("A must be square")
    if N < n:
        raise DomainError(f"need N >= n, got N={N}, n={n}")
    P = sample_haar_unitary(N, rng)
    Q = sample_haar_unitary(N, rng)
    D = np.eye(N, dtype=complex)
    D[:n, :n] = A
    return Q.conj().T @ D @ P.conj().T


def sample_configuration(family: str, params: dict, rng: RngStream) -> PointConfiguration:
    """Dispatch on an ensemble tag (also accepts kernel-family aliases)."""
    alias = {"truncated": "truncated-unitary", "hyperbolic": "hyperbolic-det-gaf", "ginibre": "planar"}
    family = alias.get(family, family)
    if family == "planar":
        return ginibre_points(int(params["n"]), rng)
    if family == "spherical":
        return spherical_points(int(params["n"]), rng)
    if family == "truncated-unitary":
        return truncated_unitary_points(int(params["N"]), int(params["n"]), rng)
    if family == "hyperbolic-det-gaf":
        return det_gaf_zeros(int(params["n"]), float(params["radius"]), float(params.get("tail_eps", 1e-6)), rng)
    raise DomainError(f"unknown ensemble {family!r}")
