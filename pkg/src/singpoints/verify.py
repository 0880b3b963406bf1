"""Monte Carlo drivers that turn distributional statements into pass/fail reports.

Every driver takes an :class:`~singpoints.linalg.RngStream`; trial ``t`` draws
from ``rng.substream(t)``, so a report is a deterministic function of the
seed and parameters whatever the thread count.
"""
from __future__ import annotations

import math

import numpy as np

from . import kernels as K
from .config import VerifyConfig
from .ensembles import (
    det_gaf_roots,
    gaf_truncation_degree,
    ginibre_points,
    sample_gaussian_stack,
    spherical_points,
    truncated_unitary_block,
    truncated_unitary_points,
)
from .errors import DomainError, SingularMatrixError
from .kernels import KernelFamily, MobiusMap, mobius_apply
from .linalg import RngStream, sample_ginibre_matrix, sample_haar_unitary
from .series import blaschke_derivatives, matrix_series_det, scaled_fN_coefficients, series_ratio
from .stats import (
    MomentTable,
    TestReport,
    ks2_critical_value,
    ks_critical_value,
    ks_statistic,
    mean_and_stderr,
    run_trials,
    two_sample_ks,
    variance_and_stderr,
)

DEFAULT = VerifyConfig()


def _pick_point(conf, rng: RngStream) -> complex:
    """One uniformly chosen point of a configuration (its law is the normalised first intensity)."""
    i = int(rng.generator.integers(conf.points.size))
    return complex(conf.points[i])


def _require_trials(trials: int, minimum: int = 1000):
    if trials < minimum:
        raise DomainError(f"need at least {minimum} trials, got {trials}")


# ---------------------------------------------------------------------------
# radial laws


def radial_law_test(family: KernelFamily, trials: int, rng: RngStream, cfg: VerifyConfig = DEFAULT) -> TestReport:
    """Spherical: KS of |lam|^2 against t/(1+t). Truncated: Beta-law count moments at t = 1/4, 1/2, 3/4."""
    _require_trials(trials)
    if family.tag == "spherical":
        n = family.n

        def one(s):
            conf = spherical_points(n, s)
            if conf.infinity_count:
                return math.inf
            z = complex(conf.points[0]) if n == 1 else _pick_point(conf, s)
            return abs(z) ** 2

        t = np.array(run_trials(one, trials, rng, cfg.threads))
        D = ks_statistic(t, lambda x: x / (1.0 + x))
        crit = ks_critical_value(trials, cfg.ks_alpha)
        return TestReport(
            f"radial-law spherical(n={n})", D, 0.0, crit / (cfg.sigma or 1.0), crit, trials, rng.seed, "upper",
            details={"cdf": "t/(1+t)", "alpha": cfg.ks_alpha},
        )
    if family.tag == "truncated":
        return beta_count_test(family.N, family.n, trials, rng, cfg=cfg)
    raise DomainError("radial_law_test supports the spherical and truncated families")


def beta_count_test(
    N: int, n: int, trials: int, rng: RngStream, ts=(0.25, 0.5, 0.75), cfg: VerifyConfig = DEFAULT
) -> TestReport:
    """Counts #{|lam|^2 <= t} of truncated-unitary eigenvalues vs independent Beta(k+1, n) predictions."""
    _require_trials(trials)
    ts = tuple(float(t) for t in ts)

    def one(s):
        r2 = np.abs(truncated_unitary_points(N, n, s).points) ** 2
        return [int(np.sum(r2 <= t)) for t in ts]

    counts = np.array(run_trials(one, trials, rng, cfg.threads), dtype=float)
    rows = {}
    worst = 0.0
    for j, t in enumerate(ts):
        mu, var = K.predicted_count_moments(N, n, t)
        m, se_m = mean_and_stderr(counts[:, j])
        v, se_v = variance_and_stderr(counts[:, j])
        z_m = _z(m, mu, se_m)
        z_v = _z(v, var, se_v)
        worst = max(worst, abs(z_m), abs(z_v))
        rows[f"t={t:g}"] = {
            "mean": float(m), "mean_predicted": mu, "mean_stderr": float(se_m), "mean_z": z_m,
            "var": v, "var_predicted": var, "var_stderr": se_v, "var_z": z_v,
        }
    return TestReport(
        f"beta-counts truncated(N={N}, n={n})", worst, 0.0, 1.0, cfg.sigma, trials, rng.seed, "absolute", details=rows
    )


def _z(x, mu, se):
    if se == 0:
        return 0.0 if abs(x - mu) < 1e-12 else math.inf
    return float((x - mu) / se)


# ---------------------------------------------------------------------------
# invariance


def invariance_test(
    family: KernelFamily,
    mobius: MobiusMap,
    trials: int,
    rng: RngStream,
    radius: float = 0.6,
    cfg: VerifyConfig = DEFAULT,
) -> TestReport:
    """Compare transformed samples with fresh samples.

    spherical(n): two-sample KS between |phi(z)|^2 and |z'|^2, one uniformly
    chosen point per configuration.

    hyperbolic(n): mean count of phi(zeros) in |w| < radius against the mean
    count of fresh zeros there. Zeros are sampled out to a radius that covers
    phi^{-1}({|w| < radius}).
    """
    _require_trials(trials)
    if family.tag == "spherical":
        if mobius.geometry != "sphere":
            raise DomainError("spherical family needs a sphere map")
        n = family.n

        def one(s):
            a = spherical_points(n, s.substream(0))
            b = spherical_points(n, s.substream(1))
            pick = s.substream(2)
            w = mobius_apply(mobius, _pick_point(a, pick))
            z = _pick_point(b, pick)
            return abs(w) ** 2, abs(z) ** 2

        pairs = np.array(run_trials(one, trials, rng, cfg.threads))
        D = two_sample_ks(pairs[:, 0], pairs[:, 1])
        crit = ks2_critical_value(trials, trials, cfg.ks_alpha)
        return TestReport(
            f"invariance spherical(n={n}) alpha={mobius.alpha:.4g} beta={mobius.beta:.4g}",
            D, 0.0, crit / cfg.sigma, crit, trials, rng.seed, "upper", details={"alpha_level": cfg.ks_alpha},
        )
    if family.tag == "hyperbolic":
        if mobius.geometry != "disk":
            raise DomainError("hyperbolic family needs a disk map")
        n = family.n
        shift = math.atanh(min(abs(mobius.beta / mobius.alpha), 1 - 1e-15))
        sample_radius = math.tanh(math.atanh(radius) + shift) + 1e-3
        if sample_radius >= 1:
            raise DomainError("map moves the test disk too close to the boundary")
        M = gaf_truncation_degree(sample_radius, cfg.tail_eps)

        def one(s):
            za = det_gaf_roots(sample_gaussian_stack(M, n, s.substream(0)), M, sample_radius)
            zb = det_gaf_roots(sample_gaussian_stack(M, n, s.substream(1)), M, sample_radius)
            w = mobius_apply(mobius, za) if za.size else za
            return int(np.sum(np.abs(w) < radius)), int(np.sum(np.abs(zb) < radius))

        c = np.array(run_trials(one, trials, rng, cfg.threads), dtype=float)
        (ma, sa), (mb, sb) = mean_and_stderr(c[:, 0]), mean_and_stderr(c[:, 1])
        se = math.hypot(sa, sb)
        return TestReport(
            f"invariance hyperbolic(n={n}) count in |z|<{radius}",
            float(ma), float(mb), se, cfg.sigma * se, trials, rng.seed, "two-sided",
            details={
                "fresh_mean": float(mb), "transformed_mean": float(ma),
                "closed_form": K.expected_count(KernelFamily.hyperbolic(n), radius),
                "sample_radius": sample_radius, "degree": M,
            },
        )
    raise DomainError("invariance_test supports the spherical and hyperbolic families")


# ---------------------------------------------------------------------------
# Haar powers


def haar_power_labels(n: int, pmax: int) -> list[tuple[int, int, int]]:
    return [(p, i, j) for p in range(1, pmax + 1) for i in range(n) for j in range(n)]


def haar_power_entries(N: int, n: int, pmax: int, rng: RngStream) -> np.ndarray:
    """sqrt(N) (U^p)_{ij} for p = 1..pmax, i, j < n, flattened in :func:`haar_power_labels` order."""
    U = sample_haar_unitary(N, rng)
    W = U[:, :n]
    out = []
    for _ in range(pmax):
        out.append(W[:n, :].ravel())
        W = U @ W
    return math.sqrt(N) * np.concatenate(out)


def haar_power_moments(
    N: int, n: int, pmax: int, trials: int, rng: RngStream, cfg: VerifyConfig = DEFAULT, check: bool = True
) -> MomentTable:
    """Second and fourth moments of scaled entries of U, U^2, ..., against the Gaussian limit.

    Rows: E|x|^2 (-> 1), E[x^2] (-> 0), E|x|^4 (-> 2) per variable, and
    E[x conj(y)] (-> 0) for every pair of distinct variables.
    """
    if check:
        if N < 8 * pmax * n:
            raise DomainError(f"need N >= 8 * pmax * n = {8 * pmax * n}")
        _require_trials(trials)
    X = np.array(run_trials(lambda s: haar_power_entries(N, n, pmax, s), trials, rng, cfg.threads))
    names = [f"(U^{p})[{i + 1},{j + 1}]" for p, i, j in haar_power_labels(n, pmax)]
    labels, emp, pred, se = [], [], [], []

    def add(label, samples, target):
        m, s = mean_and_stderr(samples)
        labels.append(label)
        emp.append(m)
        pred.append(target)
        se.append(s)

    L = X.shape[1]
    for a in range(L):
        x = X[:, a]
        add(f"E|x|^2 {names[a]}", np.abs(x) ** 2, 1.0)
        add(f"E[x^2] {names[a]}", x**2, 0.0)
        add(f"E|x|^4 {names[a]}", np.abs(x) ** 4, 2.0)
    for a in range(L):
        for b in range(a + 1, L):
            add(f"E[x conj(y)] {names[a]} {names[b]}", X[:, a] * np.conj(X[:, b]), 0.0)
    return MomentTable(labels, emp, pred, se)


# ---------------------------------------------------------------------------
# f_N(0)


def f0_moment_test(N: int, n: int, trials: int, rng: RngStream, cfg: VerifyConfig = DEFAULT) -> TestReport:
    """Mean of |f_N(0)|^2 = |det V|^2 over truncated unitaries against prod (k+1)/(n+k+1)."""
    _require_trials(trials)
    vals = np.array(
        run_trials(lambda s: abs(np.linalg.det(truncated_unitary_block(N, n, s))) ** 2, trials, rng, cfg.threads)
    )
    m, se = mean_and_stderr(vals)
    pred = K.blaschke_zero_moment(N, n)
    return TestReport(
        f"f0-moment E|f_N(0)|^2 N={N} n={n}", float(m), pred, float(se), cfg.sigma * float(se), trials, rng.seed,
        details={"scaled_limit": math.factorial(n), "scaled_empirical": float(m) * N**n},
    )


# ---------------------------------------------------------------------------
# coefficient convergence


def _coefficient_moment_rows(prefix: str, C: np.ndarray, n: int, labels, emp, pred, se):
    kmax = C.shape[1] - 1
    for k in range(kmax + 1):
        m, s = mean_and_stderr(np.abs(C[:, k]) ** 2)
        labels.append(f"{prefix} E|c_{k}|^2")
        emp.append(m)
        pred.append(K.limit_coefficient_second_moment(n, k))
        se.append(s)
    for k in range(kmax + 1):
        for j in range(k + 1, kmax + 1):
            m, s = mean_and_stderr(C[:, k] * np.conj(C[:, j]))
            labels.append(f"{prefix} E[c_{k} conj(c_{j})]")
            emp.append(m)
            pred.append(0.0)
            se.append(s)


def coefficient_samples(N: int, n: int, kmax: int, rng: RngStream) -> tuple[np.ndarray, np.ndarray]:
    """One draw of (scaled f_N coefficients of a truncated unitary, det-GAF coefficients)."""
    V = truncated_unitary_block(N, n, rng.substream(0))
    c = scaled_fN_coefficients(V, n, kmax).coeffs
    G = sample_gaussian_stack(kmax, n, rng.substream(1))
    ref = matrix_series_det(G, kmax).coeffs
    return c, ref


def coefficient_convergence_test(
    N: int, n: int, kmax: int, trials: int, rng: RngStream, cfg: VerifyConfig = DEFAULT, check: bool = True
) -> MomentTable:
    """Moments of N^{n/2} f_N coefficients ("fN" rows) beside those of det(G_0 + z G_1 + ...) ("ref" rows).

    Predicted values are the limit moments: E|c_k|^2 = n! binom(k+n-1, n-1), cross moments 0.
    """
    if check:
        if N < 64 or kmax > 6 or n > 3:
            raise DomainError("coefficient convergence needs N >= 64, kmax <= 6, n <= 3")
        _require_trials(trials)
    out = run_trials(lambda s: coefficient_samples(N, n, kmax, s), trials, rng, cfg.threads)
    C = np.array([o[0] for o in out])
    R = np.array([o[1] for o in out])
    labels, emp, pred, se = [], [], [], []
    _coefficient_moment_rows("fN", C, n, labels, emp, pred, se)
    _coefficient_moment_rows("ref", R, n, labels, emp, pred, se)
    return MomentTable(labels, emp, pred, se)


def convergence_reports(table: MomentTable, trials: int, seed: int, cfg: VerifyConfig = DEFAULT) -> list[TestReport]:
    """(1) f_N rows vs the limit within sigma + allowance, (2) reference rows vs the limit,
    (3) f_N vs reference row by row within joint sigma."""
    fN = table.select(lambda l: l.startswith("fN "))
    ref = table.select(lambda l: l.startswith("ref "))
    diff = MomentTable(
        [l[3:] for l in fN.labels], fN.empirical - ref.empirical, np.zeros(len(fN)),
        np.hypot(fN.stderr, ref.stderr),
    )
    return [
        fN.report("convergence f_N coefficients vs limit", cfg.sigma, trials, seed, cfg.convergence_allowance),
        ref.report("convergence det-GAF reference vs limit", cfg.sigma, trials, seed),
        diff.report("convergence f_N vs det-GAF reference (joint)", cfg.sigma, trials, seed),
    ]


# ---------------------------------------------------------------------------
# first intensities


def ginibre_intensity_test(n: int, r: float, trials: int, rng: RngStream, cfg: VerifyConfig = DEFAULT) -> TestReport:
    _require_trials(trials)
    counts = np.array(
        run_trials(lambda s: int(np.sum(np.abs(ginibre_points(n, s).points) < r)), trials, rng, cfg.threads),
        dtype=float,
    )
    m, se = mean_and_stderr(counts)
    pred = K.expected_count(KernelFamily.planar(n), r)
    thr = cfg.sigma * se if se > 0 else 1e-9
    return TestReport(f"ginibre-intensity n={n} r={r}", float(m), pred, float(se), thr, trials, rng.seed)


def det_gaf_intensity_test(
    n: int, radius: float, trials: int, rng: RngStream, cfg: VerifyConfig = DEFAULT
) -> TestReport:
    """Mean zero count of the truncated det-GAF in |z| < radius vs n r^2 / (1 - r^2).

    Each trial also recounts with twice the truncation degree on the same
    coefficients; the paired difference bounds the truncation bias, which must
    stay below ``bias_fraction`` of the predicted mean.
    """
    _require_trials(trials)
    M = gaf_truncation_degree(radius, cfg.tail_eps)
    M2 = min(2 * M, 1024)

    def one(s):
        G = sample_gaussian_stack(M2, n, s)
        return det_gaf_roots(G, M, radius).size, det_gaf_roots(G, M2, radius).size

    c = np.array(run_trials(one, trials, rng, cfg.threads), dtype=float)
    m, se = mean_and_stderr(c[:, 0])
    dm, dse = mean_and_stderr(c[:, 0] - c[:, 1])
    pred = K.expected_count(KernelFamily.hyperbolic(n), radius)
    bias_bound = abs(float(dm)) + cfg.sigma * float(dse)
    bias_ok = bias_bound < cfg.bias_fraction * pred
    report = TestReport(
        f"det-gaf intensity n={n} radius={radius}", float(m), pred, float(se), cfg.sigma * float(se), trials,
        rng.seed,
        details={
            "degree": M, "check_degree": M2, "tail_eps": cfg.tail_eps,
            "bias_estimate": float(dm), "bias_bound": bias_bound,
            "bias_limit": cfg.bias_fraction * pred, "bias_ok": bool(bias_ok),
        },
    )
    report.passed = report.passed and bias_ok
    return report


# ---------------------------------------------------------------------------
# cycle-sum oracle


def cycle_sum_oracle_test(
    count: int, rng: RngStream, sizes=(2, 3, 4, 5, 6), kmax: int = 10, cfg: VerifyConfig = DEFAULT
) -> TestReport:
    """Cycle-sum derivatives vs k! times series-division coefficients on random Ginibre matrices."""
    facts = np.array([math.factorial(k) for k in range(kmax + 1)], dtype=float)

    def one(s):
        size = sizes[s.key[-1] % len(sizes)]
        for attempt in range(16):
            V = sample_ginibre_matrix(size, s.substream(attempt))
            try:
                cyc = blaschke_derivatives(V, kmax, dps=cfg.oracle_dps)
                break
            except SingularMatrixError:
                continue
        div = facts * series_ratio(V, kmax).coeffs
        scale = np.maximum(np.abs(div), np.finfo(float).tiny)
        return float(np.max(np.abs(cyc - div) / scale))

    errs = np.array(run_trials(one, count, rng, cfg.threads))
    return TestReport(
        f"cycle-sum vs series division ({count} matrices, k<={kmax})",
        float(errs.max()), 0.0, 0.0, cfg.oracle_rtol, count, rng.seed, "upper",
        details={"median_rel_err": float(np.median(errs)), "dps": cfg.oracle_dps},
    )


# ---------------------------------------------------------------------------
# exact Mobius identities


def _random_sphere_map(g: np.random.Generator) -> MobiusMap:
    v = g.standard_normal(4)
    v /= np.linalg.norm(v)
    return MobiusMap(complex(v[0], v[1]), complex(v[2], v[3]), "sphere")


def _random_disk_map(g: np.random.Generator, max_beta: float = 2.0) -> MobiusMap:
    beta = max_beta * math.sqrt(g.uniform()) * np.exp(2j * math.pi * g.uniform())
    alpha = math.sqrt(1.0 + abs(beta) ** 2) * np.exp(2j * math.pi * g.uniform())
    return MobiusMap(complex(alpha), complex(beta), "disk")


def _random_point(g: np.random.Generator, radius: float) -> complex:
    return complex(radius * math.sqrt(g.uniform()) * np.exp(2j * math.pi * g.uniform()))


def mobius_identity_deviations(count: int, rng: RngStream) -> dict[str, float]:
    """Max absolute deviation of each pointwise identity over ``count`` random (z, w, alpha, beta).

    sphere, with D(z) = -conj(beta) z + conj(alpha):
      derivative  phi'(z) = 1 / D(z)^2
      metric      (1 + |phi(z)|^2) |D(z)|^2 = 1 + |z|^2
      difference  phi(z) - phi(w) = (z - w) / (D(z) D(w))
    disk:
      phi'(z) conj(phi'(w)) / (1 - phi(z) conj(phi(w)))^2 = 1 / (1 - z conj(w))^2
    Sphere points are drawn from |z| < 2, disk points from |z| < 0.9. Near a
    pole both sides blow up, so a deviation is |lhs - rhs| / max(1, |rhs|).
    """
    g = rng.generator
    dev = {"derivative": 0.0, "metric": 0.0, "difference": 0.0, "disk-kernel": 0.0}

    def err(name, lhs, rhs):
        dev[name] = max(dev[name], abs(lhs - rhs) / max(1.0, abs(rhs)))

    for _ in range(count):
        m = _random_sphere_map(g)
        z, w = _random_point(g, 2.0), _random_point(g, 2.0)
        D = lambda x: -m.beta.conjugate() * x + m.alpha.conjugate()  # noqa: E731
        phi_z, phi_w = mobius_apply(m, z), mobius_apply(m, w)
        err("derivative", complex(m.derivative(z)), 1.0 / D(z) ** 2)
        err("metric", (1 + abs(phi_z) ** 2) * abs(D(z)) ** 2, 1 + abs(z) ** 2)
        err("difference", phi_z - phi_w, (z - w) / (D(z) * D(w)))

        h = _random_disk_map(g)
        z, w = _random_point(g, 0.9), _random_point(g, 0.9)
        pz, pw = mobius_apply(h, z), mobius_apply(h, w)
        lhs = complex(h.derivative(z)) * complex(h.derivative(w)).conjugate() / (1 - pz * pw.conjugate()) ** 2
        err("disk-kernel", lhs, 1.0 / (1 - z * w.conjugate()) ** 2)
    return dev


def mobius_identity_suite(count: int, rng: RngStream, tol: float = 1e-12) -> list[TestReport]:
    dev = mobius_identity_deviations(count, rng)
    return [
        TestReport(f"mobius identity {name}", d, 0.0, 0.0, tol, count, rng.seed, "upper") for name, d in dev.items()
    ]
