"""Statistical plumbing: KS distances, reports, moment tables and a trial runner."""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy import stats as sps

from .errors import DimensionError
from .linalg import RngStream

# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov


def ks_statistic(sample: Sequence[float], cdf: Callable) -> float:
    """sup_x |F_n(x) - F(x)| for the empirical CDF of ``sample``."""
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if n == 0:
        raise DimensionError("KS statistic of an empty sample")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def two_sample_ks(a: Sequence[float], b: Sequence[float]) -> float:
    """sup_x |F_a(x) - F_b(x)| between two empirical CDFs."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise DimensionError("two-sample KS needs two nonempty samples")
    grid = np.concatenate([a, b])
    Fa = np.searchsorted(a, grid, side="right") / a.size
    Fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(Fa - Fb)))


def ks_critical_value(n: int, alpha: float = 0.01) -> float:
    """Asymptotic one-sample critical value K_alpha / sqrt(n) (K_0.01 = 1.628)."""
    return float(sps.kstwobign.isf(alpha) / math.sqrt(n))


def ks2_critical_value(n: int, m: int, alpha: float = 0.01) -> float:
    return float(sps.kstwobign.isf(alpha) * math.sqrt((n + m) / (n * m)))


# ---------------------------------------------------------------------------
# moments


def mean_and_stderr(x) -> tuple[complex | float, float]:
    """Sample mean and its standard error. For complex data the error is sqrt(E|x - mean|^2 / T)."""
    x = np.asarray(x)
    T = x.shape[0]
    m = x.mean(axis=0)
    se = np.sqrt(np.mean(np.abs(x - m) ** 2, axis=0) / max(T - 1, 1))
    return m, se


def variance_and_stderr(x) -> tuple[float, float]:
    """Unbiased sample variance and a delta-method standard error sqrt((m4 - s^4) / T)."""
    x = np.asarray(x, dtype=float)
    T = x.size
    c = x - x.mean()
    s2 = float(np.sum(c**2) / (T - 1))
    m4 = float(np.mean(c**4))
    return s2, math.sqrt(max(m4 - s2 * s2, 0.0) / T)


# ---------------------------------------------------------------------------
# reports

MODES = ("two-sided", "upper", "absolute")


@dataclass
class TestReport:
    """One verified statistic.

    ``mode`` records the pass rule: ``two-sided`` means
    |statistic - predicted| <= threshold; ``upper`` means statistic <= threshold
    (KS-type); ``absolute`` means |statistic| <= threshold.
    """

    __test__ = False  # not a pytest class

    name: str
    statistic: float
    predicted: float
    stderr: float
    threshold: float
    trials: int
    seed: int
    mode: str = "two-sided"
    passed: bool = field(default=False)
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        self.passed = self.evaluate()

    def evaluate(self) -> bool:
        if self.mode == "upper":
            return bool(self.statistic <= self.threshold)
        if self.mode == "absolute":
            return bool(abs(self.statistic) <= self.threshold)
        return bool(abs(self.statistic - self.predicted) <= self.threshold)

    @property
    def z_score(self) -> float:
        if self.stderr == 0:
            return 0.0 if self.statistic == self.predicted else math.inf
        return (self.statistic - self.predicted) / self.stderr

    def to_json(self) -> dict:
        d = asdict(self)
        d["details"] = _jsonable(self.details)
        return d

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (
            f"[{flag}] {self.name}: statistic={self.statistic:.6g} predicted={self.predicted:.6g} "
            f"stderr={self.stderr:.3g} threshold={self.threshold:.3g} ({self.mode}, trials={self.trials})"
        )


@dataclass
class MomentTable:
    labels: list[str]
    empirical: np.ndarray
    predicted: np.ndarray
    stderr: np.ndarray

    def __post_init__(self):
        self.empirical = np.asarray(self.empirical, dtype=complex)
        self.predicted = np.asarray(self.predicted, dtype=complex)
        self.stderr = np.asarray(self.stderr, dtype=float)
        n = len(self.labels)
        if not (self.empirical.size == self.predicted.size == self.stderr.size == n):
            raise DimensionError("moment table columns must have equal lengths")

    def __len__(self):
        return len(self.labels)

    def z_scores(self) -> np.ndarray:
        dev = np.abs(self.empirical - self.predicted)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.stderr > 0, dev / self.stderr, np.where(dev == 0, 0.0, np.inf))

    def select(self, predicate: Callable[[str], bool]) -> "MomentTable":
        idx = [i for i, l in enumerate(self.labels) if predicate(l)]
        return MomentTable([self.labels[i] for i in idx], self.empirical[idx], self.predicted[idx], self.stderr[idx])

    def report(self, name: str, sigma: float, trials: int, seed: int, allowance: float = 0.0) -> TestReport:
        """Pass iff every row lies within sigma * stderr + allowance * |predicted|.

        The statistic is the worst normalised deviation, so the threshold is 1.
        """
        dev = np.abs(self.empirical - self.predicted)
        budget = sigma * self.stderr + allowance * np.abs(self.predicted)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(budget > 0, dev / budget, np.where(dev == 0, 0.0, np.inf))
        worst = int(np.argmax(ratio)) if len(self) else 0
        z = self.z_scores()
        return TestReport(
            name=name,
            statistic=float(ratio[worst]) if len(self) else 0.0,
            predicted=0.0,
            stderr=float(self.stderr[worst]) if len(self) else 0.0,
            threshold=1.0,
            trials=trials,
            seed=seed,
            mode="upper",
            details={
                "worst_label": self.labels[worst] if len(self) else None,
                "max_z": float(np.max(z)) if len(self) else 0.0,
                "sigma": sigma,
                "allowance": allowance,
                "rows": len(self),
            },
        )

    def to_json(self) -> dict:
        return {
            "labels": list(self.labels),
            "empirical": [[float(c.real), float(c.imag)] for c in self.empirical],
            "predicted": [[float(c.real), float(c.imag)] for c in self.predicted],
            "stderr": self.stderr.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MomentTable":
        c = lambda rows: np.array([complex(r, i) for r, i in rows], dtype=complex)  # noqa: E731
        return cls(list(obj["labels"]), c(obj["empirical"]), c(obj["predicted"]), np.asarray(obj["stderr"], float))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def reports_to_json(reports: Sequence[TestReport]) -> str:
    return json.dumps([r.to_json() for r in reports], indent=2)


# ---------------------------------------------------------------------------
# trial runner


def run_trials(fn: Callable[[RngStream], Any], trials: int, rng: RngStream, threads: int = 1) -> list:
    """Evaluate ``fn`` on substreams 0..trials-1 of ``rng``; results in trial order.

    Output is independent of ``threads``: each trial owns its substream and the
    list is ordered by trial index, so downstream reductions see a fixed order.
    """
    streams = (rng.substream(t) for t in range(trials))
    if threads <= 1:
        return [fn(s) for s in streams]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, streams, chunksize=1))
