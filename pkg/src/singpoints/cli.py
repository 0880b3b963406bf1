"""Command-line front end.

Exit codes: 0 success, 1 a verification failed, 2 invalid arguments or
unknown suite, 3 I/O failure, 4 singular input matrix.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime as _dt
import hashlib
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import verify as V
from .config import VerifyConfig, load_config
from .ensembles import sample_configuration, truncated_unitary_block
from .errors import SingPointsError, SingularMatrixError
from .kernels import KernelFamily, MobiusMap, sphere_rotation_from_invariance_pair
from .linalg import RngStream, matrix_from_json, matrix_to_json
from .series import TruncatedSeries, blaschke_derivatives, series_ratio
from .stats import TestReport, _jsonable, run_trials

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_IO, EXIT_SINGULAR = 0, 1, 2, 3, 4

FAMILY_ALIASES = {
    "planar": "planar", "ginibre": "planar",
    "spherical": "spherical",
    "hyperbolic": "hyperbolic-det-gaf", "hyperbolic-det-gaf": "hyperbolic-det-gaf",
    "truncated": "truncated-unitary", "truncated-unitary": "truncated-unitary",
}
SUITES = (
    "radial", "invariance", "haar-moments", "f0-moment", "ginibre-intensity", "beta-counts",
    "oracle-lemma41", "det-gaf-intensity", "mobius-identities",
)


class UsageError(Exception):
    pass


def git_blob_sha1(data: bytes) -> str:
    """Content hash as computed by ``git hash-object``."""
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


# ---------------------------------------------------------------------------
# output helpers


def _write_outputs(files: dict[Path, bytes]) -> list[dict]:
    entries = []
    for path, data in files.items():
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        entries.append({"path": str(path), "bytes": len(data), "sha1": git_blob_sha1(data)})
    return entries


def _finish(args, cfg: VerifyConfig, files: dict[Path, bytes], extra: dict | None = None) -> Path:
    outputs = _write_outputs(files)
    flags = {k: v for k, v in vars(args).items() if k != "handler"}
    manifest = {
        "version": __version__,
        "command": args.command,
        "flags": _jsonable(flags),
        "config": dataclasses.asdict(cfg),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "outputs": outputs,
    }
    if extra:
        manifest.update(_jsonable(extra))
    mpath = manifest_path(Path(args.out))
    mpath.write_text(json.dumps(manifest, indent=2) + "\n")
    return mpath


def manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


def _resolve_config(args) -> VerifyConfig:
    cfg = load_config(args.config) if args.config else VerifyConfig()
    changes = {"seed": args.seed, "threads": args.threads}
    return dataclasses.replace(cfg, **{k: v for k, v in changes.items() if v is not None})


def _need(args, *names):
    missing = [f"--{n}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command}: missing required option(s) {' '.join(missing)}")


# ---------------------------------------------------------------------------
# sample


def _family(args) -> str:
    _need(args, "family")
    try:
        return FAMILY_ALIASES[args.family]
    except KeyError:
        raise UsageError(f"unknown family {args.family!r}; choose from {sorted(FAMILY_ALIASES)}") from None


def cmd_sample(args) -> int:
    cfg = _resolve_config(args)
    family = _family(args)
    if family == "truncated-unitary":
        _need(args, "N", "n")
        params = {"N": args.N, "n": args.n}
    elif family == "hyperbolic-det-gaf":
        _need(args, "n")
        params = {"n": args.n, "radius": args.radius if args.radius is not None else 0.6, "tail_eps": cfg.tail_eps}
    else:
        _need(args, "n")
        params = {"n": args.n}
    trials = args.trials if args.trials is not None else 1
    if trials < 1:
        raise UsageError("--trials must be positive")
    confs = run_trials(lambda s: sample_configuration(family, params, s), trials, RngStream(cfg.seed), cfg.threads)

    out = Path(args.out)
    if args.format == "jsonl":
        data = "".join(c.to_json_line() + "\n" for c in confs).encode()
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "index", "re", "im"])
        for t, c in enumerate(confs):
            pts = list(c.points) + [complex(math.inf, 0.0)] * c.infinity_count
            for i, z in enumerate(pts):
                w.writerow([t, i, repr(float(z.real)), repr(float(z.imag))])
        data = buf.getvalue().encode()
    files = {out: data}
    if args.gnuplot:
        lines = [f"{float(z.real)!r} {float(z.imag)!r} {1.0 / trials!r}\n" for c in confs for z in c.points]
        files[out.with_name(out.name + ".gnuplot.dat")] = "".join(lines).encode()
    _finish(args, cfg, files, {"family": family, "params": params})
    print(f"wrote {trials} configurations to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def _complex_arg(text: str | None, default: complex) -> complex:
    if text is None:
        return default
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise UsageError(f"not a complex number: {text!r}") from None


def _default(v, d):
    return d if v is None else v


def run_suite(name: str, args, cfg: VerifyConfig) -> list[TestReport]:
    rng = RngStream(cfg.seed)
    trials = args.trials
    if name == "radial":
        fam = FAMILY_ALIASES.get(args.family or "spherical")
        if fam == "truncated-unitary":
            family = KernelFamily.truncated(_default(args.N, 32), _default(args.n, 1))
        elif fam == "spherical":
            family = KernelFamily.spherical(_default(args.n, 1))
        else:
            raise UsageError("radial suite supports --family spherical or truncated")
        return [V.radial_law_test(family, _default(trials, cfg.trials), rng, cfg)]
    if name == "beta-counts":
        return [V.beta_count_test(_default(args.N, 32), _default(args.n, 1), _default(trials, cfg.trials), rng, cfg=cfg)]
    if name == "invariance":
        fam = FAMILY_ALIASES.get(args.family or "spherical")
        if fam == "spherical":
            m = sphere_rotation_from_invariance_pair(_complex_arg(args.alpha, 0.6), _complex_arg(args.beta, 0.8j))
            return [V.invariance_test(KernelFamily.spherical(_default(args.n, 3)), m, _default(trials, 5000), rng, cfg=cfg)]
        if fam == "hyperbolic-det-gaf":
            m = MobiusMap(_complex_arg(args.alpha, math.cosh(0.5)), _complex_arg(args.beta, math.sinh(0.5)), "disk")
            fam_k = KernelFamily.hyperbolic(_default(args.n, 1))
            return [V.invariance_test(fam_k, m, _default(trials, 2000), rng, _default(args.radius, 0.6), cfg)]
        raise UsageError("invariance suite supports --family spherical or hyperbolic")
    if name == "haar-moments":
        t = _default(trials, cfg.trials)
        table = V.haar_power_moments(_default(args.N, 128), _default(args.n, 2), args.pmax, t, rng, cfg)
        return [table.report("haar-moments", cfg.moment_sigma, t, cfg.seed)]
    if name == "f0-moment":
        return [V.f0_moment_test(_default(args.N, 16), _default(args.n, 2), _default(trials, cfg.trials), rng, cfg)]
    if name == "ginibre-intensity":
        n = _default(args.n, 20)
        return [V.ginibre_intensity_test(n, _default(args.radius, 3.0), _default(trials, 1000), rng, cfg)]
    if name == "oracle-lemma41":
        return [V.cycle_sum_oracle_test(_default(trials, 100), rng, kmax=_default(args.kmax, 10), cfg=cfg)]
    if name == "det-gaf-intensity":
        return [V.det_gaf_intensity_test(_default(args.n, 1), _default(args.radius, 0.6), _default(trials, 2000), rng, cfg)]
    if name == "mobius-identities":
        return V.mobius_identity_suite(_default(trials, 1000), rng)
    raise UsageError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")


def _emit_reports(args, cfg, reports: list[TestReport], extra_files=None) -> int:
    for r in reports:
        print(r.line())
    data = (json.dumps([r.to_json() for r in reports], indent=2) + "\n").encode()
    files = {Path(args.out): data}
    files.update(extra_files or {})
    _finish(args, cfg, files)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


def cmd_verify(args) -> int:
    cfg = _resolve_config(args)
    _need(args, "suite")
    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    return _emit_reports(args, cfg, run_suite(args.suite, args, cfg))


def cmd_invariance(args) -> int:
    cfg = _resolve_config(args)
    return _emit_reports(args, cfg, run_suite("invariance", args, cfg))


def cmd_convergence(args) -> int:
    cfg = _resolve_config(args)
    N, n, kmax = _default(args.N, 256), _default(args.n, 1), _default(args.kmax, 3)
    trials = _default(args.trials, 2000)
    table = V.coefficient_convergence_test(N, n, kmax, trials, RngStream(cfg.seed), cfg)
    reports = V.convergence_reports(table, trials, cfg.seed, cfg)
    out = Path(args.out)
    table_file = out.with_name(out.name + ".table.json")
    return _emit_reports(args, cfg, reports, {table_file: (json.dumps(table.to_json(), indent=2) + "\n").encode()})


# ---------------------------------------------------------------------------
# coeffs


def _load_matrix(path: str) -> np.ndarray:
    obj = json.loads(Path(path).read_text())
    if isinstance(obj, dict):
        return matrix_from_json(obj)
    # nested list of numbers or [re, im] pairs
    arr = np.array(obj, dtype=float)
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    return arr.astype(complex)


def cmd_coeffs(args) -> int:
    cfg = _resolve_config(args)
    kmax = _default(args.kmax, 10)
    if args.matrix:
        try:
            Vm = _load_matrix(args.matrix)
        except OSError:
            raise
        except (ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"cannot parse matrix file {args.matrix}: {exc}") from None
        source = {"matrix_file": args.matrix}
    else:
        N, n = _default(args.N, 4), _default(args.n, 1)
        Vm = truncated_unitary_block(N, n, RngStream(cfg.seed))
        source = {"sampled": "truncated-unitary", "N": N, "n": n, "seed": cfg.seed}
    if Vm.ndim != 2 or Vm.shape[0] != Vm.shape[1]:
        raise UsageError("matrix must be square")
    derivs = blaschke_derivatives(Vm, kmax, dps=args.dps)
    fact = np.array([math.factorial(k) for k in range(kmax + 1)], dtype=float)
    cyc = TruncatedSeries(derivs / fact)
    ora = series_ratio(Vm, kmax)
    scale = np.maximum(np.abs(ora.coeffs), np.finfo(float).tiny)
    disc = float(np.max(np.abs(cyc.coeffs - ora.coeffs) / scale))
    result = {
        "kmax": kmax,
        "source": source,
        "matrix": matrix_to_json(Vm),
        "cycle_sum": cyc.to_json(),
        "series_division": ora.to_json(),
        "max_rel_discrepancy": disc,
    }
    _finish(args, cfg, {Path(args.out): (json.dumps(_jsonable(result), indent=2) + "\n").encode()})
    print(f"kmax={kmax} max relative discrepancy {disc:.3e}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--family")
    common.add_argument("--n", type=int)
    common.add_argument("--N", type=int)
    common.add_argument("--kmax", type=int)
    common.add_argument("--radius", type=float)
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--config", help="key = value file overriding verification defaults")
    common.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")

    p = argparse.ArgumentParser(prog="singpoints", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", parents=[common], help="sample point configurations")
    s.add_argument("--out", default="samples.jsonl")
    s.add_argument("--gnuplot", action="store_true", help="also write (x, y, weight) triples")
    s.set_defaults(handler=cmd_sample)

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("--suite")
    v.add_argument("--pmax", type=int, default=3)
    v.add_argument("--alpha")
    v.add_argument("--beta")
    v.add_argument("--out", default="reports.json")
    v.set_defaults(handler=cmd_verify)

    c = sub.add_parser("coeffs", parents=[common], help="power-series coefficients by two routes")
    c.add_argument("--matrix", help="JSON matrix file")
    c.add_argument("--dps", type=int, help="mpmath precision for the cycle-sum route")
    c.add_argument("--out", default="coeffs.json")
    c.set_defaults(handler=cmd_coeffs)

    g = sub.add_parser("convergence", parents=[common], help="coefficient convergence experiment")
    g.add_argument("--out", default="convergence.json")
    g.set_defaults(handler=cmd_convergence)

    i = sub.add_parser("invariance", parents=[common], help="isometry invariance experiment")
    i.add_argument("--alpha")
    i.add_argument("--beta")
    i.add_argument("--out", default="invariance.json")
    i.set_defaults(handler=cmd_invariance)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.handler(args)
    except SingularMatrixError as exc:
        print(f"error: {exc}; resample (new --seed) or supply a different --matrix", file=sys.stderr)
        return EXIT_SINGULAR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, SingPointsError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
