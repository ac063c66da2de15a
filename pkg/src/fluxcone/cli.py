"""Command-line surface: kernel evaluation, oracle comparison, scans, and the
acceptance selftest.

Configuration comes from an INI file (flat sections) with every value
overridable by a flag.  Grid and scan outputs are CSV with a provenance
header (schema version, config hash, variant, truncation, tolerances) and a
config-hash column per row; scan summaries are JSON-lines records.  Exit
codes: 0 success, 1 validation error, 2 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import acceptance, cone, estimates, propagator, quadrature, spectral
from .errors import DomainError

SCHEMA_VERSION = "1"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NONCONVERGED = 2


@dataclass
class RunConfig:
    """Validated bundle of cone, quadrature, truncation, and grid settings."""

    rho: float = 1.0
    alpha: float = 0.5
    variant: str = "resummed"
    gauge_cos: tuple = ()
    gauge_sin: tuple = ()
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    k_max: int = 400
    n_t: int = 10
    n_pairs: int = 8
    level: int = 1
    seed: int = 7341
    threads: int = 1
    output: str | None = None
    report: str | None = None
    extra: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.rho <= 0 or not math.isfinite(self.rho):
            raise DomainError(f"rho must be positive and finite, got {self.rho}")
        if self.alpha != 0.0 and abs(self.alpha) >= 1.0 / self.rho:
            raise DomainError(
                f"flux alpha={self.alpha:g} is outside the admissible interval "
                f"(-1/rho, 1/rho) = (-{1.0 / self.rho:g}, {1.0 / self.rho:g})")
        if self.variant not in ("resummed", "alternate"):
            raise DomainError(f"unknown variant {self.variant!r}")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise DomainError("tolerances must be positive")
        if self.k_max < 0:
            raise DomainError("k_max must be >= 0")
        if self.threads < 1:
            raise DomainError("threads must be >= 1")

    def params(self) -> cone.ConeParams:
        gauge = None
        if self.gauge_cos or self.gauge_sin:
            gauge = cone.FourierGauge(self.rho, self.alpha,
                                      tuple(self.gauge_cos), tuple(self.gauge_sin))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return cone.ConeParams(self.rho, self.alpha, gauge)

    def bvariant(self) -> cone.BVariant:
        return cone.BVariant.RESUMMED if self.variant == "resummed" else cone.BVariant.ALTERNATE

    def qspec(self) -> quadrature.QuadratureSpec:
        return quadrature.QuadratureSpec(abs_tol=self.abs_tol, rel_tol=self.rel_tol)

    def truncation(self) -> propagator.SeriesTruncation:
        return propagator.SeriesTruncation(k_max=self.k_max)

    def provenance(self) -> dict:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "rho": self.rho, "alpha": self.alpha, "variant": self.variant,
            "gauge_cos": list(self.gauge_cos), "gauge_sin": list(self.gauge_sin),
            "abs_tol": self.abs_tol, "rel_tol": self.rel_tol,
            "k_max": self.k_max, "n_t": self.n_t, "n_pairs": self.n_pairs,
            "level": self.level, "seed": self.seed,
        }
        digest = hashlib.sha256(
            json.dumps(payload, sort_keys=True).encode()).hexdigest()[:12]
        payload["config_hash"] = digest
        return payload


def _load_config_file(path: str) -> dict:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise DomainError(f"cannot read config file {path}")
    out = {}
    def get(section, key, cast, dest=None):
        if cp.has_option(section, key):
            raw = cp.get(section, key)
            out[dest or key] = cast(raw)
    def floats(raw):
        return tuple(float(v) for v in raw.replace(",", " ").split())
    get("cone", "rho", float)
    get("cone", "alpha", float)
    get("cone", "variant", str)
    get("cone", "gauge_cos", floats)
    get("cone", "gauge_sin", floats)
    get("quadrature", "abs_tol", float)
    get("quadrature", "rel_tol", float)
    get("truncation", "k_max", int)
    get("grid", "n_t", int)
    get("grid", "n_pairs", int)
    get("grid", "level", int)
    get("grid", "seed", int)
    get("output", "csv", str, "output")
    get("output", "report", str, "report")
    return out


def _build_config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        for key, val in _load_config_file(args.config).items():
            setattr(cfg, key, val)
    for key in ("rho", "alpha", "variant", "abs_tol", "rel_tol", "k_max",
                "n_t", "n_pairs", "level", "seed", "threads", "output", "report"):
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            setattr(cfg, key, val)
    env_threads = os.environ.get("FLUXCONE_THREADS")
    if getattr(args, "threads", None) is None and env_threads:
        cfg.threads = int(env_threads)
    cfg.validate()
    return cfg


class CsvSink:
    """CSV writer with a provenance comment header and fixed float format."""

    def __init__(self, path, columns, provenance):
        self.columns = list(columns) + ["config_hash"]
        self.hash = provenance["config_hash"]
        self.rows = []
        self.path = path
        self.provenance = provenance

    def __call__(self, row: dict):
        self.rows.append(row)

    @staticmethod
    def _fmt(v):
        if isinstance(v, float):
            return format(v, ".17g")
        return str(v)

    def flush(self):
        if self.path is None:
            return
        with open(self.path, "w", newline="") as fh:
            for key in sorted(self.provenance):
                fh.write(f"# {key}={self.provenance[key]}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.columns)
            for row in self.rows:
                writer.writerow([self._fmt(row.get(c, "")) for c in self.columns[:-1]]
                                + [self.hash])


def _emit_report(cfg: RunConfig, name: str, payload: dict):
    record = {"kind": name, **cfg.provenance(), **payload}
    line = json.dumps(record, sort_keys=True, default=float)
    if cfg.report:
        with open(cfg.report, "a") as fh:
            fh.write(line + "\n")
    print(line)


def _parse_point(text: str) -> cone.ConePoint:
    try:
        r, theta = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise DomainError(f"point must be 'r,theta', got {text!r}") from exc
    return cone.ConePoint(r, theta)


def _parallel_map(fn, items, threads):
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_kernel(args) -> int:
    cfg = _build_config(args)
    params = cfg.params()
    x, y = _parse_point(args.x), _parse_point(args.y)
    sink = CsvSink(cfg.output, ["route", "t", "r", "theta", "r_p", "theta_p",
                                "re", "im", "abs", "err_estimate"], cfg.provenance())
    routes = ("closed", "series") if args.route == "both" else (args.route,)
    code = EXIT_OK
    for route in routes:
        if route == "closed":
            kv = propagator.schrodinger_closed(params, cfg.bvariant(), args.t, x, y, cfg.qspec())
            val, err = kv.value, kv.abs_error_estimate
        else:
            kv = propagator.schrodinger_series(params, cfg.truncation(), args.t, x, y)
            val, err = kv.value, kv.abs_error_estimate
        sink({"route": route, "t": args.t, "r": x.r, "theta": x.theta,
              "r_p": y.r, "theta_p": y.theta, "re": val.real, "im": val.imag,
              "abs": abs(val), "err_estimate": err})
        print(f"{route}: K = {val.real:+.12e} {val.imag:+.12e}i  "
              f"|K| = {abs(val):.12e}  err <= {err:.2e}")
    sink.flush()
    return code


def _cmd_compare(args) -> int:
    cfg = _build_config(args)
    params = cfg.params()
    rng = np.random.default_rng(cfg.seed)
    sink = CsvSink(cfg.output, ["t", "r", "theta", "r_p", "theta_p",
                                "re", "im", "abs", "err_estimate", "series_diff"],
                   cfg.provenance())

    points = []
    for _ in range(args.n_points):
        t = rng.uniform(0.1, 5.0) * rng.choice([-1.0, 1.0])
        r, r_p = rng.uniform(0.2, 3.0, size=2)
        th, th_p = rng.uniform(0.0, 2 * math.pi * cfg.rho, size=2)
        points.append((t, cone.ConePoint(r, th), cone.ConePoint(r_p, th_p)))

    def one(point):
        t, x, y = point
        clo = propagator.schrodinger_closed(params, cfg.bvariant(), t, x, y, cfg.qspec())
        tr = propagator.suggested_truncation(params, t, x.r, y.r)
        ser = propagator.schrodinger_series(params, tr, t, x, y)
        return t, x, y, clo, abs(clo.value - ser.value)

    worst = 0.0
    worst_bound = 0.0
    for t, x, y, clo, diff in _parallel_map(one, points, cfg.threads):
        bound = 1e-5 * (1.0 + 1.0 / abs(t))
        worst = max(worst, diff)
        worst_bound = max(worst_bound, diff / bound)
        sink({"t": t, "r": x.r, "theta": x.theta, "r_p": y.r, "theta_p": y.theta,
              "re": clo.value.real, "im": clo.value.imag, "abs": abs(clo.value),
              "err_estimate": clo.abs_error_estimate, "series_diff": diff})
    sink.flush()
    print(f"max |closed - series| = {worst:.3e} "
          f"(max ratio to tolerance {worst_bound:.3e})")
    return EXIT_OK if worst_bound <= 1.0 else EXIT_NONCONVERGED


def _cmd_resolvent(args) -> int:
    cfg = _build_config(args)
    params = cfg.params()
    x, y = _parse_point(args.x), _parse_point(args.y)
    sign = spectral.ResolventSign.INCOMING if args.sign == "incoming" \
        else spectral.ResolventSign.OUTGOING
    val = spectral.resolvent_kernel(params, sign, args.lam, x, y, cfg.qspec())
    sink = CsvSink(cfg.output, ["sign", "lambda", "r", "theta", "r_p", "theta_p",
                                "re", "im", "abs", "err_estimate"], cfg.provenance())
    sink({"sign": args.sign, "lambda": args.lam, "r": x.r, "theta": x.theta,
          "r_p": y.r, "theta_p": y.theta, "re": val.real, "im": val.imag,
          "abs": abs(val), "err_estimate": cfg.abs_tol})
    sink.flush()
    print(f"R_{args.sign}({args.lam}) = {val.real:+.12e} {val.imag:+.12e}i")
    return EXIT_OK


def _cmd_specmeasure(args) -> int:
    cfg = _build_config(args)
    params = cfg.params()
    x, y = _parse_point(args.x), _parse_point(args.y)
    sink = CsvSink(cfg.output, ["route", "lambda", "r", "theta", "r_p", "theta_p",
                                "re", "im", "abs", "err_estimate"], cfg.provenance())
    code = EXIT_OK
    for route in (("closed", "series") if args.route == "both" else (args.route,)):
        if route == "closed":
            s = spectral.spectral_measure_closed(params, cfg.bvariant(), args.lam, x, y, cfg.qspec())
        else:
            s = spectral.spectral_measure_series(params, cfg.truncation(), args.lam, x, y)
        sink({"route": route, "lambda": args.lam, "r": x.r, "theta": x.theta,
              "r_p": y.r, "theta_p": y.theta, "re": s.density.real,
              "im": s.density.imag, "abs": abs(s.density),
              "err_estimate": s.abs_error_estimate})
        print(f"{route}: density = {s.density.real:+.12e} {s.density.imag:+.12e}i "
              f"(geometric {s.geometric_part:+.6e}, diffractive {s.diffractive_part:+.6e})")
    sink.flush()
    return code


def _scan_command(args, runner, name, columns) -> int:
    cfg = _build_config(args)
    params = cfg.params()
    grid = estimates.make_scan_grid(cfg.rho, n_t=cfg.n_t, n_pairs=cfg.n_pairs,
                                    level=cfg.level, seed=cfg.seed)
    sink = CsvSink(cfg.output, columns, cfg.provenance())
    report = runner(params, cfg, grid, sink)
    sink.flush()
    _emit_report(cfg, name, report.to_jsonable())
    ok = report.refinement_stable and not report.violations
    return EXIT_OK if ok else EXIT_NONCONVERGED


def _cmd_dispersive(args) -> int:
    return _scan_command(
        args,
        lambda params, cfg, grid, sink: estimates.dispersive_scan_schrodinger(
            params, cfg.bvariant(), grid, cfg.qspec(), sink=sink),
        "dispersive_scan",
        ["t", "r", "theta", "r_p", "theta_p", "re", "im", "abs", "err_estimate",
         "statistic"])


def _cmd_wave_dispersive(args) -> int:
    js = [int(v) for v in args.windows.split(",")]
    return _scan_command(
        args,
        lambda params, cfg, grid, sink: estimates.wave_dispersive_scan(
            params, [spectral.LPWindow(j) for j in js], grid, sink=sink),
        "wave_dispersive_scan",
        ["j", "t", "r", "theta", "r_p", "theta_p", "re", "im", "abs",
         "err_estimate", "statistic"])


def _cmd_heat_scan(args) -> int:
    return _scan_command(
        args,
        lambda params, cfg, grid, sink: estimates.heat_gaussian_scan(params, grid, sink=sink),
        "heat_gaussian_scan",
        ["tau", "r", "theta", "r_p", "theta_p", "re", "im", "abs",
         "err_estimate", "statistic"])


def _cmd_b_bounds(args) -> int:
    cfg = _build_config(args)
    params = cfg.params()
    report = estimates.b_integral_bounds(params, cfg.bvariant(), args.theta,
                                         args.theta_p, cfg.qspec())
    _emit_report(cfg, "b_integral_bounds", report)
    return EXIT_OK if report["total_converged"] else EXIT_NONCONVERGED


def _cmd_strichartz(args) -> int:
    cfg = _build_config(args)
    params = cfg.params()
    family = estimates.NormFamily.WAVE if args.family == "wave" \
        else estimates.NormFamily.SCHRODINGER
    pair = estimates.AdmissiblePair(args.q, args.r, family)
    rng = np.random.default_rng(cfg.seed)
    tg = estimates.make_time_grid(args.time_horizon, 61)
    sink = CsvSink(cfg.output, ["index", "quotient", "numerator", "denominator",
                                "re", "im", "abs", "err_estimate"], cfg.provenance())
    quots = []
    for i in range(args.n_data):
        f = estimates.random_datum(rng)
        g = estimates.random_datum(rng) if family is estimates.NormFamily.WAVE else None
        details = {}
        q = estimates.strichartz_quotient(params, pair, f, tg, datum_velocity=g,
                                          details=details)
        quots.append(q)
        sink({"index": i, "quotient": q, "numerator": details["numerator"],
              "denominator": details["denominator"], "re": q, "im": 0.0,
              "abs": q, "err_estimate": details["tail_estimate"]})
    sink.flush()
    payload = {"q": args.q, "r": args.r, "family": args.family,
               "regularity": pair.regularity if family is estimates.NormFamily.WAVE else 0.0,
               "max_quotient": max(quots), "quotients": quots}
    _emit_report(cfg, "strichartz_sampling", payload)
    return EXIT_OK


def _cmd_selftest(args) -> int:
    indices = None
    if args.only:
        indices = [int(v) for v in args.only.split(",")]
    results = acceptance.run_all(indices)
    return EXIT_OK if all(r.passed for r in results) else EXIT_NONCONVERGED


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="INI config file; flags override its values")
    p.add_argument("--rho", type=float, help="cone circle radius")
    p.add_argument("--alpha", type=float, help="magnetic flux")
    p.add_argument("--variant", choices=["resummed", "alternate"],
                   help="diffractive-weight sign convention")
    p.add_argument("--abs-tol", type=float, dest="abs_tol")
    p.add_argument("--rel-tol", type=float, dest="rel_tol")
    p.add_argument("--k-max", type=int, dest="k_max", help="series truncation")
    p.add_argument("--n-t", type=int, dest="n_t", help="scan time points per level")
    p.add_argument("--n-pairs", type=int, dest="n_pairs", help="scan point pairs per level")
    p.add_argument("--level", type=int, help="scan refinement level")
    p.add_argument("--seed", type=int, help="deterministic sampling seed")
    p.add_argument("--threads", type=int,
                   help="worker threads (default: FLUXCONE_THREADS or 1)")
    p.add_argument("--output", help="CSV output path")
    p.add_argument("--report", help="JSON-lines report path (appended)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluxcone",
        description="Kernels and dispersive-estimate scans for magnetic "
                    "Schrodinger operators on flat cones.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernel", help="evaluate the propagator at one point")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--x", required=True, help="source point 'r,theta'")
    p.add_argument("--y", required=True, help="target point 'r,theta'")
    p.add_argument("--route", choices=["closed", "series", "both"], default="closed")
    _add_common(p)
    p.set_defaults(fn=_cmd_kernel)

    p = sub.add_parser("compare", help="closed-form vs series oracle on random points")
    p.add_argument("--n-points", type=int, default=20, dest="n_points")
    _add_common(p)
    p.set_defaults(fn=_cmd_compare)

    p = sub.add_parser("resolvent", help="resolvent boundary-value kernel")
    p.add_argument("--lambda", type=float, required=True, dest="lam")
    p.add_argument("--sign", choices=["incoming", "outgoing"], default="incoming")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    _add_common(p)
    p.set_defaults(fn=_cmd_resolvent)

    p = sub.add_parser("specmeasure", help="spectral-measure density")
    p.add_argument("--lambda", type=float, required=True, dest="lam")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--route", choices=["closed", "series", "both"], default="both")
    _add_common(p)
    p.set_defaults(fn=_cmd_specmeasure)

    p = sub.add_parser("dispersive", help="sup |t||K| scan")
    _add_common(p)
    p.set_defaults(fn=_cmd_dispersive)

    p = sub.add_parser("wave-dispersive", help="normalized band-kernel scan")
    p.add_argument("--windows", default="-2,-1,0,1,2,3,4",
                   help="comma-separated dyadic window indices")
    _add_common(p)
    p.set_defaults(fn=_cmd_wave_dispersive)

    p = sub.add_parser("b-bounds", help="diffractive-weight integral bounds")
    p.add_argument("--theta", type=float, default=1.3)
    p.add_argument("--theta-p", type=float, default=0.3, dest="theta_p")
    _add_common(p)
    p.set_defaults(fn=_cmd_b_bounds)

    p = sub.add_parser("strichartz", help="sample mixed-norm quotients")
    p.add_argument("--q", type=float, default=4.0)
    p.add_argument("--r", type=float, default=4.0)
    p.add_argument("--family", choices=["schrodinger", "wave"], default="schrodinger")
    p.add_argument("--n-data", type=int, default=20, dest="n_data")
    p.add_argument("--time-horizon", type=float, default=10.0, dest="time_horizon")
    _add_common(p)
    p.set_defaults(fn=_cmd_strichartz)

    p = sub.add_parser("selftest", help="run the acceptance suite")
    p.add_argument("--only", help="comma-separated criterion numbers")
    _add_common(p)
    p.set_defaults(fn=_cmd_selftest)

    return parser


def cli_dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; the contract here is 1
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # numerical failures
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED


def main() -> None:
    sys.exit(cli_dispatch())


if __name__ == "__main__":
    main()
