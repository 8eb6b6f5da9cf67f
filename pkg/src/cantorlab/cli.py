"""Batch command-line front end: experiment configs in, CSV/JSON artifacts out.

One experiment per process invocation.  A config (JSON document validated
against the shipped schema) names a measure, the coefficient routes to run
and the diagnostics to emit; `run` executes it and writes a manifest with
a content digest per artifact.  Identical configs produce byte-identical
artifacts -- there is no randomness anywhere in the pipeline and all
serialization is deterministic.  Subcommands are thin wrappers that
synthesize a config from flags.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 resource cap.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources

import jsonschema

from . import __version__
from .bigfloat import DEFAULT_PRECISION, mpcx, mpf, workprec
from .coeffs import (
    chebyshev_from_moments,
    cross_validate,
    julia_exact_coeffs,
    lanczos_from_discrete,
    stieltjes_fast,
    trusted_prefix_length,
)
from .diagnostics import (
    EPSILON_GRID_DEFAULT,
    TAIL_LADDER_DEFAULT,
    WINDOW_DEFAULT,
    asymptotic_ap_scan,
    conjecture_report,
    dos_compare,
    julia_identity_residual,
    regularity_index,
    widom_series,
)
from .errors import CantorLabError, ConfigError, ResourceCapError
from .jacobi import dos_measure
from .measures import (
    GAMMA_JULIA,
    QUADRATIC_JULIA,
    AffineIFS,
    PolySequenceSpec,
    ifs_moments,
    ifs_refine,
    ifs_refine_f64,
    julia_inverse_orbit,
    julia_inverse_orbit_f64,
)
from .potential import capacity_from_coeffs, green_julia, lyapunov_approx, robin_capacity
from .serialize import (
    apscan_reports_to_json,
    atomic_write_text,
    capacity_to_json,
    coeffs_to_csv,
    coeffs_to_json,
    conjecture_to_json,
    crossval_to_json,
    dumps_json,
    grid_to_csv,
    measure_to_csv,
    regularity_to_csv,
    widom_to_csv,
)

ENV_PRECISION = "CANTORLAB_PRECISION"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_RESOURCE = 4

DEFAULT_GRID = (("1", "1"), ("0", "2"), ("3", "0"), ("-3", "0"), ("0.5", "0.5"))
DEFAULT_GREEN_LEVELS = 20
ROUTE_PREFERENCE = ("exact", "lanczos", "chebyshev")


def _load_schema() -> dict:
    text = resources.files("cantorlab").joinpath("schemas/experiment.schema.json").read_text()
    return json.loads(text)


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, fully resolved experiment description."""

    measure: dict
    n_coeffs: int
    routes: tuple[str, ...]
    diagnostics: tuple[str, ...]
    output_dir: str
    level: int | None = None
    precision_bits: int = DEFAULT_PRECISION
    epsilon_grid: tuple[str, ...] = EPSILON_GRID_DEFAULT
    windows: tuple[int, ...] = (WINDOW_DEFAULT,)
    tails: tuple[int, ...] = TAIL_LADDER_DEFAULT
    anchor: str | None = None
    grid: tuple[tuple[str, str], ...] = DEFAULT_GRID
    green_levels: int = DEFAULT_GREEN_LEVELS
    lyapunov_n: int | None = None
    dos_orders: tuple[int, ...] = ()
    report_targets: tuple[str, ...] | None = None
    untrusted: bool = False
    threads: int = 1

    @property
    def kind(self) -> str:
        return self.measure["kind"]

    def resolved_dict(self) -> dict:
        doc = {
            "measure": self.measure,
            "n_coeffs": self.n_coeffs,
            "routes": list(self.routes),
            "diagnostics": list(self.diagnostics),
            "output_dir": self.output_dir,
            "level": self.level,
            "precision_bits": self.precision_bits,
            "epsilon_grid": list(self.epsilon_grid),
            "windows": list(self.windows),
            "tails": list(self.tails),
            "anchor": self.anchor,
            "grid": [list(p) for p in self.grid],
            "green_levels": self.green_levels,
            "lyapunov_n": self.lyapunov_n,
            "dos_orders": list(self.dos_orders),
            "report_targets": list(self.report_targets) if self.report_targets else None,
            "untrusted": self.untrusted,
            "threads": self.threads,
        }
        return doc


def _atom_count(kind: str, measure: dict, level: int) -> int:
    if kind in (QUADRATIC_JULIA, GAMMA_JULIA):
        return 1 << level
    n_maps = 2 if kind == "cantor" else len(measure["maps"])
    return n_maps**level


def config_from_dict(doc: dict, output_dir: str | None = None) -> ExperimentConfig:
    """Schema-validate and semantically check a config document."""
    try:
        jsonschema.validate(doc, _load_schema())
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config schema violation at {list(exc.absolute_path)}: {exc.message}")
    measure = doc["measure"]
    kind = measure["kind"]
    routes = tuple(doc["routes"])
    diagnostics = tuple(doc["diagnostics"])
    n_coeffs = doc["n_coeffs"]
    level = doc.get("level")
    precision = doc.get("precision_bits", _default_precision())
    if kind == QUADRATIC_JULIA:
        with workprec(precision):
            if not mpf(measure["c"]) > 2:
                raise ConfigError("measure.c: c must exceed 2")
    if kind == GAMMA_JULIA:
        gamma = measure.get("gamma")
        if gamma is None:
            if "gamma_constant" not in measure or "gamma_count" not in measure:
                raise ConfigError(
                    "measure.gamma: provide gamma or gamma_constant+gamma_count"
                )
            gamma = [measure["gamma_constant"]] * measure["gamma_count"]
        with workprec(precision):
            for g in gamma:
                gv = mpf(g)
                if not (0 < gv < mpf(1) / 4):
                    raise ConfigError(f"measure.gamma: entries must lie in (0, 1/4), got {g}")
    if "exact" in routes and kind != QUADRATIC_JULIA:
        raise ConfigError("routes: the exact route only applies to quadratic-julia")
    if "chebyshev" in routes and kind not in ("cantor", "ifs"):
        raise ConfigError("routes: the chebyshev route needs an IFS measure (moments)")
    needs_level = (
        "lanczos" in routes or "dos" in diagnostics or kind in ("cantor", "ifs")
    )
    if needs_level and level is None:
        raise ConfigError("level: required for lanczos/dos and IFS measures")
    if "lanczos" in routes:
        atoms = _atom_count(kind, measure, level)
        if n_coeffs >= atoms:
            raise ConfigError(
                f"n_coeffs: lanczos needs n_coeffs < atom count ({atoms})"
            )
        trusted = trusted_prefix_length(atoms)
        if n_coeffs > trusted and not doc.get("untrusted", False):
            raise ConfigError(
                f"n_coeffs: {n_coeffs} exceeds the trusted prefix {trusted} "
                f"(= atoms/64) at level {level}; set untrusted to override"
            )
    if "identities" in diagnostics and kind != QUADRATIC_JULIA:
        raise ConfigError("diagnostics: identities requires quadratic-julia")
    if "green-lyapunov" in diagnostics and kind not in (QUADRATIC_JULIA, GAMMA_JULIA):
        raise ConfigError("diagnostics: green-lyapunov requires a Julia-set measure")
    if "apscan" in diagnostics:
        tails = doc.get("tails", list(TAIL_LADDER_DEFAULT))
        windows = doc.get("windows", [WINDOW_DEFAULT])
        if max(tails) + max(windows) + 1 > n_coeffs:
            raise ConfigError(
                "apscan: max(tails) + max(windows) + 1 must not exceed n_coeffs"
            )
    dos_orders = tuple(doc.get("dos_orders", ()))
    if "dos" in diagnostics:
        if not dos_orders:
            dos_orders = tuple(
                sorted({max(1, n_coeffs // 4), max(1, n_coeffs // 2), n_coeffs})
            )
        if max(dos_orders) > n_coeffs:
            raise ConfigError("dos_orders: orders cannot exceed n_coeffs")
    lyap_n = doc.get("lyapunov_n")
    if "green-lyapunov" in diagnostics:
        if lyap_n is None:
            lyap_n = n_coeffs
        if lyap_n > n_coeffs:
            raise ConfigError("lyapunov_n: cannot exceed n_coeffs")
    targets = doc.get("report_targets")
    if "report" in diagnostics and targets is None:
        targets = {
            QUADRATIC_JULIA: ("julia-identities",),
            GAMMA_JULIA: ("gamma-ap",),
            "cantor": ("cantor-widom", "cantor-ap"),
            "ifs": ("cantor-widom", "cantor-ap"),
        }[kind]
    out_dir = output_dir or doc.get("output_dir")
    if not out_dir:
        raise ConfigError("output_dir: required (config field or --output-dir)")
    return ExperimentConfig(
        measure=measure,
        n_coeffs=n_coeffs,
        routes=routes,
        diagnostics=diagnostics,
        output_dir=out_dir,
        level=level,
        precision_bits=precision,
        epsilon_grid=tuple(doc.get("epsilon_grid", EPSILON_GRID_DEFAULT)),
        windows=tuple(doc.get("windows", (WINDOW_DEFAULT,))),
        tails=tuple(doc.get("tails", TAIL_LADDER_DEFAULT)),
        anchor=doc.get("anchor"),
        grid=tuple(tuple(p) for p in doc.get("grid", DEFAULT_GRID)),
        green_levels=doc.get("green_levels", DEFAULT_GREEN_LEVELS),
        lyapunov_n=lyap_n,
        dos_orders=dos_orders,
        report_targets=tuple(targets) if targets else None,
        untrusted=doc.get("untrusted", False),
        threads=doc.get("threads", 1),
    )


# ---------------------------------------------------------------------------
# experiment execution
# ---------------------------------------------------------------------------


class _Workspace:
    """Artifact sink: writes files atomically and records their digests."""

    def __init__(self, output_dir: str):
        self.output_dir = output_dir
        os.makedirs(output_dir, exist_ok=True)
        self.digests: dict[str, str] = {}

    def write(self, name: str, text: str) -> None:
        atomic_write_text(os.path.join(self.output_dir, name), text)
        self.digests[name] = hashlib.sha256(text.encode()).hexdigest()


def _build_ifs(cfg: ExperimentConfig) -> AffineIFS:
    if cfg.kind == "cantor":
        return AffineIFS.cantor(cfg.precision_bits)
    with workprec(cfg.precision_bits):
        maps = tuple(
            (mpf(m["ratio"]), mpf(m["offset"])) for m in cfg.measure["maps"]
        )
        weights = tuple(mpf(w) for w in cfg.measure["weights"])
    return AffineIFS(maps, weights, cfg.precision_bits)


def _build_spec(cfg: ExperimentConfig) -> PolySequenceSpec:
    if cfg.kind == QUADRATIC_JULIA:
        return PolySequenceSpec.quadratic(cfg.measure["c"], cfg.precision_bits)
    gamma = cfg.measure.get("gamma")
    if gamma is None:
        gamma = [cfg.measure["gamma_constant"]] * cfg.measure["gamma_count"]
    return PolySequenceSpec.gamma_seq(gamma, cfg.precision_bits)


def _measure_spec_payload(cfg: ExperimentConfig) -> dict:
    payload: dict = {"kind": cfg.kind, "precision_bits": cfg.precision_bits}
    payload["level"] = cfg.level
    if cfg.kind == QUADRATIC_JULIA:
        payload["c"] = cfg.measure["c"]
        payload["anchor"] = cfg.anchor or "0"
    elif cfg.kind == GAMMA_JULIA:
        gamma = cfg.measure.get("gamma")
        if gamma is None:
            gamma = [cfg.measure["gamma_constant"]] * cfg.measure["gamma_count"]
        payload["gamma"] = list(gamma)
        payload["anchor"] = cfg.anchor or "1"
    elif cfg.kind == "ifs":
        payload["maps"] = cfg.measure["maps"]
        payload["weights"] = cfg.measure["weights"]
        payload["anchor"] = None
    else:
        payload["anchor"] = None
    return payload


def _discrete_measure(cfg: ExperimentConfig):
    """Reference discrete measure (big-float) for lanczos/dos."""
    if cfg.kind in (QUADRATIC_JULIA, GAMMA_JULIA):
        spec = _build_spec(cfg)
        anchor = mpf(cfg.anchor, cfg.precision_bits) if cfg.anchor else None
        return julia_inverse_orbit(spec, cfg.level, anchor)
    return ifs_refine(_build_ifs(cfg), cfg.level)


def _discrete_measure_f64(cfg: ExperimentConfig):
    if cfg.kind in (QUADRATIC_JULIA, GAMMA_JULIA):
        spec = _build_spec(cfg)
        anchor = float(mpf(cfg.anchor, 53)) if cfg.anchor else None
        return julia_inverse_orbit_f64(spec, cfg.level, anchor)
    return ifs_refine_f64(_build_ifs(cfg), cfg.level)


def _run_routes(cfg: ExperimentConfig, ws: _Workspace) -> dict:
    coeffs_by_route = {}
    for route in cfg.routes:
        if route == "exact":
            coeffs = julia_exact_coeffs(
                mpf(cfg.measure["c"], cfg.precision_bits),
                cfg.n_coeffs,
                cfg.precision_bits,
            )
        elif route == "lanczos":
            if cfg.precision_bits <= 53:
                pos, wts = _discrete_measure_f64(cfg)
                coeffs = stieltjes_fast(pos, wts, cfg.n_coeffs)
            else:
                coeffs = lanczos_from_discrete(_discrete_measure(cfg), cfg.n_coeffs)
        else:  # chebyshev
            moments = ifs_moments(
                _build_ifs(cfg), 2 * cfg.n_coeffs, max(256, 8 * cfg.n_coeffs)
            )
            coeffs = chebyshev_from_moments(moments, cfg.n_coeffs)
        coeffs_by_route[route] = coeffs
        ws.write(f"coeffs_{route}.csv", coeffs_to_csv(coeffs))
        ws.write(f"coeffs_{route}.json", coeffs_to_json(coeffs))
    routes = [r for r in ROUTE_PREFERENCE if r in coeffs_by_route]
    for i in range(len(routes)):
        for j in range(i + 1, len(routes)):
            lhs, rhs = routes[i], routes[j]
            n_cmp = min(coeffs_by_route[lhs].length, coeffs_by_route[rhs].length)
            with workprec(cfg.precision_bits):
                report = cross_validate(
                    coeffs_by_route[lhs], coeffs_by_route[rhs], n_cmp, mpf("1e-8")
                )
            ws.write(f"crossval_{lhs}_vs_{rhs}.json", crossval_to_json(report))
    return coeffs_by_route


def _capacity_estimate(cfg: ExperimentConfig, coeffs):
    if cfg.kind in (QUADRATIC_JULIA, GAMMA_JULIA):
        spec = _build_spec(cfg)
        levels = 64 if cfg.kind == QUADRATIC_JULIA else len(spec.gamma)
        return robin_capacity(spec, min(levels, 64))
    return capacity_from_coeffs(coeffs, coeffs.length)


def _run_diagnostics(cfg: ExperimentConfig, ws: _Workspace, coeffs_by_route: dict):
    preferred = next(r for r in ROUTE_PREFERENCE if r in coeffs_by_route)
    coeffs = coeffs_by_route[preferred]
    capacity = None
    if {"widom", "capacity", "report"} & set(cfg.diagnostics):
        capacity = _capacity_estimate(cfg, coeffs)
        ws.write("capacity.json", capacity_to_json(capacity))
    for diag in cfg.diagnostics:
        if diag == "widom":
            series = widom_series(coeffs, capacity, coeffs.length)
            ws.write("widom.csv", widom_to_csv(series))
        elif diag == "regularity":
            ws.write(
                "regularity.csv", regularity_to_csv(regularity_index(coeffs, coeffs.length))
            )
        elif diag == "apscan":
            reports = asymptotic_ap_scan(
                coeffs, cfg.epsilon_grid, cfg.windows, cfg.tails
            )
            inputs = {
                "measure": _measure_spec_payload(cfg),
                "route": preferred,
                "n_coeffs": coeffs.length,
                "precision_bits": coeffs.precision_bits,
                "epsilon_grid": list(cfg.epsilon_grid),
                "windows": list(cfg.windows),
                "tails": list(cfg.tails),
            }
            ws.write("apscan.json", apscan_reports_to_json(reports, inputs))
        elif diag == "dos":
            reference = _discrete_measure(cfg)
            ws.write("reference_measure.csv", measure_to_csv(reference))
            distances = {}
            for order in cfg.dos_orders:
                dm = dos_measure(coeffs, order)
                ws.write(f"dos_n{order}.csv", measure_to_csv(dm))
                distances[str(order)] = dos_compare(dm, reference)
            ws.write(
                "dos.json",
                dumps_json(
                    {
                        "orders": list(cfg.dos_orders),
                        "ks_distances": distances,
                        "reference_level": cfg.level,
                    }
                ),
            )
        elif diag == "green-lyapunov":
            spec = _build_spec(cfg)
            with workprec(cfg.precision_bits):
                points = [mpcx((mpf(re), mpf(im))) for re, im in cfg.grid]

            def _green(z):
                return green_julia(spec, z, cfg.green_levels)

            if cfg.threads > 1:
                with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
                    greens = list(pool.map(_green, points))
            else:
                greens = [_green(z) for z in points]
            green_rows = [
                (z.real, z.imag, gv.value, gv.uncertainty)
                for z, gv in zip(points, greens)
            ]
            ws.write("green.csv", grid_to_csv(green_rows))
            with workprec(cfg.precision_bits):
                zero_unc = mpf(0)
                lyap_rows = []
                for z in points:
                    val = lyapunov_approx(coeffs, z, cfg.lyapunov_n)
                    lyap_rows.append((z.real, z.imag, val, zero_unc))
            ws.write("lyapunov.csv", grid_to_csv(lyap_rows))
        elif diag == "identities":
            residual = julia_identity_residual(coeffs, mpf(cfg.measure["c"], cfg.precision_bits))
            ws.write(
                "identities.json",
                dumps_json(
                    {
                        "c": mpf(cfg.measure["c"], cfg.precision_bits),
                        "max_residual": residual,
                        "n_coeffs": coeffs.length,
                    }
                ),
            )
        elif diag == "report":
            extra = {"measure": _measure_spec_payload(cfg), "route": preferred}
            for target in cfg.report_targets or ():
                if target == "julia-identities":
                    report = conjecture_report(
                        target,
                        coeffs=coeffs,
                        c=mpf(cfg.measure["c"], cfg.precision_bits),
                        inputs_extra=extra,
                    )
                elif target == "cantor-widom":
                    report = conjecture_report(
                        target, coeffs=coeffs, capacity=capacity, inputs_extra=extra
                    )
                else:
                    window = min(min(cfg.windows), max(8, coeffs.length // 8))
                    tails = [
                        t
                        for t in (64, 128, 256, 512, 1024, 2048, 4096)
                        if t + 2 * window <= coeffs.length
                    ]
                    report = conjecture_report(
                        target,
                        coeffs=coeffs,
                        epsilon_grid=cfg.epsilon_grid,
                        window=window,
                        tails=tails or None,
                        inputs_extra=extra,
                    )
                ws.write(f"report_{target}.json", conjecture_to_json(report))


def run(cfg: ExperimentConfig) -> int:
    """Execute one experiment; returns the process exit code."""
    started = time.monotonic()
    ws = _Workspace(cfg.output_dir)
    status, error = "ok", None
    code = EXIT_OK
    try:
        ws.write("measure_spec.json", dumps_json(_measure_spec_payload(cfg)))
        coeffs_by_route = _run_routes(cfg, ws)
        _run_diagnostics(cfg, ws, coeffs_by_route)
    except ResourceCapError as exc:
        status, error, code = "failed", str(exc), EXIT_RESOURCE
    except CantorLabError as exc:
        status, error, code = "failed", str(exc), EXIT_NUMERICAL
    manifest = {
        "tool": {"name": "cantorlab", "version": __version__},
        "config": cfg.resolved_dict(),
        "precision_bits": cfg.precision_bits,
        "wall_time_seconds": f"{time.monotonic() - started:.3f}",
        "status": status,
        "files": dict(sorted(ws.digests.items())),
    }
    if error is not None:
        manifest["error"] = error
    atomic_write_text(
        os.path.join(cfg.output_dir, "manifest.json"), dumps_json(manifest)
    )
    for name in sorted(ws.digests):
        print(f"wrote {os.path.join(cfg.output_dir, name)}")
    print(f"wrote {os.path.join(cfg.output_dir, 'manifest.json')} (status: {status})")
    if error is not None:
        print(f"error: {error}", file=sys.stderr)
    return code


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _default_precision() -> int:
    env = os.environ.get(ENV_PRECISION)
    return int(env) if env else DEFAULT_PRECISION


def _add_measure_flags(p: argparse.ArgumentParser):
    p.add_argument(
        "--kind",
        choices=["cantor", "quadratic-julia", "gamma-julia"],
        required=True,
        help="measure family (general IFS systems: use run --config)",
    )
    p.add_argument("--c", help="Julia parameter c > 2 (quadratic-julia)")
    p.add_argument("--gamma-constant", help="constant gamma value (gamma-julia)")
    p.add_argument("--gamma-count", type=int, help="gamma prefix length (gamma-julia)")
    p.add_argument("--level", type=int, help="refinement / inverse-orbit level")
    p.add_argument("--n", type=int, required=True, help="number of coefficients")
    p.add_argument("--routes", default=None, help="comma list: exact,lanczos,chebyshev")
    p.add_argument("--anchor", help="inverse-iteration anchor override")
    p.add_argument("--untrusted", action="store_true", help="bypass the trust rule")


def _add_common_flags(p: argparse.ArgumentParser):
    p.add_argument("--precision-bits", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--output-dir", required=False)


def _measure_doc(args) -> dict:
    if args.kind == "cantor":
        return {"kind": "cantor"}
    if args.kind == "quadratic-julia":
        if not args.c:
            raise ConfigError("--c is required for quadratic-julia")
        return {"kind": "quadratic-julia", "c": args.c}
    if not args.gamma_constant or not args.gamma_count:
        raise ConfigError("--gamma-constant and --gamma-count are required for gamma-julia")
    return {
        "kind": "gamma-julia",
        "gamma_constant": args.gamma_constant,
        "gamma_count": args.gamma_count,
    }


def _default_routes(kind: str) -> list[str]:
    return {"quadratic-julia": ["exact"], "gamma-julia": ["lanczos"]}.get(
        kind, ["lanczos"]
    )


def _config_from_flags(args, diagnostics: list[str], extra: dict | None = None) -> ExperimentConfig:
    routes = args.routes.split(",") if args.routes else _default_routes(args.kind)
    doc = {
        "measure": _measure_doc(args),
        "n_coeffs": args.n,
        "routes": routes,
        "diagnostics": diagnostics,
    }
    if args.level is not None:
        doc["level"] = args.level
    if args.precision_bits is not None:
        doc["precision_bits"] = args.precision_bits
    else:
        doc["precision_bits"] = _default_precision()
    if args.anchor:
        doc["anchor"] = args.anchor
    if args.untrusted:
        doc["untrusted"] = True
    if args.threads != 1:
        doc["threads"] = args.threads
    if extra:
        doc.update(extra)
    return config_from_dict(doc, output_dir=args.output_dir)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cantorlab",
        description="orthogonal-polynomial diagnostics for Cantor-type measures",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, diags, extra_flags in [
        ("coeffs", [], ()),
        ("widom", ["widom", "capacity"], ()),
        ("apscan", ["apscan"], ("epsilon_grid", "window", "tails")),
        ("dos", ["dos"], ("dos_orders",)),
        ("green", ["green-lyapunov"], ("green_levels", "lyapunov_n")),
        ("capacity", ["capacity"], ()),
        ("report", ["report"], ("targets",)),
    ]:
        p = sub.add_parser(name, help=f"run the {name} diagnostic")
        _add_measure_flags(p)
        _add_common_flags(p)
        if "epsilon_grid" in extra_flags:
            p.add_argument("--epsilon-grid", default=None, help="comma list of epsilons")
            p.add_argument("--window", type=int, default=None)
            p.add_argument("--tails", default=None, help="comma list of tail starts")
        if "dos_orders" in extra_flags:
            p.add_argument("--dos-orders", default=None, help="comma list of orders")
        if "green_levels" in extra_flags:
            p.add_argument("--green-levels", type=int, default=None)
            p.add_argument("--lyapunov-n", type=int, default=None)
        if "targets" in extra_flags:
            p.add_argument("--targets", default=None, help="comma list of report targets")
        p.set_defaults(diagnostics=diags)

    p_run = sub.add_parser("run", help="execute a full experiment config")
    p_run.add_argument("--config", required=True, help="path to a config JSON document")
    _add_common_flags(p_run)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            with open(args.config) as fh:
                doc = json.load(fh)
            if args.precision_bits is not None:
                doc["precision_bits"] = args.precision_bits
            elif "precision_bits" not in doc:
                doc["precision_bits"] = _default_precision()
            if args.threads != 1:
                doc["threads"] = args.threads
            cfg = config_from_dict(doc, output_dir=args.output_dir)
        else:
            extra: dict = {}
            if getattr(args, "epsilon_grid", None):
                extra["epsilon_grid"] = args.epsilon_grid.split(",")
            if getattr(args, "window", None):
                extra["windows"] = [args.window]
            if getattr(args, "tails", None):
                extra["tails"] = [int(t) for t in args.tails.split(",")]
            if getattr(args, "dos_orders", None):
                extra["dos_orders"] = [int(t) for t in args.dos_orders.split(",")]
            if getattr(args, "green_levels", None):
                extra["green_levels"] = args.green_levels
            if getattr(args, "lyapunov_n", None):
                extra["lyapunov_n"] = args.lyapunov_n
            if getattr(args, "targets", None):
                extra["report_targets"] = args.targets.split(",")
            cfg = _config_from_flags(args, args.diagnostics, extra)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
