"""Command-line entry point: ``specbroadcast <command> ...``.

Exit codes: 0 success / verdict pass, 1 verdict or inequality fail, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import numbers
import sys
import warnings

from . import sbs, sphere
from .qstate import DEFAULT_TOL, load_density_operator

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2

CSV_COLUMNS = ["t_over_tau", "f", "L", "I_bits", "H_S", "bound_rhs", "decoh_factor", "macro_overlap", "applicable"]

# in-regime defaults: k0*a = k0*dx = 0.01
DEFAULT_PARAMS = {
    "radius": 1e-7,
    "permittivity": 2.0,
    "displacement": 1e-7,
    "k0": 1e5,
    "theta": 0.0,
    "density": 1e6,
    "c": sphere.SPEED_OF_LIGHT,
    "box_edge": 1.0,
}
STATE_KEYS = {"p1", "c12_re", "c12_im"}


class UsageError(Exception):
    pass


def parse_grid(text: str, scale: float = 1.0) -> list[float]:
    """``a:b:step`` (inclusive) or a comma list; entries may be ``inf``."""
    text = text.strip()
    try:
        if ":" in text:
            a, b, step = (float(x) for x in text.split(":"))
            if step <= 0 or b < a:
                raise UsageError(f"bad range {text!r}: need a <= b and step > 0")
            n = int(math.floor((b - a) / step + 1e-9)) + 1
            values = [round(a + k * step, 12) for k in range(n)]
        else:
            values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse grid {text!r}: {exc}") from None
    if not values:
        raise UsageError(f"empty grid {text!r}")
    return [v * scale for v in values]


def parse_times(text: str, tau: float) -> list[float]:
    """Times in seconds, or in units of tau_D with a trailing ``tau``.

    A comma list may mark each entry, e.g. ``0,10tau,40tau``.
    """
    text = text.strip()
    if ":" in text:
        if text.endswith("tau"):
            return parse_grid(text[:-3], tau)
        return parse_grid(text)
    out = []
    for item in text.split(","):
        item = item.strip()
        if item.endswith("tau"):
            out.extend(parse_grid(item[:-3], tau))
        elif item:
            out.extend(parse_grid(item))
    if not out:
        raise UsageError(f"empty grid {text!r}")
    return out


def load_config(path: str | None) -> tuple[sphere.SphereParams, sphere.InitialSystemState, dict]:
    raw: dict = {}
    if path is not None:
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from None
        if not isinstance(raw, dict):
            raise UsageError("config must be a flat JSON object")
    param_names = {f.name for f in dataclasses.fields(sphere.SphereParams)}
    unknown = set(raw) - param_names - STATE_KEYS - {"m", "mu", "delta"}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    values = {**DEFAULT_PARAMS, **{k: raw[k] for k in param_names & set(raw)}}
    try:
        params = sphere.SphereParams(**{k: float(v) for k, v in values.items()})
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid sphere parameters: {exc}") from None
    p1 = float(raw.get("p1", 0.5))
    try:
        if "c12_re" in raw or "c12_im" in raw:
            rho0 = sphere.InitialSystemState.from_populations(p1, complex(raw.get("c12_re", 0.0), raw.get("c12_im", 0.0)))
        else:
            rho0 = sphere.InitialSystemState.pure(p1)
    except ValueError as exc:
        raise UsageError(f"invalid initial state (p1, c12_re, c12_im): {exc}") from None
    extras = {k: raw[k] for k in ("m", "mu", "delta") if k in raw}
    return params, rho0, extras


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    if isinstance(value, numbers.Real) and not isinstance(value, int):
        value = float(value)
        return "inf" if math.isinf(value) else repr(value)
    return str(value)


def _json_safe(value):
    if isinstance(value, numbers.Real) and not isinstance(value, int):
        value = float(value)
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def render(rows: list[dict], fmt: str, columns: list[str] | None = None) -> str:
    columns = columns or (list(rows[0]) if rows else [])
    if fmt == "json":
        return json.dumps([{k: _json_safe(r[k]) for k in r} for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _point_rows(points: list[sphere.SweepPoint], fmt: str) -> list[dict]:
    return [p.as_row() if fmt == "csv" else p.as_record() for p in points]


def _box_edges(args) -> list[float | None]:
    edges = parse_grid(args.grid_L) if args.grid_L else [math.inf]
    if any(e <= 0 for e in edges):
        raise UsageError("box edges must be positive")
    return [None if math.isinf(e) else e for e in edges]


def _sweep(params, rho0, part, times, edges) -> list[sphere.SweepPoint]:
    points = []
    for edge in edges:
        if edge is None:
            points += sphere.information_curve(params, rho0, part, times, "thermodynamic")
        else:
            points += sphere.information_curve(params.with_box_edge(edge), rho0, part, times, "finite")
    points.sort(key=lambda p: (p.t_over_tau, p.f, p.box_edge))
    return points


def cmd_check_sbs(args) -> int:
    try:
        rho = load_density_operator(args.file, tol=args.tol)
    except (OSError, json.JSONDecodeError, ValueError, TypeError, KeyError) as exc:
        print(f"error: {args.file}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if not 0 <= args.system < rho.n_subsystems:
        print(f"error: system index {args.system} out of range for {rho.n_subsystems} subsystems", file=sys.stderr)
        return EXIT_ERROR
    try:
        report = sbs.check_sbs(rho, system=args.system, tol=args.tol)
    except sbs.DegeneratePointerBasisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    sys.stdout.write(json.dumps(report.to_json_dict(), indent=2) + "\n")
    return EXIT_OK if report.verdict else EXIT_FAIL


def cmd_sphere(args) -> int:
    params, rho0, extras = load_config(args.config)
    tau = sphere.decoherence_time(params)
    m = float(extras.get("m", args.m))
    mu = float(extras.get("mu", args.mu))

    if args.sub == "tau-d":
        times = parse_times(args.grid_t or "1tau", tau)
        rows = [
            {"tau_d_s": tau, "t_s": t, "t_over_tau": t / tau, "N_t": sphere.photons_scattered(params, t)}
            for t in times
        ]
        emit(render(rows, args.format), args.out)
        return EXIT_OK

    fractions = parse_grid(args.grid_f) if args.grid_f else None
    if fractions is not None and any(not 0 <= f <= 1 for f in fractions):
        raise UsageError("fractions must lie in [0, 1]")

    if args.sub == "curve":
        times = parse_times(args.grid_t or "0:20:1tau", tau)
        points = []
        for f in fractions or [0.5]:
            points += _sweep(params, rho0, sphere.FractionPartition(m, f, mu if f == 0 else 0.0), times, _box_edges(args))
        points.sort(key=lambda p: (p.t_over_tau, p.f, p.box_edge))
        emit(render(_point_rows(points, args.format), args.format, CSV_COLUMNS), args.out)
        return EXIT_OK

    if args.sub == "phase-diagram":
        times = parse_times(args.grid_t or "20tau", tau)
        points = []
        for edge in _box_edges(args):
            for t in times:
                if edge is None:
                    points += sphere.phase_diagram(params, rho0, t, fractions, m, mu, "thermodynamic")
                else:
                    points += sphere.phase_diagram(params.with_box_edge(edge), rho0, t, fractions, m, mu, "finite")
        emit(render(_point_rows(points, args.format), args.format, CSV_COLUMNS), args.out)
        return EXIT_OK

    if args.sub == "bounds":
        times = parse_times(args.grid_t or "2:20:1tau", tau)
        report = sphere.bound_suite(params, rho0, times, fractions or sphere.default_fractions(m), _box_edges(args), m)
        emit(render(_point_rows(report.points, args.format), args.format, CSV_COLUMNS), args.out)
        return EXIT_OK if report.holds() else EXIT_FAIL

    if args.sub == "redundancy":
        times = parse_times(args.grid_t or "0:20:1tau", tau)
        delta = float(extras.get("delta", args.delta))
        rows = []
        for t in sorted(times):
            res = sphere.redundancy(params, rho0, t, delta, fractions, m)
            rows.append({"t_over_tau": t / tau, "delta": delta, "f_star": res.f_star, "R_delta": res.value, "reached": res.reached})
        emit(render(rows, args.format), args.out)
        return EXIT_OK

    raise UsageError(f"unknown sphere subcommand {args.sub!r}")


def cmd_witness(args) -> int:
    try:
        rep = sbs.witness_report(args.p)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    lines = [
        f"p = {rep.p!r}",
        f"p_tilde = {rep.p_tilde!r}",
        f"I(S:E) = {rep.mutual_information!r} bits",
        f"H_S = {rep.h_s!r} bits",
        f"|I - H_S| = {rep.gap!r}",
        f"PPT min eigenvalue = {rep.ppt_min_eigenvalue!r}",
        f"verdict: {rep.verdict}",
    ]
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_lemma1(args) -> int:
    counts = [int(x) for x in parse_grid(args.envs)]
    records = sphere.lemma1_batch(args.seed, args.instances, counts, env_dim=args.env_dim)
    rows = [
        {
            "seed": r.seed,
            "N": r.n_env,
            "d": r.env_dim,
            "n_observed": r.n_observed,
            "lhs": r.lhs,
            "rhs": r.rhs,
            "eps_E": r.eps_system,
            "eps_fE": r.eps_joint,
            "B": r.overlap,
            "slack": r.slack,
            "holds": r.holds(),
        }
        for r in records
    ]
    emit(render(rows, args.format), args.out)
    return EXIT_OK if all(r.holds() for r in records) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="specbroadcast", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-sbs", help="certify a density-operator JSON file")
    p.add_argument("file")
    p.add_argument("--system", type=int, default=0, help="index of the system subsystem")
    p.add_argument("--tol", type=float, default=sbs.RESIDUAL_TOL)
    p.set_defaults(func=cmd_check_sbs)

    p = sub.add_parser("sphere", help="illuminated-sphere sweeps")
    p.add_argument("sub", choices=["tau-d", "curve", "phase-diagram", "bounds", "redundancy"])
    p.add_argument("--config", help="flat JSON with SphereParams fields, p1, c12_re, c12_im, m, mu, delta")
    p.add_argument("--grid-t", help="times: a:b:step or comma list, seconds or with 'tau' suffix")
    p.add_argument("--grid-f", help="observed fractions: a:b:step or comma list")
    p.add_argument("--grid-L", help="box edges in metres; 'inf' for the thermodynamic limit")
    p.add_argument("--m", type=float, default=0.1, help="macro-fraction size")
    p.add_argument("--mu", type=float, default=1.0, help="extra photons for the micro-only point")
    p.add_argument("--delta", type=float, default=0.1, help="information deficit allowed by redundancy")
    p.add_argument("--out", help="write to this file instead of stdout")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_sphere)

    p = sub.add_parser("witness", help="entangled state satisfying the entropic condition")
    p.add_argument("--p", type=float, required=True, help="mixing weight in (0, 1), p != 1/2")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("lemma1", help="dense brute-force check of the qubit bound")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instances", type=int, default=30)
    p.add_argument("--envs", default="2,3,4", help="environment counts to cycle through")
    p.add_argument("--env-dim", type=int, default=2)
    p.add_argument("--out", help="write to this file instead of stdout")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_lemma1)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "tol", DEFAULT_TOL) <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_ERROR
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always", sphere.RegimeWarning)
            return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
