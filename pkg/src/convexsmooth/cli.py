"""Command-line entry point: ``convexsmooth <subcommand> [options]``.

Exit codes: 0 when every outcome is as expected, 1 when a FailedWitness
appears where a pass was expected, 2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config
from .errors import CapabilityError, ConvexSmoothError, NotDifferentiableError
from .reports import SCHEMA_VERSION, expected_outcomes, write_csv, write_json

EXIT_OK, EXIT_UNEXPECTED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers


def parse_range(spec: str, what: str = "range") -> tuple[float, float, int]:
    """``"a:b:n"`` -> ``(a, b, n)``."""
    try:
        a, b, n = spec.split(":")
        return float(a), float(b), int(n)
    except ValueError:
        raise UsageError(f"bad {what} {spec!r}; expected START:STOP:COUNT") from None


def parse_grid(spec: str) -> np.ndarray:
    """``"x0:x1:nx,y0:y1:ny"`` -> points (``nx * ny`` rows, x varying slowest)."""
    parts = spec.split(",")
    if len(parts) != 2:
        raise UsageError(f"bad grid {spec!r}; expected X0:X1:NX,Y0:Y1:NY")
    (x0, x1, nx), (y0, y1, ny) = (parse_range(p, "grid axis") for p in parts)
    if nx < 0 or ny < 0:
        raise UsageError("grid counts must be nonnegative")
    xs, ys = np.linspace(x0, x1, nx), np.linspace(y0, y1, ny)
    return np.array([(x, y) for x in xs for y in ys], dtype=np.float64).reshape(-1, 2)


def parse_point(spec: str) -> tuple[float, float]:
    try:
        x, y = (float(v) for v in spec.split(","))
    except ValueError:
        raise UsageError(f"bad point {spec!r}; expected X,Y") from None
    return x, y


def _config(args) -> RunConfig:
    cfg = load_config(args.config)
    return cfg.with_overrides(out=args.out)


def _stamp(payload: dict, cfg: RunConfig, kind: str) -> dict:
    return {"schema": SCHEMA_VERSION, "kind": kind, "config_hash": cfg.hash(), **payload}


def _csv_header_comment(cfg: RunConfig, kind: str) -> str:
    return f"# convexsmooth {kind} schema={SCHEMA_VERSION} config_hash={cfg.hash()}"


def _write_stamped_csv(path: Path, cfg: RunConfig, kind: str, header, rows) -> Path:
    write_csv(path, header, rows)
    body = path.read_text()
    path.write_text(_csv_header_comment(cfg, kind) + "\n" + body)
    return path


# ---------------------------------------------------------------------------
# subcommands


def eval_columns(order: int) -> list:
    cols = ["x", "y", "status", "f_lo", "f_hi"]
    for n in range(1, order + 1):
        for a in range(n, -1, -1):
            cols += [f"d{a}{n - a}_lo", f"d{a}{n - a}_hi"]
    return cols


def eval_rows(points, order: int, tol: float, table) -> list:
    """One row per point; domain problems go in the status column."""
    from .counterexample import f_eval, f_partial, in_X

    rows = []
    for x, y in points:
        x, y = float(x), float(y)
        if not in_X((x, y)):
            rows.append([x, y, "domain: not in X"] + [None] * (len(eval_columns(order)) - 3))
            continue
        v = f_eval((x, y), tol=tol, table=table)
        row, notes = [x, y, "ok", v.lo, v.hi], []
        for n in range(1, order + 1):
            for a in range(n, -1, -1):
                try:
                    d = f_partial((x, y), (a, n - a), tol=max(tol, 1e-12), table=table)
                    row += [d.lo, d.hi]
                except (NotDifferentiableError, CapabilityError) as exc:
                    row += [None, None]
                    notes.append(f"d{a}{n - a}: {type(exc).__name__}")
        if notes:
            row[2] = "partial: " + "; ".join(notes)
        rows.append(row)
    return rows


def cmd_eval(args) -> int:
    cfg = _config(args).with_overrides(tol=args.tol)
    order = args.order or 0
    if order < 0:
        raise UsageError("--order must be nonnegative")
    if args.point:
        pts = np.array([parse_point(p) for p in args.point], dtype=np.float64)
    else:
        pts = parse_grid(args.grid or "-2:2:9,0:2:5")
    table = cfg.table()
    if order > table.kernels.max_order:
        raise UsageError(f"--order exceeds configured max order {table.kernels.max_order}")
    rows = eval_rows(pts, order, cfg.tol, table)
    path = _write_stamped_csv(Path(cfg.out) / "eval.csv", cfg, "eval", eval_columns(order), rows)
    print(path)
    return EXIT_OK


def blowup_grid(spec: str | None) -> np.ndarray:
    hi, lo, n = parse_range(spec or "1e-1:1e-6:12", "y range")
    if n < 1 or not (0 < lo < 1 and 0 < hi < 1):
        raise UsageError("y range must lie inside (0, 1) with a positive count")
    ys = np.logspace(np.log10(hi), np.log10(lo), n)
    return np.unique(ys)[::-1]


def cmd_blowup(args) -> int:
    from .counterexample import verify_blowup

    cfg = _config(args)
    k = args.k or 1
    cap = cfg.kernels.max_order - 1
    if not 1 <= k <= cap:
        raise UsageError(f"k must be in 1..{cap} (order k+1 within the configured max order)")
    ys = blowup_grid(args.grid)
    cert = verify_blowup(k, ys)
    out = Path(cfg.out)
    _write_stamped_csv(out / f"blowup_k{k}.csv", cfg, "blowup",
                       ["y", "value", "closed_form", "rel_residual"], cert.rows())
    write_json(out / f"blowup_k{k}.json", _stamp({"certificate": cert.to_dict()}, cfg, "blowup"))
    print(f"k={k} slope={cert.slope:.6f} max_rel_residual={cert.max_residual:.3e} "
          f"passed={cert.passed}")
    return EXIT_OK if cert.passed else EXIT_UNEXPECTED


def cmd_ck_bound(args) -> int:
    from .counterexample import verify_ck_bounded

    cfg = _config(args)
    k = args.k or 1
    table = cfg.table()
    if not 1 <= k <= table.kernels.max_order - 2:
        raise UsageError(f"k must be in 1..{table.kernels.max_order - 2}")
    cert = verify_ck_bounded(k, n=args.grid_count or cfg.ck_samples, seed=cfg.seed, table=table)
    write_json(Path(cfg.out) / f"ck_k{k}.json",
               _stamp({"certificate": cert.to_dict()}, cfg, "ck-bound"))
    print(f"k={k} margin={cert.margin:.6g} growth={cert.contrast.get('growth')} "
          f"passed={cert.passed}")
    return EXIT_OK if cert.passed else EXIT_UNEXPECTED


KRIEGL_CASES = ("f-X", "pyramid", "phi1-halfspace")


def _load_map(path: str):
    from .structures.symbolic import SymbolicMap

    try:
        return SymbolicMap.from_dict(json.loads(Path(path).read_text()))
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read map {path}: {exc}") from exc


def cmd_kriegl(args) -> int:
    from . import suites
    from .structures.descriptors import PRESETS
    from .structures.smoothness import kriegl_check

    cfg = _config(args).with_overrides(fd_tol=args.tol, structure_order=args.order)
    cfg.table()
    K = cfg.structure_order
    if args.map:
        if args.set not in PRESETS:
            raise UsageError(f"--set must be one of {sorted(PRESETS)}")
        cases = [("custom", _load_map(args.map), PRESETS[args.set](), "pass")]
    else:
        name = args.case or "f-X"
        if name == "f-X":
            from .structures.descriptors import region_X

            cases = [("f-X", suites.f_map(), region_X(), "pass")]
        elif name == "pyramid":
            from .structures.descriptors import square_pyramid

            cases = [(f"pyramid/{g.name}", g, square_pyramid(), "pass")
                     for g in suites.pyramid_polys()]
        else:
            g, S = suites.phi1_halfspace()
            cases = [("phi1-halfspace", g, S, "fail")]
    results, ok = [], True
    for name, g, S, want in cases:
        v = kriegl_check(g, S, K, args.grid_count or cfg.n_boundary, cfg.fd_tol, cfg.seed)
        ok &= v.ok == (want == "pass")
        results.append({"case": name, "expected": want, "verdict": v.to_dict()})
        print(f"{name}: {v}")
    label = "custom" if args.map else (args.case or "f-X")
    write_json(Path(cfg.out) / f"kriegl_{label}.json",
               _stamp({"results": results}, cfg, "kriegl"))
    return EXIT_OK if ok else EXIT_UNEXPECTED


def _handles(cfg: RunConfig):
    from .structures import laws
    from .structures.descriptors import real_space, region_X, unit_interval
    from .structures.handles import Ch, Di, E, nonstandard_interval, standard_chen, standard_diffeology

    K, P = cfg.structure_order, cfg.probes
    chen = [(q, std) for q, std, _ in laws.chen_queries()]
    chen_ns = [(q, ns) for q, _, ns in laws.chen_queries()]
    DR, DX = standard_diffeology(real_space(1), K), standard_diffeology(region_X(), K)
    return {
        "D_std(R)": (lambda: DR, laws.real_queries),
        "D_X": (lambda: DX, laws.x_queries),
        "Di(Ch(D_std(R)))": (lambda: Di(Ch(DR, P), P), laws.real_queries),
        "Di(Ch(D_X))": (lambda: Di(Ch(DX, P), P), laws.x_queries),
        "C_std": (lambda: standard_chen(unit_interval(), K), lambda: chen),
        "C_ns": (lambda: nonstandard_interval(K), lambda: chen_ns),
        "E(C_ns)": (lambda: E(nonstandard_interval(K), P), lambda: chen),
    }


def cmd_structure_check(args) -> int:
    cfg = _config(args).with_overrides(fd_tol=args.tol, structure_order=args.order)
    cfg.table()
    handles = _handles(cfg)
    if args.handle_file:
        from .structures.handles import handle_from_dict

        if not args.map:
            raise UsageError("--handle-file needs --map")
        try:
            H = handle_from_dict(json.loads(Path(args.handle_file).read_text()))
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read handle {args.handle_file}: {exc}") from exc
        label = H.name or "custom"
    else:
        if args.handle not in handles:
            raise UsageError(f"--handle must be one of {sorted(handles)}")
        make, queries = handles[args.handle]
        H, label = make(), args.handle
    if args.map:
        qs = [(_load_map(args.map), args.expect != "reject")]
    else:
        qs = queries()
    rows, ok = [], True
    for q, want in qs:
        try:
            v = H.member(q)
        except TypeError as exc:
            raise UsageError(f"{q.name or q.label()}: {exc}") from exc
        match = v.ok == want
        # only an unexpected rejection counts as a failure of the run
        ok &= match or not want
        rows.append({"query": q.name or q.label(), "expected": "accept" if want else "reject",
                     "verdict": v.to_dict(), "as_expected": match})
        print(f"{'ok  ' if match else 'DIFF'} {q.name or q.label()}: {v.status.name}")
    write_json(Path(cfg.out) / "structure_check.json",
               _stamp({"handle": label, "rows": rows}, cfg, "structure-check"))
    return EXIT_OK if ok else EXIT_UNEXPECTED


def cmd_suite(args) -> int:
    from .suites import run_suite, suite_names

    if args.name not in suite_names():
        raise UsageError(f"unknown suite {args.name!r}; choose from {suite_names()}")
    cfg = _config(args).with_overrides(tol=args.tol, structure_order=args.order)
    expected_outcomes()
    report = run_suite(args.name, cfg, log=print)
    out = Path(cfg.out)
    write_json(out / f"suite-{args.name}.json", report.to_dict())
    write_json(out / f"suite-{args.name}.timings.json", report.timings())
    print(f"suite {args.name}: {'all outcomes as expected' if report.ok else 'UNEXPECTED'} "
          f"(config {report.config_hash})")
    return EXIT_OK if report.ok else EXIT_UNEXPECTED


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--out", metavar="DIR", help="output directory (default: out)")
    common.add_argument("--tol", type=float, help="certified tolerance (eval, suite) or "
                        "finite-difference tolerance (kriegl, structure-check)")
    common.add_argument("--order", type=int, help="derivative order (eval) or check order K")
    common.add_argument("--k", type=int, help="index k (blowup, ck-bound)")
    common.add_argument("--grid", help="eval: X0:X1:NX,Y0:Y1:NY; blowup: HI:LO:N log-spaced y")

    p = argparse.ArgumentParser(prog="convexsmooth", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", parents=[common], help="certified f and partials on a grid")
    e.add_argument("--point", action="append", metavar="X,Y", help="evaluate at a point (repeatable)")
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("blowup", parents=[common], help="blow-up curve and certificate")
    b.set_defaults(func=cmd_blowup)

    c = sub.add_parser("ck-bound", parents=[common], help="C^{k+1} boundedness certificate on U_k")
    c.add_argument("--samples", dest="grid_count", type=int, help="number of samples")
    c.set_defaults(func=cmd_ck_bound)

    k = sub.add_parser("kriegl", parents=[common], help="boundary jet-limit criterion")
    k.add_argument("--case", choices=KRIEGL_CASES)
    k.add_argument("--map", metavar="PATH", help="JSON symbolic map (overrides --case)")
    k.add_argument("--set", default="X", help="preset set for --map")
    k.add_argument("--boundary", dest="grid_count", type=int, help="number of boundary samples")
    k.set_defaults(func=cmd_kriegl)

    s = sub.add_parser("structure-check", parents=[common], help="membership queries for a handle")
    s.add_argument("--handle", default="D_X")
    s.add_argument("--handle-file", metavar="PATH", help="JSON handle definition (with --map)")
    s.add_argument("--map", metavar="PATH", help="JSON symbolic map to test")
    s.add_argument("--expect", choices=("accept", "reject"), default="accept")
    s.set_defaults(func=cmd_structure_check)

    u = sub.add_parser("suite", parents=[common], help="run a verification suite")
    u.add_argument("name", help="paper-examples | axioms | functors | reflexivity | all")
    u.set_defaults(func=cmd_suite)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"convexsmooth: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvexSmoothError as exc:
        print(f"convexsmooth: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
