"""Command-line front end.

Every subcommand builds a report dictionary (schema "1"). Each verdict
carries the sha256 digest of its certificate's canonical JSON, and the
report as a whole carries a digest over everything except ``timing``.
Exit status is 0 whenever the computation ran, whatever the verdict;
2 for malformed input; 3 when ``--replay`` finds a mismatch.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from math import gcd
from typing import Any, Sequence

from . import __version__
from .cscsolver import build_h, check_equivalence, find_csc_rays
from .exactalg import parse_rational, rational_str
from .extremality import ExtremalityProblem, certify_whole_cone, is_extremal_ray
from .fiberjoin import (
    FiberJoinSpec,
    SpecError,
    c_to_w,
    cohomology,
    expand_family,
    load_family,
    load_spec,
    parse_spec,
    quasiregular_quotient,
    spec_to_json,
    validate,
    w_to_c,
)

SCHEMA = "1"
WORKERS_ENV = "SASAKICERT_WORKERS"
DEFAULT_TOLERANCE = Fraction(1, 2**40)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_REPLAY = 3


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# canonical JSON and digests
# ---------------------------------------------------------------------------


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def digest(obj: Any) -> str:
    return hashlib.sha256(canonical_json(obj).encode("ascii")).hexdigest()


def _verdict(ray: str, extremal: str, csc: str, certificate: dict, **extra) -> dict:
    out = {"ray": ray, "extremal": extremal, "csc": csc, "certificate": certificate, "digest": digest(certificate)}
    out.update(extra)
    return out


def finalize(report: dict, timing: dict[str, float]) -> dict:
    body = {k: v for k, v in report.items() if k != "timing"}
    body["report_digest"] = digest(body)
    body["timing"] = {k: round(v, 6) for k, v in timing.items()}
    return body


# ---------------------------------------------------------------------------
# argument parsing helpers
# ---------------------------------------------------------------------------


def parse_tolerance(text: str) -> Fraction:
    """A positive dyadic rational, written ``p/q`` or ``2^-k``."""
    t = text.strip().replace(" ", "")
    try:
        if t.startswith("2^"):
            val = Fraction(2) ** int(t[2:])
        else:
            val = parse_rational(t)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad tolerance {text!r}: {exc}") from None
    d = val.denominator
    if val <= 0 or d & (d - 1):
        raise InputError(f"tolerance must be a positive dyadic rational, got {text!r}")
    return val


def parse_c(text: str) -> Fraction:
    try:
        c = parse_rational(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad --c value {text!r}: {exc}") from None
    if not -1 < c < 1:
        raise InputError(f"--c must lie in (-1, 1), got {rational_str(c)}")
    return c


def parse_w(text: str) -> tuple[int, int]:
    try:
        a, b = (int(p) for p in text.split(","))
    except ValueError:
        raise InputError(f"--w expects two integers A,B, got {text!r}") from None
    if a <= 0 or b <= 0:
        raise InputError("weights must be positive")
    if gcd(a, b) != 1:
        raise InputError("weights must be coprime")
    return a, b


def _spec_echo(spec: FiberJoinSpec) -> dict:
    return json.loads(spec_to_json(spec))


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


# ---------------------------------------------------------------------------
# computations (pure: spec + options -> report body)
# ---------------------------------------------------------------------------


def _ray_report(spec: FiberJoinSpec, c: Fraction) -> dict:
    data = validate(spec)
    verdict = is_extremal_ray(ExtremalityProblem(data, c))
    if not verdict.replay():
        raise AssertionError("ray certificate failed to replay")
    on_h = build_h(data).h(c) == 0
    csc = "yes" if on_h and verdict.extremal else "no"
    return _verdict(rational_str(c), "yes" if verdict.extremal else "no", csc, verdict.to_dict(), w=list(c_to_w(c)))


def _cone_report(spec: FiberJoinSpec, tol: Fraction) -> dict:
    data = validate(spec)
    res = certify_whole_cone(data, tol=tol)
    if not res.replay():
        raise AssertionError("cone certificate failed to replay")
    rays = find_csc_rays(data, tol=tol)
    extremal = {"extremal": "yes", "not-extremal": "no"}.get(res.status, "inconclusive")
    csc = "yes" if any(r.certified for r in rays) else "no"
    return _verdict("all", extremal, csc, res.to_dict())


def _csc_reports(spec: FiberJoinSpec, tol: Fraction) -> list[dict]:
    out = []
    for r in find_csc_rays(spec, tol=tol):
        if not r.replay():
            raise AssertionError("CSC certificate failed to replay")
        ray = rational_str(r.rational_root) if r.rational_root is not None else f"root in ({rational_str(r.root.lo)}, {rational_str(r.root.hi)})"
        extremal = {"csc": "yes", "not-extremal-at-root": "no"}.get(r.status, "inconclusive")
        out.append(_verdict(ray, extremal, "yes" if r.certified else "no", r.to_dict()))
    return out


def compute(command: str, spec_doc: dict | None, options: dict) -> dict:
    """Recompute a report body from its echoed inputs. Used by every subcommand and by replay."""
    tol = parse_rational(options.get("tolerance", rational_str(DEFAULT_TOLERANCE)))
    spec = parse_spec(json.dumps(spec_doc)) if spec_doc is not None else None
    body: dict[str, Any] = {
        "schema": SCHEMA,
        "tool": {"name": "sasakicert", "version": __version__},
        "command": command,
        "options": options,
        "spec": spec_doc,
        "replay_seed": options.get("seed", 0),
        "verdicts": [],
    }
    if command == "extremal":
        if options.get("all_rays"):
            body["verdicts"].append(_cone_report(spec, tol))
        else:
            c = parse_rational(options["c"])
            body["verdicts"].append(_ray_report(spec, c))
    elif command == "csc":
        data = validate(spec)
        body["csc_polynomial"] = build_h(data).to_dict()
        body["verdicts"] = _csc_reports(spec, tol)
    elif command == "quotient":
        w = tuple(options["w"])
        body["quotient"] = quasiregular_quotient(spec, w).to_json()
    elif command == "cohomology":
        body["cohomology"] = cohomology(spec, options.get("d", 1)).to_json()
    elif command == "equiv":
        rng = random.Random(options.get("seed", 0))
        weights = []
        while len(weights) < options.get("samples", 8):
            a, b = rng.randint(1, 50), rng.randint(1, 50)
            if gcd(a, b) == 1:
                weights.append((a, b))
        rep = check_equivalence(spec, weights)
        cert = rep.to_dict()
        body["equivalence"] = {"holds": rep.holds}
        body["verdicts"].append(_verdict("weight-form", "n/a", "n/a", cert))
    else:
        raise InputError(f"unknown command {command!r}")
    return body


def _scan_cell(args: tuple[dict, dict, list[str], str]) -> dict:
    env, spec_doc, checks, tol_s = args
    spec = parse_spec(json.dumps(spec_doc))
    tol = parse_rational(tol_s)
    cell: dict[str, Any] = {"cell": env, "spec": spec_doc, "verdicts": []}
    try:
        validate(spec)
    except SpecError as exc:
        cell["status"] = "invalid"
        cell["error"] = exc.detail
        return cell
    cell["status"] = "computed"
    if "whole-cone" in checks:
        cell["verdicts"].append(_cone_report(spec, tol))
    if "csc" in checks:
        cell["verdicts"].extend(_csc_reports(spec, tol))
    return cell


def compute_scan(family_doc: dict, options: dict, workers: int = 1) -> dict:
    from .fiberjoin import parse_family

    fam = parse_family(json.dumps(family_doc))
    cells = expand_family(fam)
    tol_s = options.get("tolerance", rational_str(DEFAULT_TOLERANCE))
    jobs = [(env, _spec_echo(spec), list(fam.checks), tol_s) for env, spec in cells]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_cell, jobs, chunksize=1))
    else:
        results = [_scan_cell(j) for j in jobs]
    summary = {"cells": len(results), "extremal_cones": 0, "not_extremal_cones": 0, "csc_rays": 0, "cells_with_csc": 0, "inconclusive": 0, "invalid": 0}
    for cell in results:
        if cell["status"] == "invalid":
            summary["invalid"] += 1
            continue
        n_csc = 0
        for v in cell["verdicts"]:
            if v["ray"] == "all":
                key = {"yes": "extremal_cones", "no": "not_extremal_cones"}.get(v["extremal"], "inconclusive")
                summary[key] += 1
            elif v["csc"] == "yes":
                n_csc += 1
            elif v["extremal"] == "inconclusive":
                summary["inconclusive"] += 1
        summary["csc_rays"] += n_csc
        summary["cells_with_csc"] += n_csc > 0
    return {
        "schema": SCHEMA,
        "tool": {"name": "sasakicert", "version": __version__},
        "command": "scan",
        "options": options,
        "family": family_doc,
        "replay_seed": 0,
        "summary": summary,
        "cells": results,
        "verdicts": [v for cell in results for v in cell["verdicts"]],
    }


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _human(report: dict, out) -> None:
    cmd = report["command"]
    print(f"sasakicert {report['tool']['version']} {cmd}", file=out)
    if cmd == "scan":
        s = report["summary"]
        print(
            f"cells {s['cells']}: extremal cones {s['extremal_cones']}, not extremal {s['not_extremal_cones']}, "
            f"CSC rays {s['csc_rays']} (in {s['cells_with_csc']} cells), inconclusive {s['inconclusive']}, invalid {s['invalid']}",
            file=out,
        )
    for key in ("quotient", "cohomology", "csc_polynomial", "equivalence"):
        if key in report:
            print(f"{key}: {canonical_json(report[key])}", file=out)
    if cmd != "scan":
        for v in report["verdicts"]:
            line = f"ray {v['ray']}: extremal={v['extremal']} csc={v['csc']} digest={v['digest'][:16]}"
            cert = v["certificate"]
            if v["ray"] == "all":
                line += f" [{cert['status']}" + (f" via {cert['method']}" if "method" in cert else "")
                if cert["status"] == "not-extremal":
                    line += f" at c={cert['c']}, z={cert['z']}"
                line += "]"
            elif v["extremal"] == "no" and cert.get("evidence", {}).get("point") is not None:
                line += f" [refuted at z*={cert['evidence']['point']}, p(z*)={cert['evidence']['value']}]"
            print(line, file=out)
    print(f"report digest {report['report_digest']}", file=out)


def _write(report: dict, path: str | None) -> None:
    if path is None:
        return
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _check_digest(report: dict, wanted: str | None) -> bool:
    if wanted is None:
        return True
    digests = {report["report_digest"]} | {v["digest"] for v in report.get("verdicts", [])}
    return wanted in digests


def replay_report(stored: dict, wanted: str | None = None) -> tuple[bool, list[str]]:
    """Recompute a stored report and compare digests; returns (ok, messages)."""
    msgs = []
    if stored.get("schema") != SCHEMA:
        raise InputError(f"unsupported report schema {stored.get('schema')!r}")
    opts = stored["options"]
    if stored["command"] == "scan":
        fresh = compute_scan(stored["family"], opts, _workers())
    else:
        fresh = compute(stored["command"], stored["spec"], opts)
    fresh = finalize(fresh, {})
    old = {v["digest"] for v in stored.get("verdicts", [])}
    new = {v["digest"] for v in fresh["verdicts"]}
    ok = True
    if wanted is not None:
        if wanted not in old | {stored.get("report_digest")}:
            raise InputError(f"digest {wanted} does not occur in the report")
        if wanted != stored.get("report_digest") and wanted not in new:
            ok = False
            msgs.append(f"certificate {wanted[:16]} did not reproduce")
    if old != new:
        ok = False
        msgs.append(f"{len(old - new)} certificate digests did not reproduce")
    if fresh["report_digest"] != stored.get("report_digest"):
        ok = False
        msgs.append("report digest differs")
    if ok:
        msgs.append(f"replayed {len(new)} certificates; report digest {fresh['report_digest']} matches")
    return ok, msgs


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", metavar="PATH", help="write the JSON report to PATH ('-' for stdout)")
    common.add_argument("--tolerance", metavar="DYADIC", default=None, help="root isolation width, e.g. 2^-40")
    common.add_argument("--replay", metavar="DIGEST", default=None, help="require this digest to reproduce")

    ap = argparse.ArgumentParser(prog="sasakicert", description="Exact extremality and CSC certificates for Sasakian fiber joins.")
    ap.add_argument("--version", action="version", version=f"sasakicert {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extremal", parents=[common], help="extremality of one ray or the whole cone")
    p.add_argument("spec")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--c", metavar="RATIONAL")
    g.add_argument("--w", metavar="A,B")
    g.add_argument("--all-rays", action="store_true")

    p = sub.add_parser("csc", parents=[common], help="certified CSC rays")
    p.add_argument("spec")

    p = sub.add_parser("quotient", parents=[common], help="quasi-regular quotient of a ray")
    p.add_argument("spec")
    p.add_argument("--w", metavar="A,B", required=True)

    p = sub.add_parser("cohomology", parents=[common], help="integral cohomology of the total space")
    p.add_argument("spec")
    p.add_argument("--d", type=int, default=1, help="sphere fiber S^(2d+1); d >= 2 uses the base only")

    p = sub.add_parser("scan", parents=[common], help="run a parameter family")
    p.add_argument("family")

    p = sub.add_parser("equiv", parents=[common], help="compare the two weight-form CSC equations")
    p.add_argument("spec")
    p.add_argument("--samples", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("replay", parents=[common], help="recompute a stored report and check its digests")
    p.add_argument("report")
    return ap


def _load_spec_doc(path: str) -> dict:
    spec = load_spec(path)
    return _spec_echo(spec)


def run(args: argparse.Namespace, out=None) -> int:
    out = sys.stdout if out is None else out
    options: dict[str, Any] = {}
    if args.tolerance is not None:
        options["tolerance"] = rational_str(parse_tolerance(args.tolerance))
    t0 = time.perf_counter()
    if args.command == "replay":
        try:
            with open(args.report, encoding="utf-8") as fh:
                stored = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read report: {exc}") from None
        ok, msgs = replay_report(stored, args.replay)
        for m in msgs:
            print(m, file=out)
        print("REPLAY OK" if ok else "REPLAY MISMATCH", file=out)
        return EXIT_OK if ok else EXIT_REPLAY
    if args.command == "scan":
        try:
            with open(args.family, encoding="utf-8") as fh:
                family_doc = json.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read family file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise SpecError(exc.msg, line=exc.lineno) from None
        load_family(args.family)  # schema check with line numbers
        body = compute_scan(family_doc, options, _workers())
    else:
        spec_doc = _load_spec_doc(args.spec)
        if args.command == "extremal":
            if args.all_rays:
                options["all_rays"] = True
            elif args.c is not None:
                options["c"] = rational_str(parse_c(args.c))
            else:
                options["c"] = rational_str(w_to_c(parse_w(args.w)))
        elif args.command == "cohomology":
            if args.d < 1:
                raise InputError("--d must be a positive integer")
            options["d"] = args.d
        elif args.command == "quotient":
            options["w"] = list(parse_w(args.w))
        elif args.command == "equiv":
            if args.samples < 0:
                raise InputError("--samples must be nonnegative")
            options["samples"] = args.samples
            options["seed"] = args.seed
        body = compute(args.command, spec_doc, options)
    report = finalize(body, {"seconds": time.perf_counter() - t0})
    _human(report, out if args.json != "-" else sys.stderr)
    _write(report, args.json)
    if not _check_digest(report, args.replay):
        print(f"digest {args.replay} not reproduced", file=sys.stderr)
        return EXIT_REPLAY
    return EXIT_OK


def _join_negative_values(argv: Sequence[str]) -> list[str]:
    """Let ``--c -1/3`` through; argparse would read -1/3 as an option."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in ("--c", "--tolerance"):
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            else:
                out.append(f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_join_negative_values(sys.argv[1:] if argv is None else argv))
    try:
        return run(args)
    except (SpecError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
