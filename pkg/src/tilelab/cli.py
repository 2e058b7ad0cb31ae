"""Command line front end: verify, analyze, complements, sweep, prove.

All subcommands read tilings as JSON ({"M": 12, "A": [...], "B": [...]})
given inline, as a file path, or as "-" for stdin.  Reports are JSON with
sorted keys (byte-identical across runs); --format text renders the same
structure line by line.  Exit codes: 0 success / property holds, 1 semantic
negative, 2 malformed input, 3 internal invariant violation (always a bug).
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import sys
from concurrent.futures import ProcessPoolExecutor

from .errors import (
    InputError,
    InvariantViolationError,
    NotFiberedError,
    PipelineStuckError,
    TilelabError,
)
from .zm_core import TileSet, factorize, prime_factorization
from .cyclotomic import (
    check_T1,
    check_T2,
    cyclo_profile,
    divides_mask,
    load_cache,
    save_cache,
)
from .tiling import (
    Tiling,
    enumerate_tilings,
    iter_complements,
    sample_tilings,
    tijdeman_orbit_check,
    tiling_from_json,
    tiling_to_json,
    verify_cyclotomic,
    verify_direct,
    verify_sands,
)
from .structure import box_product_all_ones
from .splitting import (
    consistency3_check,
    consistent_splitting_check,
    check_fiber_basic,
    cross_direction_check,
    fibered_grid_profile,
    grid_stratification,
    plane_consistency,
    split_report,
)
from .reduction import (
    blowbound_check,
    certificate_to_json,
    plane_bound_check,
    prove_t2_largeprime,
    slab_equivalence_check,
    slabcor_check,
    splittingslab_equiv_check,
)


# ---------------------------------------------------------------------------
# plumbing


def _load_json_arg(arg: str) -> dict:
    """Inline JSON, a file path, or '-' for stdin."""
    if arg.lstrip().startswith("{"):
        text = arg
    elif arg == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(arg, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {arg}: {exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON at line {exc.lineno} column "
                         f"{exc.colno}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise InputError("top-level JSON value must be an object")
    return obj


def _sha256(obj) -> str:
    canon = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _render_text(obj, indent: int = 0, out=None) -> list[str]:
    lines = out if out is not None else []
    pad = "  " * indent
    if isinstance(obj, dict):
        for key in sorted(obj):
            value = obj[key]
            if isinstance(value, (dict, list)) and value:
                lines.append(f"{pad}{key}:")
                _render_text(value, indent + 1, lines)
            else:
                lines.append(f"{pad}{key}: {json.dumps(value)}")
    elif isinstance(obj, list):
        for item in obj:
            if isinstance(item, (dict, list)):
                lines.append(f"{pad}-")
                _render_text(item, indent + 1, lines)
            else:
                lines.append(f"{pad}- {json.dumps(item)}")
    else:
        lines.append(f"{pad}{json.dumps(obj)}")
    return lines


def _emit(report: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(report, sort_keys=True, indent=2))
    else:
        print("\n".join(_render_text(report)))


def _parse_tiling(arg: str) -> Tiling:
    return tiling_from_json(_load_json_arg(arg), check=False)


# ---------------------------------------------------------------------------
# verify / analyze


def cmd_verify(arg: str, fmt: str) -> int:
    t = _parse_tiling(arg)
    echo = tiling_to_json(t)
    results = {
        "direct": verify_direct(t.A, t.B),
        "sands": verify_sands(t.A, t.B),
        "cyclotomic": verify_cyclotomic(t.A, t.B),
    }
    agree = len(set(results.values())) == 1
    report = {
        "command": "verify",
        "input": echo,
        "input_sha256": _sha256(echo),
        "verification": {**results, "agree": agree},
    }
    _emit(report, fmt)
    if not agree:
        raise InvariantViolationError(
            f"verifiers disagree on {echo}: {results}")
    return 0 if results["direct"] else 1


def _tile_section(T: TileSet) -> dict:
    profile = cyclo_profile(T)
    return {
        "members": list(T),
        "size": len(T),
        "S": sorted(profile.s_set),
        "mask_divisors": sorted(profile.divisors_of_mask),
        "T1": check_T1(T),
        "T2": check_T2(T),
    }


def cmd_analyze(arg: str, fmt: str, split: bool, slab: bool,
                boxgrid: bool) -> int:
    t = _parse_tiling(arg)
    echo = tiling_to_json(t)
    report = {
        "command": "analyze",
        "input": echo,
        "input_sha256": _sha256(echo),
    }
    if not verify_direct(t.A, t.B):
        report["verification"] = {"direct": False}
        _emit(report, fmt)
        return 1
    report["verification"] = {"direct": True}
    report["tiles"] = {"A": _tile_section(t.A), "B": _tile_section(t.B)}
    code = 0
    if split:
        report["split"] = [split_report(t, i).to_json()
                           for i in range(len(t.context.primes))]
    if slab:
        section = []
        for i, (p, n) in enumerate(t.context.primes):
            if divides_mask(p ** n, t.A):
                entry = slab_equivalence_check(t, i).to_json()
                entry["hypothesis"] = True
            else:
                entry = {"direction": p, "direction_index": i,
                         "hypothesis": False}
            section.append(entry)
        report["slab"] = section
    if boxgrid:
        ok = box_product_all_ones(t)
        report["boxgrid"] = {"all_ones": ok, "pairs": t.context.M ** 2}
        if not ok:
            code = 3
    _emit(report, fmt)
    return code


# ---------------------------------------------------------------------------
# complements


def cmd_complements(arg: str, fmt: str, limit: int | None,
                    normalize: bool) -> int:
    obj = _load_json_arg(arg)
    if "M" not in obj or "A" not in obj:
        raise InputError('complement search needs {"M": ..., "A": [...]}')
    M = obj["M"]
    if not isinstance(M, int) or M < 1:
        raise InputError(f"M must be a positive integer, got {M!r}")
    if not isinstance(obj["A"], list):
        raise InputError("A must be a list of residues")
    A = TileSet(factorize(M), obj["A"])
    for B in iter_complements(A, normalize=normalize, limit=limit):
        if fmt == "json":
            print(json.dumps({"B": list(B)}))
        else:
            print("B: " + " ".join(str(b) for b in B))
    return 0


# ---------------------------------------------------------------------------
# sweep


def _record(violations: list, tiling: Tiling, check: str, detail: str):
    violations.append({
        "check": check,
        "tiling": tiling_to_json(tiling),
        "detail": detail,
    })


def _sweep_lemmas(t: Tiling, counts: dict, violations: list,
                  reports: list) -> None:
    ctx = t.context
    k = len(ctx.primes)

    for i, (p, n) in enumerate(ctx.primes):
        try:
            split_report(t, i)
            counts["fibers"] += ctx.M // p
        except InvariantViolationError as exc:
            _record(violations, t, "no_upgrades", str(exc))

    try:
        if not box_product_all_ones(t):
            _record(violations, t, "box_product", "some product differs from 1")
    except InvariantViolationError as exc:
        _record(violations, t, "box_product", str(exc))

    if not tijdeman_orbit_check(t):
        _record(violations, t, "tijdeman_orbit", "some coprime dilate fails")

    for side, tt in (("A", t), ("B", t.swapped())):
        for i, (p, n) in enumerate(ctx.primes):
            if not plane_bound_check(tt.B, i):
                _record(violations, t, "plane_bound",
                        f"side {side} direction p={p}")
            try:
                blowbound_check(tt, i)
                if divides_mask(p ** n, tt.A):
                    slab_equivalence_check(tt, i)
                splittingslab_equiv_check(tt, i)
                slabcor_check(tt, i)
            except InvariantViolationError as exc:
                _record(violations, t, "slab_suite",
                        f"side {side} direction p={p}: {exc}")

    if k == 3:
        for z in range(ctx.M):
            for pair in itertools.permutations(range(3), 2):
                try:
                    if pair[0] < pair[1]:
                        plane_consistency(t, z, pair)
                    cross_direction_check(t, z, pair)
                except InvariantViolationError as exc:
                    _record(violations, t, "grid_consistency",
                            f"z={z} pair={pair}: {exc}")
        try:
            profile = fibered_grid_profile(t)
        except (NotFiberedError, InputError):
            profile = None
        if profile is not None:
            counts["grids"] += len(profile.grid_dirs)
            try:
                check_fiber_basic(profile)
                consistency3_check(profile)
                for z0 in range(profile.radical_step):
                    grid_stratification(profile, z0)
                    consistent_splitting_check(profile, z0)
            except NotFiberedError:
                pass
            except InvariantViolationError as exc:
                _record(violations, t, "fibered_grid", str(exc))


def _sweep_t2(t: Tiling, counts: dict, violations: list,
              reports: list) -> None:
    for name, tile in (("A", t.A), ("B", t.B)):
        if not check_T1(tile):
            _record(violations, t, "T1", f"tile {name}")
        distinct = len(prime_factorization(len(tile))) if len(tile) > 1 else 0
        holds = check_T2(tile)
        if distinct <= 2:
            if not holds:
                _record(violations, t, "T2",
                        f"tile {name} with <=2-prime cardinality")
        else:
            reports.append({
                "kind": "t2_three_prime_cardinality",
                "tiling": tiling_to_json(t),
                "tile": name,
                "T2": holds,
            })
    try:
        prove_t2_largeprime(t)
    except PipelineStuckError as exc:
        reports.append({
            "kind": "pipeline_stuck",
            "tiling": tiling_to_json(t),
            "detail": str(exc),
        })
    except InvariantViolationError as exc:
        _record(violations, t, "t2_pipeline", str(exc))


def _sweep_worker(args: tuple) -> tuple[dict, list, list]:
    M, a_members, b_members, check = args
    ctx = factorize(M)
    t = Tiling(TileSet(ctx, a_members), TileSet(ctx, b_members), check=False)
    counts = {"tilings": 1, "fibers": 0, "grids": 0}
    violations: list = []
    reports: list = []
    if check in ("lemmas", "all"):
        _sweep_lemmas(t, counts, violations, reports)
    if check in ("t2", "all"):
        _sweep_t2(t, counts, violations, reports)
    return counts, violations, reports


def cmd_sweep(M: int, fmt: str, check: str, limit: int | None,
              jobs: int) -> int:
    ctx = factorize(M)
    corpus = (sample_tilings(ctx, cap=limit) if limit is not None
              else enumerate_tilings(ctx))
    work = [(M, list(t.A), list(t.B), check) for t in corpus]

    counts = {"tilings": 0, "fibers": 0, "grids": 0}
    violations: list = []
    reports: list = []
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_worker, work, chunksize=16))
    else:
        results = [_sweep_worker(item) for item in work]
    for part_counts, part_violations, part_reports in results:
        for key in counts:
            counts[key] += part_counts[key]
        violations.extend(part_violations)
        reports.extend(part_reports)

    violations.sort(key=lambda v: json.dumps(v, sort_keys=True))
    reports.sort(key=lambda r: json.dumps(r, sort_keys=True))
    summary = {
        "command": "sweep",
        "M": M,
        "check": check,
        "counts": counts,
        "violations": violations,
        "reports": reports,
    }
    _emit(summary, fmt)
    return 0 if not violations else 1


# ---------------------------------------------------------------------------
# prove


def cmd_prove(arg: str, fmt: str) -> int:
    t = _parse_tiling(arg)
    echo = tiling_to_json(t)
    if not verify_direct(t.A, t.B):
        print(f"input is not a tiling of Z_{t.context.M}", file=sys.stderr)
        return 1
    try:
        cert = prove_t2_largeprime(t)
    except PipelineStuckError as exc:
        report = {
            "command": "prove",
            "input": echo,
            "input_sha256": _sha256(echo),
            "stuck": str(exc),
        }
        _emit(report, fmt)
        return 1
    report = {
        "command": "prove",
        "input": echo,
        "input_sha256": _sha256(echo),
        "certificate": certificate_to_json(cert),
        "replayed": True,
        "large_prime_hypothesis": cert.large_prime_hypothesis,
    }
    _emit(report, fmt)
    return 0 if cert.success else 1


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tilelab",
        description="Exact arithmetic for translational tilings of Z_M.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_format(p):
        p.add_argument("--format", choices=("json", "text"), default="json")

    p = sub.add_parser("verify", help="run all three tiling verifiers")
    p.add_argument("tiling", help="tiling JSON: inline, file path, or -")
    add_format(p)

    p = sub.add_parser("analyze", help="cyclotomic profile and structure report")
    p.add_argument("tiling")
    p.add_argument("--split", action="store_true",
                   help="per-direction fiber splitting parities")
    p.add_argument("--slab", action="store_true",
                   help="slab condition verdicts per direction")
    p.add_argument("--boxgrid", action="store_true",
                   help="check the box product equals 1 at all point pairs")
    add_format(p)

    p = sub.add_parser("complements", help="stream tiling complements of A")
    p.add_argument("tile", help='JSON {"M": ..., "A": [...]}')
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction,
                   default=True, help="require 0 in B")
    add_format(p)

    p = sub.add_parser("sweep", help="run property suites over all tilings of Z_M")
    p.add_argument("M", type=int)
    p.add_argument("--check", choices=("lemmas", "t2", "all"), default="all")
    p.add_argument("--limit", type=int, default=None,
                   help="cap the corpus via stratified sampling")
    p.add_argument("--jobs", type=int, default=1)
    add_format(p)

    p = sub.add_parser("prove", help="produce and replay a (T2) certificate")
    p.add_argument("tiling")
    add_format(p)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    load_cache()
    try:
        if args.subcommand == "verify":
            return cmd_verify(args.tiling, args.format)
        if args.subcommand == "analyze":
            return cmd_analyze(args.tiling, args.format, args.split,
                               args.slab, args.boxgrid)
        if args.subcommand == "complements":
            return cmd_complements(args.tile, args.format, args.limit,
                                   args.normalize)
        if args.subcommand == "sweep":
            return cmd_sweep(args.M, args.format, args.check, args.limit,
                             args.jobs)
        if args.subcommand == "prove":
            return cmd_prove(args.tiling, args.format)
        raise InputError(f"unknown subcommand {args.subcommand!r}")
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolationError as exc:
        print(f"invariant violation (bug): {exc}", file=sys.stderr)
        return 3
    except PipelineStuckError as exc:
        print(f"pipeline stuck: {exc}", file=sys.stderr)
        return 1
    except TilelabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    finally:
        save_cache()


if __name__ == "__main__":
    sys.exit(main())
