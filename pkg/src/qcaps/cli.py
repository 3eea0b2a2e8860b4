"""qcaps command line.

Exit codes: 0 affirmative verdict or success, 1 negative verdict,
2 usage or input error, 3 node budget exhausted (no verdict).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import binary, equiv, quantum, search
from .caps import Cap, CapFormatError, NotACapError, is_cap, load_points, write_cap
from .fixtures import check_fixture, fixtures
from .geometry import enumerate_points

OK, NEGATIVE, USAGE, NO_VERDICT = 0, 1, 2, 3

log = logging.getLogger("qcaps")


class InputError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True)


def _table(rows, header=None) -> str:
    rows = [[str(c) for c in r] for r in rows]
    if header:
        rows.insert(0, list(header))
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def _load(path):
    try:
        return load_points(path)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except CapFormatError as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_cap(path) -> Cap:
    ps = _load(path)
    if not is_cap(ps.points, ps.space):
        raise InputError(f"{path}: three of the points are collinear")
    return Cap.from_points(ps.space, ps.points)


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("QCAPS_JOBS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# reports


def verification_report(ps, include_zero: bool = False) -> dict:
    space = ps.space
    cap_ok = is_cap(ps.points, space)
    rank = quantum.matrix_rank(ps)
    wd = quantum.weight_distribution(ps)
    parity = quantum.hyperplane_parity_ok(ps)
    even = quantum.all_weights_even(wd)
    herm = quantum.hermitian_self_orthogonal(ps)
    rows, _ = binary.expand_to_binary(ps, require_spanning=False)
    sympl = binary.symplectic_self_orthogonal(rows)
    complete = None
    strength = None
    params = None
    if cap_ok:
        cap = Cap.from_points(space, ps.points)
        complete = cap.covered == space.all_mask if ps.n else False
        strength = quantum.strength(ps)
        if rank == space.dim + 1 and parity and even and herm:
            p = quantum.code_params(ps)
            params = {"n": p.n, "k": p.k, "d": p.d}
    return {
        "is_cap": cap_ok,
        "is_complete": complete,
        "rank": rank,
        "strength": strength,
        "hyperplane_parity_ok": parity,
        "all_weights_even": even,
        "hermitian_self_orthogonal": herm,
        "symplectic_ok": sympl,
        "params": params,
        "weight_distribution": wd.as_pairs(include_zero),
    }


def _verdict(report: dict) -> bool:
    keys = ("is_cap", "hyperplane_parity_ok", "all_weights_even", "hermitian_self_orthogonal", "symplectic_ok")
    return all(report[k] for k in keys)


def _human_report(report: dict, name: str) -> str:
    p = report["params"]
    rows = [
        ("file", name),
        ("is_cap", report["is_cap"]),
        ("is_complete", report["is_complete"]),
        ("rank", report["rank"]),
        ("strength", report["strength"]),
        ("hyperplane_parity_ok", report["hyperplane_parity_ok"]),
        ("all_weights_even", report["all_weights_even"]),
        ("hermitian_self_orthogonal", report["hermitian_self_orthogonal"]),
        ("symplectic_ok", report["symplectic_ok"]),
        ("params", f"[[{p['n']},{p['k']},{p['d']}]]" if p else "-"),
    ]
    wd = _table(report["weight_distribution"], ("weight", "count"))
    return _table(rows) + "\n\n" + wd


# ---------------------------------------------------------------------------
# commands


def cmd_verify(args) -> int:
    ps = _load(args.file)
    report = verification_report(ps, args.include_zero)
    if args.json:
        print(_dump(report))
    else:
        print(_human_report(report, args.file))
    if args.plot:
        from .plotting import plot_weight_distribution

        plot_weight_distribution(report["weight_distribution"], args.plot, title=Path(args.file).name)
    return OK if _verdict(report) else NEGATIVE


def cmd_weights(args) -> int:
    ps = _load(args.file)
    pairs = quantum.weight_distribution(ps).as_pairs(args.include_zero)
    if args.json:
        print(_dump({"n": ps.n, "weight_distribution": pairs}))
    else:
        print(_table(pairs, ("weight", "count")))
    if args.plot:
        from .plotting import plot_weight_distribution

        plot_weight_distribution(pairs, args.plot, title=Path(args.file).name)
    return OK


def _parse_target(text: str) -> tuple[int, int]:
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return int(lo), int(hi)
        return int(text), int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad target {text!r}; use N or N..M") from None


def _coords(space, pts) -> list[str]:
    return ["".join(str(int(x)) for x in space.coords[p]) for p in pts]


def cmd_search(args) -> int:
    seed = ()
    if args.seed:
        seed_cap = _load_cap(args.seed)
        if seed_cap.space.dim == 3 and args.ambient == 4:
            seed_cap = search.embed_seed(seed_cap)
        elif seed_cap.space.dim != args.ambient:
            raise InputError(f"seed lives in PG({seed_cap.space.dim},{seed_cap.space.q}), not PG({args.ambient},4)")
        seed = seed_cap.points
    try:
        cfg = search.SearchConfig(
            ambient=args.ambient,
            target=args.target,
            seed=seed,
            require_quantum=args.quantum,
            require_complete=args.complete_only,
            restrict_outside_seed_hyperplane=args.outside_seed_hyperplane,
            jobs=args.jobs,
            budget=args.budget,
            out=args.out,
            resume=args.resume,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None
    space = cfg.space
    stats = search.SearchStats()
    hits = 0
    try:
        for cap in search.run_search(cfg, stats):
            hits += 1
            if args.quiet:
                continue
            if args.json:
                print(_dump({"size": cap.n, "complete": cap.covered == space.all_mask, "points": list(cap.points), "coords": _coords(space, cap.points)}))
            else:
                print(cap.n, " ".join(_coords(space, cap.points)))
    except search.BudgetExhausted as exc:
        print(f"budget exhausted after {exc.nodes} nodes; no verdict", file=sys.stderr)
        return NO_VERDICT
    cert = search.Certificate(hits == 0, cfg.target[1], stats.nodes, hits, stats.branches, stats.per_branch, stats.per_depth, cfg.describe())
    summary = {"hits": hits, "nodes": stats.nodes, "branches": stats.branches, "exhaustive": stats.exhaustive}
    print(_dump(summary) if args.json else _table(sorted(summary.items())), file=sys.stderr if args.json else sys.stdout)
    if args.certificate:
        Path(args.certificate).write_text(_dump(cert.to_json()) + "\n")
    if args.plot and stats.per_depth:
        from .plotting import plot_depth_profile

        plot_depth_profile(stats.per_depth, args.plot, title=f"search tree, target {cfg.target[0]}..{cfg.target[1]}")
    return OK if hits else NEGATIVE


def cmd_classify(args) -> int:
    space = enumerate_points(args.ambient, 4)
    try:
        result = search.classify(
            args.size,
            space,
            require_quantum=args.quantum,
            require_complete=args.complete_only,
            allow_frobenius=not args.pgl_only,
            method=args.method,
            budget=args.budget,
            jobs=args.jobs,
            progress=(lambda lvl, n: print(f"size {lvl}: {n} classes", file=sys.stderr)) if args.verbose else None,
            checkpoint=args.checkpoint,
        )
    except search.BudgetExhausted as exc:
        print(f"budget exhausted after {exc.nodes} nodes; no verdict", file=sys.stderr)
        return NO_VERDICT
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for i, cls in enumerate(result.classes, 1):
            (out / f"class{i:03d}.cap").write_text(write_cap(cls.representative, f"class {i} of size {args.size}, signature {cls.signature}"))
    rows = [(i, cls.representative.n, cls.members, cls.signature) for i, cls in enumerate(result.classes, 1)]
    if args.json:
        print(_dump({"size": args.size, "method": result.method, "classes": len(result.classes),
                     "representatives": [{"points": list(c.representative.points), "coords": _coords(space, c.representative.points),
                                          "members": c.members, "signature": c.signature} for c in result.classes]}))
    else:
        print(f"{len(result.classes)} classes of size {args.size} ({result.method})")
        if rows:
            print(_table(rows, ("class", "size", "hits", "signature")))
    return OK if result.classes else NEGATIVE


def cmd_equiv(args) -> int:
    a, b = _load_cap(args.a), _load_cap(args.b)
    if a.space is not b.space:
        raise InputError("caps live in different spaces")
    try:
        pgl = equiv.are_equivalent(a, b, allow_frobenius=False)
        pgaml = pgl if (pgl is not None or args.pgl_only) else equiv.are_equivalent(a, b, allow_frobenius=True)
    except equiv.NonSpanningError as exc:
        raise InputError(str(exc)) from None
    verdict = pgl if args.pgl_only else pgaml
    out = {"pgl_equivalent": pgl is not None}
    if not args.pgl_only:
        out["pgaml_equivalent"] = pgaml is not None
    if verdict is not None:
        out["witness"] = {"matrix_row_action": verdict.row_action().tolist(), "frobenius": verdict.frobenius}
    if args.json:
        print(_dump(out))
    else:
        print(f"PGL:  {'equivalent' if pgl is not None else 'not equivalent'}")
        if not args.pgl_only:
            print(f"PGammaL: {'equivalent' if pgaml is not None else 'not equivalent'}")
        if verdict is not None:
            print("witness (x -> x M):")
            print(verdict.format())
    return OK if verdict is not None else NEGATIVE


def cmd_stabilizer(args) -> int:
    cap = _load_cap(args.file)
    try:
        res = equiv.stabilizer(cap, allow_frobenius=args.frobenius)
    except equiv.NonSpanningError as exc:
        raise InputError(str(exc)) from None
    if args.json:
        print(_dump({"order": res.order, "closure_checked": res.closure_checked,
                     "generators": [{"matrix_row_action": g.row_action().tolist(), "frobenius": g.frobenius} for g in res.generators]}))
    else:
        print(f"order {res.order}" + (" (closure checked)" if res.closure_checked else ""))
        for i, g in enumerate(res.generators, 1):
            print(f"\nG{i} (x -> x G{i}):")
            print(g.format())
    return OK


def cmd_binary_check(args) -> int:
    ps = _load(args.file)
    try:
        rows, lines = binary.expand_to_binary(ps)
        sec = binary.secundum_parity_check(lines, jobs=args.jobs)
    except (ValueError, binary.DegenerateLineError) as exc:
        raise InputError(str(exc)) from None
    sympl = binary.symplectic_self_orthogonal(rows)
    out = {"symplectic_ok": sympl, "secundum_parity_ok": sec, "agree": sympl == sec, "secunda": binary.secundum_count(lines.m)}
    if args.line_strength:
        out["line_strength"] = {t: binary.line_strength_check(lines, t) for t in range(1, args.line_strength + 1)}
    if args.json:
        print(_dump(out))
    else:
        print(_table([(k, v) for k, v in out.items()]))
    return OK if sympl and sec else NEGATIVE


def cmd_fixtures(args) -> int:
    fs = fixtures(args.dir)
    if args.action == "list":
        rows = [(f.name, f.size, "complete" if f.complete else "incomplete", f.title) for f in fs]
        if args.json:
            print(_dump([{"name": f.name, "size": f.size, "complete": f.complete, "title": f.title} for f in fs]))
        else:
            print(_table(rows, ("name", "size", "status", "title")))
        return OK
    if args.action == "check":
        for f in fs:
            problems = check_fixture(f)
            if problems:
                print(f"FAIL {problems[0]}")
                return NEGATIVE
            print(f"ok   {f.name}")
        print(f"{len(fs)} fixtures match")
        return OK
    # report
    if not args.outdir:
        raise InputError("fixtures report needs an output directory")
    from .plotting import plot_weight_distribution, plot_weight_grid

    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["name\tsize\tcomplete\tparams\tquantum\tweight_distribution"]
    grid = []
    status = OK
    for f in fs:
        cap = f.load()
        rep = verification_report(cap)
        (out / f"{f.name}.json").write_text(_dump(rep) + "\n")
        plot_weight_distribution(rep["weight_distribution"], out / f"{f.name}.png", title=f.title)
        grid.append((f.name, rep["weight_distribution"]))
        p = rep["params"]
        params = f"[[{p['n']},{p['k']},{p['d']}]]" if p else "-"
        wd = " ".join(f"{w}:{c}" for w, c in rep["weight_distribution"])
        lines.append(f"{f.name}\t{f.size}\t{rep['is_complete']}\t{params}\t{_verdict(rep)}\t{wd}")
        if check_fixture(f, cap):
            status = NEGATIVE
    (out / "summary.tsv").write_text("\n".join(lines) + "\n")
    plot_weight_grid(grid, out / "weights.png")
    print("\n".join(lines))
    return status


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qcaps", description="Quantum caps in PG(k,4).")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="check a cap file against the quantum-cap conditions")
    v.add_argument("file")
    v.add_argument("--json", action="store_true")
    v.add_argument("--include-zero", action="store_true", help="list the zero codeword as <0,1>")
    v.add_argument("--plot", metavar="PNG")
    v.set_defaults(func=cmd_verify)

    w = sub.add_parser("weights", help="weight distribution of the cap code")
    w.add_argument("file")
    w.add_argument("--json", action="store_true")
    w.add_argument("--include-zero", action="store_true")
    w.add_argument("--plot", metavar="PNG")
    w.set_defaults(func=cmd_weights)

    s = sub.add_parser("search", help="exhaustive ordered cap search")
    s.add_argument("--ambient", type=int, default=4)
    s.add_argument("--seed", metavar="FILE")
    s.add_argument("--target", type=_parse_target, required=True, metavar="N[..M]")
    s.add_argument("--quantum", action="store_true")
    s.add_argument("--complete-only", action="store_true")
    s.add_argument("--outside-seed-hyperplane", action="store_true")
    s.add_argument("--jobs", type=int, default=_default_jobs())
    s.add_argument("--budget", type=int, metavar="NODES")
    s.add_argument("--out", metavar="FILE.jsonl")
    s.add_argument("--resume", metavar="FILE.jsonl")
    s.add_argument("--certificate", metavar="FILE.json")
    s.add_argument("--plot", metavar="PNG", help="nodes per depth")
    s.add_argument("--json", action="store_true")
    s.add_argument("--quiet", action="store_true", help="do not print the caps")
    s.set_defaults(func=cmd_search)

    c = sub.add_parser("classify", help="caps of one size up to equivalence")
    c.add_argument("size", type=int)
    c.add_argument("--ambient", type=int, default=4)
    c.add_argument("--quantum", action="store_true")
    c.add_argument("--complete-only", action="store_true")
    c.add_argument("--pgl-only", action="store_true")
    c.add_argument("--method", choices=("auto", "ordered", "levels"), default="auto")
    c.add_argument("--budget", type=int, metavar="NODES")
    c.add_argument("--jobs", type=int, default=_default_jobs())
    c.add_argument("--out", metavar="DIR", help="write one cap file per class")
    c.add_argument("--checkpoint", metavar="FILE.jsonl", help="store and reuse finished sizes (levels method)")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_classify)

    e = sub.add_parser("equiv", help="decide projective equivalence of two caps")
    e.add_argument("a")
    e.add_argument("b")
    e.add_argument("--pgl-only", action="store_true")
    e.add_argument("--json", action="store_true")
    e.set_defaults(func=cmd_equiv)

    st = sub.add_parser("stabilizer", help="setwise stabilizer of a spanning cap")
    st.add_argument("file")
    st.add_argument("--frobenius", action="store_true", help="include semilinear maps")
    st.add_argument("--json", action="store_true")
    st.set_defaults(func=cmd_stabilizer)

    b = sub.add_parser("binary-check", help="symplectic and secundum tests on the binary expansion")
    b.add_argument("file")
    b.add_argument("--jobs", type=int, default=_default_jobs())
    b.add_argument("--line-strength", type=int, choices=(1, 2, 3), metavar="T")
    b.add_argument("--json", action="store_true")
    b.set_defaults(func=cmd_binary_check)

    f = sub.add_parser("fixtures", help="the caps shipped with the package")
    f.add_argument("action", choices=("list", "check", "report"))
    f.add_argument("outdir", nargs="?", help="output directory for 'report'")
    f.add_argument("--dir", help="read fixtures from this directory instead")
    f.add_argument("--json", action="store_true")
    f.set_defaults(func=cmd_fixtures)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"qcaps: error: {exc}", file=sys.stderr)
        return USAGE
    except (CapFormatError, NotACapError, FileNotFoundError) as exc:
        print(f"qcaps: error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
