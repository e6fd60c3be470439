"""Command-line front end.

Exit codes: 0 success, 1 usage or input error, 2 a refutation (a bound violated,
an identity failing, a check returning false).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .chain import DEFAULT_CEILING, CeilingExceeded, Subgroup
from .modular import MAX_LEVEL

EXIT_OK, EXIT_USAGE, EXIT_REFUTED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- serialization

def _plain(x):
    """Convert results into JSON-ready data; exact rationals become "num/den" strings."""
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if hasattr(x, "to_json"):
        return x.to_json()
    if dataclasses.is_dataclass(x):
        return {f.name: _plain(getattr(x, f.name)) for f in dataclasses.fields(x)
                if not f.name.startswith("_")}
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        return [_plain(v) for v in x]
    if isinstance(x, float):
        raise TypeError("refusing to serialize a float")
    return str(x)


def _cell(v) -> str:
    if hasattr(v, "to_json"):
        return str(v)
    v = _plain(v)
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True, separators=(",", ":"))
    if v is None:
        return ""
    return str(v).lower() if isinstance(v, bool) else str(v)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_plain(report), sort_keys=True, indent=2) + "\n"
    rows = report.get("rows", [])
    if fmt == "csv":
        buf = io.StringIO()
        if rows:
            keys = []
            for r in rows:
                keys += [k for k in r if k not in keys]
            w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: _cell(r.get(k)) for k in keys})
        else:
            summary = report.get("summary", {})
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(list(summary))
            w.writerow([_cell(v) for v in summary.values()])
        return buf.getvalue()
    lines = [f"{report['command']}"]
    for k, v in report.get("summary", {}).items():
        lines.append(f"  {k}: {_cell(v)}")
    if rows:
        keys = list(rows[0])
        lines.append("  " + " | ".join(keys))
        for r in rows:
            lines.append("  " + " | ".join(_cell(r.get(k)) for k in keys))
    if "wall_time" in report:
        lines.append(f"  wall_time: {report['wall_time']}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- input parsing

def _position(text: str, pos: int) -> str:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return f"line {line}, column {col}"


def parse_subgroup(path, level: int | None = None, ceiling: int = DEFAULT_CEILING,
                   adjoin_center: bool = False) -> Subgroup:
    """Read {"level": n, "generators": [4x4 or 16 integers, ...]} from a JSON file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read subgroup file {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON at {_position(text, exc.pos)}: {exc.msg}") \
            from None
    if not isinstance(data, dict):
        raise UsageError(f"{path}: expected a JSON object with 'level' and 'generators'")
    file_level = data.get("level", level)
    if file_level is None:
        raise UsageError(f"{path}: level missing")
    if not isinstance(file_level, int) or isinstance(file_level, bool):
        raise UsageError(f"{path}: level must be an integer")
    if level is not None and level != file_level:
        raise UsageError(f"{path}: file level {file_level} differs from --level {level}")
    if file_level > MAX_LEVEL or file_level < 1:
        raise UsageError(f"level {file_level} outside 1..{MAX_LEVEL}")
    gens = data.get("generators")
    if not isinstance(gens, list):
        raise UsageError(f"{path}: 'generators' must be a list")
    clean = []
    for i, g in enumerate(gens):
        flat = g
        if isinstance(g, list) and len(g) == 4 and all(isinstance(r, list) for r in g):
            flat = [x for r in g for x in r]
        if not (isinstance(flat, list) and len(flat) == 16
                and all(isinstance(x, int) and not isinstance(x, bool) for x in flat)):
            raise UsageError(f"{path}: generator {i} must be a 4x4 integer matrix")
        clean.append(tuple(flat))
    try:
        h = Subgroup(file_level, clean, ceiling)
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None
    return h.with_center() if adjoin_center else h


def _parse_matrix(text: str) -> tuple:
    try:
        m = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed matrix at {_position(text, exc.pos)}: {exc.msg}") from None
    if isinstance(m, list) and len(m) == 4 and all(isinstance(r, list) and len(r) == 4 for r in m):
        return tuple(tuple(int(x) for x in r) for r in m)
    raise UsageError("matrix must be a JSON 4x4 list of integers")


def _parse_weights(text: str) -> list:
    try:
        return [tuple(int(x) for x in chunk.split(",")) for chunk in text.split(";") if chunk]
    except ValueError:
        raise UsageError(f"bad weights {text!r}; expected 'a,b,c;a,b,c'") from None


def _need_level(args) -> int:
    if args.level is None:
        raise UsageError("--level is required")
    if not 1 <= args.level <= MAX_LEVEL:
        raise UsageError(f"level {args.level} outside 1..{MAX_LEVEL}")
    return args.level


def _need_subgroup(args) -> Subgroup:
    if not args.subgroup:
        raise UsageError("--subgroup is required")
    return parse_subgroup(args.subgroup, args.level, args.ceiling, args.adjoin_center)


def _need_seed(args) -> int:
    if args.seed is None:
        raise UsageError("--seed is required for randomized runs")
    return args.seed


def _need_prime_power_level(n: int) -> None:
    from .modular import prime_power

    if prime_power(n) is None:
        raise UsageError(f"level {n} is not a prime power")


# ---------------------------------------------------------------- commands

def cmd_atlas(args):
    from . import atlas

    n = _need_level(args)
    objs = atlas.BoundaryAtlas(n).family(args.family)
    summary = {"level": n, "family": args.family, "count": len(objs)}
    if args.family == "D":
        summary["formula"] = atlas.d_count_formula(n)
    if args.family == "line":
        summary["formula"] = atlas.line_count_formula(n)
    rows = [] if args.count else [{"item": i, "object": o} for i, o in enumerate(objs)]
    return summary, rows, False


def _report_summary(rep) -> dict:
    return {
        "level": rep.level, "order": rep.order, "index": rep.index,
        "mean_D": rep.mean_D, "mean_E": rep.mean_E, "mean_F": rep.mean_F,
        "mean_line": rep.mean_line, "mean_delta": rep.mean_delta,
        "mean_mult_bound": rep.mean_mult_bound, "mean_mult_exact": rep.mean_mult_exact,
        "star_mult": rep.star_mult, "line_count": rep.line_count,
        "triple_count": rep.triple_count, "plane_orbits": len(rep.planes),
    }


def cmd_ram_report(args):
    from .ramification import ramification_report

    h = _need_subgroup(args)
    _need_prime_power_level(h.level)
    rep = ramification_report(h)
    rows = []
    if args.items:
        rows += [{"kind": "D", "object": d, "value": v} for d, v in rep.D]
        rows += [{"kind": "E", "object": e, "value": v} for e, v in rep.E]
        rows += [{"kind": "F", "object": f, "value": v} for f, v in rep.F]
        rows += [{"kind": "line", "object": l, "value": rl, "in_a": ra, "in_b": rb}
                 for l, rl, ra, rb in rep.lines()]
        rows += [{"kind": "triple", "object": t, "value": dl, "mult_bound": mb, "mult_exact": me}
                 for t, dl, mb, me in rep.triples()]
    return _report_summary(rep), rows, False


def cmd_bound_check(args):
    from .experiments import run_sweep, sweep_row_dict, verdict_dict
    from .ramification import FAMILIES, ramification_report, verdict_from_report

    families = FAMILIES if args.family == "all" else (args.family,)
    rows = []
    if args.sweep:
        seed = _need_seed(args)
        levels = [int(x) for x in args.levels.split(",")] if args.levels else [_need_level(args)]
        for n in levels:
            _need_prime_power_level(n)
        for r in run_sweep(levels, args.sweep, seed, args.threads, families):
            d = sweep_row_dict(r)
            for v in d["verdicts"]:
                rows.append({"level": d["level"], "sample": d["sample"], "order": d["order"],
                             **v})
        summary = {"levels": levels, "subgroups": args.sweep * len(levels), "seed": seed}
    else:
        h = _need_subgroup(args)
        _need_prime_power_level(h.level)
        rep = ramification_report(h)
        rows = [{"level": h.level, **verdict_dict(verdict_from_report(rep, f))} for f in families]
        summary = {"level": h.level, "order": rep.order}
    bad = sum(1 for r in rows if not r["satisfied"])
    summary.update({"verdicts": len(rows), "violations": bad})
    return summary, rows, bad > 0


def _identity_task(arg):
    from .ramification import IDENTITIES, REPAIRED, check_identity

    name, n, trials, seed, keep = arg
    table = {**IDENTITIES, **REPAIRED}
    names = table[name][0]
    rng = random.Random(f"{seed}:{n}:{name}")
    fails, count = [], 0
    for _ in range(trials):
        params = {v: rng.randrange(n) for v in names}
        if not check_identity(name, params, n):
            count += 1
            if len(fails) < keep:
                fails.append(params)
    return {"identity": name, "level": n, "trials": trials, "failures": count,
            "counterexamples": fails}


def cmd_verify_identities(args):
    from .experiments import parallel_map
    from .ramification import IDENTITIES, REPAIRED

    n = _need_level(args)
    if n < 3:
        raise UsageError("level must be at least 3")
    seed = _need_seed(args)
    names = list(IDENTITIES) + (list(REPAIRED) if args.repaired else [])
    rows = parallel_map(_identity_task, [(nm, n, args.trials, seed, 5) for nm in names],
                        args.threads)
    literal_fail = sum(r["failures"] for r in rows if r["identity"] in IDENTITIES)
    summary = {"level": n, "trials": args.trials, "seed": seed,
               "failing_identities": [r["identity"] for r in rows if r["failures"]]}
    return summary, rows, literal_fail > 0


def cmd_toric(args):
    from . import toric

    if args.action == "census":
        if args.p is None or args.s is None or args.epsilon is None:
            raise UsageError("census needs --p, --s and --epsilon")
        eps = Fraction(args.epsilon)
        mapper = None
        pool = None
        if args.threads > 1:
            from concurrent.futures import ProcessPoolExecutor

            pool = ProcessPoolExecutor(args.threads)
            mapper = pool.map
        try:
            res = toric.census(args.p, args.s, eps, partitions=max(args.threads, 1), mapper=mapper)
        finally:
            if pool:
                pool.shutdown()
        return dataclasses.asdict(res), [], not res.satisfied
    n = args.modulus or args.level
    if n is None:
        raise UsageError("--modulus (or --level) is required")
    if not args.weights:
        raise UsageError("--weights is required")
    h = toric.ToricSingularity.make(n, _parse_weights(args.weights))
    summary = {"modulus": n, "weights": [list(w) for w in h.weights], "order": h.order()}
    refuted = False
    if args.action == "delta":
        summary.update({"min_degree": toric.min_invariant_degree(h), "delta": toric.delta(h)})
    else:
        exact = toric.mult_exact(h)
        upper = toric.mult_upper_bound(h)
        summary.update({"mult_exact": exact, "mult_upper_bound": upper,
                        "within_bound": exact <= upper})
        refuted = exact > upper
    return summary, [], refuted


def cmd_quartic(args):
    from . import quartic as q

    a = args.action
    if a in ("on", "stab"):
        if not args.point:
            raise UsageError("--point is required")
        try:
            x = q.QuarticPoint.parse(args.point, args.field)
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(str(exc)) from None
        on = q.on_quartic(x)
        summary = {"point": str(x), "field": x.m, "on_quartic": on}
        if a == "on":
            if on:
                summary["singular"] = q.is_singular(x)
            return summary, [], False
        if not on:
            raise UsageError("point is not on the quartic")
        smooth = not q.is_singular(x)
        rows = []
        for s in q.stabilizer(x):
            row = {"sigma": q.cycle_string(s.sigma), "sign": q.sign(s.sigma), "lambda": s.lam}
            if smooth:
                w, r = q.tangent_weights(x, s)
                row.update({"det": q.tangent_action_determinant(x, s), "weights": w, "order": r,
                            "canonical": q.reid_tai([(k, r) for k in w]),
                            "terminal": q.reid_tai([(k, r) for k in w], terminal=True)})
            rows.append(row)
        summary.update({"singular": not smooth, "stabilizer_order": len(rows)})
        return summary, rows, False
    if a == "classify":
        cases = q.classify_permutation_fixed_locus(args.type)
        rows = []
        for c in cases:
            base = {"sigma": c.sigma, "lambda": c.lam, "field": c.field,
                    "eigen_dimension": c.eigen_dimension, "eigen_point": c.eigen_point}
            if not c.components:
                rows.append({**base, "component": None, "dimension": None,
                             "label": "misses V", "equation": "", "point": None})
            for i, comp in enumerate(c.components):
                rows.append({**base, "component": i, "dimension": comp.dimension,
                             "label": comp.label, "equation": comp.equation, "point": comp.point})
        return {"sigma": args.type, "cases": len(cases)}, rows, False
    if a == "normal-form":
        mats = []
        if args.matrix:
            mats.append(_parse_matrix(args.matrix))
        if args.random:
            rng = random.Random(f"normal-form:{_need_seed(args)}")
            for _ in range(args.random):
                g = q.random_gamma1(rng)
                mats.append(q.imul(q.imul(g, q.PHI0), q.iinverse(g)))
        if not mats:
            raise UsageError("give --matrix or --random K")
        rows = []
        for m in mats:
            try:
                nf = q.involution_normal_form(m, degenerate=args.degenerate)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            rows.append({"matrix": m, "basis": nf.basis, "degenerate": nf.degenerate,
                         "conjugates_to_phi0": q.conjugates_to_phi0(m, nf)})
        bad = sum(1 for r in rows if not r["conjugates_to_phi0"])
        return {"matrices": len(rows), "failures": bad}, rows, bad > 0
    if a == "relations":
        rep = q.stab_ii_relations()
        rows = [{"relation": k, "holds": v} for k, v in rep.relations.items()]
        return {"order": rep.order, "nonabelian": rep.nonabelian, "ok": rep.ok}, rows, not rep.ok
    raise UsageError(f"unknown quartic action {a}")


def cmd_congruence(args):
    from . import congruence as c

    if args.p is None:
        raise UsageError("--p is required")
    if args.action == "split":
        n = _need_level(args)
        if not args.matrix:
            raise UsageError("--matrix is required")
        from .symplectic import is_symplectic, reduce

        g = reduce(_parse_matrix(args.matrix), n)
        if not is_symplectic(g, n):
            raise UsageError("matrix is not symplectic at this level")
        try:
            split = c.LevelSplit.of(n, args.p)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        gm, gq = c.crt_split(g, split)
        back = c.crt_join(gm, gq, split)
        summary = {"level": n, "m": split.m, "q": split.q, "component_m": gm,
                   "component_q": gq, "round_trip": back == g,
                   "symplectic": [is_symplectic(gm, split.m), is_symplectic(gq, split.q)]}
        return summary, [], back != g
    if args.action == "pproj":
        h = _need_subgroup(args)
        try:
            hp = c.p_projection(h, args.p)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        summary = {"level": h.level, "p": args.p, "projection_level": hp.level,
                   "order": hp.order(), "generators": [list(g) for g in hp.generators]}
        return summary, [], False
    if args.action == "kernel-gen":
        if args.i is None:
            raise UsageError("--i is required")
        try:
            res = c.verify_kernel_generation(args.p, args.i, seed=args.seed or 0,
                                             exhaustive=args.exhaustive)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        return {**dataclasses.asdict(res), "ok": res.ok}, [], not res.ok
    raise UsageError(f"unknown congruence action {args.action}")


COMMANDS = {
    "atlas": cmd_atlas,
    "ram-report": cmd_ram_report,
    "bound-check": cmd_bound_check,
    "verify-identities": cmd_verify_identities,
    "toric": cmd_toric,
    "quartic": cmd_quartic,
    "congruence": cmd_congruence,
}


def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--level", type=int, default=d(None), help="level n")
    p.add_argument("--subgroup", default=d(None), help="subgroup JSON file")
    p.add_argument("--seed", type=int, default=d(None), help="seed for randomized runs")
    p.add_argument("--format", choices=("json", "csv", "text"), default=d("text"))
    p.add_argument("--threads", type=int, default=d(1), help="worker processes")
    p.add_argument("--ceiling", type=int, default=d(DEFAULT_CEILING),
                   help="stabilizer chain size ceiling (stored points)")
    p.add_argument("--adjoin-center", action="store_true", default=d(False),
                   help="add -1 to the subgroup read from --subgroup")
    p.add_argument("--timing", action="store_true", default=d(False),
                   help="include wall-clock time in the report")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sp4lab", description=__doc__.splitlines()[0], allow_abbrev=False)
    parser.add_argument("--version", action="version", version=__version__)
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub_kw = {"allow_abbrev": False}

    p = sub.add_parser("atlas", **sub_kw, help="enumerate boundary strata")
    p.add_argument("--family", required=True, choices=("D", "cusp", "E", "F", "line", "triple"))
    p.add_argument("--count", action="store_true", help="only print the count")

    p = sub.add_parser("ram-report", **sub_kw, help="ramification invariants of a subgroup")
    p.add_argument("--items", action="store_true", help="include one row per stratum object")

    p = sub.add_parser("bound-check", **sub_kw, help="compare the index with the family bounds")
    p.add_argument("--family", default="all", choices=("all", "D", "E", "DD", "F", "DDD"))
    p.add_argument("--sweep", type=int, default=0, help="number of random subgroups per level")
    p.add_argument("--levels", default="", help="comma-separated levels for --sweep")

    p = sub.add_parser("verify-identities", **sub_kw, help="random checks of the matrix identities")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--repaired", action="store_true", help="also check the repaired variants")

    p = sub.add_parser("toric", **sub_kw, help="toric quotient singularity calculators")
    p.add_argument("action", choices=("delta", "mult", "census"))
    p.add_argument("--modulus", type=int)
    p.add_argument("--weights", help="generators 'a,b,c;a,b,c'")
    p.add_argument("--p", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--epsilon", help="exact rational such as 1/2")

    p = sub.add_parser("quartic", **sub_kw, help="computations on the singular quartic")
    p.add_argument("action", choices=("on", "stab", "classify", "normal-form", "relations"))
    p.add_argument("--point", help="six coordinates, e.g. '0, theta, theta^2, theta^3, theta^4, 1'")
    p.add_argument("--field", type=int, default=20, help="m for Q(zeta_m)")
    p.add_argument("--type", default="(1,2)", help="permutation type for classify")
    p.add_argument("--matrix", help="JSON 4x4 integer matrix")
    p.add_argument("--random", type=int, default=0, help="number of random conjugates of phi0")
    p.add_argument("--degenerate", choices=("direct", "raise"), default="direct")

    p = sub.add_parser("congruence", **sub_kw, help="CRT splitting, p-projections, kernel layers")
    p.add_argument("action", choices=("split", "pproj", "kernel-gen"))
    p.add_argument("--p", type=int)
    p.add_argument("--i", type=int)
    p.add_argument("--matrix", help="JSON 4x4 integer matrix")
    p.add_argument("--exhaustive", action="store_true")

    for name, sp in sub.choices.items():
        _add_globals(sp, suppress=True)
    return parser


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be positive")
    start = time.perf_counter()
    try:
        summary, rows, refuted = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"sp4lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CeilingExceeded as exc:
        print(f"sp4lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"sp4lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    # the thread count and timing flag never change results, so they stay out of the echo
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("timing", "threads")}
    report = {"command": args.command, "config": config, "summary": summary, "rows": rows,
              "version": __version__}
    if args.timing:
        report["wall_time"] = f"{time.perf_counter() - start:.3f}s"
    out.write(render(report, args.format))
    return EXIT_REFUTED if refuted else EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
