"""Command-line front end.

Every command prints a report, as an aligned table by default or as
canonical JSON with --format json. JSON reports are deterministic: same
inputs and seed give byte-identical output. Exit codes: 0 success, 1
internal invariant violation, 2 malformed input, 3 inconclusive solver
verdict. The environment variable NCJOIN_MAX_ITER overrides the solver
iteration cap when --max-iter is not given.

Input files may be replaced by corpus references like ``corpus:c3``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys as _sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import corpus, fileio
from .algebra import validate_system
from .dual import (
    DualSystem,
    classify_dual,
    correlation_series,
    opposite_group_joining,
    ornstein_scan_dual,
    parse_combination,
    parse_pair_combination,
    sample_element,
)
from .errors import InputFormatError, InvalidSystemError, NcjoinError, StructureError
from .gns import (
    cesaro_correlation,
    classify_finite,
    compactness_net,
    gns_construct,
    point_spectrum,
)
from .joinings import (
    build_tensor_context,
    cesaro_diagonal_average,
    diagonal_state,
    disjointness_test,
    find_joining,
    graph_joining,
    ornstein_ratio_scan,
)

DEFAULT_MAX_ITER = 50_000


# ---------------------------------------------------------------------------
# serialization helpers


def _jsonify(x):
    if isinstance(x, dict):
        return {str(k): _jsonify(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonify(v) for v in x]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    if isinstance(x, float):
        return x
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, complex) or isinstance(x, np.complexfloating):
        z = complex(x)
        return [z.real, z.imag]
    if isinstance(x, np.ndarray):
        return _jsonify(x.tolist())
    return str(x)


def _sig6(x) -> str:
    """Complex or real number with 6 significant digits for tables."""
    if (isinstance(x, (list, tuple)) and len(x) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x)):
        x = complex(x[0], x[1])
    elif isinstance(x, (list, tuple)):
        return "[" + ", ".join(_sig6(v) for v in x) + "]"
    if isinstance(x, (complex, np.complexfloating)):
        z = complex(x)
        if abs(z.imag) < 5e-16:
            return _sig6(z.real)
        sign = "+" if z.imag >= 0 else "-"
        return f"{z.real:.6g}{sign}{abs(z.imag):.6g}i"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.6g}"
    return str(x)


def _flatten(prefix: str, value, rows: list):
    if isinstance(value, dict):
        for k in value:
            _flatten(f"{prefix}.{k}" if prefix else str(k), value[k], rows)
    elif isinstance(value, list) and value and isinstance(value[0], dict):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, rows)
    elif isinstance(value, list) and len(value) == 2 and all(
            isinstance(v, float) for v in value):
        rows.append((prefix, _sig6(value)))
    elif isinstance(value, list):
        rows.append((prefix, "[" + ", ".join(_sig6(v) for v in value) + "]"))
    else:
        rows.append((prefix, _sig6(value)))


def emit_report(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_jsonify(report), sort_keys=True, indent=2)
    rows: list[tuple[str, str]] = []
    _flatten("", _jsonify(report), rows)
    width = max((len(k) for k, _ in rows), default=0)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _input_record(ref: str, text: str) -> dict:
    return {"ref": ref, "sha256": _digest(text)}


def _load_source(ref: str) -> tuple[str, str]:
    """Resolve a path or corpus:NAME reference to (label, raw text)."""
    if ref.startswith("corpus:"):
        name = ref.split(":", 1)[1]
        return ref, corpus.text(name)
    p = Path(ref)
    if not p.exists():
        raise InputFormatError(f"no such file: {ref}")
    return ref, p.read_text()


def _load_system(ref: str):
    label, text = _load_source(ref)
    sysd = fileio.load_system(json.loads(text))
    report = validate_system(sysd)
    if not report.valid:
        raise InputFormatError(f"{label}: invalid system: {report}")
    return sysd, _input_record(label, text)


def _load_dual(ref: str):
    label, text = _load_source(ref)
    df = fileio.load_dual(json.loads(text))
    return df, _input_record(label, text)


def _parse_window(text: str) -> range:
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return range(int(lo), int(hi) + 1)
        return range(0, int(text) + 1)
    except ValueError as exc:
        raise InputFormatError(f"malformed window {text!r}; use like 0..32") from exc


def _classification_dict(c) -> dict:
    return {
        "ergodic": c.ergodic,
        "weakly_mixing": c.weakly_mixing,
        "discrete_spectrum": c.discrete_spectrum,
        "compact": c.compact,
        "fixed_algebra_dimension": c.fixed_algebra_dimension,
        "h0_dimension": c.h0_dimension,
        "notes": list(c.notes),
    }


# ---------------------------------------------------------------------------
# command handlers; each returns (results dict, warnings list, status str)


def _cmd_classify(args):
    sysd, rec = _load_system(args.system)
    cls = classify_finite(sysd)
    spec = point_spectrum(sysd)
    results = {
        "classification": _classification_dict(cls),
        "point_spectrum": [
            {"eigenvalue": list(e.eigenvalue), "multiplicity": e.multiplicity}
            for e in spec
        ],
    }
    if args.net:
        results["epsilon_net_sizes"] = compactness_net(sysd, eps=0.1)
    return {"system": rec}, results, [], "ok"


def _parse_vector(text: str, space):
    if text == "omega":
        return space.cyclic_vector
    try:
        return np.eye(space.dimension)[:, int(text)]
    except ValueError:
        pass
    data = json.loads(text)
    vec = np.array([fileio._entry_from_json(x) for x in data])
    if vec.size != space.dimension:
        raise InputFormatError(
            f"vector has {vec.size} coordinates, expected {space.dimension}")
    return vec


def _cmd_average(args):
    sysd, rec = _load_system(args.system)
    space, _ = gns_construct(sysd)
    x = _parse_vector(args.x, space)
    y = _parse_vector(args.y, space)
    res = cesaro_correlation(sysd, x, y, args.N)
    warnings = []
    if not res.ergodic:
        warnings.append("system is not ergodic; the limit need not be rank one")
    results = {
        "value": complex(res.value),
        "deviation": res.deviation,
        "remainder_bound": res.bound,
        "N": args.N,
    }
    return {"system": rec}, results, warnings, "ok"


def _solver_kwargs(args):
    max_iter = args.max_iter
    if max_iter is None:
        max_iter = int(os.environ.get("NCJOIN_MAX_ITER", DEFAULT_MAX_ITER))
    return {"tol": args.tol, "max_iter": max_iter}


def _parse_objective_file(ctx, ref: str):
    label, text = _load_source(ref)
    try:
        terms = json.loads(text)["terms"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputFormatError(f"{label}: objective file needs a 'terms' list") from exc
    elem = ctx.structure.zero()
    for t in terms:
        try:
            coef = complex(*t.get("coef", [1.0, 0.0]))
            elem = elem + coef * ctx.basis_pair(int(t["i"]), int(t["j"]))
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise InputFormatError(f"{label}: malformed objective term {t!r}") from exc
    return elem


def _cmd_joinings_find(args):
    A, rec_a = _load_system(args.a)
    B, rec_b = _load_system(args.b)
    ctx = build_tensor_context(A, B)
    objective = None
    if args.objective_file is not None:
        objective = _parse_objective_file(ctx, args.objective_file)
    elif args.objective is not None:
        try:
            i, j = (int(t) for t in args.objective.split(","))
        except ValueError as exc:
            raise InputFormatError(
                f"objective must be 'i,j' basis indices, got {args.objective!r}") from exc
        objective = (i, j)
    kw = _solver_kwargs(args)
    jm, rep = find_joining(ctx, objective=objective, width=args.width, **kw)
    status = "inconclusive" if rep.inconclusive else "ok"
    results = {
        "label": jm.label,
        "achieved": rep.achieved,
        "lower": rep.lower,
        "upper": rep.upper,
        "iterations": rep.iterations,
        "oracle_calls": rep.oracle_calls,
        "residuals": jm.residuals,
        "inconclusive": rep.inconclusive,
        "message": rep.message,
    }
    return {"a": rec_a, "b": rec_b}, results, [], status


def _cmd_joinings_disjoint(args):
    A, rec_a = _load_system(args.a)
    B, rec_b = _load_system(args.b)
    ctx = build_tensor_context(A, B)
    kw = _solver_kwargs(args)
    cert = disjointness_test(ctx, width=args.width, **kw)
    results = {
        "verdict": cert.verdict,
        "gap_threshold": cert.gap_threshold,
        "directions_scanned": cert.directions_scanned,
    }
    if cert.verdict == "not_disjoint":
        i, j, wgt = cert.witness_direction
        results["witness"] = {
            "direction": [i, j],
            "weight": complex(wgt),
            "gap": cert.witness_gap,
            "residuals": cert.witness.residuals,
        }
    if cert.verdict == "disjoint":
        results["max_gap_bound"] = cert.max_gap_bound
    status = "inconclusive" if cert.verdict == "inconclusive" else "ok"
    return {"a": rec_a, "b": rec_b}, results, [], status


def _cmd_joinings_diagonal(args):
    sysd, rec = _load_system(args.system)
    jm = diagonal_state(sysd) if args.graph_n is None else graph_joining(sysd, args.graph_n)
    results = {
        "label": jm.label,
        "residuals": jm.residuals,
        "values": jm.values,
    }
    return {"system": rec}, results, [], "ok"


def _cmd_ornstein(args):
    sysd, rec = _load_system(args.system)
    window = _parse_window(args.window)
    jm = diagonal_state(sysd)
    ctx = jm.ctx
    if args.elements:
        pairs = []
        for chunk in args.elements.split(";"):
            i, j = (int(t) for t in chunk.split(","))
            pairs.append((i, j))
    else:
        pairs = [(i, i) for i in range(ctx.dim_a)]
    elements = [ctx.basis_pair(i, j) for i, j in pairs]
    labels = [f"e{i}xf{j}" for i, j in pairs]
    scan = ornstein_ratio_scan(sysd, elements, window, labels=labels)
    results = {
        "period": scan.period,
        "sup_ratio": scan.sup_ratio,
        "skipped": scan.skipped,
        "elements": [
            {"label": r.element_label,
             "denominator": r.denominator,
             "ratios": [[row.n, row.ratio] for row in r.rows],
             "sup": r.sup_ratio}
            for r in scan.reports
        ],
    }
    warnings = []
    if scan.period is None:
        warnings.append("no exact recurrence within the window")
    return {"system": rec}, results, warnings, "ok"


def _cmd_cesaro_diagonal(args):
    sysd, rec = _load_system(args.system)
    res = cesaro_diagonal_average(sysd, args.N)
    warnings = []
    if not res.ergodic:
        warnings.append("system is not ergodic; the average need not approach the product")
    results = {"deviation": res.deviation, "N": args.N}
    return {"system": rec}, results, warnings, "ok"


def _dual_coherence(sysd: DualSystem, samples: int, seed: int) -> dict:
    """Sampled cross-checks between orbits, classification and correlations."""
    rng = random.Random(seed)
    cls = classify_dual(sysd)
    finite_seen = infinite_seen = 0
    violations = 0
    for _ in range(samples):
        g = sample_element(sysd, rng)
        cert = sysd.orbit_length(g)
        if cert.kind == "finite":
            finite_seen += 1
            if sysd.apply_T(g, cert.period) != g:
                violations += 1
            if cls.ergodic and not sysd.is_identity(g):
                violations += 1
        else:
            infinite_seen += 1
            if cls.compact:
                violations += 1
    return {
        "samples": samples,
        "seed": seed,
        "finite_orbits": finite_seen,
        "infinite_orbits": infinite_seen,
        "violations": violations,
    }


def _cmd_dual_classify(args):
    df, rec = _load_dual(args.group)
    cls = classify_dual(df.system)
    results = {
        "ergodic": cls.ergodic,
        "weakly_mixing": cls.weakly_mixing,
        "strongly_mixing": cls.strongly_mixing,
        "compact": cls.compact,
        "gamma_finite": cls.gamma_finite,
        "gamma_order": cls.gamma_order,
        "notes": list(cls.notes),
    }
    if args.samples:
        results["coherence"] = _dual_coherence(df.system, args.samples, args.seed)
    return {"group": rec}, results, [], "ok"


def _cmd_dual_orbit(args):
    df, rec = _load_dual(args.group)
    g = df.system.parse(df.resolve_text(args.word))
    cert = df.system.orbit_length(g)
    results = {
        "element": df.system.format(g),
        "orbit": cert.kind,
    }
    if cert.kind == "finite":
        results["period"] = cert.period
    else:
        results["escaping_letter"] = f"{cert.escaping[0]}{cert.escaping[1]}"
    return {"group": rec}, results, [], "ok"


def _cmd_dual_correlations(args):
    df, rec = _load_dual(args.group)
    sysd = df.system
    a = parse_combination(sysd, df.resolve_text(args.a))
    b = parse_combination(sysd, df.resolve_text(args.b))
    window = _parse_window(args.n)
    series = correlation_series(sysd, a, b, window)
    results = {
        "n": list(series.ns),
        "centered": [str(v) for v in series.centered],
        "raw": [str(v) for v in series.raw],
        "cauchy_schwarz_ok": series.bound_satisfied(),
    }
    return {"group": rec}, results, [], "ok"


def _default_pair_element(sysd: DualSystem):
    """Two diagonal terms λ(g) ⊗ ρ(g) over small sample elements."""
    from .dual import QQi, FinPerm

    spec = sysd.spec
    track = spec.tracks[0]
    if sysd.family == "free":
        g1 = (((track.id, 0), 1),)
        g2 = (((track.id, 1 % (track.m or 10**9)), 1),)
        if g1 == g2:
            return {(g1, g1): QQi(Fraction(1))}
        return {(g1, g1): QQi(Fraction(1)), (g2, g2): QQi(Fraction(1))}
    letters = []
    for t in spec.tracks:
        rng = range(t.m) if t.kind == "cycle" else range(3)
        letters.extend((t.id, i) for i in rng)
    if len(letters) < 2:
        raise InputFormatError("group too small for a default test element")
    p1 = FinPerm.from_cycles([letters[:2]])
    p2 = FinPerm.from_cycles([letters[1:3]]) if len(letters) >= 3 else p1
    out = {(p1, p1): QQi(Fraction(1))}
    out[(p2, p2)] = out.get((p2, p2), QQi()) + QQi(Fraction(1))
    return out


def _cmd_dual_ornstein(args):
    df, rec = _load_dual(args.group)
    sysd = df.system
    window = _parse_window(args.window)
    if args.elements:
        cs = [parse_pair_combination(sysd, df.resolve_text(args.elements))]
        labels = ["user element"]
    else:
        cs = [_default_pair_element(sysd)]
        labels = ["default element"]
    scan = ornstein_scan_dual(sysd, cs, window, labels=labels)
    results = {
        "strongly_mixing": scan.strongly_mixing,
        "max_limsup": scan.max_limsup,
        "skipped": scan.skipped,
        "elements": [
            {"label": r.label,
             "denominator": r.denominator,
             "escape_bound": r.escape_bound,
             "eventual_ratio": r.eventual_ratio,
             "limsup_window": r.limsup_window,
             "ratios": [[n, v] for n, v in r.ratios]}
            for r in scan.reports
        ],
    }
    return {"group": rec}, results, [], "ok"


_EXPERIMENT_CANDIDATES = ("dual_cycle2",)


def _cmd_dual_joining(args):
    df, rec = _load_dual(args.group)
    sysd = df.system
    oj = opposite_group_joining(sysd)
    sub = oj.subsystem
    results = {
        "trivial": oj.trivial,
        "finite_orbit_subsystem": sub.description,
    }
    if oj.witness is not None:
        g, h = oj.witness
        results["witness"] = {
            "g": sysd.format(g),
            "h": sysd.format(h),
            "joining_value": oj.evaluate(g, h),
            "product_value": oj.product_value(g, h),
        }
    warnings = []
    if args.experiment:
        if not classify_dual(sysd).ergodic:
            raise InputFormatError("--experiment expects an ergodic dual system")
        findings = []
        for name in _EXPERIMENT_CANDIDATES:
            cand = corpus.dual(name).system
            findings.append({
                "candidate": name,
                "candidate_compact": classify_dual(cand).compact,
                "diagonal_construction_joining": "trivial (no shared finite orbits)",
            })
        results["experiment"] = {
            "method": "opposite-group diagonal construction against compact candidates",
            "findings": findings,
            "conclusion": None,
        }
        warnings.append(
            "experiment draws no conclusion; absence of a witness in this family proves nothing")
    return {"group": rec}, results, warnings, "ok"


def _cmd_corpus(args):
    if args.action == "list":
        results = {"finite_systems": list(corpus.FINITE_SYSTEMS),
                   "dual_systems": list(corpus.DUAL_SYSTEMS)}
    elif args.action == "show":
        if not args.name:
            raise InputFormatError("corpus show needs a name")
        results = {"name": args.name, "content": json.loads(corpus.text(args.name))}
    elif args.action == "export":
        if not args.name:
            raise InputFormatError("corpus export needs a target directory")
        results = {"written": corpus.export(args.name)}
    else:
        raise InputFormatError(f"unknown corpus action {args.action!r}")
    return {}, results, [], "ok"


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ncjoin",
        description="Mixing classification and joinings of finite-dimensional "
                    "dynamical systems, plus exact dual-system combinatorics.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("json", "table"), default="table")
        p.add_argument("--tol", type=float, default=1e-9)
        p.add_argument("--max-iter", type=int, default=None)
        p.add_argument("--width", type=float, default=1e-6,
                       help="bisection width for level optimization")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("classify", help="classification and point spectrum")
    p.add_argument("--system", required=True)
    p.add_argument("--net", action="store_true",
                   help="also compute epsilon-net sizes for the orbit closures")
    common(p)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("average", help="Cesaro average of a GNS correlation")
    p.add_argument("--system", required=True)
    p.add_argument("--x", required=True, help="basis index, 'omega', or JSON coefficients")
    p.add_argument("--y", required=True)
    p.add_argument("--N", type=int, required=True)
    common(p)
    p.set_defaults(func=_cmd_average)

    p = sub.add_parser("cesaro-diagonal", help="averaged diagonal state vs the product")
    p.add_argument("--system", required=True)
    p.add_argument("--N", type=int, required=True)
    common(p)
    p.set_defaults(func=_cmd_cesaro_diagonal)

    pj = sub.add_parser("joinings", help="joining solver commands")
    jsub = pj.add_subparsers(dest="subcommand", required=True)

    p = jsub.add_parser("find", help="feasible joining, optionally maximizing a direction")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--objective", default=None, help="basis direction as 'i,j'")
    p.add_argument("--objective-file", default=None,
                   help="JSON file {'terms': [{'i':0,'j':0,'coef':[re,im]}, ...]}")
    common(p)
    p.set_defaults(func=_cmd_joinings_find)

    p = jsub.add_parser("disjoint", help="disjointness certificate")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    common(p)
    p.set_defaults(func=_cmd_joinings_disjoint)

    p = jsub.add_parser("diagonal", help="diagonal state or its graph shift")
    p.add_argument("--system", required=True)
    p.add_argument("--graph-n", type=int, default=None)
    common(p)
    p.set_defaults(func=_cmd_joinings_diagonal)

    p = sub.add_parser("ornstein", help="ratio scan of the shifted diagonal state")
    p.add_argument("--system", required=True)
    p.add_argument("--window", required=True, help="like 0..32")
    p.add_argument("--elements", default=None, help="basis pairs 'i,j;i,j'")
    common(p)
    p.set_defaults(func=_cmd_ornstein)

    pd = sub.add_parser("dual", help="exact dual-system commands")
    dsub = pd.add_subparsers(dest="subcommand", required=True)

    p = dsub.add_parser("classify", help="exact orbit classification")
    p.add_argument("--group", required=True)
    p.add_argument("--samples", type=int, default=0,
                   help="sampled coherence checks between orbits and flags")
    common(p)
    p.set_defaults(func=_cmd_dual_classify)

    p = dsub.add_parser("orbit", help="orbit certificate of one element")
    p.add_argument("--group", required=True)
    p.add_argument("--word", required=True)
    common(p)
    p.set_defaults(func=_cmd_dual_orbit)

    p = dsub.add_parser("correlations", help="exact centered correlation series")
    p.add_argument("--group", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--n", required=True, help="window like 0..64")
    common(p)
    p.set_defaults(func=_cmd_dual_correlations)

    p = dsub.add_parser("ornstein", help="exact ratio scan with escape bounds")
    p.add_argument("--group", required=True)
    p.add_argument("--window", required=True)
    p.add_argument("--elements", default=None,
                   help="pair combination like '1 * x0 | x0; x1 | x1'")
    common(p)
    p.set_defaults(func=_cmd_dual_ornstein)

    p = dsub.add_parser("joining", help="finite-orbit joining with the opposite group")
    p.add_argument("--group", required=True)
    p.add_argument("--experiment", action="store_true",
                   help="scan compact candidates for an ergodic input; draws no conclusion")
    common(p)
    p.set_defaults(func=_cmd_dual_joining)

    p = sub.add_parser("corpus", help="bundled example corpus")
    p.add_argument("action", choices=("list", "show", "export"))
    p.add_argument("name", nargs="?", default=None,
                   help="corpus entry for 'show', directory for 'export'")
    common(p)
    p.set_defaults(func=_cmd_corpus)

    return ap


def run(argv=None) -> tuple[dict, int]:
    """Execute one command; returns (report, exit code)."""
    ap = build_parser()
    args = ap.parse_args(argv)
    command = args.command + ("." + args.subcommand if hasattr(args, "subcommand") else "")
    try:
        inputs, results, warnings, status = args.func(args)
    except (InputFormatError, StructureError, InvalidSystemError) as exc:
        report = {
            "command": command,
            "inputs": {},
            "results": {},
            "warnings": [],
            "status": "error",
            "error": str(exc),
        }
        return report, 2
    except NcjoinError as exc:
        report = {
            "command": command,
            "inputs": {},
            "results": {},
            "warnings": [],
            "status": "error",
            "error": f"internal invariant violation: {exc}",
        }
        return report, 1
    report = {
        "command": command,
        "inputs": inputs,
        "results": results,
        "warnings": warnings,
        "status": status,
    }
    code = 0 if status == "ok" else 3
    return report, code


def main(argv=None) -> int:
    report, code = run(argv)
    fmt = "table"
    argv_list = list(argv) if argv is not None else _sys.argv[1:]
    for pos, tok in enumerate(argv_list):
        if tok == "--format" and pos + 1 < len(argv_list):
            fmt = argv_list[pos + 1]
        elif tok.startswith("--format="):
            fmt = tok.split("=", 1)[1]
    out = emit_report(report, fmt)
    stream = _sys.stderr if report["status"] == "error" else _sys.stdout
    print(out, file=stream)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
