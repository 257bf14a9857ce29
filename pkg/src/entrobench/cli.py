"""Command-line driver: verdicts, traces, and CSV/SVG reports.

Every command reads one JSON input document ({"schema": "v1", ...}), writes
a report document to the output directory, and exits 0.  Validation problems
exit 2, budget overruns exit 3, an unknown command exits 64, and unreadable
JSON exits 65; each failure leaves a machine-readable error.json behind.
Reports echo their input document, order keys alphabetically, and are
byte-identical across runs with the same input.
"""

import argparse
import sys
from pathlib import Path

from . import compacta, gamma, reports, serialize
from .errors import ResourceError, ValidationError, WorkbenchError
from .interval_maps import (
    cpe_verdict,
    entropy_estimate,
    entropy_pairs_symbolic,
    lap_count,
    psi_finite,
)
from .rationals import frac, frac_str
from .serialize import check_fields
from .shadowing import (
    finite_shadowing_check,
    identity_system,
    independence_from_shadowing,
    is_pseudo_orbit,
    line_system,
    rotation_system,
    sequence_system,
    weave,
)
from .shifts import Cylinder, ie_pair_verdict, sft_entropy
from .construction import check_propositions

SCHEMA = "v1"
DEFAULT_BUDGET = 10 ** 6


def _require_schema(doc):
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise ValidationError(f'input must carry "schema": "{SCHEMA}"')


def _int_field(doc, key, lo=None, hi=None):
    v = doc.get(key)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValidationError(f"field {key!r} must be an integer")
    if lo is not None and v < lo:
        raise ValidationError(f"field {key!r} must be >= {lo}")
    if hi is not None and v > hi:
        raise ValidationError(f"field {key!r} must be <= {hi}")
    return v


def _grid_from_json(doc):
    """Build a grid system; sequence grids also return their weave kit."""
    check_fields(doc, ["kind"], optional=("intervals", "map", "n", "blocks"),
                 where="grid")
    kind = doc["kind"]
    if kind == "line":
        check_fields(doc, ["kind", "intervals", "map"], where="line grid")
        intervals = _int_field(doc, "intervals", lo=1)
        name = doc["map"]
        if name == "identity":
            return identity_system(intervals), None
        if name == "tent":
            return line_system(intervals, _tent_exact), None
        raise ValidationError(f"unknown line map {name!r}")
    if kind == "rotation":
        check_fields(doc, ["kind", "n"], where="rotation grid")
        return rotation_system(_int_field(doc, "n", lo=1)), None
    if kind == "sequence":
        check_fields(doc, ["kind", "blocks"], where="sequence grid")
        sys_, table, params = sequence_system(_int_field(doc, "blocks", lo=2))
        return sys_, (table, params)
    raise ValidationError(f"unknown grid kind {kind!r}")


def _tent_exact(x):
    if 3 * x <= 1:
        return 3 * x
    if 3 * x <= 2:
        return 2 - 3 * x
    return 3 * x - 2


def _cylinder_field(doc, key):
    v = doc.get(key)
    if not isinstance(v, str) or not v:
        raise ValidationError(f"field {key!r} must be a nonempty word")
    return Cylinder(v)


# ---------------------------------------------------------------------------
# Command handlers: doc -> (result dict, format extras)
# ---------------------------------------------------------------------------


def _cmd_cb_rank(doc, args):
    check_fields(doc, ["schema", "scheme"], where="cb-rank input")
    s = serialize.scheme_from_json(doc["scheme"])
    rank, core = compacta.cb_rank(s)
    return {"rank": rank, "core": serialize.scheme_to_json(core)}


def _cmd_gamma_rank(doc, args):
    check_fields(doc, ["schema", "scheme"], optional=("grid_n", "eps"),
                 where="gamma-rank input")
    s = serialize.scheme_from_json(doc["scheme"])
    rank, fixed = gamma.gamma_rank_symbolic(gamma.entropy_square_relation(s))
    result = {"symbolic_rank": rank, "symbolic_full": fixed.is_full()}
    if ("grid_n" in doc) != ("eps" in doc):
        raise ValidationError("grid_n and eps must be given together")
    if "grid_n" in doc:
        grid_n = _int_field(doc, "grid_n", lo=16)
        eps = frac(doc["eps"])
        E = gamma.discretize_squares(s, grid_n)
        trace = gamma.gamma_trace_finite(E, eps)
        result["finite_rank"] = len(trace) - 1
        result["finite_full"] = trace[-1].is_full()
        result["pair_counts"] = [r.pair_count() for r in trace]
        result["csv"] = reports.gamma_trace_csv(trace)
    return result


def _cmd_psi_build(doc, args):
    check_fields(doc, ["schema", "scheme", "depth"], where="psi-build input")
    s = serialize.scheme_from_json(doc["scheme"])
    depth = _int_field(doc, "depth", lo=1, hi=12)
    f = psi_finite(s, depth)
    return {"map": serialize.pl_map_to_json(f), "laps": lap_count(f)}


def _cmd_psi_entropy(doc, args):
    check_fields(doc, ["schema", "scheme", "depth", "n"], where="psi-entropy input")
    s = serialize.scheme_from_json(doc["scheme"])
    depth = _int_field(doc, "depth", lo=1, hi=12)
    n = _int_field(doc, "n", lo=1, hi=12)
    f = psi_finite(s, depth)
    rows = [
        {"n": k, "laps": lap_count(f, k), "estimate": entropy_estimate(f, k)}
        for k in range(1, n + 1)
    ]
    return {"rows": rows, "csv": reports.entropy_csv(f, n)}


def _cmd_entropy_pairs(doc, args):
    check_fields(doc, ["schema", "scheme"], where="entropy-pairs input")
    s = serialize.scheme_from_json(doc["scheme"])
    rel = entropy_pairs_symbolic(s)
    squares = [
        serialize.gap_to_json(g) for g in compacta.contiguous_intervals(rel.base, 8)
    ]
    return {
        "base": serialize.scheme_to_json(rel.base),
        "is_full_square": rel.is_full(),
        "gap_squares": squares,
    }


def _cmd_cpe_verdict(doc, args):
    check_fields(doc, ["schema", "scheme"], where="cpe-verdict input")
    s = serialize.scheme_from_json(doc["scheme"])
    v = cpe_verdict(s)
    result = {"verdict": v.verdict, "rank": v.rank}
    if v.witness is not None:
        result["witness"] = serialize.scheme_to_json(v.witness)
    return result


def _cmd_ie_verdict(doc, args):
    check_fields(doc, ["schema", "sft", "U", "V", "r", "l_max"],
                 where="ie-verdict input")
    s = serialize.sft_from_json(doc["sft"])
    v = ie_pair_verdict(s, _cylinder_field(doc, "U"), _cylinder_field(doc, "V"),
                        frac(doc["r"]), _int_field(doc, "l_max", lo=1))
    return {
        "positive": v.positive,
        "threshold": frac_str(v.threshold),
        "negative_at": v.negative_at,
    }


def _cmd_density_profile(doc, args):
    check_fields(doc, ["schema", "sft", "U", "V", "n"],
                 where="density-profile input")
    s = serialize.sft_from_json(doc["sft"])
    n = _int_field(doc, "n", lo=1, hi=12)
    rows = reports.density_profile_rows(
        s, _cylinder_field(doc, "U"), _cylinder_field(doc, "V"), n)
    return {
        "rows": [list(r) for r in rows],
        "csv": reports.density_profile_csv(
            s, _cylinder_field(doc, "U"), _cylinder_field(doc, "V"), n),
    }


def _cmd_sft_entropy(doc, args):
    check_fields(doc, ["schema", "sft"], where="sft-entropy input")
    s = serialize.sft_from_json(doc["sft"])
    return {"entropy": sft_entropy(s), "alphabet": list(s.alphabet)}


def _cmd_shadow_check(doc, args):
    check_fields(doc, ["schema", "grid", "eps", "delta", "p"],
                 optional=("budget", "seed"), where="shadow-check input")
    sys_, _ = _grid_from_json(doc["grid"])
    eps, delta = frac(doc["eps"]), frac(doc["delta"])
    p = _int_field(doc, "p", lo=2)
    budget = _int_field(doc, "budget", lo=1) if "budget" in doc else args.budget
    seed = _int_field(doc, "seed") if "seed" in doc else args.seed
    v = finite_shadowing_check(sys_, eps, delta, p, budget=budget, seed=seed)
    result = {
        "verdict": v.kind,
        "trials": v.trials,
        "csv": reports.shadowing_csv([(eps, delta, p, v.kind)]),
    }
    if v.witness is not None:
        result["witness"] = serialize.pseudo_orbit_to_json(v.witness)
    return result


def _cmd_weave(doc, args):
    check_fields(doc, ["schema", "grid", "pattern"], optional=("check_independence",),
                 where="weave input")
    sys_, kit = _grid_from_json(doc["grid"])
    if kit is None:
        raise ValidationError("weave needs a sequence grid")
    table, params = kit
    pattern = doc["pattern"]
    if not isinstance(pattern, list) or any(v not in (1, 3) for v in pattern):
        raise ValidationError("pattern must be a list of 1s and 3s")
    po = weave(table, params["n1"], params["n3"], pattern, sys_, params["delta"])
    result = {
        "pseudo_orbit": serialize.pseudo_orbit_to_json(po),
        "valid": is_pseudo_orbit(sys_, po.seq, po.delta),
        "eps": frac_str(params["eps"]),
    }
    if doc.get("check_independence"):
        rep = independence_from_shadowing(
            sys_, params["eps"], len(pattern), table, params["n1"], params["n3"],
            params["delta"], budget=args.budget, precheck="none", seed=args.seed)
        result["independence"] = {
            "positions": list(rep.positions),
            "verified": rep.verified,
        }
    return result


def _cmd_construct_check(doc, args):
    check_fields(doc, ["schema", "model"], where="construct-check input")
    model = serialize.model_from_json(doc["model"])
    checks = check_propositions(model)
    return {
        "checks": checks,
        "all_passed": all(c["passed"] for c in checks),
        "n_points": model.n_points,
    }


def _cmd_cross_validate(doc, args):
    check_fields(doc, ["schema", "scheme", "grid_n", "eps"],
                 where="cross-validate input")
    s = serialize.scheme_from_json(doc["scheme"])
    out = gamma.cross_validate(s, _int_field(doc, "grid_n", lo=16), frac(doc["eps"]))
    out["eps"] = frac_str(out["eps"])
    return out


_COMMANDS = {
    "cb-rank": _cmd_cb_rank,
    "gamma-rank": _cmd_gamma_rank,
    "psi-build": _cmd_psi_build,
    "psi-entropy": _cmd_psi_entropy,
    "entropy-pairs": _cmd_entropy_pairs,
    "cpe-verdict": _cmd_cpe_verdict,
    "ie-verdict": _cmd_ie_verdict,
    "density-profile": _cmd_density_profile,
    "sft-entropy": _cmd_sft_entropy,
    "shadow-check": _cmd_shadow_check,
    "weave": _cmd_weave,
    "construct-check": _cmd_construct_check,
    "cross-validate": _cmd_cross_validate,
}

_CSV_COMMANDS = ("gamma-rank", "psi-entropy", "density-profile", "shadow-check")
_SVG_COMMANDS = ("cb-rank", "gamma-rank", "density-profile")


def emit_plots(report, out_dir) -> list:
    """Write the SVG chart matching the report's command; returns the paths."""
    out_dir = Path(out_dir)
    command = report["command"]
    result = report["result"]
    if command == "cb-rank":
        s = serialize.scheme_from_json(report["input"]["scheme"])
        svg = reports.derivative_cascade_svg(s)
    elif command == "gamma-rank":
        if "pair_counts" not in result:
            raise ValidationError("SVG needs the finite trace: set grid_n and eps")
        svg = reports.gamma_trace_svg(result["pair_counts"])
    elif command == "density-profile":
        svg = reports.density_bars_svg(result["rows"])
    else:
        raise ValidationError(f"no chart is defined for {command!r}")
    path = out_dir / f"{command}.svg"
    path.write_text(svg)
    return [str(path)]


def _write_error(out_dir, kind, message):
    doc = {"schema": SCHEMA, "error": kind, "message": message}
    try:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / "error.json").write_text(serialize.dump_json(doc))
    except OSError:
        pass
    print(serialize.dump_json(doc), end="", file=sys.stderr)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="entrobench",
        description="Exact desk-scale workbench: verdicts, traces, reports.",
    )
    p.add_argument("command", help="one of: " + ", ".join(sorted(_COMMANDS)))
    p.add_argument("--input", required=True, help="path of the input JSON document")
    p.add_argument("--out", default=".", help="directory for report files")
    p.add_argument("--seed", type=int, default=0, help="seed for sampled paths")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                   help="work budget for enumeration-bounded checks")
    p.add_argument("--format", default="json", choices=("json", "csv", "svg"),
                   help="report format; csv/svg write an extra file")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command not in _COMMANDS:
        _write_error(args.out, "unknown-command", f"unknown command {args.command!r}")
        return 64

    try:
        text = Path(args.input).read_text()
    except OSError as exc:
        _write_error(args.out, "validation", f"cannot read input: {exc}")
        return 2
    try:
        doc = serialize.load_json(text)
    except ValidationError as exc:
        _write_error(args.out, "malformed-json", str(exc))
        return 65

    try:
        _require_schema(doc)
        result = _COMMANDS[args.command](doc, args)
        csv_text = result.pop("csv", None)
        report = {
            "schema": SCHEMA,
            "command": args.command,
            "input": doc,
            "result": result,
        }
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        report_path = out_dir / f"{args.command}.json"
        report_path.write_text(serialize.dump_json(report))
        written = [str(report_path)]
        if args.format == "csv":
            if args.command not in _CSV_COMMANDS or csv_text is None:
                raise ValidationError(f"no CSV table is defined for {args.command!r}")
            csv_path = out_dir / f"{args.command}.csv"
            csv_path.write_text(csv_text)
            written.append(str(csv_path))
        elif args.format == "svg":
            if args.command not in _SVG_COMMANDS:
                raise ValidationError(f"no chart is defined for {args.command!r}")
            written.extend(emit_plots(report, out_dir))
    except ResourceError as exc:
        _write_error(args.out, "resource", str(exc))
        return 3
    except WorkbenchError as exc:
        _write_error(args.out, "validation", str(exc))
        return 2

    print(serialize.dump_json({"report": written[0], "files": written}), end="")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
