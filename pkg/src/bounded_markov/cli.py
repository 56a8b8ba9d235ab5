"""Command-line interface: ``bounded-markov`` or ``python -m bounded_markov``.

Exit codes: 0 ok, 2 usage or bad input, 3 a resource cap was hit,
4 a verification failed (mismatch with a golden value, or a disconnection
under ``--expect-connected``).

Cells on the command line are 1-based ``i,j`` pairs separated by ``;``.
Default caps can be overridden with the environment variables
``BOUNDED_MARKOV_MARGIN_CAP``, ``BOUNDED_MARKOV_SIZE_CAP`` and
``BOUNDED_MARKOV_NORM_CAP``.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import os
import sys
from typing import Optional

from . import fiber as fib
from . import io
from .core import BoundsGrid, FiberSpec, Shape, two_way_design
from .lattice import DEFAULT_NORM_CAP, CapExceeded, LiftSpec, universal_markov_basis
from .moves import (MoveSet, basic_moves, circuit_moves, count_circuits, df1_loops,
                    filter_structural_zeros, iter_circuit_vectors)
from .repro import REPRO
from .sampler import ChainConfig, DEFAULT_SEED, chi_square_uniformity, run_chains, target_by_name

EXIT_OK, EXIT_USAGE, EXIT_CAP, EXIT_FAIL = 0, 2, 3, 4


class UsageError(ValueError):
    pass


def _cap(flag: Optional[int], name: str, default: int) -> int:
    """Explicit flag, else environment variable, else library default."""
    if flag is not None:
        return flag
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{name} must be an integer, got {raw!r}") from None


def parse_cells(text: Optional[str], shape: Shape) -> list[tuple[int, int]]:
    """``"1,1;2,2"`` -> ``[(0, 0), (1, 1)]``."""
    if not text:
        return []
    out = []
    for part in text.replace(" ", "").split(";"):
        if not part:
            continue
        try:
            i, j = (int(x) for x in part.split(","))
        except ValueError:
            raise UsageError(f"bad cell {part!r}; expected i,j") from None
        if not (1 <= i <= shape.rows and 1 <= j <= shape.cols):
            raise UsageError(f"cell {part} outside {shape.rows}x{shape.cols}")
        out.append((i - 1, j - 1))
    return out


def parse_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _hist(h: dict) -> dict:
    return {str(k): v for k, v in sorted(h.items())}


def _shape(args) -> Shape:
    if args.rows is None or args.cols is None:
        raise UsageError("--rows and --cols are required")
    return Shape(args.rows, args.cols)


def _emit(obj, args, out):
    out.write(io.dumps(obj) + "\n")


def _emit_rows(rows: list[dict], args, out):
    """Tabular report: JSON lines or CSV."""
    if getattr(args, "format", "json") == "csv":
        if not rows:
            return
        fields = list(dict.fromkeys(k for r in rows for k in r))
        buf = _io.StringIO()
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: v if isinstance(v, (int, float, str)) or v is None else io.dumps(v)
                        for k, v in r.items()})
        out.write(buf.getvalue())
    else:
        for r in rows:
            out.write(io.dumps(r) + "\n")


# ---------------------------------------------------------------------------
# moves


def _bounded_cells(spec: Optional[str], shape: Shape) -> frozenset[int]:
    if spec is None or spec == "all":
        return frozenset(range(shape.size))
    if spec == "none":
        return frozenset()
    if spec.startswith("file:"):
        bounds = io.bounds_from_json(io.load_json(spec[5:]), shape)
        return bounds.bounded_cells
    return shape.flat(parse_cells(spec, shape))


def build_moves(kind: str, shape: Shape, zeros=(), bounded: Optional[str] = None,
                norm_cap: int = DEFAULT_NORM_CAP, degree: Optional[int] = None) -> MoveSet:
    """The library call behind ``moves <kind>``."""
    if kind == "basic":
        return filter_structural_zeros(basic_moves(shape), zeros)
    if kind == "circuits":
        return filter_structural_zeros(circuit_moves(shape), zeros)
    if kind == "loops":
        allowed = BoundsGrid.with_zeros(shape, zeros).caps(1).reshape(shape.rows, shape.cols) > 0
        vecs = iter_circuit_vectors(shape, allowed)
        if degree is not None:
            vecs = (v for v in vecs if sum(x > 0 for x in v) == degree)
        return MoveSet(shape, vecs).sorted()
    if kind == "df1":
        return df1_loops(shape, zeros)
    if kind == "universal":
        z = shape.flat(zeros)
        spec = LiftSpec(two_way_design(shape), _bounded_cells(bounded, shape) | z, z, shape)
        return universal_markov_basis(spec, norm_cap)
    raise UsageError(f"unknown move kind {kind!r}")


def cmd_moves(args, out) -> int:
    shape = _shape(args)
    zeros = parse_cells(args.zeros, shape)
    if args.kind == "circuits" and args.count_only and not zeros:
        h = count_circuits(shape)
        _emit({"total": sum(h.values()), "by_support": _hist(h)}, args, out)
        return EXIT_OK
    ms = build_moves(args.kind, shape, zeros, args.bounded_cells,
                     _cap(args.norm_cap, "BOUNDED_MARKOV_NORM_CAP", DEFAULT_NORM_CAP),
                     args.degree)
    if args.count_only:
        _emit({"total": len(ms), "by_support": _hist(ms.by_support())}, args, out)
    else:
        _emit(io.moves_to_json(ms), args, out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# fiber


def _fiber_spec(args) -> FiberSpec:
    if args.table:
        table = io.table_from_json(io.load_json(args.table))
        shape = table.shape
    elif args.row_sums and args.col_sums:
        table = None
        shape = Shape(len(parse_ints(args.row_sums)), len(parse_ints(args.col_sums)))
    else:
        raise UsageError("give --table or both --row-sums and --col-sums")
    if args.bounds:
        bounds = io.bounds_from_json(io.load_json(args.bounds), shape)
    else:
        bounds = BoundsGrid.with_zeros(shape, parse_cells(args.zeros, shape), base=args.bound)
    if args.zeros and args.bounds:
        raise UsageError("--zeros and --bounds are exclusive")
    if table is not None:
        return FiberSpec.from_table(table, bounds=bounds)
    return FiberSpec.two_way(parse_ints(args.row_sums), parse_ints(args.col_sums), bounds)


def _load_moves(name: str, shape: Shape, zeros=()) -> MoveSet:
    if name.startswith("file:"):
        ms = io.moves_from_json(io.load_json(name[5:]))
        if ms.shape != shape:
            raise UsageError("move file shape does not match the table")
        return ms
    if name == "universal":
        return build_moves("universal", shape, zeros, "all")
    return build_moves(name, shape, zeros)


def cmd_fiber(args, out) -> int:
    size_cap = _cap(args.size_cap, "BOUNDED_MARKOV_SIZE_CAP", fib.DEFAULT_SIZE_CAP)
    margin_cap = _cap(args.cap, "BOUNDED_MARKOV_MARGIN_CAP", fib.DEFAULT_MARGIN_CAP)

    if args.action in ("enum", "connect"):
        spec = _fiber_spec(args)
        f = fib.enumerate_fiber(spec, size_cap)
        if args.action == "enum":
            _emit({"count": len(f), "tables": [io.table_to_json(t) for t in f]}, args, out)
            return EXIT_OK
        moves = _load_moves(args.moves, spec.shape, spec.bounds.zeros)
        rep = fib.connectivity(f, moves)
        res = {"tables": len(f), "components": rep.component_count,
               "sizes": [len(c) for c in rep.components]}
        if rep.witness:
            res["witness"] = [io.table_to_json(t) for t in rep.witness]
        _emit(res, args, out)
        return EXIT_FAIL if args.expect_connected and rep.component_count > 1 else EXIT_OK

    shape = _shape(args)
    if args.action == "verify":
        zeros = parse_cells(args.zeros, shape)
        if args.theorem_main:
            values = parse_ints(args.bound_values or "1,2,3")
            if any(b < 1 for b in values):
                raise UsageError("--theorem-main needs positive bounds")
            positive = True
        else:
            values = parse_ints(args.bound_values) if args.bound_values else (None,)
            positive = args.positive
        family = [BoundsGrid.with_zeros(shape, zeros, base=b) for b in values]
        moves = _load_moves(args.moves, shape, zeros)
        v = fib.verify_subbasis(two_way_design(shape), moves, family, margin_cap, positive,
                                size_cap)
        res = {"status": v.status, "fibers_checked": v.fibers_checked,
               "empty_fibers": v.empty_fibers, "largest_fiber": v.largest_fiber,
               "inconclusive": len(v.inconclusive), "cap": margin_cap}
        if v.witness:
            res["witness"] = _witness_json(v.witness)
        _emit(res, args, out)
        if v.status == fib.DISCONNECTED and args.expect_connected:
            return EXIT_FAIL
        return EXIT_CAP if v.status == fib.INCONCLUSIVE else EXIT_OK

    if args.action == "search":
        values = parse_ints(args.bound_values) if args.bound_values else (None,)
        verdicts = fib.pattern_search(shape, args.max_zeros, margin_cap,
                                      min_zero_cells=args.min_zeros, cell_bounds=values,
                                      size_cap=size_cap, threads=_threads(args))
        rows = []
        for p in verdicts:
            r = {"zeros": [[i + 1, j + 1] for i, j in p.cells(shape)], "n_zeros": len(p.zeros),
                 "status": p.status, "fibers_checked": p.fibers_checked,
                 "empty_fibers": p.empty_fibers, "full_zero_line": p.full_zero_line}
            if p.witness:
                r["witness"] = _witness_json(p.witness)
            rows.append(r)
        _emit_rows(rows, args, out)
        return EXIT_OK
    raise UsageError(f"unknown fiber action {args.action!r}")


def _witness_json(w: dict) -> dict:
    spec = w["spec"]
    return {"margins": list(spec.target), "bounds": list(spec.bounds.bounds),
            "tables": [io.table_to_json(t) for t in w["tables"]], "components": w["components"]}


def _threads(args) -> int:
    return args.threads if args.threads else (os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# sample


def cmd_sample(args, out) -> int:
    table = io.table_from_json(io.load_json(args.table))
    shape = table.shape
    bounds = (io.bounds_from_json(io.load_json(args.bounds), shape) if args.bounds
              else BoundsGrid.unbounded(shape))
    if args.model == "two-way":
        matrix = two_way_design(shape)
    elif args.model.startswith("file:"):
        matrix = io.matrix_from_json(io.load_json(args.model[5:]))
    else:
        raise UsageError("--model is two-way or file:A.json")
    spec = FiberSpec.from_table(table, matrix, bounds)
    if args.moves.startswith("file:"):
        moves = _load_moves(args.moves, shape)
    elif args.moves == "universal":
        moves = universal_markov_basis(LiftSpec.from_bounds(matrix, bounds))
    elif args.model == "two-way":
        moves = _load_moves(args.moves, shape, bounds.zeros)
    else:
        raise UsageError("with a matrix model use --moves universal or file:m.json")
    config = ChainConfig(args.seed, args.steps, args.burn_in, args.thin)
    target = target_by_name(args.target)
    chains = run_chains(spec, table, moves, target, config, args.chains, _threads(args),
                        check=args.check)
    samples = [s for c in chains for s in c.samples]
    res = {"seed": args.seed, "steps": args.steps, "burn_in": args.burn_in, "thin": args.thin,
           "chains": args.chains, "target": target.name, "moves": len(moves),
           "acceptance_rate": [c.acceptance_rate for c in chains],
           "visited_in_fiber": all(c.visited_in_fiber for c in chains),
           "n_samples": len(samples)}
    try:
        f = fib.enumerate_fiber(spec, _cap(args.size_cap, "BOUNDED_MARKOV_SIZE_CAP",
                                             fib.DEFAULT_SIZE_CAP))
        chi = chi_square_uniformity(samples, f, target)
        res["chi_square"] = {"statistic": chi.statistic, "p_value": chi.p_value,
                             "dof": chi.dof, "fiber_size": len(f)}
    except CapExceeded:
        res["chi_square"] = None
    if args.emit_samples:
        res["samples"] = [io.table_to_json(t) for t in samples]
    _emit(res, args, out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# repro


def cmd_repro(args, out) -> int:
    names = list(REPRO) if args.name == "all" else [args.name]
    rows = []
    ok = True
    for name in names:
        rep = REPRO[name](slow=args.slow) if name == "exind" else REPRO[name]()
        ok &= rep.ok
        for c in rep.checks:
            rows.append({"repro": name, "check": c.name, "status": c.status,
                         "expected": _jsonable(c.expected), "got": _jsonable(c.got),
                         "seconds": round(c.seconds, 3), "note": c.note})
    _emit_rows(rows, args, out)
    return EXIT_OK if ok else EXIT_FAIL


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, tuple):
        return [_jsonable(v) for v in x]
    return x


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bounded-markov",
                                description="Markov moves for bounded and incomplete tables.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="worker threads (default: available cores); output does not depend on it")
    common.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS,
                        help="tabular reports (search, repro) as JSON lines or CSV")
    p.add_argument("--threads", type=int, default=None, help=argparse.SUPPRESS)
    p.add_argument("--format", choices=("json", "csv"), default="json", help=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    def shape_args(sp):
        sp.add_argument("--rows", type=int)
        sp.add_argument("--cols", type=int)
        sp.add_argument("--zeros", help="structural zeros, e.g. '1,1;2,2'")

    m = sub.add_parser("moves", parents=[common], help="generate a move set")
    m.add_argument("kind", choices=("basic", "circuits", "loops", "df1", "universal"))
    shape_args(m)
    m.add_argument("--bounded-cells", default=None,
                   help="universal only: all | none | 'i,j;...' | file:bounds.json")
    m.add_argument("--degree", type=int, help="loops only: restrict to this degree")
    m.add_argument("--norm-cap", type=int, default=None)
    m.add_argument("--count-only", action="store_true")
    m.set_defaults(func=cmd_moves)

    f = sub.add_parser("fiber", parents=[common], help="enumerate fibers and check connectivity")
    f.add_argument("action", choices=("enum", "connect", "verify", "search"))
    shape_args(f)
    f.add_argument("--table", help="table JSON (fiber of its margins)")
    f.add_argument("--row-sums")
    f.add_argument("--col-sums")
    f.add_argument("--bounds", help="bounds JSON")
    f.add_argument("--bound", type=int, default=None, help="uniform bound for non-zero cells")
    f.add_argument("--bound-values", help="verify/search: comma list of uniform bounds")
    f.add_argument("--moves", default="basic",
                   help="basic | circuits | df1 | universal | file:moves.json")
    f.add_argument("--cap", type=int, default=None, help="margin total cap")
    f.add_argument("--size-cap", type=int, default=None)
    f.add_argument("--positive", action="store_true", help="only positive row/column sums")
    f.add_argument("--theorem-main", action="store_true",
                   help="verify: basic moves, positive uniform bounds, positive margins")
    f.add_argument("--expect-connected", action="store_true")
    f.add_argument("--max-zeros", type=int, default=3)
    f.add_argument("--min-zeros", type=int, default=1)
    f.set_defaults(func=cmd_fiber)

    s = sub.add_parser("sample", parents=[common], help="run the Metropolis sampler")
    s.add_argument("--table", required=True)
    s.add_argument("--bounds")
    s.add_argument("--model", default="two-way")
    s.add_argument("--moves", default="basic")
    s.add_argument("--target", choices=("uniform", "hypergeometric"), default="uniform")
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--steps", type=int, default=10_000)
    s.add_argument("--burn-in", type=int, default=1000)
    s.add_argument("--thin", type=int, default=10)
    s.add_argument("--chains", type=int, default=1)
    s.add_argument("--size-cap", type=int, default=None)
    s.add_argument("--check", action="store_true", help="re-verify every accepted state")
    s.add_argument("--emit-samples", action="store_true")
    s.set_defaults(func=cmd_sample)

    r = sub.add_parser("repro", parents=[common],
                       help="recompute reference figures and diff against goldens")
    r.add_argument("name", choices=tuple(REPRO) + ("all",))
    r.add_argument("--slow", action="store_true", help="include the 7x7 circuit count")
    r.set_defaults(func=cmd_repro)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (UsageError, ValueError, KeyError, IndexError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
