"""JSON readers and writers for tables, bounds, design matrices and move sets.

Move-set files use 1-based ``[i, j, delta]`` triples; everything in memory is
0-based.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import BoundsGrid, DesignMatrix, Shape, Table
from .moves import Move, MoveSet


def table_to_json(table: Table) -> dict:
    return {"rows": table.shape.rows, "cols": table.shape.cols, "counts": list(table.counts)}


def table_from_json(obj: dict) -> Table:
    shape = Shape(int(obj["rows"]), int(obj["cols"]))
    counts = obj["counts"]
    if counts and isinstance(counts[0], list):
        counts = [x for row in counts for x in row]
    return Table(shape, tuple(counts))


def bounds_to_json(bounds: BoundsGrid) -> list:
    return list(bounds.bounds)


def bounds_from_json(obj: list, shape: Shape) -> BoundsGrid:
    if not isinstance(obj, list):
        raise ValueError("bounds must be a JSON array")
    for b in obj:
        if b is not None and (not isinstance(b, int) or isinstance(b, bool)):
            raise ValueError(f"bound {b!r} is neither null nor an integer")
    return BoundsGrid(shape, tuple(obj))


def matrix_to_json(matrix: DesignMatrix) -> dict:
    return {"s": matrix.s, "k": matrix.k, "entries": matrix.entries.tolist()}


def matrix_from_json(obj: dict) -> DesignMatrix:
    a = np.array(obj["entries"], dtype=np.int64)
    if a.ndim != 2 or a.shape != (int(obj["s"]), int(obj["k"])):
        raise ValueError("matrix entries do not match s and k")
    return DesignMatrix(a)


def moves_to_json(moves: MoveSet) -> dict:
    J = moves.shape.cols
    out = []
    for m in moves:
        out.append({"cells": [[h // J + 1, h % J + 1, m.vector[h]] for h in m.support]})
    return {"rows": moves.shape.rows, "cols": moves.shape.cols, "moves": out}


def moves_from_json(obj: dict) -> MoveSet:
    shape = Shape(int(obj["rows"]), int(obj["cols"]))
    ms = MoveSet(shape)
    for rec in obj["moves"]:
        v = [0] * shape.size
        for i, j, d in rec["cells"]:
            v[shape.index(i - 1, j - 1)] += int(d)
        ms.add(Move(shape, tuple(v)))
    return ms


def load_json(path) -> object:
    return json.loads(Path(path).read_text())


def dumps(obj) -> str:
    """Compact deterministic JSON."""
    return json.dumps(obj, separators=(",", ":"), sort_keys=False)
