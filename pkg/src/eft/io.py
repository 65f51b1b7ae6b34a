"""Text file formats: dynamic graph JSON, signal CSV, coefficient CSV, basis dumps, filter specs."""

from __future__ import annotations

import csv
import json
import os
import re
from pathlib import Path

import numpy as np

from . import filters
from .errors import DomainError, ParseError, SymmetryError
from .graph_core import DynamicGraph, LaplacianKind, WeightedGraph

PathLike = str | os.PathLike


def _fmt(x: float) -> str:
    return repr(float(x))


# ------------------------------------------------------------------- graphs


def load_json(path: PathLike):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(str(exc), path) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path, exc.lineno, exc.colno) from exc


def graph_from_dict(doc, path=None) -> DynamicGraph:
    if not isinstance(doc, dict) or "num_nodes" not in doc or "snapshots" not in doc:
        raise ParseError('expected an object with "num_nodes" and "snapshots"', path)
    n = doc["num_nodes"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError(f"num_nodes must be a positive integer, got {n!r}", path)
    snaps_in = doc["snapshots"]
    if not isinstance(snaps_in, list) or not snaps_in:
        raise ParseError("snapshots must be a non-empty list", path)
    snaps = []
    for t, edges in enumerate(snaps_in):
        if not isinstance(edges, list):
            raise ParseError(f"snapshot {t} must be a list of [u, v, w] edges", path)
        seen: dict[tuple[int, int], tuple[float, tuple]] = {}
        for e, edge in enumerate(edges):
            if (not isinstance(edge, list) or len(edge) != 3
                    or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in edge)
                    or any(not float(x).is_integer() for x in edge[:2])):
                raise ParseError(f"snapshot {t} edge {e}: expected [u, v, w], got {edge!r}", path)
            u, v, w = int(edge[0]), int(edge[1]), float(edge[2])
            if not (0 <= u < n and 0 <= v < n):
                raise ParseError(f"snapshot {t} edge {e}: node id out of range 0..{n - 1}", path)
            key = (min(u, v), max(u, v))
            if key in seen:
                w0, first = seen[key]
                if w0 != w:
                    raise SymmetryError(
                        f"{path or '<graph>'}: snapshot {t}: edge {list(first)} and edge "
                        f"{[u, v, w]} give different weights to the pair {key}"
                    )
                continue
            seen[key] = (w, (u, v, w))
        try:
            snaps.append(WeightedGraph.from_edges(n, [(u, v, w) for (u, v), (w, _) in seen.items()]))
        except DomainError as exc:
            raise ParseError(f"snapshot {t}: {exc}", path) from exc
    return DynamicGraph(n, tuple(snaps))


def graph_to_dict(dg: DynamicGraph) -> dict:
    return {
        "num_nodes": dg.num_nodes,
        "snapshots": [[[u, v, w] for u, v, w in g.edges()] for g in dg.snapshots],
    }


def parse_graph_json(path: PathLike) -> DynamicGraph:
    return graph_from_dict(load_json(path), path)


def write_graph_json(path: PathLike, dg: DynamicGraph) -> None:
    Path(path).write_text(json.dumps(graph_to_dict(dg)) + "\n")


# ------------------------------------------------------------------ signals


def _read_rows(path: PathLike):
    try:
        with open(path, newline="") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ParseError(str(exc), path) from exc
    return lines


def _parse_numbers(line: str, lineno: int, path) -> list[float]:
    out = []
    col = 1
    for cell in next(csv.reader([line])):
        try:
            out.append(float(cell))
        except ValueError:
            raise ParseError(f"not a number: {cell.strip()!r}", path, lineno, col) from None
        col += len(cell) + 1
    return out


def parse_signal_csv(path: PathLike) -> np.ndarray:
    """``N x T`` real matrix; one row per node, no header. Blank lines are skipped."""
    rows = []
    width = None
    for lineno, line in enumerate(_read_rows(path), start=1):
        if not line.strip():
            continue
        vals = _parse_numbers(line, lineno, path)
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise ParseError(f"expected {width} columns, found {len(vals)}", path, lineno, 1)
        rows.append(vals)
    if not rows:
        raise ParseError("empty signal file", path)
    X = np.array(rows)
    if not np.all(np.isfinite(X)):
        raise ParseError("signal contains non-finite values", path)
    return X


def write_signal_csv(path: PathLike, X) -> None:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DomainError(f"signal CSV holds an N x T matrix, got shape {X.shape}")
    with open(path, "w") as fh:
        for row in X:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


# ------------------------------------------------------------- coefficients

_HEADER = re.compile(r"^#\s*eft\s+N=(\d+)\s+T=(\d+)\s+kind=(\w+)\s+norm=(\w+)\s*$")


def coeffs_header(num_nodes: int, num_steps: int, kind) -> str:
    return f"# eft N={num_nodes} T={num_steps} kind={LaplacianKind.parse(kind).value} norm=unitary"


def write_coeffs_csv(path: PathLike, C, kind) -> None:
    """``N`` rows of ``2T`` columns alternating real and imaginary parts."""
    C = np.asarray(getattr(C, "values", C))
    if C.ndim != 2:
        raise DomainError(f"coefficient CSV holds an N x T matrix, got shape {C.shape}")
    N, T = C.shape
    with open(path, "w") as fh:
        fh.write(coeffs_header(N, T, kind) + "\n")
        for row in C:
            fh.write(",".join(f"{_fmt(z.real)},{_fmt(z.imag)}" for z in row) + "\n")


def read_coeffs_csv(path: PathLike) -> tuple[np.ndarray, LaplacianKind]:
    lines = _read_rows(path)
    if not lines:
        raise ParseError("empty coefficient file", path)
    m = _HEADER.match(lines[0])
    if not m:
        raise ParseError("missing '# eft N=<N> T=<T> kind=<kind> norm=unitary' header", path, 1, 1)
    N, T, kind_s, norm = int(m[1]), int(m[2]), m[3], m[4]
    if norm != "unitary":
        raise ParseError(f"unsupported normalization {norm!r}", path, 1, 1)
    try:
        kind = LaplacianKind.parse(kind_s)
    except DomainError as exc:
        raise ParseError(str(exc), path, 1, 1) from None
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        vals = _parse_numbers(line, lineno, path)
        if len(vals) != 2 * T:
            raise ParseError(f"expected {2 * T} columns, found {len(vals)}", path, lineno, 1)
        rows.append(np.array(vals[0::2]) + 1j * np.array(vals[1::2]))
    if len(rows) != N:
        raise ParseError(f"header says N={N} but found {len(rows)} rows", path)
    return np.array(rows), kind


# ------------------------------------------------------------------- bases


def write_basis_csv(path: PathLike, vectors, eigenvalues, comment: str = "") -> None:
    """Debug dump: one row per basis vector, its eigenvalue first."""
    V = np.asarray(vectors)
    w = np.asarray(eigenvalues).ravel()
    V = V.reshape(-1, V.shape[-1])
    if V.shape[0] != w.size:
        raise DomainError("one eigenvalue per basis vector is required")
    with open(path, "w") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        for lam, row in zip(w, V):
            fh.write(",".join([_fmt(lam)] + [_fmt(v) for v in np.real(row)]) + "\n")


# ----------------------------------------------------------------- filters


def _require(d: dict, key: str, where: str, path):
    if key not in d:
        raise ParseError(f'{where}: missing "{key}"', path)
    return d[key]


def filters_from_dict(doc: dict, num_steps: int, path=None) -> tuple[filters.ChebyshevFilter, filters.TemporalFilter]:
    """Build the vertex and temporal filters described by a filter spec.

    A missing section means identity (vertex) or all-pass (temporal).
    Vertex Chebyshev coefficients refer to ``lambda_max`` (default 2); the
    joint filter rescales them to each snapshot's own estimate.
    """
    if not isinstance(doc, dict):
        raise ParseError("filter spec must be a JSON object", path)
    try:
        v = doc.get("vertex", {"type": "chebyshev", "coeffs": [1.0]})
        vtype = _require(v, "type", "vertex", path)
        lmax = float(v.get("lambda_max", 2.0))
        if vtype == "chebyshev":
            vf = filters.ChebyshevFilter(np.asarray(_require(v, "coeffs", "vertex", path), float), lmax)
        elif vtype == "preset":
            preset = filters.FilterPreset(_require(v, "preset", "vertex", path), tuple(v.get("cutoffs", ())))
            vf = filters.vertex_preset_filter(preset, int(v.get("order", 16)), lmax)
        else:
            raise ParseError(f"vertex: unknown type {vtype!r}", path)

        tdoc = doc.get("temporal", {"type": "preset", "preset": "allpass"})
        ttype = _require(tdoc, "type", "temporal", path)
        if ttype == "preset":
            preset = filters.FilterPreset(_require(tdoc, "preset", "temporal", path), tuple(tdoc.get("cutoffs", ())))
            tf = filters.temporal_preset_filter(preset, num_steps)
        elif ttype == "explicit":
            re_ = np.asarray(_require(tdoc, "response_re", "temporal", path), float)
            im_ = np.asarray(tdoc.get("response_im", np.zeros_like(re_)), float)
            if re_.shape != im_.shape:
                raise ParseError("temporal: response_re and response_im differ in length", path)
            resp = re_ + 1j * im_ if np.any(im_) else re_
            tf = filters.TemporalFilter(resp)
        else:
            raise ParseError(f"temporal: unknown type {ttype!r}", path)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(str(exc), path) from exc
    return vf, tf


def parse_filter_spec(path: PathLike, num_steps: int):
    return filters_from_dict(load_json(path), num_steps, path)
