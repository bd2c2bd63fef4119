"""File formats: JSON graphs, parameters and covariances; CSV datasets.

Floats in JSON are written with Python's shortest round-trip ``repr``, so
``parse(serialize(x)) == x`` holds bit for bit.
"""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ParseError, ValidationError
from .graph import Admg, canonical_pair, parse_edge, sort_labels
from .sem import CovMatrix, Dataset, SemParameters


def _load_json(text: str, what: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _field(doc: dict, key: str, what: str, kind=list):
    if not isinstance(doc, dict):
        raise ParseError(f"{what}: top level must be an object")
    if key not in doc:
        raise ParseError(f"{what}: missing field {key!r}")
    value = doc[key]
    if not isinstance(value, kind):
        raise ParseError(f"{what}: field {key!r} must be a {kind.__name__}")
    return value


def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError(f"{where}: expected a number, got {x!r}")
    return float(x)


# -- graphs --------------------------------------------------------------

def graph_to_dict(g: Admg) -> dict:
    return {
        "vertices": list(g.vertices),
        "directed": [list(e) for e in g.sorted_directed()],
        "bidirected": [list(e) for e in g.sorted_bidirected()],
    }


def graph_from_dict(doc: dict, what: str = "graph") -> Admg:
    verts = _field(doc, "vertices", what)
    directed = doc.get("directed", [])
    bidirected = doc.get("bidirected", [])
    for key, edges in (("directed", directed), ("bidirected", bidirected)):
        if not isinstance(edges, list):
            raise ParseError(f"{what}: field {key!r} must be a list")
        for k, e in enumerate(edges):
            if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, (str, int)) for x in e)):
                raise ParseError(f"{what}: {key}[{k}] must be a 2-element array of labels, got {e!r}")
    if not all(isinstance(v, (str, int)) for v in verts):
        raise ParseError(f"{what}: vertices must be strings")
    return Admg(
        [str(v) for v in verts],
        [(str(t), str(h)) for t, h in directed],
        [(str(u), str(v)) for u, v in bidirected],
    )


def dumps_graph(g: Admg) -> str:
    return json.dumps(graph_to_dict(g), indent=2) + "\n"


def loads_graph(text: str, what: str = "graph") -> Admg:
    return graph_from_dict(_load_json(text, what), what)


# -- parameters ----------------------------------------------------------

def params_to_dict(p: SemParameters) -> dict:
    lam = {f"{t}->{h}": p.lam[(t, h)] for t, h in p.graph.sorted_directed()}
    omega = {v: p.omega[v] for v in sort_labels(p.graph.vertices)}
    omega.update({f"{u}<->{v}": p.omega[(u, v)] for u, v in p.graph.sorted_bidirected()})
    return {"lambda": lam, "omega": omega}


def params_from_dict(doc: dict, g: Admg, what: str = "params") -> SemParameters:
    lam_doc = _field(doc, "lambda", what, dict)
    omega_doc = _field(doc, "omega", what, dict)
    lam = {}
    for key, x in lam_doc.items():
        try:
            kind, t, h = parse_edge(key)
        except ParseError as exc:
            raise ParseError(f"{what}: lambda key {key!r}: {exc}") from None
        if kind != "directed":
            raise ParseError(f"{what}: lambda key {key!r} must be a directed edge 'a->b'")
        lam[(t, h)] = _number(x, f"{what}: lambda[{key!r}]")
    omega: dict = {}
    for key, x in omega_doc.items():
        value = _number(x, f"{what}: omega[{key!r}]")
        if "<->" in key:
            kind, u, v = parse_edge(key)
            pair = canonical_pair(u, v)
            if pair in omega:
                raise ParseError(f"{what}: omega key {key!r} listed twice")
            omega[pair] = value
        elif "->" in key:
            raise ParseError(f"{what}: omega key {key!r} must be a vertex or 'u<->v'")
        else:
            omega[key.strip()] = value
    return SemParameters(g, lam, omega)


def dumps_params(p: SemParameters) -> str:
    return json.dumps(params_to_dict(p), indent=2) + "\n"


def loads_params(text: str, g: Admg, what: str = "params") -> SemParameters:
    return params_from_dict(_load_json(text, what), g, what)


# -- covariances ---------------------------------------------------------

def cov_to_dict(s: CovMatrix) -> dict:
    return {"labels": list(s.labels), "values": [[float(x) for x in row] for row in s.values]}


def cov_from_dict(doc: dict, what: str = "covariance") -> CovMatrix:
    labels = _field(doc, "labels", what)
    values = _field(doc, "values", what)
    n = len(labels)
    if len(values) != n or any(not isinstance(r, list) or len(r) != n for r in values):
        raise ParseError(f"{what}: values must be a {n}x{n} array matching labels")
    m = np.array([[_number(x, f"{what}: values[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(values)])
    try:
        return CovMatrix.from_full([str(v) for v in labels], m)
    except ValidationError as exc:
        raise ParseError(f"{what}: {exc}") from None


def dumps_cov(s: CovMatrix) -> str:
    return json.dumps(cov_to_dict(s), indent=2) + "\n"


def loads_cov(text: str, what: str = "covariance") -> CovMatrix:
    return cov_from_dict(_load_json(text, what), what)


# -- datasets ------------------------------------------------------------

def loads_dataset(text: str, what: str = "data") -> Dataset:
    reader = csv.reader(_io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(f"{what}: empty file") from None
    header = [h.strip() for h in header]
    if len(set(header)) != len(header):
        raise ParseError(f"{what}: duplicate column labels in header")
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"{what}: line {lineno} has {len(row)} fields, header has {len(header)}")
        try:
            rows.append([float(c) for c in row])
        except ValueError:
            raise ParseError(f"{what}: line {lineno}: non-numeric field") from None
    if not rows:
        raise ParseError(f"{what}: no data rows")
    return Dataset(tuple(header), np.array(rows))


def dumps_dataset(d: Dataset) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(d.labels)
    for row in d.rows:
        writer.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


# -- files ---------------------------------------------------------------

def read_text(path: str | Path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None


def write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text)


def load_graph(path) -> Admg:
    return loads_graph(read_text(path), str(path))


def load_params(path, g: Admg) -> SemParameters:
    return loads_params(read_text(path), g, str(path))


def load_cov(path) -> CovMatrix:
    return loads_cov(read_text(path), str(path))


def load_dataset(path) -> Dataset:
    return loads_dataset(read_text(path), str(path))
