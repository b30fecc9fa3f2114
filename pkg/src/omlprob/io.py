"""Reading, writing, and resolving the package's file formats.

JSON documents describe lattices (explicit order tables or horizontal
sums), s-maps, and observables; CSV files carry two-step experiment counts
and time series. Parsing converts every rational field to an exact
Fraction, so parse -> serialize -> parse is the identity on documents and
serialized JSON is byte-stable for equal inputs.
"""

from __future__ import annotations

import csv
import io as _io
import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

from .causality import ExperimentCounts, experiment_counts
from .errors import OmlprobError
from .lattice import FiniteOml, MalformedInput, horizontal_sum_from_atoms, validate_oml
from .observables import Observable, validate_observable
from .rationals import as_rational, format_rational
from .states import SMap, extend_smap_from_atom_table, validate_smap

SCHEMA_VERSIONS = ("1",)


class ParseError(OmlprobError):
    pass


class UnknownKind(OmlprobError):
    pass


class SchemaVersionUnsupported(OmlprobError):
    pass


@dataclass(frozen=True)
class WorkspaceDocument:
    """One parsed input file: its kind, normalized payload, and origin."""

    kind: str  # lattice | smap | observable | experiment | timeseries
    payload: dict
    schema_version: str = "1"
    path: Optional[Path] = field(default=None, compare=False)


def fixtures_dir() -> Path:
    """Bundled fixtures, unless OMLPROB_FIXTURES points elsewhere."""
    override = os.environ.get("OMLPROB_FIXTURES")
    if override:
        return Path(override)
    return Path(__file__).parent / "fixtures"


def resolve_input(ref: Union[str, Path]) -> Path:
    """A path as given, or the bundled fixture of that name."""
    p = Path(ref)
    if p.exists():
        return p
    if str(p.parent) in (".", ""):
        fallback = fixtures_dir() / p.name
        if fallback.exists():
            return fallback
        raise ParseError(f"cannot read {str(ref)!r}: no such file "
                         f"(also tried {fallback})", witness=str(ref))
    raise ParseError(f"cannot read {str(ref)!r}: no such file", witness=str(ref))


def parse(source) -> WorkspaceDocument:
    """Parse a path, filename-in-fixtures, or open text stream."""
    if hasattr(source, "read"):
        return _parse_text(source.read(), getattr(source, "name", None))
    path = resolve_input(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}", witness=str(path)) from None
    return _parse_text(text, path)


def _parse_text(text: str, origin) -> WorkspaceDocument:
    path = Path(origin) if origin is not None else None
    if text.lstrip().startswith("{"):
        return _parse_json(text, path)
    return _parse_csv(text, path)


# -- JSON documents -------------------------------------------------------

_JSON_FIELDS = {
    "explicit": {"kind", "schema_version", "elements", "leq", "ortho", "block_names"},
    "horizontal_sum": {"kind", "schema_version", "blocks"},
    "smap": {"kind", "schema_version", "lattice", "atom_table", "marginal", "full_table"},
    "observable": {"kind", "schema_version", "lattice", "support"},
}


def _parse_json(text: str, path: Optional[Path]) -> WorkspaceDocument:
    where = path or "<stream>"
    try:
        raw = json.loads(text, parse_float=str)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{where}: invalid JSON at line {exc.lineno}, "
                         f"column {exc.colno}: {exc.msg}",
                         witness=(exc.lineno, exc.colno)) from None
    if not isinstance(raw, dict):
        raise ParseError(f"{where}: top level must be a JSON object")

    version = raw.get("schema_version", "1")
    if not isinstance(version, str) or version not in SCHEMA_VERSIONS:
        raise SchemaVersionUnsupported(
            f"{where}: schema_version {version!r} not in {SCHEMA_VERSIONS}",
            witness=version)

    form = raw.get("kind")
    if form is None:
        if "atom_table" in raw or "full_table" in raw:
            form = "smap"
        elif "support" in raw:
            form = "observable"
        elif "blocks" in raw:
            form = "horizontal_sum"
        elif "elements" in raw:
            form = "explicit"
    if form not in _JSON_FIELDS:
        raise UnknownKind(f"{where}: cannot tell what kind of document this "
                          f"is (kind={form!r})", witness=form)
    extra = set(raw) - _JSON_FIELDS[form]
    if extra:
        raise ParseError(f"{where}: unexpected fields for a {form} document: "
                         f"{sorted(extra)}", witness=tuple(sorted(extra)))

    if form == "explicit":
        payload = _explicit_payload(raw, where)
        kind = "lattice"
    elif form == "horizontal_sum":
        payload = _hsum_payload(raw, where)
        kind = "lattice"
    elif form == "smap":
        payload = _smap_payload(raw, where)
        kind = "smap"
    else:
        payload = _observable_payload(raw, where)
        kind = "observable"
    return WorkspaceDocument(kind, payload, version, path)


def _field(raw: dict, name: str, types, where, required=True):
    if name not in raw:
        if required:
            raise ParseError(f"{where}: missing field {name!r}", witness=name)
        return None
    value = raw[name]
    if not isinstance(value, types):
        raise ParseError(f"{where}: field {name!r} has the wrong type "
                         f"({type(value).__name__})", witness=name)
    return value


def _rational(value, where, context) -> Fraction:
    try:
        return as_rational(value)
    except ValueError as exc:
        raise ParseError(f"{where}: {context}: {exc}", witness=context) from None


def _rational_table(raw, where, name) -> dict:
    out = {}
    for row, cols in raw.items():
        if not isinstance(cols, dict):
            raise ParseError(f"{where}: {name}[{row!r}] must be an object",
                             witness=name)
        out[str(row)] = {str(c): _rational(v, where, f"{name}[{row!r}][{c!r}]")
                         for c, v in cols.items()}
    return out


def _explicit_payload(raw: dict, where) -> dict:
    elements = _field(raw, "elements", list, where)
    if not all(isinstance(e, str) for e in elements):
        raise ParseError(f"{where}: elements must be strings", witness="elements")
    leq = _field(raw, "leq", list, where)
    n = len(elements)
    if len(leq) != n or any(not isinstance(r, list) or len(r) != n for r in leq):
        raise ParseError(f"{where}: leq must be a {n}x{n} matrix", witness="leq")
    if any(not isinstance(v, bool) for r in leq for v in r):
        raise ParseError(f"{where}: leq entries must be booleans", witness="leq")
    ortho = _field(raw, "ortho", dict, where)
    if any(not isinstance(k, str) or not isinstance(v, str)
           for k, v in ortho.items()):
        raise ParseError(f"{where}: ortho must map names to names", witness="ortho")
    block_names = _field(raw, "block_names", dict, where, required=False)
    if block_names is not None:
        for label, atoms in block_names.items():
            if not isinstance(atoms, list) or \
                    any(not isinstance(a, str) for a in atoms):
                raise ParseError(f"{where}: block_names[{label!r}] must list "
                                 "atom names", witness="block_names")
    return {"form": "explicit", "elements": list(elements),
            "leq": [list(r) for r in leq], "ortho": dict(ortho),
            "block_names": block_names}


def _hsum_payload(raw: dict, where) -> dict:
    blocks = _field(raw, "blocks", list, where)
    out = []
    for pos, blk in enumerate(blocks):
        if not isinstance(blk, dict) or set(blk) - {"name", "atoms"}:
            raise ParseError(f"{where}: blocks[{pos}] must be an object with "
                             "'name' and 'atoms'", witness=pos)
        name = blk.get("name")
        atoms = blk.get("atoms")
        if not isinstance(name, str) or not isinstance(atoms, list) or \
                any(not isinstance(a, str) for a in atoms):
            raise ParseError(f"{where}: blocks[{pos}] must name a block and "
                             "list its atom names", witness=pos)
        out.append({"name": name, "atoms": list(atoms)})
    return {"form": "horizontal_sum", "blocks": out}


def _smap_payload(raw: dict, where) -> dict:
    lattice_ref = _field(raw, "lattice", str, where, required=False)
    atom_table = _field(raw, "atom_table", dict, where, required=False)
    full_table = _field(raw, "full_table", dict, where, required=False)
    if (atom_table is None) == (full_table is None):
        raise ParseError(f"{where}: an s-map document carries exactly one of "
                         "'atom_table' or 'full_table'", witness="atom_table")
    marginal = _field(raw, "marginal", dict, where, required=False)
    if atom_table is not None and marginal is None:
        raise ParseError(f"{where}: 'atom_table' needs a 'marginal'",
                         witness="marginal")
    if full_table is not None and marginal is not None:
        raise ParseError(f"{where}: 'marginal' only accompanies 'atom_table'",
                         witness="marginal")
    payload = {"lattice": lattice_ref, "atom_table": None, "marginal": None,
               "full_table": None}
    if atom_table is not None:
        payload["atom_table"] = _rational_table(atom_table, where, "atom_table")
        payload["marginal"] = {str(k): _rational(v, where, f"marginal[{k!r}]")
                               for k, v in marginal.items()}
    else:
        payload["full_table"] = _rational_table(full_table, where, "full_table")
    return payload


def _observable_payload(raw: dict, where) -> dict:
    lattice_ref = _field(raw, "lattice", str, where, required=False)
    support = _field(raw, "support", list, where)
    out = []
    for pos, entry in enumerate(support):
        if not isinstance(entry, dict) or set(entry) != {"value", "element"} or \
                not isinstance(entry.get("element"), str):
            raise ParseError(f"{where}: support[{pos}] must be an object with "
                             "'value' and 'element'", witness=pos)
        out.append({"value": _rational(entry["value"], where, f"support[{pos}].value"),
                    "element": entry["element"]})
    return {"lattice": lattice_ref, "support": out}


# -- CSV documents --------------------------------------------------------

def _csv_rows(text: str, where) -> list:
    rows = []
    for lineno, row in enumerate(csv.reader(_io.StringIO(text)), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        rows.append((lineno, [cell.strip() for cell in row]))
    if not rows:
        raise ParseError(f"{where}: empty file")
    return rows


def _parse_csv(text: str, path: Optional[Path]) -> WorkspaceDocument:
    where = path or "<stream>"
    rows = _csv_rows(text, where)
    header = rows[0][1]
    if header == ["first", "second", "count"]:
        return _experiment_document(rows[1:], where, path)
    if header == ["t", "x", "y"]:
        return _timeseries_document(rows[1:], where, path)
    raise UnknownKind(f"{where}: unrecognized header {header!r}; expected "
                      "'first,second,count' or 't,x,y'", witness=tuple(header))


def _experiment_document(rows, where, path) -> WorkspaceDocument:
    seen = {}
    for lineno, row in rows:
        if len(row) != 3:
            raise ParseError(f"{where}: line {lineno}: expected 3 fields, "
                             f"got {len(row)}", witness=lineno)
        first, second, raw = row
        try:
            count = int(raw)
        except ValueError:
            raise ParseError(f"{where}: line {lineno}: count {raw!r} is not "
                             "an integer", witness=lineno) from None
        if count < 0:
            raise ParseError(f"{where}: line {lineno}: negative count",
                             witness=lineno)
        if (first, second) in seen:
            raise ParseError(f"{where}: line {lineno}: duplicate outcome pair "
                             f"({first}, {second})", witness=lineno)
        seen[(first, second)] = count
    payload = {"rows": [(f, s, c) for (f, s), c in sorted(seen.items())]}
    return WorkspaceDocument("experiment", payload, "1", path)


def _timeseries_document(rows, where, path) -> WorkspaceDocument:
    ts, xs, ys = [], [], []
    for lineno, row in rows:
        if len(row) != 3:
            raise ParseError(f"{where}: line {lineno}: expected 3 fields, "
                             f"got {len(row)}", witness=lineno)
        ts.append(_rational(row[0], where, f"line {lineno}, column t"))
        xs.append(_rational(row[1], where, f"line {lineno}, column x"))
        ys.append(_rational(row[2], where, f"line {lineno}, column y"))
    return WorkspaceDocument("timeseries", {"t": ts, "x": xs, "y": ys}, "1", path)


# -- documents -> domain objects ------------------------------------------

def build_lattice(doc: WorkspaceDocument) -> FiniteOml:
    if doc.kind != "lattice":
        raise MalformedInput(f"expected a lattice document, got {doc.kind}")
    p = doc.payload
    if p["form"] == "horizontal_sum":
        return horizontal_sum_from_atoms(
            [(blk["name"], blk["atoms"]) for blk in p["blocks"]])
    return validate_oml(p["elements"], p["leq"], p["ortho"],
                        block_names=p["block_names"])


def resolve_lattice(doc: WorkspaceDocument,
                    lattice_path: Optional[str] = None) -> FiniteOml:
    """Lattice for an s-map/observable document; an explicit path wins."""
    if lattice_path is not None:
        return build_lattice(parse(lattice_path))
    ref = doc.payload.get("lattice")
    if ref is None:
        raise MalformedInput(
            "document names no lattice; pass one explicitly")
    if doc.path is not None:
        sibling = doc.path.parent / ref
        if sibling.exists():
            return build_lattice(parse(sibling))
    return build_lattice(parse(ref))


def build_smap(doc: WorkspaceDocument, lattice: FiniteOml) -> SMap:
    if doc.kind != "smap":
        raise MalformedInput(f"expected an s-map document, got {doc.kind}")
    p = doc.payload
    if p["full_table"] is not None:
        return validate_smap(lattice, p["full_table"])
    return extend_smap_from_atom_table(lattice, p["atom_table"], p["marginal"])


def build_observable(doc: WorkspaceDocument, lattice: FiniteOml) -> Observable:
    if doc.kind != "observable":
        raise MalformedInput(f"expected an observable document, got {doc.kind}")
    support = [(entry["value"], entry["element"])
               for entry in doc.payload["support"]]
    return validate_observable(lattice, support)


def build_experiment(doc: WorkspaceDocument, order_tag: str = "") -> ExperimentCounts:
    if doc.kind != "experiment":
        raise MalformedInput(f"expected an experiment document, got {doc.kind}")
    counts = {(f, s): c for f, s, c in doc.payload["rows"]}
    return experiment_counts(counts, order_tag=order_tag)


def build_timeseries(doc: WorkspaceDocument) -> tuple:
    if doc.kind != "timeseries":
        raise MalformedInput(f"expected a timeseries document, got {doc.kind}")
    return tuple(doc.payload["x"]), tuple(doc.payload["y"])


# -- domain objects -> documents ------------------------------------------

def lattice_document(lat: FiniteOml) -> WorkspaceDocument:
    """Explicit-form document; lossless for any validated lattice."""
    block_names = None
    if any(n is not None for n in lat.block_names):
        block_names = {name: [lat.elements[i].name
                              for i in lat.block_atoms(blk)]
                       for name, blk in zip(lat.block_names, lat.blocks)
                       if name is not None}
    payload = {"form": "explicit", "elements": list(lat.names),
               "leq": lat.leq_table(), "ortho": lat.ortho_table(),
               "block_names": block_names}
    return WorkspaceDocument("lattice", payload, "1", None)


def smap_document(p: SMap, lattice_ref: Optional[str] = None) -> WorkspaceDocument:
    payload = {"lattice": lattice_ref, "atom_table": None, "marginal": None,
               "full_table": p.as_dict()}
    return WorkspaceDocument("smap", payload, "1", None)


def observable_document(x: Observable,
                        lattice_ref: Optional[str] = None) -> WorkspaceDocument:
    support = [{"value": value, "element": el.name} for value, el in x.support]
    return WorkspaceDocument("observable", {"lattice": lattice_ref,
                                            "support": support}, "1", None)


# -- documents -> text ----------------------------------------------------

def _jsonable(value):
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def render_json(data) -> str:
    """Canonical JSON text: sorted keys, exact rationals, one trailing newline."""
    return json.dumps(_jsonable(data), sort_keys=True, indent=2,
                      ensure_ascii=False) + "\n"


def serialize_document(doc: WorkspaceDocument) -> str:
    if doc.kind == "experiment":
        lines = ["first,second,count"]
        lines += [f"{f},{s},{c}" for f, s, c in doc.payload["rows"]]
        return "\n".join(lines) + "\n"
    if doc.kind == "timeseries":
        lines = ["t,x,y"]
        lines += [f"{format_rational(t)},{format_rational(x)},{format_rational(y)}"
                  for t, x, y in zip(doc.payload["t"], doc.payload["x"],
                                     doc.payload["y"])]
        return "\n".join(lines) + "\n"

    p = doc.payload
    if doc.kind == "lattice":
        data = dict(p)
        data["kind"] = data.pop("form")
        if data.get("block_names") is None:
            data.pop("block_names", None)
    elif doc.kind == "smap":
        data = {"kind": "smap"}
        for key in ("lattice", "atom_table", "marginal", "full_table"):
            if p.get(key) is not None:
                data[key] = p[key]
    elif doc.kind == "observable":
        data = {"kind": "observable", "support": p["support"]}
        if p.get("lattice") is not None:
            data["lattice"] = p["lattice"]
    else:
        raise MalformedInput(f"cannot serialize document kind {doc.kind!r}")
    data["schema_version"] = doc.schema_version
    return render_json(data)
