"""JSON codec for state-pair corpora."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .state_model import NULL, Atom, ObjectGraph, Obj, Schema, StatePair, Val, atom_sort_key


class CorpusError(ValueError):
    """Malformed corpus input; the message starts with the offending JSON path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class Corpus:
    schema: Schema
    method: str
    pairs: list[StatePair]
    arity: int = 0
    has_result: bool = False
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def valid(self) -> list[StatePair]:
        return [p for p in self.pairs if p.tag == "valid"]

    @property
    def invalid(self) -> list[StatePair]:
        return [p for p in self.pairs if p.tag == "invalid"]


def _atom_json(a: Atom):
    if a is NULL:
        return "null"
    if isinstance(a, bool):
        return {"bool": a}
    if isinstance(a, int):
        return {"int": a}
    if isinstance(a, Val):
        return {"val": a.name}
    return {"id": a.id, "type": a.type}


def _key(a: Atom) -> tuple:
    return (isinstance(a, bool), a)


def graph_to_json(g: ObjectGraph) -> dict:
    # False == 0 in Python, so atoms are keyed with their boolean-ness
    values = list(g.roots.values()) + [v for vals in g.store.values() for v in vals.values()]
    distinct = {_key(a): a for a in [NULL, *g.store, *values]}
    atoms = sorted(distinct.values(), key=atom_sort_key)
    index = {_key(a): i for i, a in enumerate(atoms)}
    store = []
    for obj in sorted(g.store, key=atom_sort_key):
        for name, v in g.store[obj].items():
            store.append([index[_key(obj)], name, index[_key(v)]])
    return {
        "atoms": [_atom_json(a) for a in atoms],
        "roots": {role: index[_key(a)] for role, a in g.roots.items()},
        "store": store,
    }


def _atom_from_json(data, path: str) -> Atom:
    if data == "null":
        return NULL
    if not isinstance(data, dict) or len(data) == 0:
        raise CorpusError(path, f"unrecognised atom {data!r}")
    if "id" in data:
        if not isinstance(data["id"], int) or not isinstance(data.get("type"), str):
            raise CorpusError(path, "object atom needs an integer id and a type")
        return Obj(data["type"], data["id"])
    if "int" in data:
        if isinstance(data["int"], bool) or not isinstance(data["int"], int):
            raise CorpusError(path, "int atom must hold an integer")
        return data["int"]
    if "bool" in data:
        if not isinstance(data["bool"], bool):
            raise CorpusError(path, "bool atom must hold a boolean")
        return data["bool"]
    if "val" in data:
        if not isinstance(data["val"], str):
            raise CorpusError(path, "val atom must hold a string")
        return Val(data["val"])
    raise CorpusError(path, f"unrecognised atom {data!r}")


def graph_from_json(data, schema: Schema, path: str) -> ObjectGraph:
    if not isinstance(data, dict):
        raise CorpusError(path, "graph must be an object")
    for key in ("atoms", "roots", "store"):
        if key not in data:
            raise CorpusError(f"{path}.{key}", "missing")
    atoms = [_atom_from_json(a, f"{path}.atoms[{i}]") for i, a in enumerate(data["atoms"])]

    def ref(i, p):
        if isinstance(i, bool) or not isinstance(i, int) or not 0 <= i < len(atoms):
            raise CorpusError(p, f"bad atom reference {i!r}")
        return atoms[i]

    roots = {role: ref(i, f"{path}.roots.{role}") for role, i in data["roots"].items()}
    store: dict[Obj, dict[str, Atom]] = {a: {} for a in atoms if isinstance(a, Obj)}
    for j, entry in enumerate(data["store"]):
        p = f"{path}.store[{j}]"
        if not isinstance(entry, list) or len(entry) != 3 or not isinstance(entry[1], str):
            raise CorpusError(p, "store entry must be [atom-ref, field, atom-ref]")
        owner = ref(entry[0], p + "[0]")
        if not isinstance(owner, Obj):
            raise CorpusError(p + "[0]", "store owner must be an object atom")
        if schema.field(owner.type, entry[1]) is None:
            raise CorpusError(p + "[1]", f"type {owner.type} has no field {entry[1]!r}")
        store[owner][entry[1]] = ref(entry[2], p + "[2]")
    for obj, values in store.items():
        declared = [f.name for f in schema.fields_of(obj.type)]
        missing = [n for n in declared if n not in values]
        if missing:
            raise CorpusError(f"{path}.store", f"{obj!r} lacks fields {missing}")
        store[obj] = {n: values[n] for n in declared}
    return ObjectGraph(schema, roots, store)


def encode_corpus(pairs: list[StatePair], schema: Schema, method: str | None = None,
                  extra: dict | None = None) -> bytes:
    if method is None:
        method = pairs[0].method if pairs else ""
    arity = len(schema.arguments) if schema.roots else 0
    doc = {
        "schema": schema.to_json(),
        "method": {"name": method, "arity": arity, "has_result": schema.result is not None},
    }
    if extra:
        doc.update(extra)
    doc["pairs"] = [
        {"tag": p.tag, "pre": graph_to_json(p.pre), "post": graph_to_json(p.post)} for p in pairs
    ]
    return json.dumps(doc, separators=(",", ":"), sort_keys=False).encode("utf-8")


def decode_corpus(data: bytes | str) -> Corpus:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise CorpusError("$", f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise CorpusError("$", "corpus must be a JSON object")
    for key in ("schema", "method", "pairs"):
        if key not in doc:
            raise CorpusError(f"$.{key}", "missing")
    try:
        schema = Schema.from_json(doc["schema"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusError("$.schema", str(exc)) from None
    meta = doc["method"]
    if not isinstance(meta, dict) or not isinstance(meta.get("name"), str):
        raise CorpusError("$.method", "must be an object with a name")
    if not isinstance(doc["pairs"], list):
        raise CorpusError("$.pairs", "must be an array")
    pairs = []
    for i, entry in enumerate(doc["pairs"]):
        path = f"$.pairs[{i}]"
        if not isinstance(entry, dict):
            raise CorpusError(path, "pair must be an object")
        tag = entry.get("tag")
        if tag not in ("valid", "invalid"):
            raise CorpusError(f"{path}.tag", f"must be 'valid' or 'invalid', got {tag!r}")
        if "pre" not in entry or "post" not in entry:
            raise CorpusError(path, "pair needs pre and post graphs")
        pre = graph_from_json(entry["pre"], schema, f"{path}.pre")
        post = graph_from_json(entry["post"], schema, f"{path}.post")
        pairs.append(StatePair(pre, post, meta["name"], tag))
    extra = {k: v for k, v in doc.items() if k not in ("schema", "method", "pairs")}
    return Corpus(schema, meta["name"], pairs, meta.get("arity", 0), bool(meta.get("has_result")), extra)
