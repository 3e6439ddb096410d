"""Typed heap snapshots, their canonical forms, and type graphs.

A program state is an :class:`ObjectGraph`: a set of typed object atoms, a
store mapping ``(atom, field)`` to a value atom, and named roots (``this``,
the method arguments and, in post-states, ``result``).  Primitive values are
identified by value, objects by an opaque integer id that is stable between
the pre- and post-state of one execution.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple, Union

REFERENCE = "reference"
INTEGER = "integer"
BOOLEAN = "boolean"
GENERIC = "generic-value"
KINDS = (REFERENCE, INTEGER, BOOLEAN, GENERIC)

RECEIVER = "receiver"
ARGUMENT = "argument"
RESULT = "result"


class SchemaError(ValueError):
    """A schema violates its structural invariants."""


class UsageError(ValueError):
    """An operation was applied to incompatible inputs."""


# ── atoms ────────────────────────────────────────────────────────────────────


class Obj(NamedTuple):
    """A typed heap object."""

    type: str
    id: int

    def __repr__(self) -> str:
        return f"{self.type}#{self.id}"


class Val(NamedTuple):
    """An opaque element of a generic value domain, e.g. ``e0``."""

    name: str

    def __repr__(self) -> str:
        return repr(self.name)


class _Null:
    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "null"

    def __reduce__(self):
        return (_Null, ())


NULL = _Null()

Atom = Union[Obj, Val, int, bool, _Null]


def atom_sort_key(a: Atom) -> tuple:
    """Total order over atoms of mixed kinds, used wherever iteration order matters."""
    if a is NULL:
        return (0,)
    if isinstance(a, bool):
        return (1, int(a))
    if isinstance(a, int):
        return (2, a)
    if isinstance(a, Val):
        return (3, a.name)
    return (4, a.type, a.id)


def value_domain(type_name: str, size: int) -> list[Val]:
    """Elements of a generic value type, e.g. ``E`` -> ``e0, e1, ...``."""
    prefix = type_name.lower()
    return [Val(f"{prefix}{i}") for i in range(size)]


# ── schemas ──────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class TypeName:
    name: str
    kind: str = REFERENCE

    def __post_init__(self):
        if not self.name:
            raise SchemaError("type name must be nonempty")
        if self.kind not in KINDS:
            raise SchemaError(f"unknown type kind {self.kind!r} for {self.name}")


@dataclass(frozen=True)
class FieldDecl:
    owner: str
    name: str
    target: str


@dataclass(frozen=True)
class RootDecl:
    role: str
    kind: str
    type: str
    index: int = 0


@dataclass(frozen=True)
class Schema:
    """Types, fields (in declaration order) and roots of one analysed method."""

    types: tuple[TypeName, ...]
    fields: tuple[FieldDecl, ...]
    roots: tuple[RootDecl, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "types", tuple(self.types))
        object.__setattr__(self, "fields", tuple(self.fields))
        object.__setattr__(self, "roots", tuple(self.roots))
        self.validate()

    def validate(self) -> None:
        names = [t.name for t in self.types]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate type names in {names}")
        known = set(names)
        seen = set()
        for f in self.fields:
            if f.owner not in known or f.target not in known:
                raise SchemaError(f"field {f.owner}.{f.name} refers to an undeclared type")
            if self.type(f.owner).kind != REFERENCE:
                raise SchemaError(f"primitive type {f.owner} cannot own field {f.name}")
            if (f.owner, f.name) in seen:
                raise SchemaError(f"duplicate field {f.name} on {f.owner}")
            seen.add((f.owner, f.name))
        if self.roots:
            receivers = [r for r in self.roots if r.kind == RECEIVER]
            if len(receivers) != 1:
                raise SchemaError("schema must declare exactly one receiver root")
            roles = [r.role for r in self.roots]
            if len(set(roles)) != len(roles):
                raise SchemaError(f"duplicate root roles in {roles}")
            for r in self.roots:
                if r.type not in known:
                    raise SchemaError(f"root {r.role} has undeclared type {r.type}")

    # lookups are rebuilt lazily; the dataclass stays frozen
    def _index(self) -> dict:
        idx = self.__dict__.get("_idx")
        if idx is None:
            by_owner: dict[str, list[FieldDecl]] = {t.name: [] for t in self.types}
            for f in self.fields:
                by_owner[f.owner].append(f)
            idx = {
                "types": {t.name: t for t in self.types},
                "owner": {k: tuple(v) for k, v in by_owner.items()},
                "field": {(f.owner, f.name): f for f in self.fields},
                "roots": {r.role: r for r in self.roots},
            }
            object.__setattr__(self, "_idx", idx)
        return idx

    def type(self, name: str) -> TypeName:
        try:
            return self._index()["types"][name]
        except KeyError:
            raise SchemaError(f"unknown type {name!r}") from None

    def has_type(self, name: str) -> bool:
        return name in self._index()["types"]

    def kind(self, name: str) -> str:
        return self.type(name).kind

    def fields_of(self, owner: str) -> tuple[FieldDecl, ...]:
        return self._index()["owner"].get(owner, ())

    def field(self, owner: str, name: str) -> FieldDecl | None:
        return self._index()["field"].get((owner, name))

    def root(self, role: str) -> RootDecl | None:
        return self._index()["roots"].get(role)

    @property
    def receiver(self) -> RootDecl:
        return next(r for r in self.roots if r.kind == RECEIVER)

    @property
    def arguments(self) -> tuple[RootDecl, ...]:
        return tuple(sorted((r for r in self.roots if r.kind == ARGUMENT), key=lambda r: r.index))

    @property
    def result(self) -> RootDecl | None:
        return next((r for r in self.roots if r.kind == RESULT), None)

    def root_order(self) -> list[str]:
        """Roles in canonical order: receiver, arguments by position, result."""
        out = [self.receiver.role] if self.roots else []
        out += [r.role for r in self.arguments]
        if self.result is not None:
            out.append(self.result.role)
        return out

    def with_roots(self, roots: Iterable[RootDecl]) -> "Schema":
        return Schema(self.types, self.fields, tuple(roots))

    def to_json(self) -> dict:
        return {
            "types": [{"name": t.name, "kind": t.kind} for t in self.types],
            "fields": [{"owner": f.owner, "name": f.name, "target": f.target} for f in self.fields],
            "roots": [
                {"role": r.role, "kind": r.kind, "type": r.type, "index": r.index} for r in self.roots
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Schema":
        return cls(
            tuple(TypeName(t["name"], t["kind"]) for t in data["types"]),
            tuple(FieldDecl(f["owner"], f["name"], f["target"]) for f in data["fields"]),
            tuple(RootDecl(r["role"], r["kind"], r["type"], r.get("index", 0)) for r in data.get("roots", ())),
        )


@dataclass(frozen=True)
class TypeGraph:
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str, str], ...]

    def out_edges(self, node: str) -> list[tuple[str, str, str]]:
        return [e for e in self.edges if e[0] == node]

    def self_loops(self, node: str) -> list[str]:
        return [label for (src, label, dst) in self.edges if src == node and dst == node]


def build_type_graph(schema: Schema) -> TypeGraph:
    """One node per declared type, one edge per declared field."""
    schema.validate()
    return TypeGraph(
        tuple(t.name for t in schema.types),
        tuple((f.owner, f.name, f.target) for f in schema.fields),
    )


# ── object graphs ────────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class ObjectGraph:
    """An immutable heap snapshot.

    ``store`` maps each object atom to its field values; every declared field
    of the object's type is present (unset references hold :data:`NULL`).
    """

    schema: Schema
    roots: Mapping[str, Atom]
    store: Mapping[Obj, Mapping[str, Atom]] = field(default_factory=dict)

    def get(self, obj: Obj, name: str) -> Atom:
        return self.store[obj][name]

    @property
    def atoms(self) -> set:
        out: set = {NULL}
        out.update(self.roots.values())
        for obj, values in self.store.items():
            out.add(obj)
            out.update(values.values())
        return out

    def objects(self) -> Iterator[Obj]:
        return iter(self.store)

    def reachable(self, roles: Iterable[str] | None = None) -> list[Obj]:
        """Objects reachable from the given roots, in canonical BFS order."""
        order: list[Obj] = []
        seen: set[Obj] = set()
        queue: deque[Obj] = deque()
        for role in self._roles(roles):
            a = self.roots[role]
            if isinstance(a, Obj) and a not in seen:
                seen.add(a)
                queue.append(a)
        while queue:
            obj = queue.popleft()
            order.append(obj)
            for f in self.schema.fields_of(obj.type):
                v = self.store[obj][f.name]
                if isinstance(v, Obj) and v not in seen:
                    seen.add(v)
                    queue.append(v)
        return order

    def _roles(self, roles: Iterable[str] | None) -> list[str]:
        if roles is not None:
            return [r for r in roles if r in self.roots]
        ordered = [r for r in self.schema.root_order() if r in self.roots]
        return ordered + sorted(r for r in self.roots if r not in ordered)

    def check(self) -> None:
        """Raise :class:`UsageError` when the graph breaks an ObjectGraph invariant."""
        for obj, values in self.store.items():
            declared = {f.name for f in self.schema.fields_of(obj.type)}
            if set(values) != declared:
                raise UsageError(f"{obj!r} has fields {sorted(values)}, schema declares {sorted(declared)}")
            for v in values.values():
                if isinstance(v, Obj) and v not in self.store:
                    raise UsageError(f"{obj!r} points to {v!r} which is not in the store")
        for role, v in self.roots.items():
            if isinstance(v, Obj) and v not in self.store:
                raise UsageError(f"root {role} points to {v!r} which is not in the store")

    def replace(self, obj: Obj, name: str, value: Atom) -> "ObjectGraph":
        """A copy with one store entry changed."""
        store = dict(self.store)
        values = dict(store[obj])
        values[name] = value
        store[obj] = values
        return ObjectGraph(self.schema, self.roots, store)

    def with_roots(self, roots: Mapping[str, Atom]) -> "ObjectGraph":
        return ObjectGraph(self.schema, dict(roots), self.store)

    def count_by_type(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for obj in self.reachable():
            counts[obj.type] = counts.get(obj.type, 0) + 1
        return counts

    def __repr__(self) -> str:
        return f"ObjectGraph(roots={dict(self.roots)!r}, objects={len(self.store)})"


# ── canonical forms ──────────────────────────────────────────────────────────

CanonicalForm = tuple

_T_NULL, _T_OBJ, _T_INT, _T_BOOL, _T_VAL, _T_ROOT = range(6)


def _encode_value(a: Atom, numbering: dict, out: list, type_ids: dict) -> None:
    if a is NULL:
        out.append(_T_NULL)
    elif isinstance(a, bool):
        out.extend((_T_BOOL, int(a)))
    elif isinstance(a, int):
        out.extend((_T_INT, a))
    elif isinstance(a, Val):
        out.extend((_T_VAL, _val_code(a)))
    else:
        out.extend((_T_OBJ, numbering[a], type_ids[a.type]))


def _val_code(v: Val) -> int:
    # generic names are <prefix><index>; prefix hashed into the high bits deterministically
    name = v.name
    i = len(name)
    while i > 0 and name[i - 1].isdigit():
        i -= 1
    prefix, digits = name[:i], name[i:]
    code = 0
    for ch in prefix:
        code = code * 131 + ord(ch)
    return code * 1_000_003 + (int(digits) if digits else 0)


def canonicalize(g: ObjectGraph) -> CanonicalForm:
    """Linearize ``g``: objects numbered by BFS first visit from the roots.

    Roots are visited in role order and fields in schema declaration order, so
    two graphs get equal forms exactly when a root- and field-preserving
    bijection maps one onto the other.  Unreachable objects do not appear.
    """
    schema = g.schema
    type_ids = {t.name: i for i, t in enumerate(schema.types)}
    roles = g._roles(None)
    order = g.reachable(roles)
    numbering = {obj: i for i, obj in enumerate(order)}
    out: list = []
    for role in roles:
        out.append(_T_ROOT)
        out.append(hash_role(role))
        _encode_value(g.roots[role], numbering, out, type_ids)
    for obj in order:
        values = g.store[obj]
        for f in schema.fields_of(obj.type):
            _encode_value(values[f.name], numbering, out, type_ids)
    return tuple(out)


def hash_role(role: str) -> int:
    code = 0
    for ch in role:
        code = (code * 131 + ord(ch)) % 2_147_483_647
    return code


@dataclass(frozen=True, eq=False)
class StatePair:
    """One execution of ``method``: pre-state, post-state and validity tag."""

    pre: ObjectGraph
    post: ObjectGraph
    method: str
    tag: str = "valid"

    @property
    def schema(self) -> Schema:
        return self.post.schema

    def key(self) -> tuple:
        k = self.__dict__.get("_key")
        if k is None:
            k = (self.method, canonicalize(self.pre), canonicalize(self.post))
            object.__setattr__(self, "_key", k)
        return k

    def retag(self, tag: str, post: ObjectGraph | None = None) -> "StatePair":
        return StatePair(self.pre, self.post if post is None else post, self.method, tag)

    def __repr__(self) -> str:
        return f"StatePair({self.method}, {self.tag}, pre={self.pre!r}, post={self.post!r})"


def pairs_equal(a: StatePair, b: StatePair) -> bool:
    if a.schema.types != b.schema.types or a.schema.fields != b.schema.fields:
        raise UsageError("pairs_equal on pairs with different schemas")
    return a.key() == b.key()
