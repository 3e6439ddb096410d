"""Subject descriptors and the bridge between object graphs and live objects.

Subject code manipulates ordinary Python objects (:class:`HeapObject`
subclasses).  :func:`materialize` turns an ObjectGraph into such objects,
:func:`snapshot` turns them back, reusing the atom id of every object that
came from the input graph so pre and post states share identities.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from ..state_model import (
    ARGUMENT, BOOLEAN, GENERIC, INTEGER, NULL, RECEIVER, REFERENCE, RESULT, FieldDecl,
    ObjectGraph, Obj, RootDecl, Schema, StatePair, TypeName, UsageError, value_domain,
)


class PreconditionViolation(Exception):
    """The method (or builder) refuses the given state and arguments."""


def require(cond: bool, message: str = "precondition violated") -> None:
    if not cond:
        raise PreconditionViolation(message)


class HeapObject:
    TYPE: str = ""
    FIELDS: tuple = ()

    def __init__(self, **values):
        self._oid = None
        for name in self.FIELDS:
            setattr(self, name, values.get(name))

    def __repr__(self) -> str:
        return f"<{self.TYPE} {self._oid}>"


@dataclass(frozen=True)
class Param:
    name: str
    type: str


@dataclass(frozen=True)
class Builder:
    name: str
    params: tuple
    fn: Callable
    constructor: bool = False


@dataclass(frozen=True)
class Method:
    name: str
    params: tuple
    fn: Callable
    result_type: str | None = None
    # optional per-parameter filter on candidate argument states: (param name, graph) -> bool
    arg_filter: Callable | None = None

    @property
    def has_result(self) -> bool:
        return self.result_type is not None

    @property
    def parameters(self) -> tuple:
        return tuple((p.name, p.type) for p in self.params)

    def signature(self) -> str:
        args = ", ".join(f"{p.name}: {p.type}" for p in self.params)
        tail = f" -> {self.result_type}" if self.result_type else ""
        return f"{self.name}({args}){tail}"


@dataclass
class Subject:
    name: str
    types: tuple
    fields: tuple
    receiver: str
    classes: dict
    builders: tuple
    methods: tuple
    default_scope: int = 3
    default_invalid_ratio: float = 1.0
    description: str = ""
    # objects counted against max_objects_per_type; default counts every reachable object
    count_objects: Callable | None = None
    # independent structural checker: graph -> list of violation messages
    walker: Callable | None = None
    _schemas: dict = field(default_factory=dict, repr=False)

    def method(self, name: str) -> Method:
        for m in self.methods:
            if m.name == name:
                return m
        raise UsageError(f"{self.name} has no method {name!r}; known: {[m.name for m in self.methods]}")

    def schema_for(self, method: Method | str | None = None) -> Schema:
        if isinstance(method, str):
            method = self.method(method)
        key = method.name if method else None
        s = self._schemas.get(key)
        if s is None:
            roots = [RootDecl("this", RECEIVER, self.receiver)]
            if method is not None:
                roots += [RootDecl(p.name, ARGUMENT, p.type, i) for i, p in enumerate(method.params)]
                if method.result_type:
                    roots.append(RootDecl("result", RESULT, method.result_type))
            s = Schema(self.types, self.fields, tuple(roots))
            self._schemas[key] = s
        return s

    @property
    def schema(self) -> Schema:
        return self.schema_for(None)

    def object_counts(self, g: ObjectGraph) -> dict:
        if self.count_objects is not None:
            return self.count_objects(g)
        return g.count_by_type()

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "schema": self.schema.to_json(),
            "builders": [
                {"name": b.name, "params": [[p.name, p.type] for p in b.params], "constructor": b.constructor}
                for b in self.builders
            ],
            "methods": [
                {"name": m.name, "params": [[p.name, p.type] for p in m.params], "result": m.result_type}
                for m in self.methods
            ],
            "default_scope": self.default_scope,
            "default_invalid_ratio": self.default_invalid_ratio,
        }


def make_types(*specs: tuple[str, str]) -> tuple:
    return tuple(TypeName(n, k) for n, k in specs)


def make_fields(*specs: tuple[str, str, str]) -> tuple:
    return tuple(FieldDecl(o, n, t) for o, n, t in specs)


# ── graph <-> objects ────────────────────────────────────────────────────────


def materialize(g: ObjectGraph, classes: dict) -> dict:
    """Live objects for every object atom of ``g``, keyed by atom."""
    live = {}
    for atom in g.store:
        obj = classes[atom.type].__new__(classes[atom.type])
        obj._oid = atom.id
        live[atom] = obj
    for atom, values in g.store.items():
        obj = live[atom]
        for name, v in values.items():
            setattr(obj, name, to_live(v, live))
    return live


def to_live(v, live: dict):
    if v is NULL:
        return None
    if isinstance(v, Obj):
        return live[v]
    return v


def snapshot(schema: Schema, roots: dict, next_id: int = 0) -> ObjectGraph:
    """Freeze the objects reachable from ``roots`` (role -> live value)."""
    atoms: dict[int, Obj] = {}
    store: dict = {}
    queue: deque = deque()
    counter = [next_id]

    def atom_of(v):
        if v is None:
            return NULL
        if isinstance(v, HeapObject):
            a = atoms.get(id(v))
            if a is None:
                if v._oid is None:
                    v._oid = counter[0]
                    counter[0] += 1
                a = Obj(v.TYPE, v._oid)
                atoms[id(v)] = a
                queue.append(v)
            return a
        return v

    root_atoms = {}
    for role in schema.root_order():
        if role in roots:
            root_atoms[role] = atom_of(roots[role])
    while queue:
        obj = queue.popleft()
        store[atoms[id(obj)]] = {f.name: atom_of(getattr(obj, f.name)) for f in schema.fields_of(obj.TYPE)}
    return ObjectGraph(schema, root_atoms, store)


def renumber(g: ObjectGraph, start: int = 0) -> ObjectGraph:
    """Same graph with reachable objects renamed ``start, start+1, ...`` in BFS order."""
    order = g.reachable()
    mapping = {a: Obj(a.type, start + i) for i, a in enumerate(order)}

    def m(v):
        return mapping.get(v, v) if isinstance(v, Obj) else v

    store = {mapping[a]: {n: m(v) for n, v in g.store[a].items()} for a in order}
    return ObjectGraph(g.schema, {r: m(v) for r, v in g.roots.items()}, store)


def max_id(g: ObjectGraph) -> int:
    return max((a.id for a in g.store), default=-1)


def merge_roots(schema: Schema, receiver: ObjectGraph, args: dict) -> ObjectGraph:
    """Pre-state with ``this`` from ``receiver`` and ``args`` (name -> atom or state graph).

    State-graph arguments are copied in with ids shifted past the heap built so far,
    so receiver and argument heaps stay disjoint.
    """
    store = dict(receiver.store)
    roots = {"this": receiver.roots["this"]}
    for name, v in args.items():
        if isinstance(v, ObjectGraph):
            shifted = renumber(v, max((a.id for a in store), default=-1) + 1)
            store.update(shifted.store)
            roots[name] = shifted.roots["this"]
        else:
            roots[name] = v
    return ObjectGraph(schema, roots, store)


# ── execution ────────────────────────────────────────────────────────────────


def execute(subject: Subject, method: Method | str, pre: ObjectGraph, args: Iterable | None = None) -> StatePair:
    """Run ``method`` on ``pre``; arguments default to the argument roots of ``pre``.

    Raises :class:`PreconditionViolation` when the method refuses the input.
    """
    if isinstance(method, str):
        method = subject.method(method)
    schema = subject.schema_for(method)
    if args is not None:
        args = list(args)
        if len(args) != len(method.params):
            raise UsageError(f"{method.name} takes {len(method.params)} arguments, got {len(args)}")
        roots = dict(pre.roots)
        roots.update({p.name: a for p, a in zip(method.params, args)})
        pre = ObjectGraph(schema, roots, pre.store)
    elif pre.schema is not schema:
        pre = ObjectGraph(schema, pre.roots, pre.store)
    live = materialize(pre, subject.classes)
    receiver = to_live(pre.roots["this"], live)
    values = [to_live(pre.roots[p.name], live) for p in method.params]
    result = method.fn(receiver, *values)
    post_roots = {"this": receiver}
    post_roots.update({p.name: v for p, v in zip(method.params, values)})
    if method.has_result:
        post_roots["result"] = result
    post = snapshot(schema, post_roots, max_id(pre) + 1)
    return StatePair(pre, post, method.name, "valid")


def apply_builder(subject: Subject, builder: Builder, state: ObjectGraph | None, args: tuple) -> ObjectGraph:
    """Run a builder; constructors ignore ``state``.  Result ids are renumbered canonically."""
    schema = subject.schema
    if builder.constructor:
        receiver = builder.fn(*args)
    else:
        live = materialize(state, subject.classes)
        receiver = to_live(state.roots["this"], live)
        builder.fn(receiver, *args)
    return renumber(snapshot(schema, {"this": receiver}, 0 if state is None else max_id(state) + 1))


def primitive_domain(schema: Schema, type_name: str, k: int, int_range: tuple[int, int]) -> list:
    kind = schema.kind(type_name)
    if kind == INTEGER:
        lo, hi = int_range
        return list(range(lo, hi + 1))
    if kind == BOOLEAN:
        return [False, True]
    if kind == GENERIC:
        return value_domain(type_name, k)
    raise UsageError(f"{type_name} is not a primitive type")


def is_reference(schema: Schema, type_name: str) -> bool:
    return schema.kind(type_name) == REFERENCE


Executor = Callable[..., Any]
