"""Set of integers with a maximum query, stored as a prepend-only list."""

from __future__ import annotations

from ..state_model import INTEGER, REFERENCE, ObjectGraph, Obj
from .base import Builder, HeapObject, Method, Param, Subject, make_fields, make_types, require


class MaxBag(HeapObject):
    TYPE = "MaxBag"
    FIELDS = ("head",)


class Cell(HeapObject):
    TYPE = "Cell"
    FIELDS = ("value", "next")


def new() -> MaxBag:
    return MaxBag(head=None)


def _values(bag: MaxBag) -> list[int]:
    out, c = [], bag.head
    while c is not None:
        out.append(c.value)
        c = c.next
    return out


def add(bag: MaxBag, x: int) -> None:
    if x not in _values(bag):
        bag.head = Cell(value=x, next=bag.head)


def remove(bag: MaxBag, x: int) -> None:
    prev, c = None, bag.head
    while c is not None:
        if c.value == x:
            if prev is None:
                bag.head = c.next
            else:
                prev.next = c.next
            return
        prev, c = c, c.next


def get_max(bag: MaxBag) -> int:
    values = _values(bag)
    require(bool(values), "bag is empty")
    return max(values)


def elements(g: ObjectGraph, state: str = "post") -> list[int]:
    out, c, seen = [], g.get(g.roots["this"], "head"), set()
    while isinstance(c, Obj) and c not in seen:
        seen.add(c)
        out.append(g.get(c, "value"))
        c = g.get(c, "next")
    return out


def walker(g: ObjectGraph) -> list[str]:
    values = elements(g)
    n = sum(1 for o in g.reachable() if o.type == "Cell")
    problems = []
    if n != len(values):
        problems.append("cell chain is cyclic")
    if len(set(values)) != len(values):
        problems.append(f"duplicate elements {values}")
    return problems


SUBJECT = Subject(
    name="MaxBag",
    description="Integer set with a max query.",
    types=make_types(("MaxBag", REFERENCE), ("Cell", REFERENCE), ("int", INTEGER)),
    fields=make_fields(("MaxBag", "head", "Cell"), ("Cell", "value", "int"), ("Cell", "next", "Cell")),
    receiver="MaxBag",
    classes={"MaxBag": MaxBag, "Cell": Cell},
    builders=(
        Builder("new", (), new, constructor=True),
        Builder("add", (Param("x", "int"),), add),
    ),
    methods=(
        Method("add", (Param("x", "int"),), add),
        Method("remove", (Param("x", "int"),), remove),
        Method("get_max", (), get_max, result_type="int"),
    ),
    default_scope=4,
    default_invalid_ratio=1.0,
    walker=walker,
)
