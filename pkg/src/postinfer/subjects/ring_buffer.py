"""Bounded FIFO queue over a circular array.

The array is a ring of ``capacity`` cells linked by ``next``; cell ``i``
stores ``index = i``.  ``head`` is cell 0, ``start`` the index of the oldest
item.  Removed slots keep their stale item, as an array would.
"""

from __future__ import annotations

from ..state_model import GENERIC, INTEGER, REFERENCE, ObjectGraph, Obj
from .base import Builder, HeapObject, Method, Param, Subject, make_fields, make_types, require


class RingBuffer(HeapObject):
    TYPE = "RingBuffer"
    FIELDS = ("head", "start", "count", "capacity")


class Cell(HeapObject):
    TYPE = "Cell"
    FIELDS = ("index", "item", "next")


def new(capacity: int) -> RingBuffer:
    require(capacity >= 1, "capacity must be positive")
    cells = [Cell(index=i, item=None) for i in range(capacity)]
    for i, c in enumerate(cells):
        c.next = cells[(i + 1) % capacity]
    return RingBuffer(head=cells[0], start=0, count=0, capacity=capacity)


def _cell(rb: RingBuffer, i: int) -> Cell:
    c = rb.head
    for _ in range(i % rb.capacity):
        c = c.next
    return c


def count(rb: RingBuffer) -> int:
    return rb.count


def extend(rb: RingBuffer, a_value) -> None:
    require(rb.count < rb.capacity, "buffer is full")
    _cell(rb, rb.start + rb.count).item = a_value
    rb.count += 1


def item(rb: RingBuffer):
    require(rb.count > 0, "buffer is empty")
    return _cell(rb, rb.start).item


def remove(rb: RingBuffer) -> None:
    require(rb.count > 0, "buffer is empty")
    rb.start = (rb.start + 1) % rb.capacity
    rb.count -= 1


def wipe_out(rb: RingBuffer) -> None:
    rb.start = 0
    rb.count = 0


def walker(g: ObjectGraph) -> list[str]:
    problems = []
    rb = g.roots["this"]
    cap, start, n = g.get(rb, "capacity"), g.get(rb, "start"), g.get(rb, "count")
    c = g.get(rb, "head")
    for i in range(cap):
        if not isinstance(c, Obj) or g.get(c, "index") != i:
            problems.append(f"cell {i} missing or misnumbered")
            return problems
        c = g.get(c, "next")
    if c != g.get(rb, "head"):
        problems.append("cell chain does not close after capacity cells")
    if not 0 <= start < cap:
        problems.append(f"start {start} outside [0, {cap})")
    if not 0 <= n <= cap:
        problems.append(f"count {n} outside [0, {cap}]")
    return problems


SUBJECT = Subject(
    name="RingBuffer",
    description="Bounded queue over a circular array of cells.",
    types=make_types(("RingBuffer", REFERENCE), ("Cell", REFERENCE), ("int", INTEGER), ("G", GENERIC)),
    fields=make_fields(
        ("RingBuffer", "head", "Cell"),
        ("RingBuffer", "start", "int"),
        ("RingBuffer", "count", "int"),
        ("RingBuffer", "capacity", "int"),
        ("Cell", "index", "int"),
        ("Cell", "item", "G"),
        ("Cell", "next", "Cell"),
    ),
    receiver="RingBuffer",
    classes={"RingBuffer": RingBuffer, "Cell": Cell},
    builders=(
        Builder("new", (Param("capacity", "int"),), new, constructor=True),
        Builder("extend", (Param("a_value", "G"),), extend),
        Builder("remove", (), remove),
    ),
    methods=(
        Method("count", (), count, result_type="int"),
        Method("extend", (Param("a_value", "G"),), extend),
        Method("item", (), item, result_type="G"),
        Method("remove", (), remove),
        Method("wipe_out", (), wipe_out),
    ),
    default_scope=4,
    default_invalid_ratio=1.0,
    walker=walker,
)
