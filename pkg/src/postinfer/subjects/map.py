"""Map over two parallel singly-linked lists of keys and values, searched linearly.

Indices are 0-based positions in the lists; ``extend`` replaces the value of
an existing key or appends a new entry, and returns the entry's index.
"""

from __future__ import annotations

from ..state_model import GENERIC, INTEGER, REFERENCE, ObjectGraph, Obj
from .base import Builder, HeapObject, Method, Param, Subject, make_fields, make_types, require


class Map(HeapObject):
    TYPE = "Map"
    FIELDS = ("keys", "values", "count")


class KNode(HeapObject):
    TYPE = "KNode"
    FIELDS = ("key", "next")


class VNode(HeapObject):
    TYPE = "VNode"
    FIELDS = ("value", "next")


def new() -> Map:
    return Map(keys=None, values=None, count=0)


def _index_of(m: Map, k) -> int:
    i, node = 0, m.keys
    while node is not None:
        if node.key == k:
            return i
        node = node.next
        i += 1
    return -1


def _nth(head, i: int):
    while i > 0:
        head = head.next
        i -= 1
    return head


def count(m: Map) -> int:
    return m.count


def extend(m: Map, k, v) -> int:
    i = _index_of(m, k)
    if i >= 0:
        _nth(m.values, i).value = v
        return i
    knode, vnode = KNode(key=k, next=None), VNode(value=v, next=None)
    if m.keys is None:
        m.keys, m.values = knode, vnode
    else:
        _nth(m.keys, m.count - 1).next = knode
        _nth(m.values, m.count - 1).next = vnode
    m.count += 1
    return m.count - 1


def remove(m: Map, k) -> int:
    i = _index_of(m, k)
    require(i >= 0, "key not present")
    if i == 0:
        m.keys, m.values = m.keys.next, m.values.next
    else:
        kp, vp = _nth(m.keys, i - 1), _nth(m.values, i - 1)
        kp.next, vp.next = kp.next.next, vp.next.next
    m.count -= 1
    return i


def _extend_builder(m: Map, k, v) -> None:
    extend(m, k, v)


def walker(g: ObjectGraph) -> list[str]:
    problems = []
    m = g.roots["this"]
    keys, lengths = [], []
    for head, payload in (("keys", "key"), ("values", "value")):
        node, n, seen = g.get(m, head), 0, set()
        while isinstance(node, Obj):
            if node in seen:
                problems.append(f"cycle in {head}")
                break
            seen.add(node)
            if head == "keys":
                keys.append(g.get(node, payload))
            node = g.get(node, "next")
            n += 1
        lengths.append(n)
    if lengths[0] != lengths[1]:
        problems.append(f"key/value lists differ in length {lengths}")
    if lengths[0] != g.get(m, "count"):
        problems.append(f"count {g.get(m, 'count')} != {lengths[0]}")
    if len(set(keys)) != len(keys):
        problems.append("duplicate keys")
    return problems


SUBJECT = Subject(
    name="Map",
    description="Key/value map over two parallel lists with linear search.",
    types=make_types(
        ("Map", REFERENCE), ("KNode", REFERENCE), ("VNode", REFERENCE),
        ("int", INTEGER), ("K", GENERIC), ("V", GENERIC),
    ),
    fields=make_fields(
        ("Map", "keys", "KNode"),
        ("Map", "values", "VNode"),
        ("Map", "count", "int"),
        ("KNode", "key", "K"),
        ("KNode", "next", "KNode"),
        ("VNode", "value", "V"),
        ("VNode", "next", "VNode"),
    ),
    receiver="Map",
    classes={"Map": Map, "KNode": KNode, "VNode": VNode},
    builders=(
        Builder("new", (), new, constructor=True),
        Builder("extend", (Param("k", "K"), Param("v", "V")), _extend_builder),
    ),
    methods=(
        Method("count", (), count, result_type="int"),
        Method("extend", (Param("k", "K"), Param("v", "V")), extend, result_type="int"),
        Method("remove", (Param("k", "K"),), remove, result_type="int"),
    ),
    default_scope=3,
    default_invalid_ratio=1.0,
    walker=walker,
)
