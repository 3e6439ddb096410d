"""Node of a circular doubly-linked list; a lone node links to itself."""

from __future__ import annotations

from ..state_model import REFERENCE, ObjectGraph, Obj
from .base import Builder, HeapObject, Method, Param, Subject, make_fields, make_types, require


class Node(HeapObject):
    TYPE = "Node"
    FIELDS = ("left", "right")


def new() -> Node:
    n = Node()
    n.left = n
    n.right = n
    return n


def insert_right(node: Node, n: Node) -> None:
    require(n.left is n and n.right is n, "n must be a singleton")
    n.left = node
    n.right = node.right
    node.right.left = n
    node.right = n


def insert_right_fresh(node: Node) -> None:
    insert_right(node, new())


def remove(node: Node) -> None:
    node.left.right = node.right
    node.right.left = node.left
    node.left = node
    node.right = node


def is_singleton(g: ObjectGraph) -> bool:
    n = g.roots["this"]
    return g.get(n, "left") == n and g.get(n, "right") == n


def walker(g: ObjectGraph) -> list[str]:
    problems = []
    for obj in g.reachable():
        left, right = g.get(obj, "left"), g.get(obj, "right")
        if not isinstance(left, Obj) or not isinstance(right, Obj):
            problems.append(f"{obj!r} has a null link")
            continue
        if g.get(right, "left") != obj:
            problems.append(f"{obj!r}.right.left is not {obj!r}")
        if g.get(left, "right") != obj:
            problems.append(f"{obj!r}.left.right is not {obj!r}")
    return problems


def _n_singleton(name: str, g: ObjectGraph) -> bool:
    return is_singleton(g)


SUBJECT = Subject(
    name="DoublyLinkedListNode",
    description="Circular doubly-linked list node with consistent left/right links.",
    types=make_types(("Node", REFERENCE)),
    fields=make_fields(("Node", "left", "Node"), ("Node", "right", "Node")),
    receiver="Node",
    classes={"Node": Node},
    builders=(
        Builder("new", (), new, constructor=True),
        Builder("insert_right_fresh", (), insert_right_fresh),
    ),
    methods=(
        Method("insert_right", (Param("n", "Node"),), insert_right, arg_filter=_n_singleton),
        Method("remove", (), remove),
    ),
    default_scope=4,
    default_invalid_ratio=4.0,
    walker=walker,
)
