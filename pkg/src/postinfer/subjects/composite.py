"""Composite tree where each node's value is the maximum over its subtree.

Children are kept in first-child/next-sibling form, in insertion order.
"""

from __future__ import annotations

from ..state_model import INTEGER, NULL, REFERENCE, ObjectGraph, Obj
from .base import Builder, HeapObject, Method, Param, Subject, make_fields, make_types, require


class Composite(HeapObject):
    TYPE = "Composite"
    FIELDS = ("value", "parent", "first_child", "next_sibling")


def new(v: int) -> Composite:
    return Composite(value=v, parent=None, first_child=None, next_sibling=None)


def _update(node: Composite, v: int) -> None:
    while node is not None:
        if v > node.value:
            node.value = v
        node = node.parent


def add_child(node: Composite, c: Composite) -> None:
    require(c is not node, "cannot adopt itself")
    require(c.parent is None and c.first_child is None and c.next_sibling is None, "c must be a lone leaf")
    c.parent = node
    if node.first_child is None:
        node.first_child = c
    else:
        last = node.first_child
        while last.next_sibling is not None:
            last = last.next_sibling
        last.next_sibling = c
    _update(node, c.value)


def add_child_new(node: Composite, v: int) -> None:
    add_child(node, new(v))


def attach_to_new_parent(node: Composite, v: int) -> None:
    require(node.parent is None, "node already has a parent")
    add_child(new(v), node)


def _lone_leaf(name: str, g: ObjectGraph) -> bool:
    c = g.roots["this"]
    return all(g.get(c, f) is NULL for f in ("parent", "first_child", "next_sibling"))


def walker(g: ObjectGraph) -> list[str]:
    """Parent/child consistency and the max-value property over the whole tree."""
    problems = []
    node = g.roots["this"]
    seen = set()
    while isinstance(g.get(node, "parent"), Obj):
        if node in seen:
            return ["parent cycle"]
        seen.add(node)
        node = g.get(node, "parent")
    visited: set = set()

    def walk(n) -> int:
        if n in visited:
            problems.append(f"{n!r} visited twice")
            return g.get(n, "value")
        visited.add(n)
        best = g.get(n, "value")
        child = g.get(n, "first_child")
        while isinstance(child, Obj):
            if g.get(child, "parent") != n:
                problems.append(f"{child!r}.parent is not {n!r}")
            best_child = walk(child)
            best = max(best, best_child)
            child = g.get(child, "next_sibling")
        if best != g.get(n, "value"):
            problems.append(f"{n!r} value {g.get(n, 'value')} is not the subtree max {best}")
        return best

    walk(node)
    return problems


SUBJECT = Subject(
    name="Composite",
    description="Tree whose node values are the maxima of their subtrees.",
    types=make_types(("Composite", REFERENCE), ("int", INTEGER)),
    fields=make_fields(
        ("Composite", "value", "int"),
        ("Composite", "parent", "Composite"),
        ("Composite", "first_child", "Composite"),
        ("Composite", "next_sibling", "Composite"),
    ),
    receiver="Composite",
    classes={"Composite": Composite},
    builders=(
        Builder("new", (Param("v", "int"),), new, constructor=True),
        Builder("add_child_new", (Param("v", "int"),), add_child_new),
        Builder("attach_to_new_parent", (Param("v", "int"),), attach_to_new_parent),
    ),
    methods=(
        Method("add_child", (Param("c", "Composite"),), add_child, arg_filter=_lone_leaf),
    ),
    default_scope=3,
    default_invalid_ratio=1.0,
    walker=walker,
)
