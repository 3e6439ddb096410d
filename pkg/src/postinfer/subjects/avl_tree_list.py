"""AVL-tree-backed list with order-statistic indexing (nayuki's algorithm).

Leaves are a shared sentinel node with height 0 and size 0 whose own links
are null, as in the reference implementation.  Snapshots keep the
sentinel as an ordinary ``Node`` atom; ``count_objects`` leaves it out of the
per-type object bound.
"""

from __future__ import annotations

from ..state_model import GENERIC, INTEGER, NULL, REFERENCE, ObjectGraph, Obj
from .base import (
    Builder, HeapObject, Method, Param, Subject, make_fields, make_types, require,
)


class AvlTreeList(HeapObject):
    TYPE = "AvlTreeList"
    FIELDS = ("root",)


class Node(HeapObject):
    TYPE = "Node"
    FIELDS = ("value", "height", "size", "left", "right")


def _is_empty(node: Node) -> bool:
    return node.left is None


def _sentinel(tree: AvlTreeList) -> Node:
    node = tree.root
    while not _is_empty(node):
        node = node.left
    return node


def _new_node(value, empty: Node) -> Node:
    return Node(value=value, height=1, size=1, left=empty, right=empty)


def _recalculate(node: Node) -> None:
    node.height = max(node.left.height, node.right.height) + 1
    node.size = node.left.size + node.right.size + 1


def _balance_factor(node: Node) -> int:
    return node.right.height - node.left.height


def _rotate_left(node: Node) -> Node:
    top = node.right
    node.right = top.left
    top.left = node
    _recalculate(node)
    _recalculate(top)
    return top


def _rotate_right(node: Node) -> Node:
    top = node.left
    node.left = top.right
    top.right = node
    _recalculate(node)
    _recalculate(top)
    return top


def _balance(node: Node) -> Node:
    bal = _balance_factor(node)
    if bal == -2:
        if _balance_factor(node.left) == 1:
            node.left = _rotate_left(node.left)
        return _rotate_right(node)
    if bal == 2:
        if _balance_factor(node.right) == -1:
            node.right = _rotate_right(node.right)
        return _rotate_left(node)
    return node


def _insert_at(node: Node, index: int, value, empty: Node) -> Node:
    if _is_empty(node):
        return _new_node(value, empty)
    left_size = node.left.size
    if index <= left_size:
        node.left = _insert_at(node.left, index, value, empty)
    else:
        node.right = _insert_at(node.right, index - left_size - 1, value, empty)
    _recalculate(node)
    return _balance(node)


def new() -> AvlTreeList:
    empty = Node(value=None, height=0, size=0, left=None, right=None)
    return AvlTreeList(root=empty)


def add(tree: AvlTreeList, index: int, val) -> None:
    require(0 <= index <= tree.root.size, "index out of bounds")
    tree.root = _insert_at(tree.root, index, val, _sentinel(tree))


def get(tree: AvlTreeList, index: int):
    require(0 <= index < tree.root.size, "index out of bounds")
    node = tree.root
    while True:
        left_size = node.left.size
        if index < left_size:
            node = node.left
        elif index > left_size:
            index -= left_size + 1
            node = node.right
        else:
            return node.value


def count_objects(g: ObjectGraph) -> dict:
    counts: dict = {}
    for obj in g.reachable():
        if obj.type == "Node" and g.get(obj, "size") == 0:
            continue
        counts[obj.type] = counts.get(obj.type, 0) + 1
    return counts


def walker(g: ObjectGraph) -> list[str]:
    """Structural problems of the tree under ``this``: cycles, balance, size, height."""
    problems: list[str] = []
    root = g.roots["this"]
    if not isinstance(root, Obj):
        return ["receiver is not an object"]
    start = g.get(root, "root")
    sentinel = None
    seen: set = set()

    def walk(node, depth) -> tuple[int, int]:
        nonlocal sentinel
        if not isinstance(node, Obj):
            problems.append(f"null child reached at depth {depth}")
            return 0, 0
        if g.get(node, "left") is NULL:
            if sentinel is None:
                sentinel = node
            elif sentinel != node:
                problems.append(f"second sentinel {node!r}")
            if g.get(node, "right") is not NULL or g.get(node, "size") != 0 or g.get(node, "height") != 0:
                problems.append(f"malformed sentinel {node!r}")
            return 0, 0
        if node in seen:
            problems.append(f"{node!r} reached twice")
            return 0, 0
        seen.add(node)
        lh, ls = walk(g.get(node, "left"), depth + 1)
        rh, rs = walk(g.get(node, "right"), depth + 1)
        if abs(lh - rh) > 1:
            problems.append(f"{node!r} unbalanced ({lh} vs {rh})")
        if g.get(node, "height") != max(lh, rh) + 1:
            problems.append(f"{node!r} height {g.get(node, 'height')} != {max(lh, rh) + 1}")
        if g.get(node, "size") != ls + rs + 1:
            problems.append(f"{node!r} size {g.get(node, 'size')} != {ls + rs + 1}")
        return max(lh, rh) + 1, ls + rs + 1

    walk(start, 0)
    return problems


SUBJECT = Subject(
    name="AvlTreeList",
    description="List over an AVL tree with subtree sizes; insertion by index.",
    types=make_types(("AvlTreeList", REFERENCE), ("Node", REFERENCE), ("int", INTEGER), ("E", GENERIC)),
    fields=make_fields(
        ("AvlTreeList", "root", "Node"),
        ("Node", "value", "E"),
        ("Node", "height", "int"),
        ("Node", "size", "int"),
        ("Node", "left", "Node"),
        ("Node", "right", "Node"),
    ),
    receiver="AvlTreeList",
    classes={"AvlTreeList": AvlTreeList, "Node": Node},
    builders=(
        Builder("new", (), new, constructor=True),
        Builder("add", (Param("index", "int"), Param("val", "E")), add),
    ),
    methods=(
        Method("add", (Param("index", "int"), Param("val", "E")), add),
        Method("get", (Param("index", "int"),), get, result_type="E"),
    ),
    default_scope=3,
    default_invalid_ratio=1.0,
    count_objects=count_objects,
    walker=walker,
)
