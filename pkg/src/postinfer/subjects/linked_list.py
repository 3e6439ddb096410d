"""Singly-linked list of integers with prepend; a small subject for enumeration checks."""

from __future__ import annotations

from ..state_model import INTEGER, REFERENCE
from .base import Builder, HeapObject, Method, Param, Subject, make_fields, make_types


class LinkedList(HeapObject):
    TYPE = "LinkedList"
    FIELDS = ("head",)


class LNode(HeapObject):
    TYPE = "LNode"
    FIELDS = ("value", "next")


def new() -> LinkedList:
    return LinkedList(head=None)


def add_first(lst: LinkedList, v: int) -> None:
    lst.head = LNode(value=v, next=lst.head)


def size(lst: LinkedList) -> int:
    n, c = 0, lst.head
    while c is not None:
        n, c = n + 1, c.next
    return n


SUBJECT = Subject(
    name="SinglyLinkedList",
    description="Singly-linked integer list with addFirst.",
    types=make_types(("LinkedList", REFERENCE), ("LNode", REFERENCE), ("int", INTEGER)),
    fields=make_fields(("LinkedList", "head", "LNode"), ("LNode", "value", "int"), ("LNode", "next", "LNode")),
    receiver="LinkedList",
    classes={"LinkedList": LinkedList, "LNode": LNode},
    builders=(
        Builder("new", (), new, constructor=True),
        Builder("addFirst", (Param("v", "int"),), add_first),
    ),
    methods=(
        Method("addFirst", (Param("v", "int"),), add_first),
        Method("size", (), size, result_type="int"),
    ),
    default_scope=2,
    default_invalid_ratio=1.0,
)
