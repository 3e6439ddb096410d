"""Catalog of analysed data structures."""

from __future__ import annotations

import json

from ..state_model import UsageError
from . import (
    avl_tree_list, composite, doubly_linked_list_node, linked_list, map, max_bag, ring_buffer,
)
from .base import (
    Builder, HeapObject, Method, Param, PreconditionViolation, Subject, apply_builder, execute,
    materialize, merge_roots, primitive_domain, renumber, snapshot,
)

_CATALOG = (
    avl_tree_list.SUBJECT,
    doubly_linked_list_node.SUBJECT,
    map.SUBJECT,
    ring_buffer.SUBJECT,
    composite.SUBJECT,
    max_bag.SUBJECT,
    linked_list.SUBJECT,
)


def list_subjects() -> list[Subject]:
    return list(_CATALOG)


def get_subject(name: str) -> Subject:
    for s in _CATALOG:
        if s.name == name:
            return s
    raise UsageError(f"unknown subject {name!r}; known: {', '.join(s.name for s in _CATALOG)}")


def catalog_json() -> str:
    return json.dumps([s.to_json() for s in _CATALOG], indent=2)


__all__ = [
    "Builder", "HeapObject", "Method", "Param", "PreconditionViolation", "Subject",
    "apply_builder", "catalog_json", "execute", "get_subject", "list_subjects", "materialize",
    "merge_roots", "primitive_domain", "renumber", "snapshot",
]
