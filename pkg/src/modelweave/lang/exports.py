"""What a model makes visible to other services.

A model publishes all of its interfaces plus every local type reachable
from an interface operation parameter, following structure fields and list
elements. Foreign references belong to another service's surface and are
never followed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import ForeignRef, ListType, LocalRef, Model, TypeRef


def _local_names(ref: TypeRef) -> list[str]:
    if isinstance(ref, ListType):
        return _local_names(ref.element)
    if isinstance(ref, LocalRef):
        return [ref.type_name]
    return []


def _foreign_refs(ref: TypeRef) -> list[ForeignRef]:
    if isinstance(ref, ListType):
        return _foreign_refs(ref.element)
    if isinstance(ref, ForeignRef):
        return [ref]
    return []


def publication_set(model: Model) -> frozenset[str]:
    """Local structure and enum names reachable from interface parameters."""
    declared = model.type_names()
    structures = model.structure_by_name()
    stack: list[str] = []
    for iface in model.interfaces:
        for op in iface.operations:
            for param in op.params:
                stack.extend(_local_names(param.type))
    published: set[str] = set()
    while stack:
        name = stack.pop()
        if name in published or name not in declared:
            continue
        published.add(name)
        structure = structures.get(name)
        if structure is not None:
            for fld in structure.fields:
                stack.extend(_local_names(fld.type))
    return frozenset(published)


def referenced_symbols(model: Model, alias: str) -> tuple[frozenset[str], frozenset[str]]:
    """Foreign type names and required interface names used through alias."""
    types: set[str] = set()
    for structure in model.structures:
        for fld in structure.fields:
            types.update(r.type_name for r in _foreign_refs(fld.type) if r.alias == alias)
    for iface in model.interfaces:
        for op in iface.operations:
            for param in op.params:
                types.update(r.type_name for r in _foreign_refs(param.type) if r.alias == alias)
    interfaces = {r.interface for r in model.requires if r.alias == alias}
    return frozenset(types), frozenset(interfaces)


@dataclass(frozen=True)
class ExportDiff:
    """Difference between the exported surfaces of two model versions."""

    removed_types: frozenset[str] = field(default_factory=frozenset)
    added_types: frozenset[str] = field(default_factory=frozenset)
    removed_interfaces: frozenset[str] = field(default_factory=frozenset)
    added_interfaces: frozenset[str] = field(default_factory=frozenset)
    removed_operations: frozenset[tuple[str, str]] = field(default_factory=frozenset)
    changed_operations: frozenset[tuple[str, str]] = field(default_factory=frozenset)

    @property
    def empty(self) -> bool:
        return not (
            self.removed_types
            or self.added_types
            or self.removed_interfaces
            or self.added_interfaces
            or self.removed_operations
            or self.changed_operations
        )

    def to_doc(self) -> dict:
        def pairs(items: frozenset[tuple[str, str]]) -> list[dict]:
            return [
                {"interface": iface, "operation": op} for iface, op in sorted(items)
            ]

        return {
            "removedTypes": sorted(self.removed_types),
            "addedTypes": sorted(self.added_types),
            "removedInterfaces": sorted(self.removed_interfaces),
            "addedInterfaces": sorted(self.added_interfaces),
            "removedOperations": pairs(self.removed_operations),
            "changedOperations": pairs(self.changed_operations),
        }


def diff_exports(old: Model, new: Model) -> ExportDiff:
    """Compare exported surfaces; operation diffs cover interfaces present in both."""
    pub_old = publication_set(old)
    pub_new = publication_set(new)
    old_ifaces = {i.name: i for i in old.interfaces}
    new_ifaces = {i.name: i for i in new.interfaces}

    removed_ops: set[tuple[str, str]] = set()
    changed_ops: set[tuple[str, str]] = set()
    for name in old_ifaces.keys() & new_ifaces.keys():
        old_ops = {o.name: o for o in old_ifaces[name].operations}
        new_ops = {o.name: o for o in new_ifaces[name].operations}
        for op_name in old_ops.keys() - new_ops.keys():
            removed_ops.add((name, op_name))
        for op_name in old_ops.keys() & new_ops.keys():
            if old_ops[op_name].params != new_ops[op_name].params:
                changed_ops.add((name, op_name))

    return ExportDiff(
        removed_types=frozenset(pub_old - pub_new),
        added_types=frozenset(pub_new - pub_old),
        removed_interfaces=frozenset(old_ifaces.keys() - new_ifaces.keys()),
        added_interfaces=frozenset(new_ifaces.keys() - old_ifaces.keys()),
        removed_operations=frozenset(removed_ops),
        changed_operations=frozenset(changed_ops),
    )
