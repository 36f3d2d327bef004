"""System-model assembly.

The weaver joins one release per service into a single system model:
nodes, resolved dependency edges, and conflicts. A conflict never rejects
anything here; it is data that the release gate and the registry surface.

Version requirements resolve in two regimes. A floating requirement
(compatible or latest) binds to the target's woven node, because the
system model reflects what is current: a provider release that breaks its
dependents must surface as a conflict even when older versions would still
satisfy the range. An exact pin binds to exactly the pinned release, which
may be deprecated; that keeps pinned dependents working and is what makes
deprecation protection meaningful.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Mapping

from .lang import (
    ImportKind,
    QualifiedName,
    ReqKind,
    SemVer,
    VersionReq,
    publication_set,
    referenced_symbols,
    validate,
)

if TYPE_CHECKING:
    from .store import Release, ReleaseStatus


class ConflictKind(str, Enum):
    MISSING_SERVICE = "MissingService"
    NO_MATCHING_VERSION = "NoMatchingVersion"
    MISSING_PUBLISHED_TYPE = "MissingPublishedType"
    MISSING_INTERFACE = "MissingInterface"
    SELF_INCONSISTENT = "SelfInconsistent"


@dataclass(frozen=True)
class Conflict:
    """An integration problem between a subject release and one counterpart.

    Subject attribution: a provider release that fails to publish something
    a dependent uses is the subject; an importer pointing at a service or
    version that cannot be resolved is the subject itself. SelfInconsistent
    has no counterpart.
    """

    kind: ConflictKind
    subject: QualifiedName
    subject_version: SemVer
    message: str
    alias: str | None = None
    symbol: str | None = None
    counterpart: QualifiedName | None = None

    def key(self) -> tuple:
        """Identity used when comparing system models; subject version is ignored."""
        return (
            self.kind.value,
            str(self.subject),
            self.symbol,
            str(self.counterpart) if self.counterpart is not None else None,
        )

    def sort_key(self) -> tuple:
        return (
            str(self.subject),
            self.kind.value,
            self.symbol or "",
            (self.subject_version.major, self.subject_version.minor, self.subject_version.patch),
            self.alias or "",
            str(self.counterpart) if self.counterpart is not None else "",
            self.message,
        )

    def to_doc(self) -> dict:
        doc = {
            "kind": self.kind.value,
            "subject": str(self.subject),
            "subjectVersion": str(self.subject_version),
            "message": self.message,
        }
        if self.alias is not None:
            doc["alias"] = self.alias
        if self.symbol is not None:
            doc["symbol"] = self.symbol
        if self.counterpart is not None:
            doc["counterpart"] = str(self.counterpart)
        return doc

    @classmethod
    def from_doc(cls, doc: dict) -> "Conflict":
        return cls(
            kind=ConflictKind(doc["kind"]),
            subject=QualifiedName.parse(doc["subject"]),
            subject_version=SemVer.parse(doc["subjectVersion"]),
            message=doc["message"],
            alias=doc.get("alias"),
            symbol=doc.get("symbol"),
            counterpart=(
                QualifiedName.parse(doc["counterpart"]) if "counterpart" in doc else None
            ),
        )


@dataclass(frozen=True)
class ResolvedEdge:
    """A dependency of one woven release on a release of another service."""

    source: QualifiedName
    source_version: SemVer
    alias: str
    target: QualifiedName
    target_version: SemVer
    kind: ImportKind
    referenced_symbols: frozenset[str] = field(default_factory=frozenset)

    def to_doc(self) -> dict:
        return {
            "from": str(self.source),
            "fromVersion": str(self.source_version),
            "alias": self.alias,
            "to": str(self.target),
            "toVersion": str(self.target_version),
            "kind": self.kind.value,
            "referencedSymbols": sorted(self.referenced_symbols),
        }


@dataclass(frozen=True)
class CycleWarning:
    members: tuple[str, ...]

    def to_doc(self) -> dict:
        return {"kind": "DependencyCycle", "members": list(self.members)}


@dataclass(frozen=True)
class SystemModel:
    nodes: tuple["Release", ...]  # sorted by service name
    edges: tuple[ResolvedEdge, ...]
    conflicts: tuple[Conflict, ...]
    warnings: tuple[CycleWarning, ...]

    def node_map(self) -> dict[str, "Release"]:
        return {str(r.name): r for r in self.nodes}

    def to_doc(self) -> dict:
        return {
            "nodes": [
                {
                    "service": str(r.name),
                    "version": str(r.version),
                    "publishedTypes": sorted(publication_set(r.model)),
                    "interfaces": sorted(r.model.interface_names()),
                }
                for r in self.nodes
            ],
            "edges": [e.to_doc() for e in self.edges],
            "conflicts": [c.to_doc() for c in self.conflicts],
            "warnings": [w.to_doc() for w in self.warnings],
        }


def canonical_json(doc) -> str:
    """Deterministic JSON: sorted keys, compact separators."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


class ResolutionFailure(Exception):
    def __init__(self, requirement: VersionReq, candidates: Iterable[tuple[SemVer, "ReleaseStatus"]]):
        self.requirement = requirement
        self.candidates = tuple(candidates)
        listed = ", ".join(f"{v} {s.value}" for v, s in sorted(self.candidates, key=lambda c: c[0]))
        super().__init__(
            f"no release satisfies {requirement}"
            + (f" (candidates: {listed})" if listed else " (no releases)")
        )


def resolve_requirement(
    requirement: VersionReq, candidates: Iterable[tuple[SemVer, "ReleaseStatus"]]
) -> SemVer:
    """Pick the release a requirement binds to, or raise ResolutionFailure.

    Exact pins accept active and deprecated releases; floating requirements
    accept only active ones. Conflicted releases never resolve.
    """
    pairs = list(candidates)
    if requirement.kind is ReqKind.EXACT:
        for version, status in pairs:
            if version == requirement.base and status.value in ("active", "deprecated"):
                return version
        raise ResolutionFailure(requirement, pairs)
    matching = [
        version
        for version, status in pairs
        if status.value == "active" and requirement.matches(version)
    ]
    if not matching:
        raise ResolutionFailure(requirement, pairs)
    return max(matching)


def _cycle_warnings(edges: Iterable[ResolvedEdge]) -> tuple[CycleWarning, ...]:
    graph: dict[str, set[str]] = {}
    for edge in edges:
        graph.setdefault(str(edge.source), set()).add(str(edge.target))
        graph.setdefault(str(edge.target), set())

    # iterative Tarjan strongly connected components
    index: dict[str, int] = {}
    lowlink: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = [0]
    components: list[list[str]] = []

    def strongconnect(root: str) -> None:
        work = [(root, iter(sorted(graph[root])))]
        index[root] = lowlink[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, successors = work[-1]
            advanced = False
            for succ in successors:
                if succ not in index:
                    index[succ] = lowlink[succ] = counter[0]
                    counter[0] += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(sorted(graph[succ]))))
                    advanced = True
                    break
                if succ in on_stack:
                    lowlink[node] = min(lowlink[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
            if lowlink[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                components.append(component)

    for name in sorted(graph):
        if name not in index:
            strongconnect(name)

    warnings = [
        CycleWarning(members=tuple(sorted(component)))
        for component in components
        if len(component) > 1
    ]
    return tuple(sorted(warnings, key=lambda w: w.members))


def weave(nodes: Mapping[str, "Release"], view) -> SystemModel:
    """Assemble the given releases (one per service) into a system model.

    ``view`` supplies the stored releases used to resolve exact pins and
    imports of services without a woven node; it needs ``has_service``,
    ``candidates`` (yank-excluded), and ``get``.
    """
    conflicts: set[Conflict] = set()
    edges: list[ResolvedEdge] = []

    for service in sorted(nodes):
        release = nodes[service]
        report = validate(release.model)
        if not report.ok:
            codes = ", ".join(sorted({d.code for d in report.diagnostics}))
            conflicts.add(
                Conflict(
                    kind=ConflictKind.SELF_INCONSISTENT,
                    subject=release.name,
                    subject_version=release.version,
                    message=f"stored model fails local validation: {codes}",
                )
            )
            continue
        for imp in release.model.imports:
            target_name = str(imp.target)
            node_target = nodes.get(target_name)
            if node_target is None and not view.has_service(target_name):
                conflicts.add(
                    Conflict(
                        kind=ConflictKind.MISSING_SERVICE,
                        subject=release.name,
                        subject_version=release.version,
                        alias=imp.alias,
                        counterpart=imp.target,
                        message=(
                            f"import '{imp.alias}' of {release.name}@{release.version} "
                            f"targets unknown service {imp.target}"
                        ),
                    )
                )
                continue

            effective: "Release | None" = None
            if imp.requirement.kind is ReqKind.EXACT:
                if node_target is not None and node_target.version == imp.requirement.base:
                    effective = node_target
            else:
                effective = node_target
            if effective is None:
                try:
                    version = resolve_requirement(imp.requirement, view.candidates(target_name))
                except ResolutionFailure as failure:
                    conflicts.add(
                        Conflict(
                            kind=ConflictKind.NO_MATCHING_VERSION,
                            subject=release.name,
                            subject_version=release.version,
                            alias=imp.alias,
                            counterpart=imp.target,
                            message=(
                                f"{failure} required by {release.name}@{release.version} "
                                f"via alias '{imp.alias}'"
                            ),
                        )
                    )
                    continue
                effective = view.get(target_name, version)

            used_types, used_interfaces = referenced_symbols(release.model, imp.alias)
            published = publication_set(effective.model)
            provided_interfaces = effective.model.interface_names()
            resolved_symbols: set[str] = set()
            for type_name in sorted(used_types):
                if type_name in published:
                    resolved_symbols.add(type_name)
                else:
                    conflicts.add(
                        Conflict(
                            kind=ConflictKind.MISSING_PUBLISHED_TYPE,
                            subject=effective.name,
                            subject_version=effective.version,
                            alias=imp.alias,
                            symbol=type_name,
                            counterpart=release.name,
                            message=(
                                f"type '{type_name}' is not published by "
                                f"{effective.name}@{effective.version} "
                                f"(referenced by {release.name} via alias '{imp.alias}')"
                            ),
                        )
                    )
            for iface_name in sorted(used_interfaces):
                if iface_name in provided_interfaces:
                    resolved_symbols.add(iface_name)
                else:
                    conflicts.add(
                        Conflict(
                            kind=ConflictKind.MISSING_INTERFACE,
                            subject=effective.name,
                            subject_version=effective.version,
                            alias=imp.alias,
                            symbol=iface_name,
                            counterpart=release.name,
                            message=(
                                f"interface '{iface_name}' is not provided by "
                                f"{effective.name}@{effective.version} "
                                f"(required by {release.name} via alias '{imp.alias}')"
                            ),
                        )
                    )
            edges.append(
                ResolvedEdge(
                    source=release.name,
                    source_version=release.version,
                    alias=imp.alias,
                    target=effective.name,
                    target_version=effective.version,
                    kind=imp.kind,
                    referenced_symbols=frozenset(resolved_symbols),
                )
            )

    ordered_edges = tuple(sorted(edges, key=lambda e: (str(e.source), e.alias)))
    return SystemModel(
        nodes=tuple(nodes[name] for name in sorted(nodes)),
        edges=ordered_edges,
        conflicts=tuple(sorted(conflicts, key=Conflict.sort_key)),
        warnings=_cycle_warnings(ordered_edges),
    )


def current_system_model(view) -> SystemModel:
    """Weave the latest active release of every service known to the view."""
    if hasattr(view, "snapshot"):
        view = view.snapshot()
    nodes = {}
    for service in view.services():
        latest = view.latest_active(service)
        if latest is not None:
            nodes[service] = latest
    return weave(nodes, view)


def diff_conflicts(before: SystemModel, after: SystemModel) -> tuple[Conflict, ...]:
    """Conflicts present in after whose identity does not occur in before."""
    before_keys = {c.key() for c in before.conflicts}
    return tuple(c for c in after.conflicts if c.key() not in before_keys)
