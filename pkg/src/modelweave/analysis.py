"""Release-time decisions on top of the store and the weaver.

Every release candidate is gated: the system model is woven once as it
stands and once with the candidate substituted as its service's node, and
only new conflicts touching the candidate's service count against it. A
conflicted candidate is stored anyway, marked, for the owning team to
revise; it never becomes anyone's resolution target.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lang import (
    ExportDiff,
    Model,
    QualifiedName,
    SemVer,
    ValidationReport,
    canonicalize,
    diff_exports,
    parse,
    validate,
)
from .store import (
    ModelStore,
    NotFound,
    Release,
    ReleaseIndex,
    ReleaseStatus,
    ResolvedDep,
    VersionExists,
    utc_now,
)
from .weaver import (
    Conflict,
    ConflictKind,
    ResolvedEdge,
    current_system_model,
    diff_conflicts,
    weave,
)


class ValidationFailed(Exception):
    def __init__(self, report: ValidationReport):
        self.report = report
        first = report.diagnostics[0]
        super().__init__(
            f"model is not locally valid ({len(report.diagnostics)} diagnostics, "
            f"first: {first.code} at {first.location})"
        )


class PreconditionViolation(Exception):
    pass


@dataclass(frozen=True)
class PublishReceipt:
    name: QualifiedName
    version: SemVer
    status: ReleaseStatus
    conflicts: tuple[Conflict, ...] = ()

    def to_doc(self) -> dict:
        return {
            "name": str(self.name),
            "version": str(self.version),
            "status": self.status.value,
            "conflicts": [c.to_doc() for c in self.conflicts],
        }


@dataclass(frozen=True)
class Dependent:
    service: QualifiedName
    version: SemVer
    alias: str
    referenced_symbols: frozenset[str] = field(default_factory=frozenset)

    def to_doc(self) -> dict:
        return {
            "service": str(self.service),
            "version": str(self.version),
            "alias": self.alias,
            "referencedSymbols": sorted(self.referenced_symbols),
        }


@dataclass(frozen=True)
class AffectedDependent:
    service: QualifiedName
    broken_symbols: frozenset[str]

    def to_doc(self) -> dict:
        return {"service": str(self.service), "brokenSymbols": sorted(self.broken_symbols)}


@dataclass(frozen=True)
class ImpactReport:
    export_diff: ExportDiff
    prospective_conflicts: tuple[Conflict, ...] = ()
    affected_dependents: tuple[AffectedDependent, ...] = ()

    def to_doc(self) -> dict:
        return {
            "exportDiff": self.export_diff.to_doc(),
            "prospectiveConflicts": [c.to_doc() for c in self.prospective_conflicts],
            "affectedDependents": [d.to_doc() for d in self.affected_dependents],
        }


@dataclass(frozen=True)
class YankBlocker:
    dependent: QualifiedName
    dependent_version: SemVer
    edge: ResolvedEdge

    def to_doc(self) -> dict:
        return {
            "dependent": str(self.dependent),
            "dependentVersion": str(self.dependent_version),
            "pinnedEdge": self.edge.to_doc(),
        }


@dataclass(frozen=True)
class YankVerdict:
    allowed: bool
    blockers: tuple[YankBlocker, ...] = ()

    def to_doc(self) -> dict:
        return {"allowed": self.allowed, "blockers": [b.to_doc() for b in self.blockers]}


def _candidate_release(model: Model) -> Release:
    return Release(
        name=model.name,
        version=model.version,
        model=model,
        source=canonicalize(model),
        status=ReleaseStatus.ACTIVE,
        published_at=utc_now(),
    )


def _gate(view: ReleaseIndex, model: Model) -> tuple[tuple[Conflict, ...], tuple[ResolvedDep, ...]]:
    """New conflicts the candidate would introduce, plus its resolved imports."""
    service = str(model.name)
    before = current_system_model(view)
    nodes = {}
    for name in view.services():
        latest = view.latest_active(name)
        if latest is not None:
            nodes[name] = latest
    candidate = _candidate_release(model)
    nodes[service] = candidate
    after = weave(nodes, view)
    new_conflicts = tuple(
        c
        for c in diff_conflicts(before, after)
        if str(c.subject) == service or (c.counterpart is not None and str(c.counterpart) == service)
    )
    deps = tuple(
        ResolvedDep(alias=e.alias, target=e.target, pinned=e.target_version)
        for e in after.edges
        if str(e.source) == service and e.source_version == model.version
    )
    return new_conflicts, tuple(sorted(deps, key=lambda d: d.alias))


def integrability_check(
    store: ModelStore, model: Model
) -> tuple[ReleaseStatus, tuple[Conflict, ...], tuple[ResolvedDep, ...]]:
    """Gate a not-yet-stored candidate; refuses duplicates and regressions."""
    report = validate(model)
    if not report.ok:
        raise ValidationFailed(report)
    stored = store.list_releases(str(model.name))
    for version, _status in stored:
        if version == model.version:
            raise VersionExists(f"{model.name}@{model.version} is already stored")
    newest = max((v for v, _ in stored), default=None)
    if newest is not None and model.version < newest:
        raise PreconditionViolation(
            f"version {model.version} does not exceed already stored {newest}"
        )
    conflicts, deps = _gate(store.snapshot(), model)
    status = ReleaseStatus.CONFLICTED if conflicts else ReleaseStatus.ACTIVE
    return status, conflicts, deps


def publish(store: ModelStore, source: str) -> PublishReceipt:
    """Parse, validate, gate, and store one release candidate.

    A candidate that fails parsing or validation is never stored; one that
    merely conflicts is stored with status conflicted.
    """
    model = parse(source)
    status, conflicts, deps = integrability_check(store, model)
    release = Release(
        name=model.name,
        version=model.version,
        model=model,
        source=canonicalize(model),
        status=status,
        published_at=utc_now(),
        resolved_deps=deps,
        conflicts=conflicts if status is ReleaseStatus.CONFLICTED else (),
    )
    store.put_release(release)
    return PublishReceipt(
        name=model.name, version=model.version, status=status, conflicts=conflicts
    )


def impact(store: ModelStore | ReleaseIndex, source: str) -> ImpactReport:
    """Dry-run a candidate: export diff, would-be conflicts, touched dependents.

    Never writes; unlike publish it accepts any candidate version, since
    asking about a hypothetical release must always be possible.
    """
    model = parse(source)
    report = validate(model)
    if not report.ok:
        raise ValidationFailed(report)
    view = store.snapshot()
    prior = view.latest_active(str(model.name))
    export_diff = diff_exports(prior.model, model) if prior is not None else ExportDiff()
    conflicts, _deps = _gate(view, model)
    affected: dict[str, set[str]] = {}
    for conflict in conflicts:
        if (
            conflict.kind in (ConflictKind.MISSING_PUBLISHED_TYPE, ConflictKind.MISSING_INTERFACE)
            and str(conflict.subject) == str(model.name)
            and conflict.counterpart is not None
            and conflict.symbol is not None
        ):
            affected.setdefault(str(conflict.counterpart), set()).add(conflict.symbol)
    dependents_out = tuple(
        AffectedDependent(service=QualifiedName.parse(name), broken_symbols=frozenset(symbols))
        for name, symbols in sorted(affected.items())
    )
    return ImpactReport(
        export_diff=export_diff,
        prospective_conflicts=conflicts,
        affected_dependents=dependents_out,
    )


def dependents(store: ModelStore | ReleaseIndex, name: str) -> tuple[Dependent, ...]:
    """Who depends on this service in the current system model."""
    view = store.snapshot()
    if not view.has_service(name):
        raise NotFound(f"unknown service {name}")
    system = current_system_model(view)
    found = [
        Dependent(
            service=e.source,
            version=e.source_version,
            alias=e.alias,
            referenced_symbols=e.referenced_symbols,
        )
        for e in system.edges
        if str(e.target) == name
    ]
    return tuple(sorted(found, key=lambda d: (str(d.service), d.alias)))


def deprecate(store: ModelStore, name: str, version: SemVer) -> Release:
    """Retire a release; idempotent on an already deprecated one."""
    store.get_release(name, version)
    return store.set_status(name, version, ReleaseStatus.DEPRECATED)


def yank(store: ModelStore, name: str, version: SemVer) -> YankVerdict:
    """Permanently retire a release unless the current system model still uses it.

    Refusal lists every woven edge targeting exactly this release,
    exact-pinned ones included. On success the release stays on disk,
    deprecated and flagged, and stops being a resolution candidate.
    """
    store.get_release(name, version)
    system = current_system_model(store.snapshot())
    blockers = tuple(
        YankBlocker(dependent=e.source, dependent_version=e.source_version, edge=e)
        for e in system.edges
        if str(e.target) == name and e.target_version == version
    )
    if blockers:
        return YankVerdict(allowed=False, blockers=blockers)
    store.mark_yanked(name, version)
    return YankVerdict(allowed=True)
