"""Wire contract of the registry API, as pydantic models.

Response bodies are produced by the domain objects' to_doc methods and
checked against these schemas before going out, so a drift between the
two is an internal error instead of a silently changed contract.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

ErrorCode = Literal[
    "PARSE_ERROR",
    "VALIDATION_ERROR",
    "NOT_FOUND",
    "VERSION_EXISTS",
    "VERSION_REGRESSION",
    "DEPENDENTS_EXIST",
    "INVALID_TRANSITION",
    "INTERNAL",
]


class ApiError(BaseModel):
    httpStatus: int
    code: ErrorCode
    message: str
    details: dict | None = None


class ConflictDoc(BaseModel):
    kind: Literal[
        "MissingService",
        "NoMatchingVersion",
        "MissingPublishedType",
        "MissingInterface",
        "SelfInconsistent",
    ]
    subject: str
    subjectVersion: str
    message: str
    alias: str | None = None
    symbol: str | None = None
    counterpart: str | None = None


class NodeDoc(BaseModel):
    service: str
    version: str
    publishedTypes: list[str]
    interfaces: list[str]


class EdgeDoc(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    from_: str = Field(alias="from")
    fromVersion: str
    alias: str
    to: str
    toVersion: str
    kind: Literal["datatypes", "interfaces", "all"]
    referencedSymbols: list[str]


class WarningDoc(BaseModel):
    kind: Literal["DependencyCycle"]
    members: list[str]


class SystemModelDoc(BaseModel):
    nodes: list[NodeDoc]
    edges: list[EdgeDoc]
    conflicts: list[ConflictDoc]
    warnings: list[WarningDoc]


class ReceiptDoc(BaseModel):
    name: str
    version: str
    status: Literal["active", "conflicted"]
    conflicts: list[ConflictDoc]


class ResolvedDepDoc(BaseModel):
    alias: str
    target: str
    pinned: str


class ReleaseSummaryDoc(BaseModel):
    version: str
    status: Literal["active", "conflicted", "deprecated"]
    yanked: bool = False


class ReleaseDetailDoc(BaseModel):
    service: str
    version: str
    source: str
    status: Literal["active", "conflicted", "deprecated"]
    publishedAt: str
    resolvedDeps: list[ResolvedDepDoc]
    conflicts: list[ConflictDoc]
    yanked: bool = False


class OperationRefDoc(BaseModel):
    interface: str
    operation: str


class ExportDiffDoc(BaseModel):
    removedTypes: list[str]
    addedTypes: list[str]
    removedInterfaces: list[str]
    addedInterfaces: list[str]
    removedOperations: list[OperationRefDoc]
    changedOperations: list[OperationRefDoc]


class AffectedDependentDoc(BaseModel):
    service: str
    brokenSymbols: list[str]


class ImpactReportDoc(BaseModel):
    exportDiff: ExportDiffDoc
    prospectiveConflicts: list[ConflictDoc]
    affectedDependents: list[AffectedDependentDoc]


class DependentDoc(BaseModel):
    service: str
    version: str
    alias: str
    referencedSymbols: list[str]


class YankBlockerDoc(BaseModel):
    dependent: str
    dependentVersion: str
    pinnedEdge: EdgeDoc


class YankVerdictDoc(BaseModel):
    allowed: bool
    blockers: list[YankBlockerDoc]


class ReleaseStatusDoc(BaseModel):
    service: str
    version: str
    status: Literal["active", "conflicted", "deprecated"]
    yanked: bool = False
