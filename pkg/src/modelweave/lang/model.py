"""Syntax tree and value types for the modeling language.

A model describes one microservice from three viewpoints: the data types it
defines, the interfaces it provides and requires, and how it is deployed.
All nodes are immutable; equality is plain structural equality, so two
models parsed from the same canonical text compare equal.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

_SEGMENT_RE = re.compile(r"[a-z][a-z0-9_]*\Z")
_IDENT_RE = re.compile(r"[a-zA-Z][a-zA-Z0-9_]*\Z")

PRIMITIVES = ("string", "int", "float", "boolean")


@dataclass(frozen=True, order=True)
class SemVer:
    major: int
    minor: int
    patch: int

    @classmethod
    def parse(cls, text: str) -> "SemVer":
        m = re.fullmatch(r"(\d+)\.(\d+)\.(\d+)", text)
        if m is None:
            raise ValueError(f"not a version number: {text!r}")
        return cls(int(m.group(1)), int(m.group(2)), int(m.group(3)))

    def __str__(self) -> str:
        return f"{self.major}.{self.minor}.{self.patch}"


@dataclass(frozen=True, order=True)
class QualifiedName:
    """A service name of the form team.service, both segments lowercase."""

    team: str
    service: str

    @classmethod
    def parse(cls, text: str) -> "QualifiedName":
        parts = text.split(".")
        if len(parts) != 2 or not all(_SEGMENT_RE.fullmatch(p) for p in parts):
            raise ValueError(f"not a qualified service name: {text!r}")
        return cls(parts[0], parts[1])

    def __str__(self) -> str:
        return f"{self.team}.{self.service}"


class ImportKind(str, Enum):
    DATATYPES = "datatypes"
    INTERFACES = "interfaces"
    ALL = "all"


class ReqKind(str, Enum):
    EXACT = "exact"
    COMPATIBLE = "compatible"
    LATEST = "latest"


@dataclass(frozen=True)
class VersionReq:
    """A version requirement: an exact pin, a compatible range, or latest."""

    kind: ReqKind
    base: SemVer | None = None

    def __post_init__(self) -> None:
        if self.kind is ReqKind.LATEST:
            if self.base is not None:
                raise ValueError("latest requirement carries no base version")
        elif self.base is None:
            raise ValueError(f"{self.kind.value} requirement needs a base version")

    def matches(self, version: SemVer) -> bool:
        if self.kind is ReqKind.LATEST:
            return True
        assert self.base is not None
        if self.kind is ReqKind.EXACT:
            return version == self.base
        return version.major == self.base.major and version >= self.base

    def __str__(self) -> str:
        if self.kind is ReqKind.LATEST:
            return "*"
        prefix = "=" if self.kind is ReqKind.EXACT else "^"
        return f"{prefix}{self.base}"


@dataclass(frozen=True)
class Import:
    kind: ImportKind
    target: QualifiedName
    requirement: VersionReq
    alias: str


class TypeRef:
    """Base class for type references appearing in fields and parameters."""

    __slots__ = ()


@dataclass(frozen=True)
class Primitive(TypeRef):
    name: str  # one of PRIMITIVES

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class ListType(TypeRef):
    element: TypeRef

    def __str__(self) -> str:
        return f"list<{self.element}>"


@dataclass(frozen=True)
class LocalRef(TypeRef):
    type_name: str

    def __str__(self) -> str:
        return self.type_name


@dataclass(frozen=True)
class ForeignRef(TypeRef):
    alias: str
    type_name: str

    def __str__(self) -> str:
        return f"{self.alias}.{self.type_name}"


@dataclass(frozen=True)
class Field:
    name: str
    type: TypeRef


@dataclass(frozen=True)
class Structure:
    name: str
    fields: tuple[Field, ...]


@dataclass(frozen=True)
class EnumDecl:
    name: str
    literals: tuple[str, ...]


@dataclass(frozen=True)
class Param:
    direction: str  # "in" or "out"
    name: str
    type: TypeRef


@dataclass(frozen=True)
class Operation:
    name: str
    params: tuple[Param, ...]


@dataclass(frozen=True)
class Interface:
    name: str
    operations: tuple[Operation, ...]


@dataclass(frozen=True)
class RequiresClause:
    alias: str
    interface: str


@dataclass(frozen=True)
class EnvVar:
    name: str
    default: str | None = None


@dataclass(frozen=True)
class Deployment:
    name: str
    technology: str | None = None
    protocol: str | None = None  # "http" or "amqp"
    port: int | None = None
    base_path: str | None = None
    env: tuple[EnvVar, ...] = ()
    depends_on: tuple[str, ...] = ()


@dataclass(frozen=True)
class Model:
    """One microservice model: header, imports, and the three viewpoints."""

    name: QualifiedName
    version: SemVer
    imports: tuple[Import, ...] = ()
    structures: tuple[Structure, ...] = ()
    enums: tuple[EnumDecl, ...] = ()
    interfaces: tuple[Interface, ...] = ()
    requires: tuple[RequiresClause, ...] = ()
    deployments: tuple[Deployment, ...] = ()

    def type_names(self) -> set[str]:
        return {s.name for s in self.structures} | {e.name for e in self.enums}

    def structure_by_name(self) -> dict[str, Structure]:
        return {s.name: s for s in self.structures}

    def interface_names(self) -> set[str]:
        return {i.name for i in self.interfaces}

    def import_by_alias(self) -> dict[str, Import]:
        return {imp.alias: imp for imp in self.imports}


def is_ident(text: str) -> bool:
    return _IDENT_RE.fullmatch(text) is not None


def walk_type(ref: TypeRef):
    """Yield ref and every type reference nested inside it."""
    yield ref
    if isinstance(ref, ListType):
        yield from walk_type(ref.element)
