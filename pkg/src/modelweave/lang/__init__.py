"""The microservice modeling language: syntax tree, parser, checks, exports."""

from __future__ import annotations

from .canonical import canonicalize, structurally_equal
from .exports import ExportDiff, diff_exports, publication_set, referenced_symbols
from .model import (
    PRIMITIVES,
    Deployment,
    EnumDecl,
    EnvVar,
    Field,
    ForeignRef,
    Import,
    ImportKind,
    Interface,
    ListType,
    LocalRef,
    Model,
    Operation,
    Param,
    Primitive,
    QualifiedName,
    ReqKind,
    RequiresClause,
    SemVer,
    Structure,
    TypeRef,
    VersionReq,
)
from .parser import ParseError, parse
from .validator import Diagnostic, ValidationReport, validate

__all__ = [
    "PRIMITIVES",
    "Deployment",
    "Diagnostic",
    "EnumDecl",
    "EnvVar",
    "ExportDiff",
    "Field",
    "ForeignRef",
    "Import",
    "ImportKind",
    "Interface",
    "ListType",
    "LocalRef",
    "Model",
    "Operation",
    "Param",
    "ParseError",
    "Primitive",
    "QualifiedName",
    "ReqKind",
    "RequiresClause",
    "SemVer",
    "Structure",
    "TypeRef",
    "ValidationReport",
    "VersionReq",
    "canonicalize",
    "diff_exports",
    "parse",
    "publication_set",
    "referenced_symbols",
    "structurally_equal",
    "validate",
]
