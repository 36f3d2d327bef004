"""Collaborative microservice modeling toolkit.

A small viewpoint language for describing microservices (data types,
provided interfaces, deployment facts), a versioned release store, and a
weaver that assembles the individual models into one system model and
flags integration conflicts at release time.
"""

from __future__ import annotations

from .lang import (
    ExportDiff,
    Model,
    ParseError,
    QualifiedName,
    SemVer,
    ValidationReport,
    canonicalize,
    diff_exports,
    parse,
    publication_set,
    structurally_equal,
    validate,
)
from .store import ModelStore, Release, ReleaseStatus
from .weaver import SystemModel, current_system_model, diff_conflicts, resolve_requirement, weave

__all__ = [
    "ExportDiff",
    "Model",
    "ModelStore",
    "ParseError",
    "QualifiedName",
    "Release",
    "ReleaseStatus",
    "SemVer",
    "SystemModel",
    "ValidationReport",
    "canonicalize",
    "current_system_model",
    "diff_conflicts",
    "diff_exports",
    "parse",
    "publication_set",
    "resolve_requirement",
    "structurally_equal",
    "validate",
    "weave",
]

__version__ = "0.1.0"
