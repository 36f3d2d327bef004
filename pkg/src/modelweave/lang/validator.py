"""Local model checks.

Validation covers exactly what can be decided from one model alone: name
uniqueness, resolution of local type references, alias declaration and
import-kind compatibility, port ranges, self-imports, and enum
non-emptiness. Cross-service facts are the weaver's business.

Diagnostics point into the model with structural paths (for example
``data.Stock.product``) rather than source positions, so models built in
memory validate exactly like parsed ones.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import ForeignRef, ImportKind, ListType, LocalRef, Model, TypeRef


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: str  # currently always "error"
    location: str
    message: str

    def to_doc(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity,
            "location": self.location,
            "message": self.message,
        }


@dataclass(frozen=True)
class ValidationReport:
    diagnostics: tuple[Diagnostic, ...]

    @property
    def ok(self) -> bool:
        return not any(d.severity == "error" for d in self.diagnostics)

    def to_doc(self) -> dict:
        return {
            "valid": self.ok,
            "diagnostics": [d.to_doc() for d in self.diagnostics],
        }


class _Collector:
    def __init__(self) -> None:
        self.items: list[Diagnostic] = []

    def error(self, code: str, location: str, message: str) -> None:
        self.items.append(Diagnostic(code, "error", location, message))


def _check_type(ref: TypeRef, location: str, model: Model, out: _Collector) -> None:
    if isinstance(ref, ListType):
        _check_type(ref.element, location, model, out)
    elif isinstance(ref, LocalRef):
        if ref.type_name not in model.type_names():
            out.error(
                "E_UNRESOLVED_LOCAL_TYPE",
                location,
                f"unknown type '{ref.type_name}'",
            )
    elif isinstance(ref, ForeignRef):
        imp = model.import_by_alias().get(ref.alias)
        if imp is None:
            out.error(
                "E_UNKNOWN_ALIAS",
                location,
                f"alias '{ref.alias}' is not declared by an import",
            )
        elif imp.kind is ImportKind.INTERFACES:
            out.error(
                "E_ALIAS_KIND",
                location,
                f"alias '{ref.alias}' imports interfaces only, its types are not available",
            )


def validate(model: Model) -> ValidationReport:
    """Check one model in isolation and report every violation found."""
    out = _Collector()

    seen_aliases: set[str] = set()
    for imp in model.imports:
        loc = f"import.{imp.alias}"
        if imp.alias in seen_aliases:
            out.error("E_DUP_ALIAS", loc, f"duplicate import alias '{imp.alias}'")
        seen_aliases.add(imp.alias)
        if imp.target == model.name:
            out.error("E_SELF_IMPORT", loc, f"'{model.name}' must not import itself")

    seen_types: set[str] = set()
    for decl in list(model.structures) + list(model.enums):
        loc = f"data.{decl.name}"
        if decl.name in seen_types:
            out.error("E_DUP_TYPE", loc, f"duplicate structure or enum name '{decl.name}'")
        seen_types.add(decl.name)

    for structure in model.structures:
        seen_fields: set[str] = set()
        for fld in structure.fields:
            loc = f"data.{structure.name}.{fld.name}"
            if fld.name in seen_fields:
                out.error(
                    "E_DUP_FIELD",
                    loc,
                    f"duplicate field '{fld.name}' in structure '{structure.name}'",
                )
            seen_fields.add(fld.name)
            _check_type(fld.type, loc, model, out)

    for enum in model.enums:
        if not enum.literals:
            out.error("E_EMPTY_ENUM", f"data.{enum.name}", f"enum '{enum.name}' has no literals")

    seen_ifaces: set[str] = set()
    for iface in model.interfaces:
        loc = f"service.{iface.name}"
        if iface.name in seen_ifaces:
            out.error("E_DUP_INTERFACE", loc, f"duplicate interface name '{iface.name}'")
        seen_ifaces.add(iface.name)
        seen_ops: set[str] = set()
        for op in iface.operations:
            op_loc = f"{loc}.{op.name}"
            if op.name in seen_ops:
                out.error(
                    "E_DUP_OPERATION",
                    op_loc,
                    f"duplicate operation '{op.name}' in interface '{iface.name}'",
                )
            seen_ops.add(op.name)
            seen_params: set[str] = set()
            for param in op.params:
                p_loc = f"{op_loc}.{param.name}"
                if param.name in seen_params:
                    out.error(
                        "E_DUP_PARAM",
                        p_loc,
                        f"duplicate parameter '{param.name}' in operation '{op.name}'",
                    )
                seen_params.add(param.name)
                _check_type(param.type, p_loc, model, out)

    seen_requires: set[tuple[str, str]] = set()
    for req in model.requires:
        loc = f"service.requires.{req.alias}.{req.interface}"
        key = (req.alias, req.interface)
        if key in seen_requires:
            out.error(
                "E_DUP_REQUIRES", loc, f"duplicate requires clause '{req.alias}.{req.interface}'"
            )
        seen_requires.add(key)
        imp = model.import_by_alias().get(req.alias)
        if imp is None:
            out.error(
                "E_UNKNOWN_ALIAS", loc, f"alias '{req.alias}' is not declared by an import"
            )
        elif imp.kind is ImportKind.DATATYPES:
            out.error(
                "E_ALIAS_KIND",
                loc,
                f"alias '{req.alias}' imports datatypes only, its interfaces are not available",
            )

    seen_deps: set[str] = set()
    for dep in model.deployments:
        loc = f"operation.{dep.name}"
        if dep.name in seen_deps:
            out.error("E_DUP_DEPLOYMENT", loc, f"duplicate deployment name '{dep.name}'")
        seen_deps.add(dep.name)
        if dep.port is not None and not 1 <= dep.port <= 65535:
            out.error(
                "E_PORT_RANGE",
                f"{loc}.port",
                f"port {dep.port} is outside 1..65535",
            )
        for alias in dep.depends_on:
            if alias not in model.import_by_alias():
                out.error(
                    "E_UNKNOWN_ALIAS",
                    f"{loc}.depends.{alias}",
                    f"alias '{alias}' is not declared by an import",
                )

    ordered = sorted(out.items, key=lambda d: (d.location, d.code, d.message))
    return ValidationReport(diagnostics=tuple(ordered))
