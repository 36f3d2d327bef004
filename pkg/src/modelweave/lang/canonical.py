"""Canonical text form.

Canonical text fixes section order, sorts declarations by name, normalizes
spacing, and always spells the version requirement of an import. Orderings
that the canonical form erases (declaration order) are exactly the ones
structural equality ignores; field, literal, and parameter order carry
meaning and survive untouched.
"""

from __future__ import annotations

from dataclasses import replace

from .model import Deployment, Interface, Model, Operation, Param, Structure, TypeRef


def normalized(model: Model) -> Model:
    """Return the model with every canonically sorted collection sorted."""
    return replace(
        model,
        imports=tuple(sorted(model.imports, key=lambda i: i.alias)),
        structures=tuple(sorted(model.structures, key=lambda s: s.name)),
        enums=tuple(sorted(model.enums, key=lambda e: e.name)),
        interfaces=tuple(
            sorted(
                (
                    replace(i, operations=tuple(sorted(i.operations, key=lambda o: o.name)))
                    for i in model.interfaces
                ),
                key=lambda i: i.name,
            )
        ),
        requires=tuple(sorted(model.requires, key=lambda r: (r.alias, r.interface))),
        deployments=tuple(
            sorted(
                (
                    replace(
                        d,
                        env=tuple(sorted(d.env, key=lambda v: v.name)),
                        depends_on=tuple(sorted(d.depends_on)),
                    )
                    for d in model.deployments
                ),
                key=lambda d: d.name,
            )
        ),
    )


def structurally_equal(a: Model, b: Model) -> bool:
    """Equality up to declaration order (the order canonical text erases)."""
    return normalized(a) == normalized(b)


def _render_type(ref: TypeRef) -> str:
    return str(ref)


def _render_param(param: Param) -> str:
    return f"{param.direction} {param.name}: {_render_type(param.type)}"


def _render_operation(op: Operation) -> str:
    return f"operation {op.name}({', '.join(_render_param(p) for p in op.params)})"


def _render_structure(s: Structure) -> str:
    fields = ", ".join(f"{f.name}: {_render_type(f.type)}" for f in s.fields)
    return f"structure {s.name} {{ {fields} }}"


def _render_interface(iface: Interface) -> list[str]:
    lines = [f"  interface {iface.name} {{"]
    for op in iface.operations:
        lines.append(f"    {_render_operation(op)}")
    lines.append("  }")
    return lines


def _render_deployment(dep: Deployment) -> list[str]:
    lines = [f"  deployment {dep.name} {{"]
    if dep.technology is not None:
        lines.append(f'    technology "{dep.technology}"')
    if dep.protocol is not None:
        lines.append(f"    protocol {dep.protocol}")
    if dep.port is not None:
        lines.append(f"    port {dep.port}")
    if dep.base_path is not None:
        lines.append(f'    basepath "{dep.base_path}"')
    for var in dep.env:
        if var.default is None:
            lines.append(f"    env {var.name}")
        else:
            lines.append(f'    env {var.name} = "{var.default}"')
    for alias in dep.depends_on:
        lines.append(f"    depends on {alias}")
    lines.append("  }")
    return lines


def canonicalize(model: Model) -> str:
    """Render the canonical text for a locally valid model."""
    m = normalized(model)
    lines = [f'model "{m.name}" version {m.version}']
    for imp in m.imports:
        lines.append(
            f'import {imp.kind.value} from "{imp.target}" version {imp.requirement} as {imp.alias}'
        )
    if m.structures or m.enums:
        lines.append("data {")
        for s in m.structures:
            lines.append(f"  {_render_structure(s)}")
        for e in m.enums:
            lines.append(f"  enum {e.name} {{ {', '.join(e.literals)} }}")
        lines.append("}")
    if m.interfaces or m.requires:
        lines.append("service {")
        for iface in m.interfaces:
            lines.extend(_render_interface(iface))
        for req in m.requires:
            lines.append(f"  requires {req.alias}.{req.interface}")
        lines.append("}")
    if m.deployments:
        lines.append("operation {")
        for dep in m.deployments:
            lines.extend(_render_deployment(dep))
        lines.append("}")
    return "\n".join(lines) + "\n"
