"""Team-facing command line client for the model registry.

Exit codes: 0 success, 1 input or not-found problems, 2 conflict outcomes
(a conflicted publish, present conflicts, a blocked yank), 3 transport or
internal failures. With --format json, registry-backed commands print the
registry response body verbatim followed by one newline.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import requests

from .lang import ParseError, parse, validate
from .weaver import canonical_json

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CONFLICT = 2
EXIT_TRANSPORT = 3


def _stderr(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _print_body(resp: requests.Response) -> None:
    sys.stdout.write(resp.text)
    if not resp.text.endswith("\n"):
        sys.stdout.write("\n")


def _message_of(resp: requests.Response) -> str:
    try:
        doc = resp.json()
    except ValueError:
        return resp.text.strip() or f"HTTP {resp.status_code}"
    if isinstance(doc, dict) and "message" in doc:
        return doc["message"]
    return resp.text.strip()


def _code_of(resp: requests.Response) -> str | None:
    try:
        doc = resp.json()
    except ValueError:
        return None
    if isinstance(doc, dict):
        return doc.get("code")
    return None


def _fail(resp: requests.Response, fmt: str) -> int:
    if fmt == "json":
        _print_body(resp)
    else:
        _stderr(_message_of(resp))
    return EXIT_TRANSPORT if resp.status_code >= 500 else EXIT_INPUT


class Registry:
    def __init__(self, base_url: str):
        self.base_url = base_url.rstrip("/")

    def request(self, method: str, path: str, body: str | None = None) -> requests.Response:
        headers = {"Content-Type": "text/plain; charset=utf-8"} if body is not None else {}
        return requests.request(
            method,
            self.base_url + path,
            data=body.encode("utf-8") if body is not None else None,
            headers=headers,
            timeout=30,
        )


def _registry(args) -> Registry | None:
    url = args.registry or os.environ.get("MODELWEAVE_REGISTRY")
    if not url:
        _stderr("registry URL is not set (use --registry or MODELWEAVE_REGISTRY)")
        return None
    return Registry(url)


def _read_source(path: str) -> str | None:
    try:
        return Path(path).read_text()
    except OSError as exc:
        _stderr(f"cannot read {path}: {exc}")
        return None


def _split_ref(ref: str, *, version_required: bool) -> tuple[str, str | None] | None:
    name, sep, version = ref.partition("@")
    if not sep:
        if version_required:
            _stderr(f"expected team.service@version, got {ref!r}")
            return None
        version = None
    if "." not in name:
        _stderr(f"expected a team.service name, got {name!r}")
        return None
    return name, version


def cmd_validate(args) -> int:
    source = _read_source(args.file)
    if source is None:
        return EXIT_TRANSPORT
    try:
        model = parse(source)
    except ParseError as exc:
        if args.format == "json":
            print(canonical_json({"valid": False, "parseError": exc.to_doc()}))
        else:
            _stderr(f"{args.file}:{exc}")
        return EXIT_INPUT
    report = validate(model)
    if args.format == "json":
        print(canonical_json(report.to_doc()))
    elif not report.ok:
        for diag in report.diagnostics:
            print(f"{diag.code} {diag.location}: {diag.message}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_INPUT


def cmd_push(args) -> int:
    source = _read_source(args.file)
    if source is None:
        return EXIT_TRANSPORT
    try:
        model = parse(source)
    except ParseError as exc:
        _stderr(f"{args.file}:{exc}")
        return EXIT_INPUT
    registry = _registry(args)
    if registry is None:
        return EXIT_TRANSPORT
    try:
        resp = registry.request("PUT", f"/models/{model.name}/releases", body=source)
    except requests.RequestException as exc:
        _stderr(f"transport: {exc}")
        return EXIT_TRANSPORT
    if resp.status_code != 201:
        return _fail(resp, args.format)
    receipt = resp.json()
    if args.format == "json":
        _print_body(resp)
    else:
        print(f"published {receipt['name']}@{receipt['version']}: {receipt['status']}")
        for conflict in receipt["conflicts"]:
            print(f"  {conflict['kind']}: {conflict['message']}")
    return EXIT_OK if receipt["status"] == "active" else EXIT_CONFLICT


def cmd_pull(args) -> int:
    ref = _split_ref(args.ref, version_required=False)
    if ref is None:
        return EXIT_INPUT
    name, version = ref
    registry = _registry(args)
    if registry is None:
        return EXIT_TRANSPORT
    try:
        if version is None:
            listing = registry.request("GET", f"/models/{name}")
            if listing.status_code != 200:
                return _fail(listing, args.format)
            active = [r["version"] for r in listing.json() if r["status"] == "active"]
            if not active:
                _stderr(f"{name} has no active release")
                return EXIT_INPUT
            version = max(active, key=lambda v: tuple(int(p) for p in v.split(".")))
        resp = registry.request("GET", f"/models/{name}/releases/{version}")
    except requests.RequestException as exc:
        _stderr(f"transport: {exc}")
        return EXIT_TRANSPORT
    if resp.status_code != 200:
        return _fail(resp, args.format)
    detail = resp.json()
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        target = out_dir / f"{name}@{detail['version']}.msvc"
        target.write_text(detail["source"])
    except OSError as exc:
        _stderr(f"cannot write model file: {exc}")
        return EXIT_TRANSPORT
    if args.format == "json":
        _print_body(resp)
    else:
        print(f"pulled {name}@{detail['version']} -> {target}")
    return EXIT_OK


def cmd_impact(args) -> int:
    source = _read_source(args.file)
    if source is None:
        return EXIT_TRANSPORT
    registry = _registry(args)
    if registry is None:
        return EXIT_TRANSPORT
    try:
        resp = registry.request("POST", "/impact", body=source)
    except requests.RequestException as exc:
        _stderr(f"transport: {exc}")
        return EXIT_TRANSPORT
    if resp.status_code != 200:
        return _fail(resp, args.format)
    report = resp.json()
    if args.format == "json":
        _print_body(resp)
    else:
        _print_impact(report)
    return EXIT_OK if not report["prospectiveConflicts"] else EXIT_CONFLICT


def _print_impact(report: dict) -> None:
    diff = report["exportDiff"]
    lines = []
    for label, key in (
        ("removed types", "removedTypes"),
        ("added types", "addedTypes"),
        ("removed interfaces", "removedInterfaces"),
        ("added interfaces", "addedInterfaces"),
    ):
        if diff[key]:
            lines.append(f"{label}: {', '.join(diff[key])}")
    for label, key in (
        ("removed operations", "removedOperations"),
        ("changed operations", "changedOperations"),
    ):
        if diff[key]:
            ops = ", ".join(f"{o['interface']}.{o['operation']}" for o in diff[key])
            lines.append(f"{label}: {ops}")
    conflicts = report["prospectiveConflicts"]
    if conflicts:
        lines.append(f"prospective conflicts: {len(conflicts)}")
        for conflict in conflicts:
            lines.append(f"  {conflict['kind']}: {conflict['message']}")
    if report["affectedDependents"]:
        for dep in report["affectedDependents"]:
            lines.append(
                f"affects {dep['service']} ({', '.join(dep['brokenSymbols'])})"
            )
    if not lines:
        lines.append("no impact")
    print("\n".join(lines))


def _render_dot(doc: dict) -> str:
    conflicted = {c["subject"] for c in doc["conflicts"]}
    lines = ["digraph system {"]
    for node in doc["nodes"]:
        service = node["service"]
        label = f"{service}@{node['version']}"
        if service in conflicted:
            lines.append(f'  "{service}" [label="{label} (conflicts)", color=red];')
        else:
            lines.append(f'  "{service}" [label="{label}"];')
    for edge in doc["edges"]:
        lines.append(f'  "{edge["from"]}" -> "{edge["to"]}" [label="{edge["alias"]}"];')
    lines.append("}")
    return "\n".join(lines)


def cmd_system(args) -> int:
    registry = _registry(args)
    if registry is None:
        return EXIT_TRANSPORT
    try:
        resp = registry.request("GET", "/system-model")
    except requests.RequestException as exc:
        _stderr(f"transport: {exc}")
        return EXIT_TRANSPORT
    if resp.status_code != 200:
        return _fail(resp, args.format)
    doc = resp.json()
    if args.dot:
        print(_render_dot(doc))
    elif args.format == "json":
        _print_body(resp)
    else:
        print(f"services: {len(doc['nodes'])}")
        for node in doc["nodes"]:
            print(f"  {node['service']}@{node['version']}")
        print(f"edges: {len(doc['edges'])}")
        for edge in doc["edges"]:
            print(f"  {edge['from']} -> {edge['to']} ({edge['alias']})")
        print(f"conflicts: {len(doc['conflicts'])}")
        for conflict in doc["conflicts"]:
            print(f"  {conflict['kind']}: {conflict['message']}")
    return EXIT_OK


def cmd_conflicts(args) -> int:
    registry = _registry(args)
    if registry is None:
        return EXIT_TRANSPORT
    try:
        resp = registry.request("GET", "/system-model/conflicts")
    except requests.RequestException as exc:
        _stderr(f"transport: {exc}")
        return EXIT_TRANSPORT
    if resp.status_code != 200:
        return _fail(resp, args.format)
    conflicts = resp.json()
    if args.format == "json":
        _print_body(resp)
    elif not conflicts:
        print("no conflicts")
    else:
        for conflict in conflicts:
            print(
                f"{conflict['kind']} {conflict['subject']}@{conflict['subjectVersion']}: "
                f"{conflict['message']}"
            )
    return EXIT_CONFLICT if conflicts else EXIT_OK


def cmd_deprecate(args) -> int:
    ref = _split_ref(args.ref, version_required=True)
    if ref is None:
        return EXIT_INPUT
    name, version = ref
    registry = _registry(args)
    if registry is None:
        return EXIT_TRANSPORT
    try:
        resp = registry.request("POST", f"/models/{name}/releases/{version}/deprecate")
    except requests.RequestException as exc:
        _stderr(f"transport: {exc}")
        return EXIT_TRANSPORT
    if resp.status_code != 200:
        return _fail(resp, args.format)
    if args.format == "json":
        _print_body(resp)
    else:
        print(f"deprecated {name}@{version}")
    return EXIT_OK


def cmd_yank(args) -> int:
    ref = _split_ref(args.ref, version_required=True)
    if ref is None:
        return EXIT_INPUT
    name, version = ref
    registry = _registry(args)
    if registry is None:
        return EXIT_TRANSPORT
    try:
        resp = registry.request("DELETE", f"/models/{name}/releases/{version}")
    except requests.RequestException as exc:
        _stderr(f"transport: {exc}")
        return EXIT_TRANSPORT
    if resp.status_code == 200:
        if args.format == "json":
            _print_body(resp)
        else:
            print(f"yanked {name}@{version}")
        return EXIT_OK
    if resp.status_code == 409 and _code_of(resp) == "DEPENDENTS_EXIST":
        if args.format == "json":
            _print_body(resp)
        else:
            _stderr(f"cannot yank {name}@{version}: dependents exist")
            details = resp.json().get("details", {})
            for blocker in details.get("blockers", []):
                edge = blocker["pinnedEdge"]
                print(
                    f"  {blocker['dependent']}@{blocker['dependentVersion']} "
                    f"via alias '{edge['alias']}'",
                    file=sys.stderr,
                )
        return EXIT_CONFLICT
    return _fail(resp, args.format)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--registry", default=argparse.SUPPRESS, help="registry base URL")
    common.add_argument(
        "--format",
        choices=("human", "json"),
        default=argparse.SUPPRESS,
        help="output format (default human)",
    )

    parser = argparse.ArgumentParser(
        prog="modelweave", description="Work with the shared microservice model registry."
    )
    parser.add_argument("--registry", default=None, help="registry base URL (env MODELWEAVE_REGISTRY)")
    parser.add_argument("--format", choices=("human", "json"), default="human")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a model file locally")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("push", parents=[common], help="publish a model file as a release")
    p.add_argument("file")
    p.set_defaults(func=cmd_push)

    p = sub.add_parser("pull", parents=[common], help="fetch a model (latest active if unversioned)")
    p.add_argument("ref", metavar="team.service[@version]")
    p.add_argument("--out", default="deps", help="target directory (default ./deps)")
    p.set_defaults(func=cmd_pull)

    p = sub.add_parser("impact", parents=[common], help="dry-run a candidate release")
    p.add_argument("file")
    p.set_defaults(func=cmd_impact)

    p = sub.add_parser("system", parents=[common], help="show the woven system model")
    p.add_argument("--dot", action="store_true", help="emit a Graphviz digraph")
    p.set_defaults(func=cmd_system)

    p = sub.add_parser("conflicts", parents=[common], help="list current conflicts")
    p.set_defaults(func=cmd_conflicts)

    p = sub.add_parser("deprecate", parents=[common], help="retire a release")
    p.add_argument("ref", metavar="team.service@version")
    p.set_defaults(func=cmd_deprecate)

    p = sub.add_parser("yank", parents=[common], help="permanently retire an unused release")
    p.add_argument("ref", metavar="team.service@version")
    p.set_defaults(func=cmd_yank)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
