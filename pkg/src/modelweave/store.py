"""Append-only store for released models.

Layout under the root:

    services/<team>/<service>/releases/<major>.<minor>.<patch>.msvc
    services/<team>/<service>/releases/<major>.<minor>.<patch>.meta.json
    index.json

The .msvc file holds canonical source text, the meta file status and
provenance. index.json is a cache of the latest-active versions and is
rebuilt from the release files whenever it is missing or stale. Release
files are never deleted or rewritten; only the status in a meta file may
change, along the allowed transitions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

from .lang import Model, ParseError, QualifiedName, SemVer, parse
from .weaver import Conflict


class StorageError(Exception):
    pass


class VersionExists(Exception):
    pass


class NotFound(Exception):
    pass


class InvalidTransition(Exception):
    pass


class ReleaseStatus(str, Enum):
    ACTIVE = "active"
    CONFLICTED = "conflicted"
    DEPRECATED = "deprecated"


# Status may stay where it is; the only real move is retiring an active
# release. A conflicted release is superseded by a new version, never revived.
_ALLOWED_TRANSITIONS = {
    (ReleaseStatus.ACTIVE, ReleaseStatus.ACTIVE),
    (ReleaseStatus.ACTIVE, ReleaseStatus.DEPRECATED),
    (ReleaseStatus.DEPRECATED, ReleaseStatus.DEPRECATED),
    (ReleaseStatus.CONFLICTED, ReleaseStatus.CONFLICTED),
}

_TIMESTAMP_FMT = "%Y-%m-%dT%H:%M:%SZ"


def utc_now() -> datetime:
    return datetime.now(timezone.utc).replace(microsecond=0)


def format_timestamp(dt: datetime) -> str:
    return dt.strftime(_TIMESTAMP_FMT)


@dataclass(frozen=True)
class ResolvedDep:
    alias: str
    target: QualifiedName
    pinned: SemVer

    def to_doc(self) -> dict:
        return {"alias": self.alias, "target": str(self.target), "pinned": str(self.pinned)}

    @classmethod
    def from_doc(cls, doc: dict) -> "ResolvedDep":
        return cls(
            alias=doc["alias"],
            target=QualifiedName.parse(doc["target"]),
            pinned=SemVer.parse(doc["pinned"]),
        )


@dataclass(frozen=True)
class Release:
    name: QualifiedName
    version: SemVer
    model: Model
    source: str
    status: ReleaseStatus
    published_at: datetime
    resolved_deps: tuple[ResolvedDep, ...] = ()
    conflicts: tuple[Conflict, ...] = ()
    yanked: bool = False

    def meta_doc(self) -> dict:
        doc = {
            "status": self.status.value,
            "publishedAt": self.published_at.strftime(_TIMESTAMP_FMT),
            "resolvedDeps": [d.to_doc() for d in self.resolved_deps],
            "conflicts": [c.to_doc() for c in self.conflicts],
        }
        if self.yanked:
            doc["yanked"] = True
        return doc


class ReleaseIndex:
    """In-memory registry view: every release of every known service."""

    def __init__(self) -> None:
        self._services: dict[str, dict[SemVer, Release]] = {}

    def add(self, release: Release) -> None:
        versions = self._services.setdefault(str(release.name), {})
        if release.version in versions:
            raise VersionExists(f"{release.name}@{release.version} is already stored")
        versions[release.version] = release

    def replace(self, release: Release) -> None:
        self._services[str(release.name)][release.version] = release

    def services(self) -> list[str]:
        return sorted(self._services)

    def has_service(self, name: str) -> bool:
        return name in self._services

    def releases_of(self, name: str) -> list[Release]:
        versions = self._services.get(name, {})
        return [versions[v] for v in sorted(versions)]

    def get(self, name: str, version: SemVer) -> Release | None:
        return self._services.get(name, {}).get(version)

    def candidates(self, name: str) -> list[tuple[SemVer, ReleaseStatus]]:
        """Resolution candidates: every non-yanked release as (version, status)."""
        return [(r.version, r.status) for r in self.releases_of(name) if not r.yanked]

    def latest_active(self, name: str) -> Release | None:
        active = [r for r in self.releases_of(name) if r.status is ReleaseStatus.ACTIVE]
        return active[-1] if active else None

    def copy(self) -> "ReleaseIndex":
        clone = ReleaseIndex()
        clone._services = {name: dict(versions) for name, versions in self._services.items()}
        return clone

    def snapshot(self) -> "ReleaseIndex":
        # an index handed out as a snapshot is already isolated
        return self


def _load_meta(path: Path) -> dict:
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise StorageError(f"corrupt meta file: {path}") from exc
    if not isinstance(doc, dict):
        raise StorageError(f"corrupt meta file: {path}")
    return doc


def _release_from_files(name: QualifiedName, version: SemVer, source_path: Path, meta_path: Path) -> Release:
    meta = _load_meta(meta_path)
    try:
        source = source_path.read_text()
    except OSError as exc:
        raise StorageError(f"unreadable model file: {source_path}") from exc
    try:
        model = parse(source)
    except ParseError as exc:
        raise StorageError(f"corrupt model file: {source_path} ({exc})") from exc
    try:
        status = ReleaseStatus(meta["status"])
        published_at = datetime.strptime(meta["publishedAt"], _TIMESTAMP_FMT).replace(
            tzinfo=timezone.utc
        )
        resolved = tuple(ResolvedDep.from_doc(d) for d in meta["resolvedDeps"])
        conflicts = tuple(Conflict.from_doc(c) for c in meta["conflicts"])
        yanked = bool(meta.get("yanked", False))
    except (KeyError, ValueError, TypeError) as exc:
        raise StorageError(f"corrupt meta file: {meta_path}") from exc
    return Release(
        name=name,
        version=version,
        model=model,
        source=source,
        status=status,
        published_at=published_at,
        resolved_deps=resolved,
        conflicts=conflicts,
        yanked=yanked,
    )


class ModelStore:
    """Durable release store rooted at a directory.

    Writers must be serialized externally (the registry service holds a
    single write lease); reads work on snapshots.
    """

    def __init__(self, root: Path, index: ReleaseIndex):
        self.root = Path(root)
        self._index = index

    @classmethod
    def open(cls, root: Path | str) -> "ModelStore":
        """Create or load a store; idempotent on an existing root."""
        root = Path(root)
        services_dir = root / "services"
        try:
            services_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageError(f"cannot create store root: {root}") from exc

        index_path = root / "index.json"
        if index_path.exists():
            try:
                json.loads(index_path.read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise StorageError(f"corrupt index file: {index_path}") from exc

        index = ReleaseIndex()
        for team_dir in sorted(p for p in services_dir.iterdir() if p.is_dir()):
            for service_dir in sorted(p for p in team_dir.iterdir() if p.is_dir()):
                try:
                    name = QualifiedName.parse(f"{team_dir.name}.{service_dir.name}")
                except ValueError as exc:
                    raise StorageError(f"invalid service directory: {service_dir}") from exc
                releases_dir = service_dir / "releases"
                if not releases_dir.is_dir():
                    continue
                for meta_path in sorted(releases_dir.glob("*.meta.json")):
                    version_text = meta_path.name[: -len(".meta.json")]
                    try:
                        version = SemVer.parse(version_text)
                    except ValueError as exc:
                        raise StorageError(f"unexpected file in store: {meta_path}") from exc
                    source_path = releases_dir / f"{version_text}.msvc"
                    if not source_path.exists():
                        raise StorageError(f"missing model file: {source_path}")
                    index.add(_release_from_files(name, version, source_path, meta_path))
                for source_path in releases_dir.glob("*.msvc"):
                    version_text = source_path.name[: -len(".msvc")]
                    try:
                        version = SemVer.parse(version_text)
                    except ValueError as exc:
                        raise StorageError(f"unexpected file in store: {source_path}") from exc
                    if index.get(str(name), version) is None:
                        raise StorageError(f"missing meta file: {releases_dir / (version_text + '.meta.json')}")

        store = cls(root, index)
        store._write_index()
        return store

    # registry view protocol

    def snapshot(self) -> ReleaseIndex:
        return self._index.copy()

    def services(self) -> list[str]:
        return self._index.services()

    def has_service(self, name: str) -> bool:
        return self._index.has_service(name)

    def candidates(self, name: str) -> list[tuple[SemVer, ReleaseStatus]]:
        return self._index.candidates(name)

    def get(self, name: str, version: SemVer) -> Release | None:
        return self._index.get(name, version)

    # store operations

    def put_release(self, release: Release) -> None:
        if self._index.get(str(release.name), release.version) is not None:
            raise VersionExists(f"{release.name}@{release.version} is already stored")
        releases_dir = self._release_dir(release.name)
        releases_dir.mkdir(parents=True, exist_ok=True)
        source_path = releases_dir / f"{release.version}.msvc"
        meta_path = releases_dir / f"{release.version}.meta.json"
        source_path.write_text(release.source)
        meta_path.write_text(json.dumps(release.meta_doc(), sort_keys=True, indent=2) + "\n")
        self._index.add(release)
        self._write_index()

    def get_release(self, name: str, version: SemVer) -> Release:
        release = self._index.get(name, version)
        if release is None:
            if not self._index.has_service(name):
                raise NotFound(f"unknown service {name}")
            raise NotFound(f"{name} has no release {version}")
        return release

    def list_releases(self, name: str) -> list[tuple[SemVer, ReleaseStatus]]:
        return [(r.version, r.status) for r in self._index.releases_of(name)]

    def set_status(self, name: str, version: SemVer, status: ReleaseStatus) -> Release:
        release = self.get_release(name, version)
        if (release.status, status) not in _ALLOWED_TRANSITIONS:
            raise InvalidTransition(
                f"{name}@{version}: {release.status.value} -> {status.value} is not allowed"
            )
        if release.status is status:
            return release
        updated = replace(release, status=status)
        self._rewrite_meta(updated)
        self._index.replace(updated)
        self._write_index()
        return updated

    def mark_yanked(self, name: str, version: SemVer) -> Release:
        """Make a release permanently unresolvable; its files stay in place."""
        release = self.get_release(name, version)
        status = release.status
        if status is ReleaseStatus.ACTIVE:
            status = ReleaseStatus.DEPRECATED
        updated = replace(release, status=status, yanked=True)
        self._rewrite_meta(updated)
        self._index.replace(updated)
        self._write_index()
        return updated

    def latest_active(self, name: str) -> Release:
        release = self._index.latest_active(name)
        if release is None:
            raise NotFound(f"{name} has no active release")
        return release

    # internals

    def _release_dir(self, name: QualifiedName) -> Path:
        return self.root / "services" / name.team / name.service / "releases"

    def _rewrite_meta(self, release: Release) -> None:
        meta_path = self._release_dir(release.name) / f"{release.version}.meta.json"
        meta_path.write_text(json.dumps(release.meta_doc(), sort_keys=True, indent=2) + "\n")

    def _write_index(self) -> None:
        doc = {
            "services": {
                name: {
                    "versions": [str(r.version) for r in self._index.releases_of(name)],
                    "latestActive": (
                        str(self._index.latest_active(name).version)
                        if self._index.latest_active(name) is not None
                        else None
                    ),
                }
                for name in self._index.services()
            }
        }
        (self.root / "index.json").write_text(
            json.dumps(doc, sort_keys=True, indent=2) + "\n"
        )
