"""The model registry as an HTTP service.

One process owns the store. Mutations (publish, deprecate, yank) take a
single write lease and are applied one at a time; reads take a snapshot
under the lease and compute off it, so they see a consistent store and
never block each other. System models are recomputed per request, never
cached.
"""

from __future__ import annotations

import argparse
import os
import threading
from pathlib import Path

from fastapi import FastAPI, Request, Response
from pydantic import BaseModel
from starlette.concurrency import run_in_threadpool

from ..analysis import (
    PreconditionViolation,
    ValidationFailed,
    dependents,
    deprecate,
    impact,
    publish,
    yank,
)
from ..lang import ParseError, QualifiedName, SemVer, parse
from ..store import (
    InvalidTransition,
    ModelStore,
    NotFound,
    StorageError,
    VersionExists,
    format_timestamp,
)
from ..weaver import canonical_json, current_system_model
from . import schemas


class ApiException(Exception):
    def __init__(self, status: int, code: str, message: str, details: dict | None = None):
        self.status = status
        self.code = code
        self.message = message
        self.details = details
        super().__init__(message)

    def to_doc(self) -> dict:
        doc = {"httpStatus": self.status, "code": self.code, "message": self.message}
        if self.details is not None:
            doc["details"] = self.details
        return doc


def _json_response(doc, schema: type[BaseModel] | None = None, status: int = 200) -> Response:
    if schema is not None:
        schema.model_validate(doc)
    return Response(canonical_json(doc), status_code=status, media_type="application/json")


def _parse_service_name(q: str) -> str:
    try:
        return str(QualifiedName.parse(q))
    except ValueError:
        raise ApiException(400, "VALIDATION_ERROR", f"not a service name: {q!r}") from None


def _parse_version(v: str) -> SemVer:
    try:
        return SemVer.parse(v)
    except ValueError:
        raise ApiException(400, "VALIDATION_ERROR", f"not a version: {v!r}") from None


def _decode_body(body: bytes) -> str:
    try:
        return body.decode("utf-8")
    except UnicodeDecodeError:
        raise ApiException(400, "PARSE_ERROR", "model source is not valid UTF-8") from None


def _release_doc(release) -> dict:
    return {
        "service": str(release.name),
        "version": str(release.version),
        "source": release.source,
        "status": release.status.value,
        "publishedAt": format_timestamp(release.published_at),
        "resolvedDeps": [d.to_doc() for d in release.resolved_deps],
        "conflicts": [c.to_doc() for c in release.conflicts],
        "yanked": release.yanked,
    }


def _status_doc(release) -> dict:
    return {
        "service": str(release.name),
        "version": str(release.version),
        "status": release.status.value,
        "yanked": release.yanked,
    }


def create_app(root: Path | str) -> FastAPI:
    store = ModelStore.open(Path(root))
    lease = threading.Lock()

    app = FastAPI(title="model registry", version="0.1.0")
    app.state.store = store
    app.state.lease = lease

    def snapshot_view():
        with lease:
            return store.snapshot()

    @app.exception_handler(ApiException)
    async def api_exception_handler(_request: Request, exc: ApiException) -> Response:
        doc = exc.to_doc()
        schemas.ApiError.model_validate(doc)
        return Response(canonical_json(doc), status_code=exc.status, media_type="application/json")

    @app.exception_handler(Exception)
    async def internal_error_handler(_request: Request, exc: Exception) -> Response:
        doc = {"httpStatus": 500, "code": "INTERNAL", "message": f"{type(exc).__name__}: {exc}"}
        return Response(canonical_json(doc), status_code=500, media_type="application/json")

    def do_publish(service: str, source: str) -> Response:
        try:
            model = parse(source)
        except ParseError as exc:
            raise ApiException(400, "PARSE_ERROR", str(exc), details=exc.to_doc()) from None
        if str(model.name) != service:
            raise ApiException(
                400,
                "VALIDATION_ERROR",
                f"path names service '{service}' but the model header declares '{model.name}'",
            )
        with lease:
            try:
                receipt = publish(store, source)
            except ValidationFailed as exc:
                raise ApiException(
                    400, "VALIDATION_ERROR", str(exc), details=exc.report.to_doc()
                ) from None
            except VersionExists as exc:
                raise ApiException(409, "VERSION_EXISTS", str(exc)) from None
            except PreconditionViolation as exc:
                raise ApiException(409, "VERSION_REGRESSION", str(exc)) from None
        return _json_response(receipt.to_doc(), schemas.ReceiptDoc, status=201)

    @app.put("/models/{q}/releases")
    async def put_release(q: str, request: Request) -> Response:
        service = _parse_service_name(q)
        source = _decode_body(await request.body())
        return await run_in_threadpool(do_publish, service, source)

    def do_list_releases(service: str) -> Response:
        view = snapshot_view()
        if not view.has_service(service):
            raise ApiException(404, "NOT_FOUND", f"unknown service {service}")
        doc = [
            {"version": str(r.version), "status": r.status.value, "yanked": r.yanked}
            for r in view.releases_of(service)
        ]
        for item in doc:
            schemas.ReleaseSummaryDoc.model_validate(item)
        return _json_response(doc)

    @app.get("/models/{q}")
    async def list_releases(q: str) -> Response:
        return await run_in_threadpool(do_list_releases, _parse_service_name(q))

    def do_get_release(service: str, version: SemVer) -> Response:
        view = snapshot_view()
        release = view.get(service, version)
        if release is None:
            detail = (
                f"unknown service {service}"
                if not view.has_service(service)
                else f"{service} has no release {version}"
            )
            raise ApiException(404, "NOT_FOUND", detail)
        return _json_response(_release_doc(release), schemas.ReleaseDetailDoc)

    @app.get("/models/{q}/releases/{v}")
    async def get_release(q: str, v: str) -> Response:
        return await run_in_threadpool(do_get_release, _parse_service_name(q), _parse_version(v))

    def do_system_model() -> Response:
        system = current_system_model(snapshot_view())
        return _json_response(system.to_doc(), schemas.SystemModelDoc)

    @app.get("/system-model")
    async def system_model() -> Response:
        return await run_in_threadpool(do_system_model)

    def do_conflicts() -> Response:
        system = current_system_model(snapshot_view())
        doc = [c.to_doc() for c in system.conflicts]
        for item in doc:
            schemas.ConflictDoc.model_validate(item)
        return _json_response(doc)

    @app.get("/system-model/conflicts")
    async def system_conflicts() -> Response:
        return await run_in_threadpool(do_conflicts)

    def do_dependents(service: str) -> Response:
        view = snapshot_view()
        try:
            found = dependents(view, service)
        except NotFound as exc:
            raise ApiException(404, "NOT_FOUND", str(exc)) from None
        doc = [d.to_doc() for d in found]
        for item in doc:
            schemas.DependentDoc.model_validate(item)
        return _json_response(doc)

    @app.get("/models/{q}/dependents")
    async def get_dependents(q: str) -> Response:
        return await run_in_threadpool(do_dependents, _parse_service_name(q))

    def do_impact(source: str) -> Response:
        view = snapshot_view()
        try:
            report = impact(view, source)
        except ParseError as exc:
            raise ApiException(400, "PARSE_ERROR", str(exc), details=exc.to_doc()) from None
        except ValidationFailed as exc:
            raise ApiException(
                400, "VALIDATION_ERROR", str(exc), details=exc.report.to_doc()
            ) from None
        return _json_response(report.to_doc(), schemas.ImpactReportDoc)

    @app.post("/impact")
    async def post_impact(request: Request) -> Response:
        source = _decode_body(await request.body())
        return await run_in_threadpool(do_impact, source)

    def do_deprecate(service: str, version: SemVer) -> Response:
        with lease:
            try:
                release = deprecate(store, service, version)
            except NotFound as exc:
                raise ApiException(404, "NOT_FOUND", str(exc)) from None
            except InvalidTransition as exc:
                raise ApiException(409, "INVALID_TRANSITION", str(exc)) from None
        return _json_response(_status_doc(release), schemas.ReleaseStatusDoc)

    @app.post("/models/{q}/releases/{v}/deprecate")
    async def post_deprecate(q: str, v: str) -> Response:
        return await run_in_threadpool(do_deprecate, _parse_service_name(q), _parse_version(v))

    def do_yank(service: str, version: SemVer) -> Response:
        with lease:
            try:
                verdict = yank(store, service, version)
            except NotFound as exc:
                raise ApiException(404, "NOT_FOUND", str(exc)) from None
            if not verdict.allowed:
                raise ApiException(
                    409,
                    "DEPENDENTS_EXIST",
                    f"{service}@{version} is still referenced by the current system model",
                    details=verdict.to_doc(),
                )
            release = store.get_release(service, version)
        return _json_response(_status_doc(release), schemas.ReleaseStatusDoc)

    @app.delete("/models/{q}/releases/{v}")
    async def delete_release(q: str, v: str) -> Response:
        return await run_in_threadpool(do_yank, _parse_service_name(q), _parse_version(v))

    return app


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="modelweave-registry", description="Run the model registry service."
    )
    parser.add_argument(
        "--root",
        default=os.environ.get("MODELWEAVE_ROOT"),
        help="store directory (env MODELWEAVE_ROOT)",
    )
    parser.add_argument(
        "--listen",
        default=os.environ.get("MODELWEAVE_LISTEN", "127.0.0.1:7878"),
        help="host:port to bind (env MODELWEAVE_LISTEN, default 127.0.0.1:7878)",
    )
    args = parser.parse_args(argv)
    if not args.root:
        parser.error("--root is required (or set MODELWEAVE_ROOT)")
    host, _, port_text = args.listen.rpartition(":")
    if not host or not port_text.isdigit():
        parser.error(f"--listen must look like host:port, got {args.listen!r}")

    try:
        app = create_app(Path(args.root))
    except StorageError as exc:
        print(f"error: {exc}", flush=True)
        return 1

    import uvicorn

    uvicorn.run(app, host=host, port=int(port_text), log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
