import pytest

from modelweave.analysis import (
    PreconditionViolation,
    ValidationFailed,
    dependents,
    deprecate,
    impact,
    publish,
    yank,
)
from modelweave.lang import SemVer, parse
from modelweave.store import (
    InvalidTransition,
    ModelStore,
    NotFound,
    ReleaseStatus,
    VersionExists,
)
from modelweave.weaver import ConflictKind
import modelgen
from sources import CATALOG_1, CATALOG_2, INVENTORY_1, INVENTORY_1_1


@pytest.fixture()
def store(tmp_path):
    return ModelStore.open(tmp_path / "registry")


def test_publish_clean_release(store):
    receipt = publish(store, CATALOG_1)
    assert str(receipt.name) == "team_b.catalog"
    assert receipt.version == SemVer(1, 0, 0)
    assert receipt.status is ReleaseStatus.ACTIVE
    assert receipt.conflicts == ()


def test_publish_stores_canonical_source(store):
    publish(store, CATALOG_1 + "\n// trailing comment\n")
    release = store.get_release("team_b.catalog", SemVer(1, 0, 0))
    assert "//" not in release.source
    assert release.source == store.get_release("team_b.catalog", SemVer(1, 0, 0)).source


def test_publish_records_resolved_deps(store):
    publish(store, CATALOG_1)
    publish(store, INVENTORY_1)
    release = store.get_release("team_a.inventory", SemVer(1, 0, 0))
    (dep,) = release.resolved_deps
    assert dep.alias == "cat"
    assert str(dep.target) == "team_b.catalog"
    assert dep.pinned == SemVer(1, 0, 0)


def test_breaking_release_is_stored_conflicted(store):
    publish(store, CATALOG_1)
    publish(store, INVENTORY_1)
    receipt = publish(store, CATALOG_2)
    assert receipt.status is ReleaseStatus.CONFLICTED
    (conflict,) = receipt.conflicts
    assert conflict.kind is ConflictKind.MISSING_PUBLISHED_TYPE
    assert conflict.symbol == "Category"

    stored = store.get_release("team_b.catalog", SemVer(2, 0, 0))
    assert stored.status is ReleaseStatus.CONFLICTED
    assert [c.to_doc() for c in stored.conflicts] == [conflict.to_doc()]


def test_conflicted_release_does_not_change_current_weave(store):
    publish(store, CATALOG_1)
    publish(store, INVENTORY_1)
    publish(store, CATALOG_2)
    from modelweave.weaver import current_system_model

    system = current_system_model(store)
    assert system.node_map()["team_b.catalog"].version == SemVer(1, 0, 0)
    assert system.conflicts == ()


def test_publish_duplicate_version(store):
    publish(store, CATALOG_1)
    with pytest.raises(VersionExists):
        publish(store, CATALOG_1)


def test_publish_version_regression(store):
    publish(store, CATALOG_2.replace("2.0.0", "3.0.0"))
    with pytest.raises(PreconditionViolation) as exc:
        publish(store, CATALOG_1)
    assert "3.0.0" in str(exc.value)


def test_publish_invalid_model(store):
    with pytest.raises(ValidationFailed) as exc:
        publish(store, 'model "a.svc" version 1.0.0\ndata { structure S { x: Gone } }')
    assert exc.value.report.diagnostics[0].code == "E_UNRESOLVED_LOCAL_TYPE"


def test_repeat_breaking_versions_conflict_each_time(store):
    # the gate compares against the current system model, which still weaves
    # catalog 1.0.0, so every new version missing Category breaks it afresh
    publish(store, CATALOG_1)
    publish(store, INVENTORY_1)
    publish(store, CATALOG_2)
    receipt = publish(store, CATALOG_2.replace("2.0.0", "2.0.1"))
    assert receipt.status is ReleaseStatus.CONFLICTED


def test_preexisting_conflict_identity_is_tolerated(store):
    publish(store, CATALOG_1)
    publish(store, INVENTORY_1)
    deprecate(store, "team_b.catalog", SemVer(1, 0, 0))
    # the current system model now shows NoMatchingVersion for inventory;
    # a new inventory release with the same unresolved import is not blamed
    from modelweave.weaver import current_system_model

    before = current_system_model(store)
    assert [c.kind for c in before.conflicts] == [ConflictKind.NO_MATCHING_VERSION]
    receipt = publish(store, INVENTORY_1.replace("version 1.0.0", "version 1.0.1"))
    assert receipt.status is ReleaseStatus.ACTIVE


def test_impact_reports_diff_conflicts_and_dependents(store):
    publish(store, CATALOG_1)
    publish(store, INVENTORY_1)
    report = impact(store, CATALOG_2)
    assert report.export_diff.removed_types == {"Category"}
    (conflict,) = report.prospective_conflicts
    assert conflict.kind is ConflictKind.MISSING_PUBLISHED_TYPE
    (affected,) = report.affected_dependents
    assert str(affected.service) == "team_a.inventory"
    assert affected.broken_symbols == {"Category"}


def test_impact_clean_candidate(store):
    publish(store, CATALOG_1)
    publish(store, INVENTORY_1)
    compatible = CATALOG_1.replace("1.0.0", "1.1.0")
    report = impact(store, compatible)
    assert report.export_diff.empty
    assert report.prospective_conflicts == ()
    assert report.affected_dependents == ()


def test_impact_is_pure(store, tmp_path):
    publish(store, CATALOG_1)
    publish(store, INVENTORY_1)
    before = modelgen.dir_checksum(store.root)
    impact(store, CATALOG_2)
    impact(store, CATALOG_1.replace("1.0.0", "1.2.0"))
    assert modelgen.dir_checksum(store.root) == before
    assert [v for v, _ in store.list_releases("team_b.catalog")] == [SemVer(1, 0, 0)]


def test_impact_unknown_service_has_empty_diff(store):
    publish(store, CATALOG_1)
    report = impact(store, INVENTORY_1)
    assert report.export_diff.empty
    assert report.prospective_conflicts == ()


def test_impact_allows_same_version_as_latest(store):
    publish(store, CATALOG_1)
    report = impact(store, CATALOG_1)
    assert report.export_diff.empty


def test_impact_validates_first(store):
    with pytest.raises(ValidationFailed):
        impact(store, 'model "a.svc" version 1.0.0\ndata { structure S { x: Gone } }')


def test_dependents_listing(store):
    publish(store, CATALOG_1)
    publish(store, INVENTORY_1)
    second = (
        'model "team_c.audit" version 1.0.0\n'
        'import interfaces from "team_b.catalog" version * as catq\n'
        "service { requires catq.CatalogQuery }\n"
    )
    publish(store, second)
    deps = dependents(store, "team_b.catalog")
    assert [(str(d.service), d.alias) for d in deps] == [
        ("team_a.inventory", "cat"),
        ("team_c.audit", "catq"),
    ]
    assert sorted(deps[0].referenced_symbols) == ["Category"]
    assert sorted(deps[1].referenced_symbols) == ["CatalogQuery"]


def test_dependents_unknown_service(store):
    with pytest.raises(NotFound):
        dependents(store, "team_x.none")


def test_dependents_empty_for_leaf(store):
    publish(store, CATALOG_1)
    publish(store, INVENTORY_1)
    assert dependents(store, "team_a.inventory") == ()


def test_deprecate_and_idempotence(store):
    publish(store, CATALOG_1)
    release = deprecate(store, "team_b.catalog", SemVer(1, 0, 0))
    assert release.status is ReleaseStatus.DEPRECATED
    again = deprecate(store, "team_b.catalog", SemVer(1, 0, 0))
    assert again.status is ReleaseStatus.DEPRECATED


def test_deprecate_conflicted_rejected(store):
    publish(store, CATALOG_1)
    publish(store, INVENTORY_1)
    publish(store, CATALOG_2)
    with pytest.raises(InvalidTransition):
        deprecate(store, "team_b.catalog", SemVer(2, 0, 0))


def test_deprecate_unknown(store):
    with pytest.raises(NotFound):
        deprecate(store, "team_x.none", SemVer(1, 0, 0))


def test_yank_blocked_by_woven_edge(store):
    publish(store, CATALOG_1)
    publish(store, INVENTORY_1)
    verdict = yank(store, "team_b.catalog", SemVer(1, 0, 0))
    assert not verdict.allowed
    (blocker,) = verdict.blockers
    assert str(blocker.dependent) == "team_a.inventory"
    assert blocker.dependent_version == SemVer(1, 0, 0)
    assert str(blocker.edge.target) == "team_b.catalog"
    # nothing changed
    release = store.get_release("team_b.catalog", SemVer(1, 0, 0))
    assert release.status is ReleaseStatus.ACTIVE and not release.yanked


def test_yank_succeeds_once_dependent_moves_off(store):
    publish(store, CATALOG_1)
    publish(store, INVENTORY_1)
    publish(store, INVENTORY_1_1)
    verdict = yank(store, "team_b.catalog", SemVer(1, 0, 0))
    assert verdict.allowed and verdict.blockers == ()
    release = store.get_release("team_b.catalog", SemVer(1, 0, 0))
    assert release.yanked
    assert release.status is ReleaseStatus.DEPRECATED


def test_yank_only_blocks_the_targeted_version(store):
    publish(store, CATALOG_1)
    publish(store, CATALOG_1.replace("1.0.0", "1.1.0"))
    publish(store, INVENTORY_1)  # weaves against 1.1.0
    verdict = yank(store, "team_b.catalog", SemVer(1, 0, 0))
    assert verdict.allowed
    verdict = yank(store, "team_b.catalog", SemVer(1, 1, 0))
    assert not verdict.allowed


def test_yank_conflicted_release_keeps_status(store):
    publish(store, CATALOG_1)
    publish(store, INVENTORY_1)
    publish(store, CATALOG_2)
    verdict = yank(store, "team_b.catalog", SemVer(2, 0, 0))
    assert verdict.allowed
    release = store.get_release("team_b.catalog", SemVer(2, 0, 0))
    assert release.yanked
    assert release.status is ReleaseStatus.CONFLICTED


def test_yank_unknown(store):
    with pytest.raises(NotFound):
        yank(store, "team_x.none", SemVer(1, 0, 0))


def test_exact_pinned_dependent_blocks_its_pin(store):
    publish(store, CATALOG_1)
    publish(store, CATALOG_1.replace("1.0.0", "1.1.0"))
    pinned = INVENTORY_1.replace("version ^1.0.0", "version =1.0.0")
    publish(store, pinned)
    verdict = yank(store, "team_b.catalog", SemVer(1, 0, 0))
    assert not verdict.allowed
    verdict = yank(store, "team_b.catalog", SemVer(1, 1, 0))
    assert verdict.allowed
