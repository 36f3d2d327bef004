from modelweave.lang import (
    EnumDecl,
    Field,
    LocalRef,
    Model,
    Primitive,
    QualifiedName,
    SemVer,
    Structure,
    parse,
    validate,
)
from sources import CATALOG_1, INVENTORY_1


def codes_of(source: str) -> list[tuple[str, str]]:
    report = validate(parse(source))
    return [(d.code, d.location) for d in report.diagnostics]


def test_reference_models_are_clean():
    assert validate(parse(INVENTORY_1)).ok
    assert validate(parse(CATALOG_1)).ok


def test_duplicate_alias():
    src = (
        'model "a.svc" version 1.0.0\n'
        'import datatypes from "b.one" as dup\n'
        'import datatypes from "b.two" as dup\n'
    )
    assert ("E_DUP_ALIAS", "import.dup") in codes_of(src)


def test_self_import():
    src = 'model "a.svc" version 1.0.0\nimport all from "a.svc" version * as me\n'
    assert ("E_SELF_IMPORT", "import.me") in codes_of(src)


def test_duplicate_type_across_kinds():
    src = 'model "a.svc" version 1.0.0\ndata { structure X { a: int } enum X { ONE } }'
    assert ("E_DUP_TYPE", "data.X") in codes_of(src)


def test_duplicate_field():
    src = 'model "a.svc" version 1.0.0\ndata { structure S { a: int, a: string } }'
    assert ("E_DUP_FIELD", "data.S.a") in codes_of(src)


def test_empty_enum_only_reachable_by_construction():
    model = Model(
        name=QualifiedName.parse("a.svc"),
        version=SemVer(1, 0, 0),
        enums=(EnumDecl(name="Empty", literals=()),),
    )
    report = validate(model)
    assert [(d.code, d.location) for d in report.diagnostics] == [
        ("E_EMPTY_ENUM", "data.Empty")
    ]


def test_duplicate_interface_operation_param():
    src = (
        'model "a.svc" version 1.0.0\n'
        "service {\n"
        "  interface I { operation f(in x: int, in x: int) operation f() }\n"
        "  interface I {}\n"
        "}\n"
    )
    found = codes_of(src)
    assert ("E_DUP_INTERFACE", "service.I") in found
    assert ("E_DUP_OPERATION", "service.I.f") in found
    assert ("E_DUP_PARAM", "service.I.f.x") in found


def test_duplicate_requires():
    src = (
        'model "a.svc" version 1.0.0\n'
        'import interfaces from "b.dep" as d\n'
        "service { requires d.Q requires d.Q }\n"
    )
    assert ("E_DUP_REQUIRES", "service.requires.d.Q") in codes_of(src)


def test_duplicate_deployment():
    src = 'model "a.svc" version 1.0.0\noperation { deployment d {} deployment d {} }'
    assert ("E_DUP_DEPLOYMENT", "operation.d") in codes_of(src)


def test_unresolved_local_type():
    src = 'model "a.svc" version 1.0.0\ndata { structure S { x: Missing } }'
    assert ("E_UNRESOLVED_LOCAL_TYPE", "data.S.x") in codes_of(src)


def test_unresolved_local_type_in_param():
    src = 'model "a.svc" version 1.0.0\nservice { interface I { operation f(out r: Nope) } }'
    assert any(code == "E_UNRESOLVED_LOCAL_TYPE" for code, _ in codes_of(src))


def test_unknown_alias_in_type_requires_and_depends():
    src = (
        'model "a.svc" version 1.0.0\n'
        "data { structure S { x: ghost.T } }\n"
        "service { requires ghost.Q }\n"
        "operation { deployment d { depends on ghost } }\n"
    )
    found = codes_of(src)
    assert ("E_UNKNOWN_ALIAS", "data.S.x") in found
    assert ("E_UNKNOWN_ALIAS", "service.requires.ghost.Q") in found
    assert ("E_UNKNOWN_ALIAS", "operation.d.depends.ghost") in found


def test_alias_kind_mismatch_both_ways():
    src = (
        'model "a.svc" version 1.0.0\n'
        'import interfaces from "b.api" as api\n'
        'import datatypes from "b.data" as dat\n'
        "data { structure S { x: api.T } }\n"
        "service { requires dat.Q }\n"
    )
    found = codes_of(src)
    assert ("E_ALIAS_KIND", "data.S.x") in found
    assert ("E_ALIAS_KIND", "service.requires.dat.Q") in found


def test_all_kind_alias_allows_both_uses():
    src = (
        'model "a.svc" version 1.0.0\n'
        'import all from "b.dep" as d\n'
        "data { structure S { x: d.T } }\n"
        "service { requires d.Q }\n"
    )
    assert validate(parse(src)).ok


def test_port_range():
    for port, bad in ((0, True), (1, False), (65535, False), (65536, True)):
        src = f'model "a.svc" version 1.0.0\noperation {{ deployment d {{ port {port} }} }}'
        found = codes_of(src)
        assert (("E_PORT_RANGE", "operation.d.port") in found) is bad, port


def test_list_element_types_are_checked():
    src = 'model "a.svc" version 1.0.0\ndata { structure S { x: list<list<Missing>> } }'
    assert ("E_UNRESOLVED_LOCAL_TYPE", "data.S.x") in codes_of(src)


def test_report_is_deterministic_and_sorted():
    src = (
        'model "a.svc" version 1.0.0\n'
        "data { structure Z { x: MissingB } structure A { x: MissingA } }\n"
    )
    first = validate(parse(src))
    second = validate(parse(src))
    assert [d.to_doc() for d in first.diagnostics] == [d.to_doc() for d in second.diagnostics]
    locations = [d.location for d in first.diagnostics]
    assert locations == sorted(locations)


def test_report_doc_shape():
    report = validate(parse('model "a.svc" version 1.0.0\ndata { structure S { x: Gone } }'))
    doc = report.to_doc()
    assert doc["valid"] is False
    (diag,) = doc["diagnostics"]
    assert diag["code"] == "E_UNRESOLVED_LOCAL_TYPE"
    assert diag["severity"] == "error"
    assert diag["location"] == "data.S.x"
    assert "Gone" in diag["message"]


def test_hand_built_model_validates_like_parsed():
    built = Model(
        name=QualifiedName.parse("a.svc"),
        version=SemVer(1, 0, 0),
        structures=(Structure("S", (Field("x", LocalRef("Gone")), Field("y", Primitive("int")))),),
    )
    parsed = parse('model "a.svc" version 1.0.0\ndata { structure S { x: Gone, y: int } }')
    assert [d.to_doc() for d in validate(built).diagnostics] == [
        d.to_doc() for d in validate(parsed).diagnostics
    ]
