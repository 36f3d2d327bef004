"""Parser for model source text.

Whitespace is insignificant, `//` starts a line comment, and parsing stops
at the first syntax error. Keywords are recognized by position, so they
remain usable as ordinary identifiers where the grammar expects one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

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


class ParseError(Exception):
    """Syntax error with a 1-based source position and the expected token."""

    def __init__(self, line: int, column: int, expected: str, found: str):
        self.line = line
        self.column = column
        self.expected = expected
        self.found = found
        super().__init__(f"{line}:{column}: expected {expected}, found {found}")

    def to_doc(self) -> dict:
        return {
            "line": self.line,
            "column": self.column,
            "expected": self.expected,
            "found": self.found,
        }


_WORD = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
_SEMVER = re.compile(r"\d+\.\d+\.\d+")
_INT = re.compile(r"\d+")
_PUNCT = "{}()<>,:.=^*"


@dataclass(frozen=True)
class _Token:
    kind: str  # word, string, semver, int, punct, eof
    value: str
    line: int
    column: int

    def describe(self) -> str:
        if self.kind == "eof":
            return "end of input"
        if self.kind == "string":
            return f'"{self.value}"'
        return f"'{self.value}'"


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    line = 1
    col = 1
    n = len(source)
    while i < n:
        c = source[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "/" and i + 1 < n and source[i + 1] == "/":
            while i < n and source[i] != "\n":
                i += 1
            continue
        if c == '"':
            end = i + 1
            while end < n and source[end] not in '"\n':
                end += 1
            if end >= n or source[end] != '"':
                raise ParseError(line, col, "a closing '\"'", "end of line")
            tokens.append(_Token("string", source[i + 1 : end], line, col))
            col += end + 1 - i
            i = end + 1
            continue
        if c.isdigit():
            m = _SEMVER.match(source, i)
            if m is None:
                m = _INT.match(source, i)
                kind = "int"
            else:
                kind = "semver"
            tokens.append(_Token(kind, m.group(), line, col))
            col += len(m.group())
            i = m.end()
            continue
        m = _WORD.match(source, i)
        if m is not None:
            tokens.append(_Token("word", m.group(), line, col))
            col += len(m.group())
            i = m.end()
            continue
        if c in _PUNCT:
            tokens.append(_Token("punct", c, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(line, col, "a token", f"{c!r}")
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, expected: str) -> ParseError:
        tok = self.peek()
        return ParseError(tok.line, tok.column, expected, tok.describe())

    def at_word(self, value: str) -> bool:
        tok = self.peek()
        return tok.kind == "word" and tok.value == value

    def at_punct(self, value: str) -> bool:
        tok = self.peek()
        return tok.kind == "punct" and tok.value == value

    def take_word(self, value: str) -> _Token:
        if not self.at_word(value):
            raise self.fail(f"'{value}'")
        return self.advance()

    def take_punct(self, value: str) -> _Token:
        if not self.at_punct(value):
            raise self.fail(f"'{value}'")
        return self.advance()

    def take_ident(self, what: str = "an identifier") -> str:
        tok = self.peek()
        if tok.kind != "word":
            raise self.fail(what)
        return self.advance().value

    def take_string(self, what: str = "a quoted string") -> str:
        tok = self.peek()
        if tok.kind != "string":
            raise self.fail(what)
        return self.advance().value

    def take_semver(self) -> SemVer:
        tok = self.peek()
        if tok.kind != "semver":
            raise self.fail("a version number like 1.0.0")
        return SemVer.parse(self.advance().value)

    def take_int(self) -> int:
        tok = self.peek()
        if tok.kind != "int":
            raise self.fail("an integer")
        return int(self.advance().value)

    def take_qname(self) -> QualifiedName:
        tok = self.peek()
        if tok.kind != "string":
            raise self.fail('a quoted service name "team.service"')
        try:
            name = QualifiedName.parse(tok.value)
        except ValueError:
            raise self.fail('a qualified service name "team.service"') from None
        self.advance()
        return name

    # grammar rules

    def model(self) -> Model:
        self.take_word("model")
        name = self.take_qname()
        self.take_word("version")
        version = self.take_semver()
        imports = []
        while self.at_word("import"):
            imports.append(self.import_decl())
        structures: list[Structure] = []
        enums: list[EnumDecl] = []
        if self.at_word("data"):
            structures, enums = self.data_section()
        interfaces: list[Interface] = []
        requires: list[RequiresClause] = []
        if self.at_word("service"):
            interfaces, requires = self.service_section()
        deployments: list[Deployment] = []
        if self.at_word("operation"):
            deployments = self.operation_section()
        if self.peek().kind != "eof":
            raise self.fail("end of input")
        return Model(
            name=name,
            version=version,
            imports=tuple(imports),
            structures=tuple(structures),
            enums=tuple(enums),
            interfaces=tuple(interfaces),
            requires=tuple(requires),
            deployments=tuple(deployments),
        )

    def import_decl(self) -> Import:
        self.take_word("import")
        tok = self.peek()
        if tok.kind != "word" or tok.value not in ("datatypes", "interfaces", "all"):
            raise self.fail("'datatypes', 'interfaces', or 'all'")
        kind = ImportKind(self.advance().value)
        self.take_word("from")
        target = self.take_qname()
        requirement = VersionReq(ReqKind.LATEST)
        if self.at_word("version"):
            self.advance()
            if self.at_punct("="):
                self.advance()
                requirement = VersionReq(ReqKind.EXACT, self.take_semver())
            elif self.at_punct("^"):
                self.advance()
                requirement = VersionReq(ReqKind.COMPATIBLE, self.take_semver())
            elif self.at_punct("*"):
                self.advance()
            else:
                raise self.fail("'=', '^', or '*'")
        self.take_word("as")
        alias = self.take_ident("an import alias")
        return Import(kind=kind, target=target, requirement=requirement, alias=alias)

    def data_section(self) -> tuple[list[Structure], list[EnumDecl]]:
        self.take_word("data")
        self.take_punct("{")
        structures: list[Structure] = []
        enums: list[EnumDecl] = []
        while not self.at_punct("}"):
            if self.at_word("structure"):
                structures.append(self.structure_decl())
            elif self.at_word("enum"):
                enums.append(self.enum_decl())
            else:
                raise self.fail("'structure', 'enum', or '}'")
        self.take_punct("}")
        return structures, enums

    def structure_decl(self) -> Structure:
        self.take_word("structure")
        name = self.take_ident("a structure name")
        self.take_punct("{")
        fields = [self.field_decl()]
        while self.at_punct(","):
            self.advance()
            fields.append(self.field_decl())
        self.take_punct("}")
        return Structure(name=name, fields=tuple(fields))

    def field_decl(self) -> Field:
        name = self.take_ident("a field name")
        self.take_punct(":")
        return Field(name=name, type=self.type_ref())

    def enum_decl(self) -> EnumDecl:
        self.take_word("enum")
        name = self.take_ident("an enum name")
        self.take_punct("{")
        literals = [self.take_ident("an enum literal")]
        while self.at_punct(","):
            self.advance()
            literals.append(self.take_ident("an enum literal"))
        self.take_punct("}")
        return EnumDecl(name=name, literals=tuple(literals))

    def type_ref(self) -> TypeRef:
        tok = self.peek()
        if tok.kind != "word":
            raise self.fail("a type")
        if tok.value in PRIMITIVES:
            self.advance()
            return Primitive(tok.value)
        if tok.value == "list" and self.peek(1).kind == "punct" and self.peek(1).value == "<":
            self.advance()
            self.advance()
            element = self.type_ref()
            self.take_punct(">")
            return ListType(element)
        name = self.advance().value
        if self.at_punct("."):
            self.advance()
            return ForeignRef(alias=name, type_name=self.take_ident("a type name"))
        return LocalRef(name)

    def service_section(self) -> tuple[list[Interface], list[RequiresClause]]:
        self.take_word("service")
        self.take_punct("{")
        interfaces: list[Interface] = []
        requires: list[RequiresClause] = []
        while not self.at_punct("}"):
            if self.at_word("interface"):
                interfaces.append(self.interface_decl())
            elif self.at_word("requires"):
                self.advance()
                alias = self.take_ident("an import alias")
                self.take_punct(".")
                requires.append(
                    RequiresClause(alias=alias, interface=self.take_ident("an interface name"))
                )
            else:
                raise self.fail("'interface', 'requires', or '}'")
        self.take_punct("}")
        return interfaces, requires

    def interface_decl(self) -> Interface:
        self.take_word("interface")
        name = self.take_ident("an interface name")
        self.take_punct("{")
        operations = []
        while not self.at_punct("}"):
            if not self.at_word("operation"):
                raise self.fail("'operation' or '}'")
            operations.append(self.operation_sig())
        self.take_punct("}")
        return Interface(name=name, operations=tuple(operations))

    def operation_sig(self) -> Operation:
        self.take_word("operation")
        name = self.take_ident("an operation name")
        self.take_punct("(")
        params = []
        if not self.at_punct(")"):
            params.append(self.param_decl())
            while self.at_punct(","):
                self.advance()
                params.append(self.param_decl())
        self.take_punct(")")
        return Operation(name=name, params=tuple(params))

    def param_decl(self) -> Param:
        tok = self.peek()
        if tok.kind != "word" or tok.value not in ("in", "out"):
            raise self.fail("'in' or 'out'")
        direction = self.advance().value
        name = self.take_ident("a parameter name")
        self.take_punct(":")
        return Param(direction=direction, name=name, type=self.type_ref())

    def operation_section(self) -> list[Deployment]:
        self.take_word("operation")
        self.take_punct("{")
        deployments = []
        while not self.at_punct("}"):
            if not self.at_word("deployment"):
                raise self.fail("'deployment' or '}'")
            deployments.append(self.deployment_decl())
        self.take_punct("}")
        return deployments

    def deployment_decl(self) -> Deployment:
        self.take_word("deployment")
        name = self.take_ident("a deployment name")
        self.take_punct("{")
        technology: str | None = None
        protocol: str | None = None
        port: int | None = None
        base_path: str | None = None
        env: list[EnvVar] = []
        depends: list[str] = []
        while not self.at_punct("}"):
            if self.at_word("technology"):
                self.advance()
                technology = self.take_string()
            elif self.at_word("protocol"):
                self.advance()
                tok = self.peek()
                if tok.kind != "word" or tok.value not in ("http", "amqp"):
                    raise self.fail("'http' or 'amqp'")
                protocol = self.advance().value
            elif self.at_word("port"):
                self.advance()
                port = self.take_int()
            elif self.at_word("basepath"):
                self.advance()
                base_path = self.take_string()
            elif self.at_word("env"):
                self.advance()
                var = self.take_ident("an environment variable name")
                default = None
                if self.at_punct("="):
                    self.advance()
                    default = self.take_string()
                env.append(EnvVar(name=var, default=default))
            elif self.at_word("depends"):
                self.advance()
                self.take_word("on")
                depends.append(self.take_ident("an import alias"))
            else:
                raise self.fail(
                    "'technology', 'protocol', 'port', 'basepath', 'env', 'depends', or '}'"
                )
        self.take_punct("}")
        return Deployment(
            name=name,
            technology=technology,
            protocol=protocol,
            port=port,
            base_path=base_path,
            env=tuple(env),
            depends_on=tuple(depends),
        )


def parse(source: str) -> Model:
    """Parse model source text, raising ParseError at the first syntax error."""
    return _Parser(_tokenize(source)).model()
