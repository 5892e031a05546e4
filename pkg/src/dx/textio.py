"""Parsers and serializers for mapping, instance, and query files.

File syntax
-----------
Mapping files hold period-terminated statements; ``#`` starts a comment::

    source R/2, P/1.
    target E/2, F/2.
    tgd R(x,y) -> exists z: E(x,z), F(z,y).
    egd E(x,y), E(x,y2) -> y = y2.
    constraint forall x: P(x) -> exists[2,3] z: E(x,z).

Schema declarations must precede constraints.  Inside tgds and egds bare
identifiers are variables; a quoted token (``"c"``) is a constant.  Inside
``constraint`` formulas and query bodies, identifiers bound by a quantifier
(or declared free in a query head) are variables and everything else is a
constant.

Instance files hold facts; tokens starting with ``_`` are nulls scoped to the
file::

    E(a,_n1). F(_n1,b).

Query files::

    q(x,y) := forall z: Rp(x,y) /\\ (Rp(x,z) -> z = y).

Connectives are ``/\\ \\/ ~ -> =`` with quantifiers ``forall v:``,
``exists v:`` and ``exists[l,u] v:``; a quantifier's scope extends as far to
the right as possible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, List, Optional, Set

from .errors import ArityMismatch, ParseError, SchemaViolation, UnknownRelation
from .logic import (
    And,
    CountExists,
    Eq,
    Exists,
    FOQuery,
    Forall,
    Formula,
    Not,
    Or,
    RelAtom,
)
from .model import (
    Atom,
    Const,
    DxError,
    Egd,
    Instance,
    Null,
    PatternAtom,
    Schema,
    SchemaMapping,
    StTgd,
    Term,
    Var,
)


@dataclass
class SourceText:
    """Raw text plus a name used in diagnostics."""

    text: str
    name: str = "<string>"

    @staticmethod
    def from_file(path) -> "SourceText":
        with open(path, "r", encoding="utf-8") as fh:
            return SourceText(fh.read(), str(path))


# ---------------------------------------------------------------- tokenizer

_PUNCT = [
    (":=", "ASSIGN"),
    ("->", "ARROW"),
    ("/\\", "AND"),
    ("\\/", "OR"),
    ("(", "LPAREN"),
    (")", "RPAREN"),
    ("[", "LBRACKET"),
    ("]", "RBRACKET"),
    (",", "COMMA"),
    (".", "PERIOD"),
    ("/", "SLASH"),
    ("~", "NOT"),
    ("=", "EQ"),
    (":", "COLON"),
]


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(src: SourceText) -> List[Token]:
    out: List[Token] = []
    line, col, i = 1, 1, 0
    text = src.text
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise ParseError("unterminated string", src.name, line, col)
                j += 1
            if j >= n:
                raise ParseError("unterminated string", src.name, line, col)
            out.append(Token("STRING", text[i + 1 : j], line, col))
            col += j - i + 1
            i = j + 1
            continue
        if ch.isalnum() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            word = text[i:j]
            kind = "NULLID" if word.startswith("_") else "IDENT"
            out.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        for sym, kind in _PUNCT:
            if text.startswith(sym, i):
                out.append(Token(kind, sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", src.name, line, col)
    out.append(Token("EOF", "", line, col))
    return out


class _Cursor:
    def __init__(self, src: SourceText):
        self.src = src
        self.tokens = _tokenize(src)
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str, what: str = "") -> Token:
        tok = self.next()
        if tok.kind != kind:
            expected = what or kind
            raise ParseError(
                f"expected {expected}, found {tok.text!r}", self.src.name, tok.line, tok.col
            )
        return tok

    def error(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        raise ParseError(message, self.src.name, tok.line, tok.col)

    def at_end(self) -> bool:
        return self.peek().kind == "EOF"


# ---------------------------------------------------------------- formula parsing

_QUANTIFIERS = {"forall", "exists"}


def _parse_formula(
    cur: _Cursor,
    schema: Schema,
    bound: Set[str],
    allow_counting: bool,
) -> Formula:
    return _parse_impl(cur, schema, bound, allow_counting)


def _parse_impl(cur, schema, bound, allow_counting) -> Formula:
    left = _parse_or(cur, schema, bound, allow_counting)
    if cur.peek().kind == "ARROW":
        cur.next()
        right = _parse_impl(cur, schema, bound, allow_counting)
        return Or((Not(left), right))
    return left


def _parse_or(cur, schema, bound, allow_counting) -> Formula:
    parts = [_parse_and(cur, schema, bound, allow_counting)]
    while cur.peek().kind == "OR":
        cur.next()
        parts.append(_parse_and(cur, schema, bound, allow_counting))
    return parts[0] if len(parts) == 1 else Or(tuple(parts))


def _parse_and(cur, schema, bound, allow_counting) -> Formula:
    parts = [_parse_unary(cur, schema, bound, allow_counting)]
    while cur.peek().kind == "AND":
        cur.next()
        parts.append(_parse_unary(cur, schema, bound, allow_counting))
    return parts[0] if len(parts) == 1 else And(tuple(parts))


def _parse_unary(cur, schema, bound, allow_counting) -> Formula:
    tok = cur.peek()
    if tok.kind == "NOT":
        cur.next()
        return Not(_parse_unary(cur, schema, bound, allow_counting))
    if tok.kind == "IDENT" and tok.text in _QUANTIFIERS:
        return _parse_quantifier(cur, schema, bound, allow_counting)
    return _parse_primary(cur, schema, bound, allow_counting)


def _parse_quantifier(cur, schema, bound, allow_counting) -> Formula:
    tok = cur.next()
    lo = hi = None
    if tok.text == "exists" and cur.peek().kind == "LBRACKET":
        cur.next()
        lo = _parse_number(cur)
        cur.expect("COMMA")
        hi = _parse_number(cur)
        cur.expect("RBRACKET")
        if not allow_counting:
            cur.error("counting quantifiers are only allowed in constraints", tok)
        if lo > hi or lo < 0:
            cur.error(f"bad counting range [{lo},{hi}]", tok)
    var_tok = cur.expect("IDENT", "a variable name")
    if var_tok.text in _QUANTIFIERS:
        cur.error("quantifier keyword used as a variable", var_tok)
    cur.expect("COLON")
    inner_bound = bound | {var_tok.text}
    body = _parse_impl(cur, schema, inner_bound, allow_counting)
    var = Var(var_tok.text)
    if lo is not None:
        return CountExists(lo, hi, var, body)
    return Exists(var, body) if tok.text == "exists" else Forall(var, body)


def _parse_number(cur) -> int:
    tok = cur.expect("IDENT", "a number")
    if not tok.text.isdigit():
        cur.error("expected a number", tok)
    return int(tok.text)


def _parse_primary(cur, schema, bound, allow_counting) -> Formula:
    tok = cur.peek()
    if tok.kind == "LPAREN":
        cur.next()
        inner = _parse_impl(cur, schema, bound, allow_counting)
        cur.expect("RPAREN")
        return inner
    if tok.kind == "NULLID":
        cur.error("nulls are not allowed in formulas", tok)
    if tok.kind in ("IDENT", "STRING"):
        if tok.kind == "IDENT" and cur.peek(1).kind == "LPAREN":
            return _parse_rel_atom(cur, schema, bound)
        left = _parse_term(cur, bound)
        cur.expect("EQ", "'='")
        right = _parse_term(cur, bound)
        return Eq(left, right)
    cur.error(f"unexpected token {tok.text!r}")


def _parse_rel_atom(cur, schema: Schema, bound: Set[str]) -> RelAtom:
    name_tok = cur.next()
    arity = schema.arity(name_tok.text)
    if arity is None:
        raise UnknownRelation(
            f"unknown relation {name_tok.text}", cur.src.name, name_tok.line, name_tok.col
        )
    cur.expect("LPAREN")
    terms = [_parse_term(cur, bound)]
    while cur.peek().kind == "COMMA":
        cur.next()
        terms.append(_parse_term(cur, bound))
    cur.expect("RPAREN")
    if len(terms) != arity:
        raise ArityMismatch(
            f"{name_tok.text} has arity {arity}, got {len(terms)} arguments",
            cur.src.name,
            name_tok.line,
            name_tok.col,
        )
    return RelAtom(name_tok.text, tuple(terms))


def _parse_term(cur, bound: Set[str]) -> Term:
    tok = cur.next()
    if tok.kind == "STRING":
        return Const(tok.text)
    if tok.kind == "NULLID":
        cur.error("nulls are not allowed here", tok)
    if tok.kind != "IDENT":
        cur.error(f"expected a term, found {tok.text!r}", tok)
    if tok.text in _QUANTIFIERS:
        cur.error("quantifier keyword used as a term", tok)
    return Var(tok.text) if tok.text in bound else Const(tok.text)


# ---------------------------------------------------------------- mapping files


def parse_mapping(src: SourceText) -> SchemaMapping:
    cur = _Cursor(src)
    source: Dict[str, int] = {}
    target: Dict[str, int] = {}
    tgds: List[StTgd] = []
    egds: List[Egd] = []
    constraints: List[FOQuery] = []
    saw_constraint = False

    while not cur.at_end():
        head = cur.expect("IDENT", "a statement keyword")
        if head.text in ("source", "target"):
            if saw_constraint:
                raise SchemaViolation(
                    "schema declarations must precede constraints",
                    src.name,
                    head.line,
                    head.col,
                )
            decls = source if head.text == "source" else target
            while True:
                name = cur.expect("IDENT", "a relation name")
                cur.expect("SLASH", "'/'")
                arity = _parse_number(cur)
                if arity < 1:
                    cur.error("arity must be positive", name)
                if name.text in source or name.text in target:
                    raise SchemaViolation(
                        f"relation {name.text} declared twice", src.name, name.line, name.col
                    )
                decls[name.text] = arity
                if cur.peek().kind != "COMMA":
                    break
                cur.next()
            cur.expect("PERIOD", "'.'")
        elif head.text == "tgd":
            saw_constraint = True
            tgds.append(_parse_tgd(cur, source, target, head))
        elif head.text == "egd":
            saw_constraint = True
            egds.append(_parse_egd(cur, target, head))
        elif head.text == "constraint":
            saw_constraint = True
            combined = Schema.of({**source, **target})
            body = _parse_formula(cur, combined, set(), allow_counting=True)
            cur.expect("PERIOD", "'.'")
            constraints.append(FOQuery("constraint", (), body))
        else:
            cur.error(f"unknown statement {head.text!r}", head)

    try:
        return SchemaMapping(
            Schema.of(source),
            Schema.of(target),
            tuple(tgds),
            tuple(egds),
            tuple(constraints),
        )
    except DxError as exc:
        raise SchemaViolation(str(exc), src.name, 1, 1)


def _parse_pattern_atoms(cur, schema: Dict[str, int], what: str) -> List[PatternAtom]:
    atoms = [_parse_pattern_atom(cur, schema, what)]
    while cur.peek().kind == "COMMA":
        cur.next()
        atoms.append(_parse_pattern_atom(cur, schema, what))
    return atoms


def _parse_pattern_atom(cur, schema: Dict[str, int], what: str) -> PatternAtom:
    name = cur.expect("IDENT", "a relation name")
    if name.text not in schema:
        raise SchemaViolation(
            f"{name.text} is not a {what} relation", cur.src.name, name.line, name.col
        )
    cur.expect("LPAREN")
    terms: List[Term] = []
    while True:
        tok = cur.next()
        if tok.kind == "STRING":
            terms.append(Const(tok.text))
        elif tok.kind == "IDENT":
            terms.append(Var(tok.text))
        elif tok.kind == "NULLID":
            cur.error("nulls are not allowed in mapping files", tok)
        else:
            cur.error(f"expected a term, found {tok.text!r}", tok)
        if cur.peek().kind != "COMMA":
            break
        cur.next()
    cur.expect("RPAREN")
    if len(terms) != schema[name.text]:
        raise ArityMismatch(
            f"{name.text} has arity {schema[name.text]}, got {len(terms)}",
            cur.src.name,
            name.line,
            name.col,
        )
    return PatternAtom(name.text, tuple(terms))


def _parse_tgd(cur, source: Dict[str, int], target: Dict[str, int], head_tok) -> StTgd:
    body = _parse_pattern_atoms(cur, source, "source")
    cur.expect("ARROW", "'->'")
    exists_vars: List[Var] = []
    if cur.peek().kind == "IDENT" and cur.peek().text == "exists":
        cur.next()
        while True:
            v = cur.expect("IDENT", "a variable name")
            exists_vars.append(Var(v.text))
            if cur.peek().kind != "COMMA":
                break
            cur.next()
        cur.expect("COLON")
    head = _parse_pattern_atoms(cur, target, "target")
    cur.expect("PERIOD", "'.'")
    try:
        return StTgd(tuple(body), tuple(head), tuple(exists_vars))
    except DxError as exc:
        raise SchemaViolation(str(exc), cur.src.name, head_tok.line, head_tok.col)


def _parse_egd(cur, target: Dict[str, int], head_tok) -> Egd:
    body = _parse_pattern_atoms(cur, target, "target")
    cur.expect("ARROW", "'->'")
    left = cur.expect("IDENT", "a variable name")
    cur.expect("EQ", "'='")
    right = cur.expect("IDENT", "a variable name")
    cur.expect("PERIOD", "'.'")
    try:
        return Egd(tuple(body), (Var(left.text), Var(right.text)))
    except DxError as exc:
        raise SchemaViolation(str(exc), cur.src.name, head_tok.line, head_tok.col)


# ---------------------------------------------------------------- instance files


def parse_instance(src: SourceText, schema: Schema) -> Instance:
    cur = _Cursor(src)
    nulls: Dict[str, Null] = {}
    scope = src.name if src.name != "<string>" else "i"
    atoms: List[Atom] = []
    while not cur.at_end():
        name = cur.expect("IDENT", "a relation name")
        arity = schema.arity(name.text)
        if arity is None:
            raise UnknownRelation(
                f"unknown relation {name.text}", src.name, name.line, name.col
            )
        cur.expect("LPAREN")
        args: List = []
        while True:
            tok = cur.next()
            if tok.kind == "IDENT":
                args.append(Const(tok.text))
            elif tok.kind == "STRING":
                args.append(Const(tok.text))
            elif tok.kind == "NULLID":
                if tok.text not in nulls:
                    nulls[tok.text] = Null(scope, len(nulls))
                args.append(nulls[tok.text])
            else:
                cur.error(f"expected a value, found {tok.text!r}", tok)
            if cur.peek().kind != "COMMA":
                break
            cur.next()
        cur.expect("RPAREN")
        cur.expect("PERIOD", "'.'")
        if len(args) != arity:
            raise ArityMismatch(
                f"{name.text} has arity {arity}, got {len(args)}",
                src.name,
                name.line,
                name.col,
            )
        atoms.append(Atom(name.text, tuple(args)))
    return Instance(atoms)


# ---------------------------------------------------------------- query files


def parse_query(src: SourceText, schema: Schema) -> FOQuery:
    cur = _Cursor(src)
    name = cur.expect("IDENT", "a query name")
    cur.expect("LPAREN")
    free: List[Var] = []
    if cur.peek().kind != "RPAREN":
        while True:
            v = cur.expect("IDENT", "a variable name")
            if Var(v.text) in free:
                cur.error(f"duplicate free variable {v.text}", v)
            free.append(Var(v.text))
            if cur.peek().kind != "COMMA":
                break
            cur.next()
    cur.expect("RPAREN")
    cur.expect("ASSIGN", "':='")
    body = _parse_formula(cur, schema, {v.name for v in free}, allow_counting=False)
    cur.expect("PERIOD", "'.'")
    if not cur.at_end():
        cur.error("trailing input after the query")
    return FOQuery(name.text, tuple(free), body)


# ---------------------------------------------------------------- serializers


def _term_text(t: Term) -> str:
    return t.name


def _pattern_term_text(t: Term) -> str:
    # mapping-file convention: bare identifiers are variables
    return t.name if isinstance(t, Var) else f'"{t.name}"'


def serialize_formula(f: Formula, parent_prec: int = 0) -> str:
    if isinstance(f, RelAtom):
        return f"{f.rel}({','.join(_term_text(t) for t in f.terms)})"
    if isinstance(f, Eq):
        s = f"{_term_text(f.left)} = {_term_text(f.right)}"
        return f"({s})" if parent_prec >= 4 else s
    if isinstance(f, Not):
        return f"~{serialize_formula(f.sub, 4)}"
    if isinstance(f, And):
        s = " /\\ ".join(serialize_formula(p, 3) for p in f.parts)
        return f"({s})" if parent_prec >= 3 else s
    if isinstance(f, Or):
        # implication sugar is not reconstructed; Or is emitted directly
        s = " \\/ ".join(serialize_formula(p, 2) for p in f.parts)
        return f"({s})" if parent_prec >= 2 else s
    if isinstance(f, Exists):
        s = f"exists {f.var.name}: {serialize_formula(f.sub, 0)}"
        return f"({s})" if parent_prec > 0 else s
    if isinstance(f, Forall):
        s = f"forall {f.var.name}: {serialize_formula(f.sub, 0)}"
        return f"({s})" if parent_prec > 0 else s
    if isinstance(f, CountExists):
        s = f"exists[{f.lo},{f.hi}] {f.var.name}: {serialize_formula(f.sub, 0)}"
        return f"({s})" if parent_prec > 0 else s
    raise DxError(f"unknown formula node {f!r}")


def serialize_query(q: FOQuery) -> str:
    head = f"{q.name}({','.join(v.name for v in q.free_vars)})"
    return f"{head} := {serialize_formula(q.body)}.\n"


def serialize_mapping(m: SchemaMapping) -> str:
    lines = []
    if m.source.relations:
        lines.append("source " + ", ".join(f"{n}/{a}" for n, a in m.source.relations) + ".")
    if m.target.relations:
        lines.append("target " + ", ".join(f"{n}/{a}" for n, a in m.target.relations) + ".")
    for tgd in m.st_tgds:
        body = ", ".join(
            f"{a.rel}({','.join(_pattern_term_text(t) for t in a.terms)})" for a in tgd.body
        )
        head = ", ".join(
            f"{a.rel}({','.join(_pattern_term_text(t) for t in a.terms)})" for a in tgd.head
        )
        if tgd.exists_vars:
            ez = ", ".join(v.name for v in tgd.exists_vars)
            lines.append(f"tgd {body} -> exists {ez}: {head}.")
        else:
            lines.append(f"tgd {body} -> {head}.")
    for egd in m.egds:
        body = ", ".join(
            f"{a.rel}({','.join(_pattern_term_text(t) for t in a.terms)})" for a in egd.body
        )
        lines.append(f"egd {body} -> {egd.equated[0].name} = {egd.equated[1].name}.")
    for c in m.general_constraints:
        lines.append(f"constraint {serialize_formula(c.body)}.")
    return "\n".join(lines) + "\n"


def serialize_instance(instance: Instance) -> str:
    atoms = instance.sorted_atoms()
    names: Dict[Null, str] = {}
    for a in atoms:
        for v in a.args:
            if isinstance(v, Null) and v not in names:
                names[v] = f"_n{len(names) + 1}"
    lines = []
    for a in atoms:
        args = ",".join(names[v] if isinstance(v, Null) else v.name for v in a.args)
        lines.append(f"{a.rel}({args}).")
    return "\n".join(lines) + ("\n" if lines else "")


def answers_json(
    query_name: str,
    semantics: str,
    answers,
    meta: Optional[dict] = None,
) -> str:
    """The stable machine-readable answer format."""
    rows = sorted([v.name for v in tup] for tup in answers)
    doc = {
        "query": query_name,
        "semantics": semantics,
        "answers": rows,
        "meta": meta or {},
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
