"""Terms and formulas of the directed-line fragment, with parser and printer.

The object language has one binary predicate UNDIR and one unary function
rev by default; other signatures can be declared.  Surface syntax follows
the ASCII conventions of the bundled derivation transcripts:

    quantifiers   (Ax) (Ex)        prefix, bind tightest (like ~)
    negation      ~                tightest binary-free level
    conjunction   &                binds tighter than |
    disjunction   |                binds tighter than ->
    implication   ->               loosest, right-associative
    grouping      [ ... ]          also used for function terms [rev x]
    atoms         UNDIR t1 t2      prefix form, arity from the signature

Unicode aliases are accepted on input and never emitted.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Mapping, Union


class ParseError(ValueError):
    """Lexical or grammatical error, with the byte offset of the culprit."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple["Term", ...]


Term = Union[Var, App]


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


Formula = Union[Atom, Not, And, Or, Implies, Forall, Exists]

IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9]*")


@dataclass(frozen=True)
class Signature:
    """Declared predicate and function arities.

    Names are matched case-insensitively; predicates canonicalize to upper
    case, functions to lower case.
    """

    predicates: Mapping[str, int]
    functions: Mapping[str, int]

    def predicate_arity(self, name: str) -> int | None:
        return self.predicates.get(name.upper())

    def function_arity(self, name: str) -> int | None:
        return self.functions.get(name.lower())

    def extended(self, predicates: Mapping[str, int] = (), functions: Mapping[str, int] = ()) -> "Signature":
        preds = dict(self.predicates)
        preds.update({k.upper(): v for k, v in dict(predicates).items()})
        fns = dict(self.functions)
        fns.update({k.lower(): v for k, v in dict(functions).items()})
        return Signature(preds, fns)


GEOMETRY = Signature(predicates={"UNDIR": 2}, functions={"rev": 1})

# Defined relations parse as ordinary atoms under this signature; the
# geometry kernel itself only ever sees UNDIR (see geometry.expand_defs).
GEOMETRY_WITH_DEFS = GEOMETRY.extended(
    predicates={"CON": 2, "DIR": 2, "OPP": 2, "INOPP": 2}
)


# ---------------------------------------------------------------------------
# Lexer

_UNICODE_ALIASES = {
    "∼": "~",   # tilde operator
    "¬": "~",
    "∧": "&",
    "∨": "|",
    "→": "->",
    "⟶": "->",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<arrow>->)
  | (?P<name>[A-Za-z][A-Za-z0-9]*)
  | (?P<forall>∀)
  | (?P<exists>∃)
  | (?P<punct>[()\[\]~&|,])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int


def _lex(src: str) -> list[_Token]:
    for raw, repl in _UNICODE_ALIASES.items():
        src = src.replace(raw, repl)
    out: list[_Token] = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", pos)
        pos = m.end()
        if m.lastgroup == "ws":
            continue
        kind = m.lastgroup or "punct"
        if kind == "punct":
            kind = m.group()
        elif kind == "arrow":
            kind = "->"
        out.append(_Token(kind, m.group(), m.start()))
    out.append(_Token("eof", "", len(src)))
    return out


# ---------------------------------------------------------------------------
# Parser (recursive descent, precedence ~ > & > | > ->, -> right-assoc)

_QUANT_NAME_RE = re.compile(r"^([AE])([A-Za-z][A-Za-z0-9]*)$")


class _Parser:
    def __init__(self, src: str, signature: Signature):
        self.tokens = _lex(src)
        self.pos = 0
        self.sig = signature

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> _Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.text!r}", tok.offset)
        return tok

    # formula := implication
    def formula(self) -> Formula:
        return self.implication()

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek().kind == "->":
            self.next()
            right = self.implication()
            return Implies(left, right)
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek().kind == "|":
            self.next()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.peek().kind == "&":
            self.next()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "~":
            self.next()
            return Not(self.unary())
        if tok.kind == "(":
            return self.quantified()
        if tok.kind == "[":
            head = self.peek(1)
            if head.kind == "name" and self.sig.function_arity(head.text) is not None:
                raise ParseError(
                    f"function term [{head.text} ...] found where a formula is required",
                    tok.offset,
                )
            self.next()
            inner = self.formula()
            self.expect("]")
            return inner
        if tok.kind == "name":
            return self.atom()
        raise ParseError(f"expected a formula, found {tok.text!r}", tok.offset)

    def quantified(self) -> Formula:
        lpar = self.expect("(")
        tok = self.next()
        if tok.kind in ("forall", "exists"):
            kind = "A" if tok.kind == "forall" else "E"
            var_tok = self.expect("name")
            var = var_tok.text
        elif tok.kind == "name":
            m = _QUANT_NAME_RE.match(tok.text)
            if not m or self.peek().kind != ")":
                raise ParseError(
                    f"expected a quantifier like (Ax) or (Ex), found ({tok.text}", tok.offset
                )
            kind, var = m.group(1), m.group(2)
        else:
            raise ParseError(f"expected a quantifier, found {tok.text!r}", tok.offset)
        self.expect(")")
        body = self.unary()
        return Forall(var, body) if kind == "A" else Exists(var, body)

    def atom(self) -> Formula:
        tok = self.expect("name")
        arity = self.sig.predicate_arity(tok.text)
        if arity is None:
            raise ParseError(f"unknown predicate {tok.text!r}", tok.offset)
        args = tuple(self.term() for _ in range(arity))
        return Atom(tok.text.upper(), args)

    def term(self) -> Term:
        tok = self.peek()
        if tok.kind == "name":
            self.next()
            if self.sig.function_arity(tok.text) is not None:
                raise ParseError(
                    f"function symbol {tok.text!r} used without brackets", tok.offset
                )
            return Var(tok.text)
        if tok.kind == "[":
            self.next()
            fn = self.expect("name")
            arity = self.sig.function_arity(fn.text)
            if arity is None:
                raise ParseError(f"unknown function symbol {fn.text!r}", fn.offset)
            args = tuple(self.term() for _ in range(arity))
            self.expect("]")
            return App(fn.text.lower(), args)
        raise ParseError(f"expected a term, found {tok.text!r}", tok.offset)

    # Annotation terms additionally allow call syntax: rev(rev(v3)).
    def annot_term(self) -> Term:
        tok = self.peek()
        if tok.kind == "[":
            return self.term()
        name = self.expect("name")
        if self.peek().kind == "(":
            arity = self.sig.function_arity(name.text)
            if arity is None:
                raise ParseError(f"unknown function symbol {name.text!r}", name.offset)
            self.next()
            args = [self.annot_term()]
            while self.peek().kind == ",":
                self.next()
                args.append(self.annot_term())
            self.expect(")")
            if len(args) != arity:
                raise ParseError(
                    f"{name.text!r} expects {arity} argument(s), got {len(args)}", name.offset
                )
            return App(name.text.lower(), tuple(args))
        if self.sig.function_arity(name.text) is not None:
            raise ParseError(f"function symbol {name.text!r} needs arguments", name.offset)
        return Var(name.text)

    def finish(self, value):
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(f"trailing input {tok.text!r}", tok.offset)
        return value


def parse_formula(src: str, signature: Signature = GEOMETRY) -> Formula:
    p = _Parser(src, signature)
    return p.finish(p.formula())


def parse_term(src: str, signature: Signature = GEOMETRY) -> Term:
    p = _Parser(src, signature)
    return p.finish(p.term())


def parse_annotation_term(src: str, signature: Signature = GEOMETRY) -> Term:
    """Terms as they appear in rule annotations: bare names, [rev x], rev(x)."""
    p = _Parser(src, signature)
    return p.finish(p.annot_term())


# ---------------------------------------------------------------------------
# Printer.  Minimal brackets; parse(print(f)) is structurally identical to f.

_PREC_IMPLIES = 1
_PREC_OR = 2
_PREC_AND = 3
_PREC_UNARY = 4


def print_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    return "[" + t.fn + "".join(" " + print_term(a) for a in t.args) + "]"


def print_annotation_term(t: Term) -> str:
    """Call-syntax form used in justification annotations: rev(rev(v3))."""
    if isinstance(t, Var):
        return t.name
    return t.fn + "(" + ", ".join(print_annotation_term(a) for a in t.args) + ")"


def _print(f: Formula, min_prec: int) -> str:
    if isinstance(f, Atom):
        return f.pred + "".join(" " + print_term(a) for a in f.args)
    if isinstance(f, Not):
        return _wrap("~" + _print(f.body, _PREC_UNARY), _PREC_UNARY, min_prec)
    if isinstance(f, Forall):
        return _wrap(f"(A{f.var})" + _print(f.body, _PREC_UNARY), _PREC_UNARY, min_prec)
    if isinstance(f, Exists):
        return _wrap(f"(E{f.var})" + _print(f.body, _PREC_UNARY), _PREC_UNARY, min_prec)
    if isinstance(f, And):
        s = _print(f.left, _PREC_AND) + " & " + _print(f.right, _PREC_AND + 1)
        return _wrap(s, _PREC_AND, min_prec)
    if isinstance(f, Or):
        s = _print(f.left, _PREC_OR) + " | " + _print(f.right, _PREC_OR + 1)
        return _wrap(s, _PREC_OR, min_prec)
    if isinstance(f, Implies):
        s = _print(f.left, _PREC_IMPLIES + 1) + " -> " + _print(f.right, _PREC_IMPLIES)
        return _wrap(s, _PREC_IMPLIES, min_prec)
    raise TypeError(f"not a formula: {f!r}")


def _wrap(s: str, prec: int, min_prec: int) -> str:
    return s if prec >= min_prec else "[" + s + "]"


def print_formula(f: Formula) -> str:
    return _print(f, 0)


# ---------------------------------------------------------------------------
# Variables and substitution


def term_vars(t: Term) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset((t.name,))
    out: frozenset[str] = frozenset()
    for a in t.args:
        out |= term_vars(a)
    return out


@lru_cache(maxsize=None)
def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        out: frozenset[str] = frozenset()
        for a in f.args:
            out |= term_vars(a)
        return out
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, (And, Or, Implies)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (Forall, Exists)):
        return free_vars(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def bound_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset()
    if isinstance(f, Not):
        return bound_vars(f.body)
    if isinstance(f, (And, Or, Implies)):
        return bound_vars(f.left) | bound_vars(f.right)
    if isinstance(f, (Forall, Exists)):
        return bound_vars(f.body) | {f.var}
    raise TypeError(f"not a formula: {f!r}")


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from subterms(a)


def formula_terms(f: Formula) -> Iterator[Term]:
    """All term occurrences in atoms, outermost first."""
    if isinstance(f, Atom):
        for a in f.args:
            yield from subterms(a)
    elif isinstance(f, Not):
        yield from formula_terms(f.body)
    elif isinstance(f, (And, Or, Implies)):
        yield from formula_terms(f.left)
        yield from formula_terms(f.right)
    elif isinstance(f, (Forall, Exists)):
        yield from formula_terms(f.body)


def substitute_term(t: Term, bindings: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return bindings.get(t.name, t)
    return App(t.fn, tuple(substitute_term(a, bindings) for a in t.args))


def fresh_name(base: str, taken: frozenset[str] | set[str]) -> str:
    stem = base.rstrip("0123456789") or "v"
    k = 1
    while f"{stem}{k}" in taken or f"{stem}{k}" == base:
        k += 1
    return f"{stem}{k}"


def substitute(f: Formula, bindings: Mapping[str, Term]) -> Formula:
    """Simultaneous capture-avoiding substitution on free occurrences."""
    bindings = {k: v for k, v in bindings.items() if v != Var(k)}
    if not bindings:
        return f
    return _subst(f, bindings)


def _subst(f: Formula, bindings: Mapping[str, Term]) -> Formula:
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(substitute_term(a, bindings) for a in f.args))
    if isinstance(f, Not):
        return Not(_subst(f.body, bindings))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(_subst(f.left, bindings), _subst(f.right, bindings))
    if isinstance(f, (Forall, Exists)):
        live = {k: v for k, v in bindings.items() if k != f.var and k in free_vars(f.body)}
        if not live:
            return type(f)(f.var, f.body)
        body = f.body
        var = f.var
        if any(var in term_vars(t) for t in live.values()):
            taken = free_vars(body) | set(live) | {n for t in live.values() for n in term_vars(t)}
            var = fresh_name(f.var, taken)
            body = _subst(body, {f.var: Var(var)})
        return type(f)(var, _subst(body, live))
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Alpha equivalence and the canonical comparison key


def alpha_eq(f: Formula, g: Formula) -> bool:
    """True iff f and g differ only in bound-variable names."""
    return _alpha(f, g, {}, {}, 0)


def _alpha_term(s: Term, t: Term, env1: dict, env2: dict) -> bool:
    if isinstance(s, Var) and isinstance(t, Var):
        d1, d2 = env1.get(s.name), env2.get(t.name)
        if (d1 is None) != (d2 is None):
            return False
        return d1 == d2 if d1 is not None else s.name == t.name
    if isinstance(s, App) and isinstance(t, App):
        return (
            s.fn == t.fn
            and len(s.args) == len(t.args)
            and all(_alpha_term(a, b, env1, env2) for a, b in zip(s.args, t.args))
        )
    return False


def _alpha(f: Formula, g: Formula, env1: dict, env2: dict, depth: int) -> bool:
    if type(f) is not type(g):
        return False
    if isinstance(f, Atom):
        return f.pred == g.pred and len(f.args) == len(g.args) and all(
            _alpha_term(a, b, env1, env2) for a, b in zip(f.args, g.args)
        )
    if isinstance(f, Not):
        return _alpha(f.body, g.body, env1, env2, depth)
    if isinstance(f, (And, Or, Implies)):
        return _alpha(f.left, g.left, env1, env2, depth) and _alpha(
            f.right, g.right, env1, env2, depth
        )
    if isinstance(f, (Forall, Exists)):
        e1 = dict(env1)
        e2 = dict(env2)
        e1[f.var] = depth
        e2[g.var] = depth
        return _alpha(f.body, g.body, e1, e2, depth + 1)
    raise TypeError(f"not a formula: {f!r}")


def negated_quantifier_view(f: Formula) -> Formula:
    """~(Ex)P as (Ax)~P and ~(Ax)P as (Ex)~P; identity elsewhere."""
    if isinstance(f, Not) and isinstance(f.body, Exists):
        return Forall(f.body.var, Not(f.body.body))
    if isinstance(f, Not) and isinstance(f.body, Forall):
        return Exists(f.body.var, Not(f.body.body))
    return f


@lru_cache(maxsize=None)
def canonical_key(f: Formula):
    """Hashable key identifying formulas up to alpha-renaming, associativity
    and commutativity of & and |, and the negated-quantifier view.

    Double negation is deliberately NOT collapsed.
    """
    return _canon(f, ())


def _canon_term(t: Term, env: tuple[str, ...]):
    if isinstance(t, Var):
        for i in range(len(env) - 1, -1, -1):
            if env[i] == t.name:
                return ("b", len(env) - 1 - i)
        return ("v", t.name)
    return ("t", t.fn, tuple(_canon_term(a, env) for a in t.args))


def _canon(f: Formula, env: tuple[str, ...]):
    if isinstance(f, Atom):
        return ("atom", f.pred, tuple(_canon_term(a, env) for a in f.args))
    if isinstance(f, Not):
        view = negated_quantifier_view(f)
        if view is not f:
            return _canon(view, env)
        return ("not", _canon(f.body, env))
    if isinstance(f, (And, Or)):
        tag = "and" if isinstance(f, And) else "or"
        parts = [_canon(p, env) for p in _flat(f, type(f))]
        parts.sort(key=repr)
        return (tag, tuple(parts))
    if isinstance(f, Implies):
        return ("imp", _canon(f.left, env), _canon(f.right, env))
    if isinstance(f, Forall):
        return ("forall", _canon(f.body, env + (f.var,)))
    if isinstance(f, Exists):
        return ("exists", _canon(f.body, env + (f.var,)))
    raise TypeError(f"not a formula: {f!r}")


def _flat(f: Formula, cls) -> Iterator[Formula]:
    if isinstance(f, cls):
        yield from _flat(f.left, cls)
        yield from _flat(f.right, cls)
    else:
        yield f


def rule_eq(f: Formula, g: Formula) -> bool:
    """The proof kernel's formula comparison; see canonical_key."""
    return f == g or canonical_key(f) == canonical_key(g)


def flatten_or(f: Formula) -> list[Formula]:
    return list(_flat(f, Or))


def flatten_and(f: Formula) -> list[Formula]:
    return list(_flat(f, And))


def build_or(parts: list[Formula]) -> Formula:
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Or(p, out)
    return out


def build_and(parts: list[Formula]) -> Formula:
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = And(p, out)
    return out
