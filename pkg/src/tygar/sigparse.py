"""Signature-file parsing: `name :: type` lines plus class/instance decls.

Lexical convention follows the fixtures: identifiers starting lowercase
(or with an underscore) are type variables, capitalized ones are
constructors. Sugar: `[a]` is `List a`, `(a,b)` is `Pair a b`, `String`
is `List Char`, arrows are right-associative. Operator names appear in
parentheses, e.g. `($) :: (a -> b) -> a -> b`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .types import App, BaseType, FnType, PolyType, Var, free_vars


class SignatureError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        super().__init__(f"{message} (line {line}, column {col})" if line else message)


@dataclass(frozen=True)
class RArrow:
    """A function type inside a rich signature; erased by desugaring."""

    left: "RType"
    right: "RType"


RType = Union[RArrow, App, Var]


@dataclass
class RichSignature:
    name: str
    constraints: list = field(default_factory=list)  # (class name, var name)
    rtype: RType = None
    line: int = 0


@dataclass
class ClassDecl:
    name: str
    line: int = 0


@dataclass
class InstanceDecl:
    context: list  # (class name, var name)
    classname: str
    head: BaseType
    line: int = 0


SigItem = Union[RichSignature, ClassDecl, InstanceDecl]

_OPCHARS = set("!#$%&*+./<=>?@\\^|-~:")


def _tokenize(text: str, lineno: int) -> list[tuple]:
    """Tokens as (kind, value, col); kinds: ident, op-name pieces, punct."""
    toks = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in " \t":
            i += 1
            continue
        if text.startswith("--", i):
            break
        col = i + 1
        if text.startswith("::", i):
            toks.append(("dcolon", "::", col))
            i += 2
        elif text.startswith("->", i):
            toks.append(("arrow", "->", col))
            i += 2
        elif text.startswith("=>", i):
            toks.append(("darrow", "=>", col))
            i += 2
        elif c in "()[],":
            toks.append((c, c, col))
            i += 1
        elif c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            toks.append(("ident", text[i:j], col))
            i = j
        elif c in _OPCHARS:
            j = i
            while j < n and text[j] in _OPCHARS and not text.startswith("::", j) \
                    and not text.startswith("->", j) and not text.startswith("=>", j):
                j += 1
            if j == i:
                raise SignatureError(f"unexpected character {c!r}", lineno, col)
            toks.append(("opsym", text[i:j], col))
            i = j
        else:
            raise SignatureError(f"unexpected character {c!r}", lineno, col)
    return toks


class _LineParser:
    def __init__(self, toks: list, lineno: int):
        self.toks = toks
        self.pos = 0
        self.lineno = lineno

    def peek(self) -> Optional[tuple]:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self) -> tuple:
        tok = self.peek()
        if tok is None:
            last_col = self.toks[-1][2] if self.toks else 1
            raise SignatureError("unexpected end of line", self.lineno, last_col)
        self.pos += 1
        return tok

    def expect(self, kind: str) -> tuple:
        tok = self.next()
        if tok[0] != kind:
            raise SignatureError(f"expected {kind!r}, found {tok[1]!r}",
                                 self.lineno, tok[2])
        return tok

    def error(self, msg: str) -> SignatureError:
        tok = self.peek()
        col = tok[2] if tok else (self.toks[-1][2] if self.toks else 1)
        return SignatureError(msg, self.lineno, col)

    # -- types ------------------------------------------------------------

    def parse_type(self) -> RType:
        left = self.parse_btype()
        tok = self.peek()
        if tok and tok[0] == "arrow":
            self.next()
            return RArrow(left, self.parse_type())
        return left

    def parse_btype(self) -> RType:
        atoms = [self.parse_atom()]
        while True:
            tok = self.peek()
            if tok and (tok[0] in ("ident", "[", "(")):
                atoms.append(self.parse_atom())
            else:
                break
        head = atoms[0]
        if len(atoms) == 1:
            return head
        if isinstance(head, Var):
            raise self.error(
                "higher-kinded type variables are not supported "
                f"(variable {head.name!r} applied to arguments)")
        if isinstance(head, RArrow) or not isinstance(head, App):
            raise self.error("only a constructor can head a type application")
        if head.args:
            raise self.error("nested application onto an applied constructor")
        return App(head.con, tuple(atoms[1:]))

    def parse_atom(self) -> RType:
        tok = self.next()
        kind, val, col = tok
        if kind == "ident":
            if val[0].isupper():
                if val == "String":
                    return App("List", (App("Char"),))
                return App(val)
            return Var(val)
        if kind == "[":
            inner = self.parse_type()
            self.expect("]")
            return App("List", (inner,))
        if kind == "(":
            first = self.parse_type()
            tok = self.peek()
            if tok and tok[0] == ",":
                self.next()
                second = self.parse_type()
                self.expect(")")
                return App("Pair", (first, second))
            self.expect(")")
            return first
        raise SignatureError(f"unexpected token {val!r}", self.lineno, col)

    # -- constraints and names --------------------------------------------

    def parse_constraint(self) -> tuple:
        cls = self.expect("ident")
        if not cls[1][0].isupper():
            raise SignatureError("class name must be capitalized",
                                 self.lineno, cls[2])
        var = self.expect("ident")
        if var[1][0].isupper():
            raise SignatureError(
                "class constraints apply to type variables only",
                self.lineno, var[2])
        return (cls[1], var[1])

    def parse_context(self) -> list:
        """Constraints followed by `=>`, if present; backtracks otherwise."""
        start = self.pos
        try:
            out = []
            tok = self.peek()
            if tok and tok[0] == "(":
                self.next()
                out.append(self.parse_constraint())
                while self.peek() and self.peek()[0] == ",":
                    self.next()
                    out.append(self.parse_constraint())
                self.expect(")")
            else:
                out.append(self.parse_constraint())
            self.expect("darrow")
            return out
        except SignatureError:
            self.pos = start
            return []

    def parse_name(self) -> str:
        tok = self.next()
        if tok[0] == "ident":
            return tok[1]
        if tok[0] == "(":
            op = self.next()
            if op[0] not in ("opsym", ","):
                raise SignatureError("expected an operator name",
                                     self.lineno, op[2])
            self.expect(")")
            return f"({op[1]})"
        raise SignatureError(f"expected a component name, found {tok[1]!r}",
                             self.lineno, tok[2])


def parse_line(text: str, lineno: int = 1) -> Optional[SigItem]:
    """One signature-file line; None for blanks and comments."""
    toks = _tokenize(text, lineno)
    if not toks:
        return None
    p = _LineParser(toks, lineno)
    if toks[0][0] == "ident" and toks[0][1] == "class":
        p.next()
        name = p.expect("ident")[1]
        if p.peek() and p.peek()[0] == "ident":
            p.next()  # optional class variable
        if p.peek() is not None:
            raise p.error("trailing tokens after class declaration")
        return ClassDecl(name, lineno)
    if toks[0][0] == "ident" and toks[0][1] == "instance":
        p.next()
        context = p.parse_context()
        cls = p.expect("ident")[1]
        head = p.parse_atom()
        if p.peek() is not None:
            raise p.error("trailing tokens after instance declaration")
        if not isinstance(head, App):
            raise SignatureError("instance head must be a constructor",
                                 lineno, toks[0][2])
        return InstanceDecl(context, cls, head, lineno)
    name = p.parse_name()
    p.expect("dcolon")
    constraints = p.parse_context()
    rtype = p.parse_type()
    if p.peek() is not None:
        raise p.error("trailing tokens after signature")
    return RichSignature(name, constraints, rtype, lineno)


def parse_items(text: str) -> list:
    items = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        item = parse_line(line, lineno)
        if item is not None:
            items.append(item)
    return items


def rtype_is_base(t: RType) -> bool:
    return not isinstance(t, RArrow)


def _check_base(t: RType, lineno: int) -> BaseType:
    if isinstance(t, RArrow):
        raise SignatureError(
            "function-typed argument needs desugaring (not a plain signature)",
            lineno, 0)
    if isinstance(t, App):
        for a in t.args:
            _check_base(a, lineno)
    return t


def rtype_to_fn(t: RType, lineno: int = 0) -> FnType:
    """Flatten a right-nested arrow chain into an uncurried function type."""
    params = []
    while isinstance(t, RArrow):
        params.append(_check_base(t.left, lineno))
        t = t.right
    return FnType(tuple(params), _check_base(t, lineno))


def _registered(t: BaseType, constructors: dict, lineno: int) -> None:
    if isinstance(t, App):
        if t.con not in constructors:
            raise SignatureError(f"undeclared constructor {t.con}", lineno, 0)
        for a in t.args:
            _registered(a, constructors, lineno)


def parse_signature(text: str, constructors: Optional[dict] = None,
                    lineno: int = 1) -> tuple:
    """Parse one plain `name :: type` line into a closed polytype.

    Free variables are implicitly universally quantified in
    first-occurrence order. Constraints and function-typed arguments are
    rejected here; the frontend handles rich signatures. When a
    constructor registry is supplied, unknown constructors are an error.
    """
    item = parse_line(text, lineno)
    if not isinstance(item, RichSignature):
        raise SignatureError("expected a `name :: type` signature", lineno, 1)
    if item.constraints:
        raise SignatureError("class constraints need desugaring "
                             "(not a plain signature)", lineno, 1)
    fn = rtype_to_fn(item.rtype, lineno)
    if constructors is not None:
        for b in (*fn.params, fn.ret):
            _registered(b, constructors, lineno)
    quantified = []
    for b in (*fn.params, fn.ret):
        for v in free_vars(b):
            if v not in quantified:
                quantified.append(v)
    return item.name, PolyType(tuple(quantified), fn)
