"""Core data model: base types, polytypes, substitutions, terms, libraries."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


class TypingError(Exception):
    """Malformed type-level data (bad arity, unknown component, ...)."""


@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self) -> str:
        return f"Var({self.name})"


@dataclass(frozen=True)
class App:
    con: str
    args: tuple = ()

    def __repr__(self) -> str:
        if not self.args:
            return f"App({self.con})"
        return f"App({self.con}, {list(self.args)})"


class _Bottom:
    """The distinguished bottom type; strictly below every base type."""

    _instance: Optional["_Bottom"] = None

    def __new__(cls) -> "_Bottom":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Bottom"


BOTTOM = _Bottom()

BaseType = Union[Var, App, _Bottom]


def is_bottom(t: BaseType) -> bool:
    return t is BOTTOM


def is_ground(t: BaseType) -> bool:
    if t is BOTTOM or isinstance(t, Var):
        return False
    return all(is_ground(a) for a in t.args)


def free_vars(t: BaseType) -> list[str]:
    """Variable names in first-occurrence (pre-order, left-to-right) order."""
    seen: list[str] = []

    def walk(u: BaseType) -> None:
        if isinstance(u, Var):
            if u.name not in seen:
                seen.append(u.name)
        elif isinstance(u, App):
            for a in u.args:
                walk(a)

    walk(t)
    return seen


def count_var(t: BaseType, name: str) -> int:
    if isinstance(t, Var):
        return 1 if t.name == name else 0
    if isinstance(t, App):
        return sum(count_var(a, name) for a in t.args)
    return 0


def rename_vars(t: BaseType, mapping: dict[str, str]) -> BaseType:
    if isinstance(t, Var):
        return Var(mapping.get(t.name, t.name))
    if isinstance(t, App):
        return App(t.con, tuple(rename_vars(a, mapping) for a in t.args))
    return t


def canonical(t: BaseType) -> BaseType:
    """Rename variables to t0,t1,... in first-occurrence order.

    Equality and set membership of types throughout the package is on
    canonical forms, which makes alpha-equivalence plain equality.
    """
    mapping: dict[str, str] = {}

    def walk(u: BaseType) -> BaseType:
        if isinstance(u, Var):
            if u.name not in mapping:
                mapping[u.name] = f"t{len(mapping)}"
            return Var(mapping[u.name])
        if isinstance(u, App):
            return App(u.con, tuple(walk(a) for a in u.args))
        return u

    return walk(t)


# The top of the subsumption lattice: a lone type variable, in canonical form.
TOP = Var("t0")


def render_type(t: BaseType) -> str:
    if t is BOTTOM:
        return "_|_"
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.con
    parts = [t.con]
    for a in t.args:
        s = render_type(a)
        if isinstance(a, App) and a.args:
            s = f"({s})"
        parts.append(s)
    return " ".join(parts)


@dataclass(frozen=True)
class FnType:
    """Uncurried first-order function type over base types."""

    params: tuple
    ret: BaseType

    def __repr__(self) -> str:
        return f"FnType({render_fn(self)})"


def render_fn(t: FnType) -> str:
    parts = [render_type(p) for p in t.params] + [render_type(t.ret)]
    return " -> ".join(parts)


@dataclass(frozen=True)
class PolyType:
    quantified: tuple
    body: FnType

    def __repr__(self) -> str:
        q = " ".join(self.quantified)
        return f"PolyType(forall {q}. {render_fn(self.body)})" if q else repr(self.body)


class Substitution:
    """Finite map from type variables to base types; identity elsewhere.

    The bottom substitution maps every type to bottom.
    """

    __slots__ = ("bindings", "is_bottom")

    def __init__(self, bindings: Optional[dict[str, BaseType]] = None,
                 bottom: bool = False):
        self.is_bottom = bottom
        self.bindings: dict[str, BaseType] = {} if bottom else dict(bindings or {})

    def __repr__(self) -> str:
        if self.is_bottom:
            return "Substitution(bottom)"
        inner = ", ".join(f"{k}->{render_type(v)}" for k, v in self.bindings.items())
        return f"Substitution({inner})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Substitution):
            return NotImplemented
        if self.is_bottom or other.is_bottom:
            return self.is_bottom == other.is_bottom
        return self.bindings == other.bindings


BOTTOM_SUBST = Substitution(bottom=True)


def apply_subst(s: Substitution, t: BaseType) -> BaseType:
    """Capture-free simultaneous replacement; bottom is absorbing."""
    if s.is_bottom or t is BOTTOM:
        return BOTTOM
    if isinstance(t, Var):
        return s.bindings.get(t.name, t)
    out = []
    for a in t.args:
        r = apply_subst(s, a)
        if r is BOTTOM:
            return BOTTOM
        out.append(r)
    return App(t.con, tuple(out))


def compose(s1: Substitution, s2: Substitution) -> Substitution:
    """The substitution applying s2 first, then s1."""
    if s1.is_bottom or s2.is_bottom:
        return BOTTOM_SUBST
    out = {v: apply_subst(s1, t) for v, t in s2.bindings.items()}
    for v, t in s1.bindings.items():
        if v not in out:
            out[v] = t
    return Substitution(out)


class FreshSupply:
    """Monotonically increasing fresh-variable source, one per session."""

    def __init__(self, start: int = 1):
        self._next = start

    def fresh(self) -> str:
        name = f"t{self._next}"
        self._next += 1
        return name


def fresh_instance(p: PolyType, supply: FreshSupply) -> FnType:
    """Replace each quantified variable with a globally fresh one."""
    mapping = {q: supply.fresh() for q in p.quantified}
    params = tuple(rename_vars(b, mapping) for b in p.body.params)
    return FnType(params, rename_vars(p.body.ret, mapping))


# ---------------------------------------------------------------------------
# Terms

@dataclass(frozen=True)
class TermVar:
    name: str

    def __repr__(self) -> str:
        return f"TermVar({self.name})"


@dataclass(frozen=True)
class TermApp:
    component: str
    args: tuple = ()

    def __repr__(self) -> str:
        return f"TermApp({self.component}, {list(self.args)})"


Term = Union[TermVar, TermApp]


@dataclass(frozen=True)
class NormalForm:
    """An application term under an ordered list of lambda-bound parameters."""

    params: tuple
    body: Term


def term_size(t: Term) -> int:
    """Number of component applications in a term."""
    if isinstance(t, TermVar):
        return 0
    return 1 + sum(term_size(a) for a in t.args)


def subterm_positions(t: Term) -> list[tuple]:
    """All positions (paths of child indices) in pre-order."""
    out: list[tuple] = []

    def walk(u: Term, path: tuple) -> None:
        out.append(path)
        if isinstance(u, TermApp):
            for i, a in enumerate(u.args):
                walk(a, path + (i,))

    walk(t, ())
    return out


def subterm_at(t: Term, path: tuple) -> Term:
    for i in path:
        t = t.args[i]
    return t


def render_app_term(t: Term) -> str:
    if isinstance(t, TermVar):
        return t.name
    if not t.args:
        return t.component
    parts = [t.component]
    for a in t.args:
        s = render_app_term(a)
        if isinstance(a, TermApp) and a.args:
            s = f"({s})"
        parts.append(s)
    return " ".join(parts)


def render_term(nf: NormalForm) -> str:
    """Deterministic rendering; parameters print as arg0..argN-1."""
    return render_app_term(nf.body)


# ---------------------------------------------------------------------------
# Libraries and environments

class LibraryError(Exception):
    pass


@dataclass
class Library:
    """Constructor arities plus named component signatures.

    Component insertion order is meaningful: it fixes group-member
    iteration order during program extraction.
    """

    constructors: dict[str, int] = field(default_factory=dict)
    components: dict[str, PolyType] = field(default_factory=dict)
    # component classes declared via `class` lines: class name -> dictionary
    # constructor name (e.g. Eq -> EqD)
    dict_constructors: frozenset = frozenset()
    # surface-name mapping for generated components (nullary variants,
    # monomorphised instances)
    display_names: dict[str, str] = field(default_factory=dict)
    # name of the function-application component, when present
    apply_component: Optional[str] = None

    def arity(self, component: str) -> int:
        return len(self.components[component].body.params)

    def declare_constructor(self, name: str, arity: int) -> None:
        prev = self.constructors.get(name)
        if prev is not None and prev != arity:
            raise LibraryError(
                f"constructor {name} used with arity {arity}, previously {prev}")
        self.constructors[name] = arity

    def register_type(self, t: BaseType) -> None:
        """Record constructors appearing in t; first use fixes arity."""
        if isinstance(t, App):
            self.declare_constructor(t.con, len(t.args))
            for a in t.args:
                self.register_type(a)

    def add_component(self, name: str, poly: PolyType) -> None:
        if name in self.components:
            raise LibraryError(f"duplicate component {name}")
        for b in poly.body.params:
            self.register_type(b)
        self.register_type(poly.body.ret)
        self.components[name] = poly

    def with_component(self, name: str, poly: PolyType) -> "Library":
        """Copy with one extra component (used for temporary components)."""
        lib = Library(dict(self.constructors), dict(self.components),
                      self.dict_constructors, dict(self.display_names),
                      self.apply_component)
        lib.components[name] = poly
        return lib

    def display_name(self, component: str) -> str:
        return self.display_names.get(component, component)


Environment = dict
