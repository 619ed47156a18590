"""The type subsumption lattice and meet-closed abstract covers."""

from __future__ import annotations

from typing import Iterable, Iterator, Optional

from .types import (
    App,
    BOTTOM,
    BOTTOM_SUBST,
    BaseType,
    Substitution,
    TOP,
    Var,
    apply_subst,
    canonical,
    count_var,
    free_vars,
    render_type,
    rename_vars,
)


def subsumes(specific: BaseType, general: BaseType) -> bool:
    """True iff some substitution maps `general` onto `specific`.

    One-sided matching, not unification: variables of `specific` are
    treated as constants. Bottom is below everything; a lone variable
    is above everything.
    """
    if specific is BOTTOM:
        return True
    if general is BOTTOM:
        return False
    bind: dict[str, BaseType] = {}

    def walk(g: BaseType, s: BaseType) -> bool:
        if isinstance(g, Var):
            if g.name in bind:
                return bind[g.name] == s
            bind[g.name] = s
            return True
        if isinstance(s, Var):
            return False
        if g.con != s.con or len(g.args) != len(s.args):
            return False
        return all(walk(ga, sa) for ga, sa in zip(g.args, s.args))

    return walk(general, specific)


def equivalent(a: BaseType, b: BaseType) -> bool:
    """Alpha-equivalence; on canonical forms this is plain equality."""
    return canonical(a) == canonical(b)


def _occurs(name: str, t: BaseType, bindings: dict[str, BaseType]) -> bool:
    if isinstance(t, Var):
        if t.name == name:
            return True
        nxt = bindings.get(t.name)
        return nxt is not None and _occurs(name, nxt, bindings)
    if isinstance(t, App):
        return any(_occurs(name, a, bindings) for a in t.args)
    return False


def _resolve(t: BaseType, bindings: dict[str, BaseType]) -> BaseType:
    if isinstance(t, Var):
        b = bindings.get(t.name)
        return t if b is None else _resolve(b, bindings)
    if isinstance(t, App):
        return App(t.con, tuple(_resolve(a, bindings) for a in t.args))
    return t


def mgu_pairs(pairs: Iterable[tuple]) -> Substitution:
    """Most general unifier of a sequence of type pairs.

    Failure (including the occurs check) is the bottom substitution,
    a value, not an error. Same-named variables on either side denote
    the same variable; callers rename apart when that is not intended.
    """
    work = list(pairs)
    bindings: dict[str, BaseType] = {}
    while work:
        a, b = work.pop()
        if a is BOTTOM or b is BOTTOM:
            return BOTTOM_SUBST
        a = _resolve(a, bindings)
        b = _resolve(b, bindings)
        if isinstance(a, Var):
            if isinstance(b, Var) and b.name == a.name:
                continue
            if _occurs(a.name, b, bindings):
                return BOTTOM_SUBST
            bindings[a.name] = b
        elif isinstance(b, Var):
            if _occurs(b.name, a, bindings):
                return BOTTOM_SUBST
            bindings[b.name] = a
        else:
            if a.con != b.con or len(a.args) != len(b.args):
                return BOTTOM_SUBST
            work.extend(zip(a.args, b.args))
    # fully resolve the triangular bindings
    return Substitution({v: _resolve(t, bindings) for v, t in bindings.items()})


def mgu(a: BaseType, b: BaseType) -> Substitution:
    if a is BOTTOM or b is BOTTOM:
        return BOTTOM_SUBST
    return mgu_pairs([(a, b)])


def _rename_apart(t: BaseType, avoid: set[str]) -> BaseType:
    mapping = {}
    i = 0
    for v in free_vars(t):
        if v in avoid:
            while f"r{i}" in avoid:
                i += 1
            mapping[v] = f"r{i}"
            i += 1
    return rename_vars(t, mapping) if mapping else t


def meet(a: BaseType, b: BaseType) -> BaseType:
    """Greatest lower bound: unify after renaming apart, canonical result."""
    if a is BOTTOM or b is BOTTOM:
        return BOTTOM
    b2 = _rename_apart(b, set(free_vars(a)) | set(free_vars(b)))
    s = mgu(a, b2)
    if s.is_bottom:
        return BOTTOM
    return canonical(apply_subst(s, a))


class AbstractCover:
    """A meet-closed finite set of canonical base types, with top and bottom.

    Variables scope per element; membership is on canonical forms.
    """

    def __init__(self, members: Iterable[BaseType]):
        mem = {canonical(m) if m is not BOTTOM else BOTTOM for m in members}
        mem.add(TOP)
        mem.add(BOTTOM)
        self.members: frozenset = frozenset(mem)
        self._abs_cache: dict[BaseType, BaseType] = {}

    def __contains__(self, t: BaseType) -> bool:
        t = t if t is BOTTOM else canonical(t)
        return t in self.members

    def __iter__(self) -> Iterator[BaseType]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AbstractCover):
            return NotImplemented
        return self.members == other.members

    def __hash__(self) -> int:
        return hash(self.members)

    def __repr__(self) -> str:
        names = sorted(render_type(m) for m in self.members)
        return "AbstractCover({%s})" % ", ".join(names)

    def sorted_members(self) -> list[BaseType]:
        return sorted(self.members, key=lambda m: (m is BOTTOM, render_type(m)))

    def abstract(self, b: BaseType) -> BaseType:
        """Most specific member subsuming b; unique by meet closure."""
        if b is BOTTOM:
            return BOTTOM
        b = canonical(b)
        hit = self._abs_cache.get(b)
        if hit is not None:
            return hit
        best: Optional[BaseType] = None
        for m in self.members:
            if m is BOTTOM:
                continue
            if subsumes(b, m):
                if best is None or subsumes(m, best):
                    best = m
        assert best is not None  # TOP always subsumes
        self._abs_cache[b] = best
        return best


class ConcreteDomain:
    """Stand-in cover whose abstraction is the identity function."""

    def abstract(self, b: BaseType) -> BaseType:
        return b

    def __repr__(self) -> str:
        return "ConcreteDomain()"


CONCRETE = ConcreteDomain()


def close_under_meet(types: Iterable[BaseType]) -> AbstractCover:
    """Smallest meet-closed superset containing top and bottom."""
    members: set[BaseType] = {TOP, BOTTOM}
    members.update(canonical(t) if t is not BOTTOM else BOTTOM for t in types)
    work = [m for m in members if m is not BOTTOM]
    while work:
        t = work.pop()
        for u in list(members):
            if u is BOTTOM:
                continue
            m = meet(t, u)
            if m is not BOTTOM and m not in members:
                members.add(m)
                work.append(m)
    return AbstractCover(members)


def refines(finer: AbstractCover, coarser: AbstractCover) -> bool:
    """True iff every member of the coarser cover belongs to the finer one."""
    return coarser.members <= finer.members


def abstract(cover, b: BaseType) -> BaseType:
    return cover.abstract(b)


def _positions_postorder(t: BaseType) -> list[tuple]:
    out: list[tuple] = []

    def walk(u: BaseType, path: tuple) -> None:
        if isinstance(u, App):
            for i, a in enumerate(u.args):
                walk(a, path + (i,))
        out.append(path)

    walk(t, ())
    return out


def _subtype_at(t: BaseType, path: tuple) -> BaseType:
    for i in path:
        t = t.args[i]
    return t


def _replace_at(t: BaseType, path: tuple, new: BaseType) -> BaseType:
    if not path:
        return new
    args = list(t.args)
    args[path[0]] = _replace_at(args[path[0]], path[1:], new)
    return App(t.con, tuple(args))


def weakenings(b: BaseType) -> list[BaseType]:
    """Single upward lattice moves: replace one subterm occurrence with a
    fresh variable, keeping only strictly more general results.

    Positions run innermost-first, left-to-right. Replacing the lone
    occurrence of a variable is a no-op and is skipped, so a bare
    variable has no weakenings; replacing one occurrence of a repeated
    variable is a proper move (splitting a non-linear pattern).
    """
    if b is BOTTOM:
        return []
    out: list[BaseType] = []
    fresh = Var("*w*")
    for path in _positions_postorder(b):
        sub = _subtype_at(b, path)
        if isinstance(sub, Var) and count_var(b, sub.name) == 1:
            continue
        out.append(canonical(_replace_at(b, path, fresh)))
    return out
