"""Abstract transition nets: construction, incremental refinement, ordering."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .lattice import AbstractCover, mgu, subsumes
from .typecheck import _freshen
from .types import (
    BOTTOM,
    BaseType,
    FnType,
    Library,
    Substitution,
    apply_subst,
    canonical,
    compose,
    render_type,
    rename_vars,
)


@dataclass(frozen=True)
class Transition:
    """One net transition: an abstract component instance or a copy.

    `args` lists input places in component-signature order (duplicates
    encode multiplicities); `members` are the coalesced component names
    in library declaration order. Copy transitions have no members and
    produce two tokens on their single place.
    """

    args: tuple
    out: BaseType
    out_mult: int = 1
    members: tuple = ()

    @property
    def is_copy(self) -> bool:
        return not self.members

    def input_mult(self, place: BaseType) -> int:
        return sum(1 for a in self.args if a == place)

    def output_mult(self, place: BaseType) -> int:
        return self.out_mult if place == self.out else 0

    def describe(self) -> str:
        ins = ", ".join(render_type(a) for a in self.args)
        if self.is_copy:
            return f"copy[{render_type(self.out)}]"
        return f"{{{','.join(self.members)}}}: ({ins}) -> {render_type(self.out)}"


@dataclass
class TransitionNet:
    places: list
    transitions: list
    initial: dict
    finals: frozenset
    query: FnType
    cover: AbstractCover
    version: int = 0

    def place_id(self, place: BaseType) -> int:
        return self.places.index(place)

    def dump(self) -> str:
        lines = ["places:"]
        for p in self.places:
            marks = []
            if self.initial.get(p):
                marks.append(f"I={self.initial[p]}")
            if p in self.finals:
                marks.append("final")
            suffix = f"  [{', '.join(marks)}]" if marks else ""
            lines.append(f"  {render_type(p)}{suffix}")
        lines.append("transitions:")
        for t in sorted(self.transitions, key=Transition.describe):
            lines.append(f"  {t.describe()}")
        return "\n".join(lines)


def _sorted_places(cover: AbstractCover) -> list:
    return sorted((m for m in cover.members if m is not BOTTOM), key=render_type)


def _instances(lib: Library, component: str, places: list,
               cover: AbstractCover) -> Iterable[tuple]:
    """All (args, out) abstract instances of one component, depth-first.

    Enumerates argument places left to right, pruning as soon as the
    partial unification bottoms out; each place occurrence is renamed
    apart (variables scope per base type).
    """
    poly = lib.components[component]
    inst_map = {v: f"^c{i}" for i, v in enumerate(poly.quantified)}
    params = [rename_vars(b, inst_map) for b in poly.body.params]
    ret = rename_vars(poly.body.ret, inst_map)
    out: list[tuple] = []

    def rec(j: int, sigma: Substitution, chosen: list) -> None:
        if j == len(params):
            result = canonical(apply_subst(sigma, ret))
            out.append((tuple(chosen), cover.abstract(result)))
            return
        formal = apply_subst(sigma, params[j])
        for place in places:
            s = mgu(formal, _freshen(place, f"^p{j}_"))
            if s.is_bottom:
                continue
            chosen.append(place)
            rec(j + 1, compose(s, sigma), chosen)
            chosen.pop()

    rec(0, Substitution(), [])
    return out


def _finals(places: list, ret: BaseType) -> frozenset:
    return frozenset(p for p in places if subsumes(ret, p))


def _initial(query: FnType, cover: AbstractCover) -> dict:
    initial: dict = {}
    for b in query.params:
        p = cover.abstract(b)
        initial[p] = initial.get(p, 0) + 1
    return initial


def _component_transitions(groups: dict, order: dict) -> list:
    out = []
    for (args, place), members in groups.items():
        members = tuple(sorted(members, key=order.__getitem__))
        out.append(Transition(args, place, 1, members))
    return out


def _with_copies(transitions: list, initial: dict, places: list) -> list:
    copies = [Transition((p,), p, 2) for p in places if initial.get(p, 0) > 0]
    return transitions + copies


def build_atn(lib: Library, query: FnType, cover: AbstractCover,
              coalesce: bool = True) -> TransitionNet:
    """Net for a library, ground query and cover; copy transitions only
    (relevant typing), no delete transitions. With coalescing disabled
    every abstract component instance gets its own transition."""
    places = _sorted_places(cover)
    transitions: list = []
    if coalesce:
        groups: dict = {}
        for c in lib.components:
            for args, place in _instances(lib, c, places, cover):
                groups.setdefault((args, place), []).append(c)
        order = {c: i for i, c in enumerate(lib.components)}
        transitions = _component_transitions(groups, order)
    else:
        for c in lib.components:
            for args, place in _instances(lib, c, places, cover):
                transitions.append(Transition(args, place, 1, (c,)))
    initial = _initial(query, cover)
    transitions = _with_copies(transitions, initial, places)
    return TransitionNet(places, transitions, initial,
                         _finals(places, query.ret), query, cover)


def _strictly_above(a: BaseType, b: BaseType) -> bool:
    return a != b and subsumes(b, a)


def _parents(cover: AbstractCover, added: BaseType) -> list:
    """Direct successors of `added` in the subsumption order of `cover`."""
    above = [m for m in cover.members
             if m is not BOTTOM and _strictly_above(m, added)]
    return [m for m in above
            if not any(_strictly_above(m, o) for o in above if o != m)]


def refine_atn(net: TransitionNet, lib: Library, query: FnType,
               old: AbstractCover, added: BaseType) -> TransitionNet:
    """Incremental update after adding one type to a meet-closed cover.

    Equivalent to `build_atn(lib, query, old + added)` up to transition
    identity: transitions whose output sat on a direct parent of the new
    type are re-routed member by member, and new instances are derived
    from transitions consuming a parent.
    """
    added = canonical(added)
    if added in old.members:
        raise ValueError("added type is already a cover member")
    new_cover = AbstractCover(set(old.members) | {added})
    from .lattice import meet  # local import avoids cycle at module load
    for m in old.members:
        if meet(m, added) not in new_cover.members:
            raise ValueError("cover plus added type is not meet-closed")

    parents = set(_parents(old, added))
    places = sorted(_sorted_places(old) + [added], key=render_type)
    order = {c: i for i, c in enumerate(lib.components)}

    groups: dict = {}
    for t in net.transitions:
        if not t.is_copy:
            groups[(t.args, t.out)] = list(t.members)

    def transformer_out(component: str, args: tuple) -> BaseType:
        poly = lib.components[component]
        inst_map = {v: f"^c{i}" for i, v in enumerate(poly.quantified)}
        params = [rename_vars(b, inst_map) for b in poly.body.params]
        ret = rename_vars(poly.body.ret, inst_map)
        sigma = Substitution()
        for j, (formal, place) in enumerate(zip(params, args)):
            s = mgu(apply_subst(sigma, formal), _freshen(place, f"^p{j}_"))
            if s.is_bottom:
                return BOTTOM
            sigma = compose(s, sigma)
        return new_cover.abstract(canonical(apply_subst(sigma, ret)))

    # re-route: only transitions returning a direct parent can move
    for (args, out) in [k for k in groups if k[1] in parents]:
        for c in list(groups[(args, out)]):
            new_out = transformer_out(c, args)
            if new_out != out:
                groups[(args, out)].remove(c)
                groups.setdefault((args, new_out), [])
                if c not in groups[(args, new_out)]:
                    groups[(args, new_out)].append(c)

    # new instances: substitute the new type for parents in existing inputs
    tried: set = set()
    for (args, _out), members in list(groups.items()):
        parent_positions = [j for j, a in enumerate(args) if a in parents]
        if not parent_positions:
            continue
        for mask in range(1, 1 << len(parent_positions)):
            new_args = list(args)
            for bit, j in enumerate(parent_positions):
                if mask & (1 << bit):
                    new_args[j] = added
            new_args = tuple(new_args)
            for c in members:
                if (c, new_args) in tried:
                    continue
                tried.add((c, new_args))
                new_out = transformer_out(c, new_args)
                if new_out is BOTTOM:
                    continue
                group = groups.setdefault((new_args, new_out), [])
                if c not in group:
                    group.append(c)

    groups = {k: v for k, v in groups.items() if v}
    initial = _initial(query, new_cover)
    transitions = _with_copies(_component_transitions(groups, order),
                               initial, places)
    return TransitionNet(places, transitions, initial,
                         _finals(places, query.ret), query, new_cover,
                         net.version + 1)


def final_place_order(net: TransitionNet) -> list:
    """Final places from most to least precise; ties lexicographic."""
    remaining = set(net.finals)
    out = []
    while remaining:
        minimal = [p for p in remaining
                   if not any(q != p and subsumes(q, p) for q in remaining)]
        minimal.sort(key=render_type)
        out.extend(minimal)
        remaining.difference_update(minimal)
    return out
