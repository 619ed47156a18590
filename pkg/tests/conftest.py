"""Shared helpers: a small type DSL, random generators, typing oracle."""

from __future__ import annotations

import itertools
import random
from pathlib import Path

import pytest

from tygar.atn import Transition, TransitionNet
from tygar.lattice import AbstractCover, close_under_meet
from tygar.sigparse import _LineParser, _tokenize, parse_signature, rtype_to_fn
from tygar.smt import SolverClient
from tygar.types import (
    App,
    FnType,
    Library,
    PolyType,
    TermApp,
    TermVar,
    Var,
    canonical,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def ty(text: str):
    """Parse a base type: lowercase = variables, capitalized = constructors."""
    p = _LineParser(_tokenize(text, 1), 1)
    t = p.parse_type()
    assert p.peek() is None, f"trailing tokens in {text!r}"
    return t


def fn(text: str) -> FnType:
    p = _LineParser(_tokenize(text, 1), 1)
    return rtype_to_fn(p.parse_type())


def lib_of(*lines: str) -> Library:
    lib = Library()
    for line in lines:
        name, poly = parse_signature(line)
        lib.add_component(name, poly)
    return lib


def cover_of(*types: str) -> AbstractCover:
    return close_under_meet([ty(t) for t in types])


def tiny_problem():
    """The running example: 3 components, query a -> [Maybe a] -> a."""
    lib = lib_of(
        "fromMaybe :: a -> Maybe a -> a",
        "catMaybes :: [Maybe a] -> [a]",
        "listToMaybe :: [a] -> Maybe a",
    )
    lib.register_type(App("a"))
    qa = App("a")
    query = FnType((qa, App("List", (App("Maybe", (qa,)),))), qa)
    return lib, query


def unsat_problem():
    lib = lib_of("f :: B a a", "g :: B (U b) b -> Z")
    return lib, FnType((), App("Z"))


@pytest.fixture(scope="session")
def solver():
    client = SolverClient()
    yield client
    client.close()


# ---------------------------------------------------------------------------
# Random generation (seeded; deterministic across runs)

CONS3 = {"A": 0, "L": 1, "P": 2}


def rand_base(rng: random.Random, cons: dict, depth: int, var_pool=("u", "v")):
    choices = ["var"] + list(cons)
    while True:
        pick = rng.choice(choices)
        if pick == "var":
            return Var(rng.choice(var_pool))
        arity = cons[pick]
        if arity > 0 and depth <= 0:
            continue
        return App(pick, tuple(rand_base(rng, cons, depth - 1, var_pool)
                               for _ in range(arity)))


def rand_ground(rng: random.Random, cons: dict, depth: int):
    nullary = [c for c, a in cons.items() if a == 0]
    while True:
        pick = rng.choice(list(cons))
        arity = cons[pick]
        if arity == 0:
            return App(pick)
        if depth <= 0:
            return App(rng.choice(nullary))
        return App(pick, tuple(rand_ground(rng, cons, depth - 1)
                               for _ in range(arity)))


def types_upto_depth1(cons: dict = CONS3) -> list:
    """All canonical types of depth <= 1 over the given constructors,
    with up to two distinct variables."""
    atoms = [Var("u"), Var("v")] + [App(c) for c, a in cons.items() if a == 0]
    out = list(atoms)
    for c, a in cons.items():
        if a > 0:
            for args in itertools.product(atoms, repeat=a):
                out.append(App(c, args))
    seen = []
    for t in out:
        ct = canonical(t)
        if ct not in seen:
            seen.append(ct)
    return seen


def shallow_signature(rng: random.Random, cons: dict, max_arity: int = 2) -> PolyType:
    """Signatures whose base types have depth <= 1: with ground arguments
    the declarative oracle's depth-2 instantiation universe is exhaustive
    for terms of size <= 3."""
    var_pool = ("u", "v")
    n = rng.randint(0, max_arity)

    def shallow(allow_var: bool):
        kind = rng.random()
        if allow_var and kind < 0.45:
            return Var(rng.choice(var_pool))
        c = rng.choice(list(cons))
        if cons[c] == 0:
            return App(c)
        return App(c, tuple(
            Var(rng.choice(var_pool)) if rng.random() < 0.6
            else App(rng.choice([k for k, a in cons.items() if a == 0]))
            for _ in range(cons[c])))

    params = tuple(shallow(True) for _ in range(n))
    ret = shallow(True)
    quantified = []
    for b in (*params, ret):
        for v in _vars_of(b):
            if v not in quantified:
                quantified.append(v)
    return PolyType(tuple(quantified), FnType(params, ret))


def _vars_of(t):
    if isinstance(t, Var):
        return [t.name]
    if isinstance(t, App):
        out = []
        for a in t.args:
            for v in _vars_of(a):
                if v not in out:
                    out.append(v)
        return out
    return []


def rand_library(rng: random.Random, n_components: int,
                 cons: dict = CONS3) -> Library:
    lib = Library()
    for c, a in cons.items():
        lib.declare_constructor(c, a)
    for i in range(n_components):
        lib.add_component(f"c{i}", shallow_signature(rng, cons))
    return lib


def rand_env(rng: random.Random, cons: dict, n_vars: int) -> dict:
    nullary = [c for c, a in cons.items() if a == 0]
    return {f"x{i}": App(rng.choice(nullary)) for i in range(n_vars)}


def rand_cover(rng: random.Random, cons: dict, n_types: int) -> AbstractCover:
    return close_under_meet(
        rand_base(rng, cons, rng.randint(0, 2)) for _ in range(n_types))


# ---------------------------------------------------------------------------
# Term enumeration and a brute-force declarative typing oracle

def enumerate_terms(lib: Library, env: dict, max_size: int) -> list:
    """All well-formed application terms with at most max_size component
    applications over the library and environment variables."""
    by_size = {0: [TermVar(x) for x in env]}
    for size in range(1, max_size + 1):
        out = []
        for name, poly in lib.components.items():
            m = len(poly.body.params)
            if m == 0:
                if size == 1:
                    out.append(TermApp(name, ()))
                continue
            for split in _compositions(size - 1, m):
                pools = [by_size.get(s, []) for s in split]
                for args in itertools.product(*pools):
                    out.append(TermApp(name, args))
        by_size[size] = out
    return [t for size in range(1, max_size + 1) for t in by_size[size]]


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def ground_universe(cons: dict, depth: int) -> list:
    """All ground types of nesting depth <= depth (nullary types have
    depth 0)."""
    levels = [[App(c) for c, a in cons.items() if a == 0]]
    for _ in range(depth):
        below = [t for level in levels for t in level]
        nxt = []
        for c, a in cons.items():
            if a > 0:
                for args in itertools.product(below, repeat=a):
                    t = App(c, args)
                    if all(t not in level for level in levels) and t not in nxt:
                        nxt.append(t)
        levels.append(nxt)
    return [t for level in levels for t in level]


class DeclarativeOracle:
    """Enumerates ground instantiations of component polytypes over a
    fixed universe, per the declarative typing rules."""

    def __init__(self, lib: Library, env: dict, universe: list):
        self.lib = lib
        self.env = env
        self.universe = universe
        self._memo: dict = {}

    def possible(self, term) -> frozenset:
        hit = self._memo.get(term)
        if hit is not None:
            return hit
        if isinstance(term, TermVar):
            out = frozenset([self.env[term.name]])
        else:
            poly = self.lib.components[term.component]
            child = [self.possible(a) for a in term.args]
            results = set()
            for assignment in itertools.product(self.universe,
                                                repeat=len(poly.quantified)):
                sigma = dict(zip(poly.quantified, assignment))
                ok = True
                for b, pool in zip(poly.body.params, child):
                    if _subst_ground(b, sigma) not in pool:
                        ok = False
                        break
                if ok:
                    results.add(_subst_ground(poly.body.ret, sigma))
            out = frozenset(results)
        self._memo[term] = out
        return out

    def check(self, nf, t: FnType) -> bool:
        env = dict(zip(nf.params, t.params))
        oracle = DeclarativeOracle(self.lib, env, self.universe)
        return t.ret in oracle.possible(nf.body)


def _subst_ground(b, sigma: dict):
    if isinstance(b, Var):
        return sigma[b.name]
    if isinstance(b, App):
        return App(b.con, tuple(_subst_ground(a, sigma) for a in b.args))
    return b


# ---------------------------------------------------------------------------
# Synthetic nets for reachability testing

def rand_net(rng: random.Random) -> TransitionNet:
    n_places = rng.randint(2, 6)
    places = sorted([App(f"Q{i}") for i in range(n_places)],
                    key=lambda p: p.con)
    transitions = []
    for i in range(rng.randint(1, 6)):
        arity = rng.randint(0, 3)
        args = tuple(rng.choice(places) for _ in range(arity))
        out = rng.choice(places)
        transitions.append(Transition(args, out, 1, (f"t{i}",)))
    initial = {}
    for p in places:
        if rng.random() < 0.5:
            initial[p] = rng.randint(1, 2)
    for p in places:
        if initial.get(p, 0) > 0 and rng.random() < 0.5:
            transitions.append(Transition((p,), p, 2))
    finals = frozenset(p for p in places if rng.random() < 0.4)
    query = FnType((), places[0])
    cover = AbstractCover(places)
    return TransitionNet(places, transitions, initial, finals, query, cover)


def smt_paths_at(net: TransitionNet, length: int, solver: SolverClient) -> set:
    """All fire sequences of exactly `length` the encoding admits,
    enumerated with blocking clauses."""
    from tygar.reach import decode_model, encode, _neq

    found = set()
    for final in sorted(net.finals, key=str):
        solver.reset()
        solver.send(encode(net, length, final))
        while True:
            if not solver.check_sat():
                break
            if length == 0:
                found.add(())
                break
            values = solver.get_values([f"fire_{k}" for k in range(length)])
            seq = decode_model(values, length)
            found.add(seq)
            alts = " ".join(_neq(f"fire_{k}", t + 1)
                            for k, t in enumerate(seq))
            solver.send(f"(assert (or {alts}))")
    return found
