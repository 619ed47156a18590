import random

import pytest

from tygar.atn import Transition, TransitionNet, build_atn
from tygar.lattice import AbstractCover
from tygar.reach import (
    NO_PATH,
    PathFinder,
    ReplayError,
    StateSpaceCap,
    bfs_oracle,
    encode,
    replay,
    shortest_valid_path,
)
from tygar.smt import SolverClient, SolverError
from tygar.types import App, FnType

from conftest import rand_net, smt_paths_at, tiny_problem, ty


def single_place_net(tokens: int) -> TransitionNet:
    p = App("Q0")
    return TransitionNet([p], [], {p: tokens}, frozenset([p]),
                         FnType((), p), AbstractCover([p]))


def mono_option_net() -> TransitionNet:
    """Monomorphic option-library net: places a, M a, L a, L (M a),
    M (M a); one transition per component instance."""
    a, Ma, La = ty("Qa"), ty("M Qa"), ty("L Qa")
    LMa, MMa = ty("L (M Qa)"), ty("M (M Qa)")
    places = sorted([a, Ma, La, LMa, MMa], key=str)
    transitions = [
        Transition((a, Ma), a, 1, ("f@a",)),
        Transition((Ma, MMa), Ma, 1, ("f@Ma",)),
        Transition((La,), Ma, 1, ("l@a",)),
        Transition((LMa,), MMa, 1, ("l@Ma",)),
        Transition((LMa,), La, 1, ("c",)),
    ]
    initial = {a: 1, LMa: 1}
    return TransitionNet(places, transitions, initial, frozenset([a]),
                         FnType((a, LMa), a), AbstractCover(places))


def test_encode_trivial_sat(solver):
    net = single_place_net(1)
    solver.reset()
    solver.send(encode(net, 0, net.places[0]))
    assert solver.check_sat()


def test_encode_trivial_unsat(solver):
    net = single_place_net(2)  # initial marking is not a final marking
    solver.reset()
    solver.send(encode(net, 0, net.places[0]))
    assert not solver.check_sat()


def test_mono_net_decodes_c_l_f(solver):
    net = mono_option_net()
    path = shortest_valid_path(net, 3, solver)
    assert [net.transitions[i].members[0] for i in path] == ["c", "l@a", "f@a"]


def test_shortest_path_prefers_short(solver):
    lib, query = tiny_problem()
    net = build_atn(lib, query, AbstractCover([]))
    path = shortest_valid_path(net, 6, solver)
    assert len(path) == 1
    assert net.transitions[path[0]].members == ("fromMaybe",)


def test_no_path(solver):
    net = single_place_net(2)
    assert shortest_valid_path(net, 3, solver) is NO_PATH


def test_empty_path_when_initial_is_final(solver):
    net = single_place_net(1)
    assert shortest_valid_path(net, 3, solver) == ()


def test_replay_and_decode_soundness(solver):
    # every tok value in the model matches explicit replay
    net = mono_option_net()
    length = 3
    final = [p for p in net.finals][0]
    solver.reset()
    solver.send(encode(net, length, final))
    assert solver.check_sat()
    fire = solver.get_values([f"fire_{k}" for k in range(length)])
    path = tuple(fire[f"fire_{k}"] - 1 for k in range(length))
    toks = solver.get_values([
        f"tok_{pid}_{k}" for pid in range(len(net.places))
        for k in range(length + 1)])
    markings = replay(net, path)
    for k, marking in enumerate(markings):
        for pid in range(len(net.places)):
            assert toks[f"tok_{pid}_{k}"] == marking[pid]


def test_replay_error_on_invalid_path():
    net = mono_option_net()
    with pytest.raises(ReplayError):
        replay(net, (0, 0, 0, 0))  # f@a needs an M a token it never has twice


def test_bfs_oracle_examples():
    net = mono_option_net()
    paths = bfs_oracle(net, 3)
    names = [[net.transitions[i].members[0] for i in p] for p in paths]
    assert ["c", "l@a", "f@a"] in names
    empty = TransitionNet([App("Q0")], [], {App("Q0"): 2}, frozenset(),
                          FnType((), App("Q0")), AbstractCover([App("Q0")]))
    assert bfs_oracle(empty, 4) == []


def test_bfs_state_cap():
    lib, query = tiny_problem()
    net = build_atn(lib, query, AbstractCover([]))
    with pytest.raises(StateSpaceCap):
        bfs_oracle(net, 6, state_cap=5)


def test_smt_bfs_agreement_random_nets(solver):
    rng = random.Random(101)
    for _ in range(60):
        net = rand_net(rng)
        by_len = {}
        for p in bfs_oracle(net, 4, state_cap=50_000):
            by_len.setdefault(len(p), set()).add(p)
        for length in range(5):
            assert smt_paths_at(net, length, solver) == \
                by_len.get(length, set())


def test_deepening_returns_minimal_length(solver):
    rng = random.Random(103)
    for _ in range(40):
        net = rand_net(rng)
        paths = bfs_oracle(net, 4, state_cap=50_000)
        got = shortest_valid_path(net, 4, solver)
        if not paths:
            assert got is NO_PATH
        else:
            assert got is not NO_PATH
            assert len(got) == min(len(p) for p in paths)


def test_pathfinder_blocking_enumeration(solver):
    net = mono_option_net()
    finder = PathFinder(solver, 4)
    finder.reset(net)
    blocked = set()
    seen = []
    while True:
        p = finder.next_path(blocked)
        if p is NO_PATH:
            break
        seen.append(p)
        blocked.add(p)
    assert set(seen) == set(bfs_oracle(net, 4))


def test_solver_failure_is_distinct():
    with pytest.raises(SolverError):
        SolverClient("/no/such/solver-binary")


def test_encoding_stays_in_declared_wire_subset():
    # regression guard: scripts must remain portable across SMT-LIB
    # solvers, using only the documented command/operator subset
    import re

    net = mono_option_net()
    script = encode(net, 3, sorted(net.finals, key=str)[0],
                    blocked=[(0, 1, 2)])
    heads = set(re.findall(r"\(\s*([a-zA-Z=+<>:/-]+[a-zA-Z0-9-]*)", script))
    allowed = {"set-option", "set-logic", "declare-const", "assert",
               "and", "or", "=>", "=", "<=", ">=", "+", "-"}
    assert heads <= allowed, heads - allowed
    # every integer literal is non-negative (negatives use subtraction)
    for tok in script.replace("(", " ").replace(")", " ").split():
        if tok.lstrip("-").isdigit():
            assert not tok.startswith("-"), tok
