import pytest

from tygar.atn import build_atn
from tygar.lattice import AbstractCover, close_under_meet
from tygar.pathgen import from_path
from tygar.reach import ReplayError, bfs_oracle
from tygar.typecheck import check
from tygar.types import App, FnType, NormalForm, TermVar, render_term, term_size

from conftest import lib_of, tiny_problem, ty


def transition_index(net, members) -> int:
    for i, t in enumerate(net.transitions):
        if set(t.members) == set(members):
            return i
    raise AssertionError(f"no transition with members {members}")


def test_swap_pair_under_top_cover():
    lib, query = tiny_problem()
    net = build_atn(lib, query, AbstractCover([]))
    f = transition_index(net, {"fromMaybe"})
    progs = [render_term(nf) for nf in from_path(net, query, (f,))]
    assert progs == ["fromMaybe arg0 arg1", "fromMaybe arg1 arg0"]


def test_concrete_net_singleton():
    lib, query = tiny_problem()
    cover = close_under_meet([
        App("a"), ty("List t"), ty("List (Maybe t)"), ty("Maybe (Maybe t)")])
    net = build_atn(lib, query, cover)
    c = transition_index(net, {"catMaybes"})
    # find the l and f instances on the c-l-f chain
    lt = net.transitions[c].out
    l = next(i for i, t in enumerate(net.transitions)
             if t.members == ("listToMaybe",) and t.args == (lt,))
    f = next(i for i, t in enumerate(net.transitions)
             if t.members == ("fromMaybe",) and t.args[0] == App("a"))
    progs = [render_term(nf) for nf in from_path(net, query, (c, l, f))]
    assert progs == ["fromMaybe arg0 (listToMaybe (catMaybes arg1))"]


def test_empty_path_single_argument():
    lib = lib_of("h :: D -> D")
    query = FnType((App("D"),), App("D"))
    net = build_atn(lib, query, close_under_meet([App("D")]))
    progs = list(from_path(net, query, ()))
    assert [render_term(p) for p in progs] == ["arg0"]
    assert progs[0] == NormalForm(("arg0",), TermVar("arg0"))


def test_invalid_path_raises():
    lib, query = tiny_problem()
    net = build_atn(lib, query, AbstractCover([]))
    f = transition_index(net, {"fromMaybe"})
    with pytest.raises(ReplayError):
        list(from_path(net, query, (f, f)))


def distinct_apps(term) -> set:
    out = set()
    stack = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, TermVar):
            continue
        out.add(t)
        stack.extend(t.args)
    return out


def test_every_program_uses_every_argument_and_counts_apps():
    lib, query = tiny_problem()
    net = build_atn(lib, query, AbstractCover([]))
    for path in bfs_oracle(net, 4):
        comp_firings = sum(1 for i in path if not net.transitions[i].is_copy)
        has_copy = any(net.transitions[i].is_copy for i in path)
        for nf in from_path(net, query, path):
            text = render_term(nf)
            for arg in nf.params:
                assert arg in text  # relevancy
            if not has_copy:
                assert term_size(nf.body) == comp_firings
            else:
                # copies may duplicate computed tokens: sharing makes the
                # tree bigger than the firing count, never the node set
                assert len(distinct_apps(nf.body)) <= comp_firings
                assert term_size(nf.body) >= comp_firings


def test_soundness_every_path_yields_typed_program():
    lib, query = tiny_problem()
    for cover in (AbstractCover([]),
                  close_under_meet([App("a"), ty("List t")])):
        net = build_atn(lib, query, cover)
        for path in bfs_oracle(net, 4):
            programs = list(from_path(net, query, path))
            assert programs
            assert any(check(lib, cover, nf, query) for nf in programs)


def test_determinism():
    lib, query = tiny_problem()
    net = build_atn(lib, query, AbstractCover([]))
    for path in bfs_oracle(net, 3):
        one = [render_term(nf) for nf in from_path(net, query, path)]
        two = [render_term(nf) for nf in from_path(net, query, path)]
        assert one == two


def test_copy_transition_duplicates_chosen_token():
    lib, query = tiny_problem()
    net = build_atn(lib, query, AbstractCover([]))
    kappa = next(i for i, t in enumerate(net.transitions) if t.is_copy)
    f = transition_index(net, {"fromMaybe"})
    # copy one argument token, then consume all three with two f firings
    progs = [render_term(nf) for nf in from_path(net, query, (kappa, f, f))]
    assert "fromMaybe (fromMaybe arg0 arg0) arg1" in progs
    # duplicated argument appears twice in those programs
    assert any(p.count("arg0") == 2 for p in progs)