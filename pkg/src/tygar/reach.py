"""Bounded reachability over transition nets.

The QF_LIA encoding uses one integer `tok_<pid>_<k>` per place and step
and one `fire_<k>` per step; the search iterates path length and, within
a length, final places from most to least precise. An explicit-state
enumerator doubles as test oracle.
"""

from __future__ import annotations

import time
from typing import Iterable, Optional, Sequence

from .atn import TransitionNet, final_place_order
from .smt import SolverClient
from .types import BaseType


class ReplayError(Exception):
    pass


class StateSpaceCap(Exception):
    pass


class NoPath:
    """Sentinel: reachability exhausted without a valid path."""

    def __repr__(self) -> str:
        return "NoPath"


NO_PATH = NoPath()


def initial_marking(net: TransitionNet) -> tuple:
    return tuple(net.initial.get(p, 0) for p in net.places)


def fire(net: TransitionNet, marking: tuple, ti: int) -> Optional[tuple]:
    """Marking after firing transition index ti, or None if not enabled."""
    t = net.transitions[ti]
    out = list(marking)
    for i, p in enumerate(net.places):
        need = t.input_mult(p)
        if marking[i] < need:
            return None
        out[i] = marking[i] - need + t.output_mult(p)
    return tuple(out)


def is_valid_final(net: TransitionNet, marking: tuple) -> bool:
    """Exactly one token, sitting in a final place."""
    if sum(marking) != 1:
        return False
    i = marking.index(1)
    return net.places[i] in net.finals


def replay(net: TransitionNet, path: Sequence) -> list:
    """Markings along a path from the initial marking; raises on misfire."""
    markings = [initial_marking(net)]
    for ti in path:
        nxt = fire(net, markings[-1], ti)
        if nxt is None:
            raise ReplayError(f"transition {ti} not enabled at step {len(markings) - 1}")
        markings.append(nxt)
    return markings


# ---------------------------------------------------------------------------
# SMT encoding


def _neq(var: str, val: int) -> str:
    return f"(or (<= {var} {val - 1}) (>= {var} {val + 1}))"


def encode(net: TransitionNet, length: int, final: BaseType,
           blocked: Iterable = ()) -> str:
    """Script asserting the valid paths of exactly this length that end
    with one token in `final`; deterministic tok_<pid>_<k> / fire_<k>
    naming; optional blocked fire sequences of the same length."""
    places = net.places
    trans = net.transitions
    lines = ["(set-option :produce-models true)", "(set-logic QF_LIA)"]
    for k in range(length):
        lines.append(f"(declare-const fire_{k} Int)")
    for pid in range(len(places)):
        for k in range(length + 1):
            lines.append(f"(declare-const tok_{pid}_{k} Int)")

    # (1) a valid transition is fired at each step
    for k in range(length):
        lines.append(f"(assert (and (<= 1 fire_{k}) (<= fire_{k} {len(trans)})))")

    for k in range(length):
        for ti, t in enumerate(trans, start=1):
            pre = [(pid, t.input_mult(p)) for pid, p in enumerate(places)
                   if t.input_mult(p) > 0]
            touched = [(pid, p) for pid, p in enumerate(places)
                       if t.input_mult(p) > 0 or t.output_mult(p) > 0]
            # (2) fired transitions have sufficiently many input tokens
            if pre:
                conj = " ".join(f"(>= tok_{pid}_{k} {n})" for pid, n in pre)
                body = conj if len(pre) == 1 else f"(and {conj})"
                lines.append(f"(assert (=> (= fire_{k} {ti}) {body}))")
            # (3) fired transitions update incident markings
            if touched:
                parts = []
                for pid, p in touched:
                    delta = t.output_mult(p) - t.input_mult(p)
                    if delta == 0:
                        parts.append(f"(= tok_{pid}_{k + 1} tok_{pid}_{k})")
                    elif delta > 0:
                        parts.append(
                            f"(= tok_{pid}_{k + 1} (+ tok_{pid}_{k} {delta}))")
                    else:
                        parts.append(
                            f"(= tok_{pid}_{k + 1} (- tok_{pid}_{k} {-delta}))")
                body = parts[0] if len(parts) == 1 else f"(and {' '.join(parts)})"
                lines.append(f"(assert (=> (= fire_{k} {ti}) {body}))")

    # (4) markings of untouched places do not change
    for k in range(length):
        for pid, p in enumerate(places):
            incident = [ti for ti, t in enumerate(trans, start=1)
                        if t.input_mult(p) > 0 or t.output_mult(p) > 0]
            eq = f"(= tok_{pid}_{k + 1} tok_{pid}_{k})"
            if not incident:
                lines.append(f"(assert {eq})")
            else:
                prem = " ".join(_neq(f"fire_{k}", ti) for ti in incident)
                prem = prem if len(incident) == 1 else f"(and {prem})"
                lines.append(f"(assert (=> {prem} {eq}))")

    # (5) the initial marking is I
    for pid, p in enumerate(places):
        lines.append(f"(assert (= tok_{pid}_0 {net.initial.get(p, 0)}))")

    # implied token-count envelope: from the total at step k, the final
    # total of 1 must stay reachable within the remaining steps
    if trans:
        deltas = [t.output_mult(t.out) - len(t.args) for t in trans]
        dmin, dmax = min(deltas), max(deltas)

        def shifted(total: str, c: int) -> str:
            if c == 0:
                return total
            return f"(+ {total} {c})" if c > 0 else f"(- {total} {-c})"

        for k in range(length):
            rem = length - k
            names = " ".join(f"tok_{pid}_{k}" for pid in range(len(places)))
            total = f"(+ {names})" if len(places) > 1 else names
            lines.append(f"(assert (<= {shifted(total, dmin * rem)} 1))")
            lines.append(f"(assert (>= {shifted(total, dmax * rem)} 1))")

    # (6) final marking: one token in the chosen final place
    fid = net.place_id(final)
    for pid in range(len(places)):
        want = 1 if pid == fid else 0
        lines.append(f"(assert (= tok_{pid}_{length} {want}))")

    for seq in blocked:
        if len(seq) != length or length == 0:
            continue
        alts = " ".join(_neq(f"fire_{k}", ti + 1) for k, ti in enumerate(seq))
        lines.append(f"(assert (or {alts}))")

    return "\n".join(lines) + "\n"


def decode_model(values: dict, length: int) -> tuple:
    """Fire-variable assignment to a path of 0-based transition indices."""
    return tuple(values[f"fire_{k}"] - 1 for k in range(length))


def shortest_valid_path(net: TransitionNet, max_len: int, solver: SolverClient,
                        blocked: Iterable = (), deadline: Optional[float] = None,
                        min_len: int = 0):
    """Iterative deepening over path length and final places.

    Returns the decoded path of the first satisfiable query, or NO_PATH
    when every (length, final) pair up to the bound is unsatisfiable.
    Solver failures raise SolverError, distinct from NO_PATH. `min_len`
    skips lengths already known unsatisfiable for this net.
    """
    blocked = set(tuple(b) for b in blocked)
    finals = final_place_order(net)
    if not finals:
        return NO_PATH
    for length in range(min_len, max_len + 1):
        if length == 0 and () in blocked:
            continue
        for final in finals:
            if deadline is not None and time.monotonic() > deadline:
                raise TimeoutError("reachability deadline exceeded")
            solver.reset()
            solver.send(encode(net, length, final, blocked))
            if solver.check_sat():
                if length == 0:
                    return ()
                values = solver.get_values([f"fire_{k}" for k in range(length)])
                path = decode_model(values, length)
                replay(net, path)  # decoded models must replay cleanly
                return path
    return NO_PATH


class PathFinder:
    """Iterative-deepening search that keeps its place across calls.

    One logical solver session per (length, final place) pair; repeated
    queries at the current pair only assert newly blocked fire sequences
    and re-check, instead of re-sending the whole script.
    """

    def __init__(self, solver: SolverClient, max_len: int):
        self.solver = solver
        self.max_len = max_len
        self._net: Optional[TransitionNet] = None
        self._pairs: list = []
        self._idx = 0
        self._loaded = False
        self._sent_blocked: set = set()

    def reset(self, net: TransitionNet) -> None:
        self._net = net
        finals = final_place_order(net)
        self._pairs = [(length, f) for length in range(self.max_len + 1)
                       for f in finals]
        self._idx = 0
        self._loaded = False

    def next_path(self, blocked: set, deadline: Optional[float] = None):
        net = self._net
        if net is None:
            raise ValueError("PathFinder.reset was never called")
        while self._idx < len(self._pairs):
            length, final = self._pairs[self._idx]
            if deadline is not None and time.monotonic() > deadline:
                raise TimeoutError("reachability deadline exceeded")
            relevant = {b for b in blocked if len(b) == length}
            if length == 0 and () in blocked:
                self._idx += 1
                self._loaded = False
                continue
            if not self._loaded:
                self.solver.reset()
                self.solver.send(encode(net, length, final, sorted(relevant)))
                self._loaded = True
                self._sent_blocked = set(relevant)
            else:
                for seq in sorted(relevant - self._sent_blocked):
                    alts = " ".join(_neq(f"fire_{k}", ti + 1)
                                    for k, ti in enumerate(seq))
                    self.solver.send(f"(assert (or {alts}))")
                self._sent_blocked |= relevant
            if self.solver.check_sat():
                if length == 0:
                    return ()
                values = self.solver.get_values(
                    [f"fire_{k}" for k in range(length)])
                path = decode_model(values, length)
                replay(net, path)
                return path
            self._idx += 1
            self._loaded = False
        return NO_PATH


def bfs_oracle(net: TransitionNet, max_len: int, state_cap: int = 200_000) -> list:
    """All valid paths up to max_len by explicit-state search.

    Small nets only; raises StateSpaceCap when the expansion budget is
    exceeded.
    """
    out: list = []
    expanded = 0

    def rec(marking: tuple, prefix: list) -> None:
        nonlocal expanded
        expanded += 1
        if expanded > state_cap:
            raise StateSpaceCap(f"exceeded {state_cap} expansions")
        if is_valid_final(net, marking):
            out.append(tuple(prefix))
        if len(prefix) == max_len:
            return
        for ti in range(len(net.transitions)):
            nxt = fire(net, marking, ti)
            if nxt is not None:
                prefix.append(ti)
                rec(nxt, prefix)
                prefix.pop()

    rec(initial_marking(net), [])
    return out
