"""A small QF_LIA solver speaking the SMT-LIB 2 text protocol on stdio.

Bundled so the package runs where no external SMT solver is installed;
any compliant solver can replace it via configuration. Decides formulas
whose search variables carry explicit finite bounds (as the reachability
encoding provides): branch on bounded variables in declaration order,
propagate implied equalities, answer `unknown` otherwise. Implications
guarded by equalities or disequalities on a single variable are indexed
so an assignment only touches the rows it can affect.

Run as: python -m tygar.minismt
"""

from __future__ import annotations

import sys
from typing import Optional


class _Unknown(Exception):
    pass


def _tokenize(text: str) -> list:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def _parse_all(tokens: list) -> list:
    pos = 0

    def parse():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            items = []
            while tokens[pos] != ")":
                items.append(parse())
            pos += 1
            return items
        try:
            return int(tok)
        except ValueError:
            return tok

    out = []
    while pos < len(tokens):
        out.append(parse())
    return out


def _symbols(e, acc: set) -> None:
    if isinstance(e, str):
        acc.add(e)
    elif isinstance(e, list):
        for x in e[1:] if e and isinstance(e[0], str) else e:
            _symbols(x, acc)


def _neq_pattern(e) -> Optional[tuple]:
    """Recognize (or (<= v c) (>= v c+2)) as v != c+1."""
    if (isinstance(e, list) and len(e) == 3 and e[0] == "or"
            and isinstance(e[1], list) and isinstance(e[2], list)
            and len(e[1]) == 3 and len(e[2]) == 3
            and e[1][0] == "<=" and e[2][0] == ">="
            and isinstance(e[1][1], str) and isinstance(e[1][2], int)
            and e[2][1] == e[1][1] and isinstance(e[2][2], int)
            and e[2][2] == e[1][2] + 2):
        return e[1][1], e[1][2] + 1
    return None


class _Row:
    """One assertion with a propagation fast path."""

    __slots__ = ("expr", "kind", "var", "const", "excluded", "body")

    def __init__(self, expr):
        self.expr = expr
        self.kind = "plain"
        self.var = None
        self.const = None
        self.excluded = None
        self.body = None
        if isinstance(expr, list) and len(expr) == 3 and expr[0] == "=>":
            prem, body = expr[1], expr[2]
            if (isinstance(prem, list) and len(prem) == 3 and prem[0] == "="
                    and isinstance(prem[1], str) and isinstance(prem[2], int)):
                self.kind = "guard_eq"
                self.var, self.const, self.body = prem[1], prem[2], body
                return
            atoms = prem[1:] if (isinstance(prem, list) and prem
                                 and prem[0] == "and") else [prem]
            neqs = [_neq_pattern(a) for a in atoms]
            if all(n is not None for n in neqs) and neqs:
                vs = {v for v, _ in neqs}
                if len(vs) == 1:
                    self.kind = "neq_guard"
                    self.var = next(iter(vs))
                    self.excluded = frozenset(c for _, c in neqs)
                    self.body = body


class MiniSmt:
    def __init__(self) -> None:
        self.reset()

    def reset(self) -> None:
        self.vars: list = []
        self.var_set: set = set()
        self.rows: list = []
        self.plain_adj: dict = {}     # var -> plain row indices
        self.guard_idx: dict = {}     # (var, const) -> row indices
        self.neq_idx: dict = {}       # var -> row indices
        self.plain_rows: list = []
        self.bounds: dict = {}        # var -> [lo, hi]
        self.model: Optional[dict] = None

    def declare(self, name: str) -> None:
        if name not in self.var_set:
            self.var_set.add(name)
            self.vars.append(name)

    def add_assert(self, e) -> None:
        for part in self._flatten(e):
            idx = len(self.rows)
            row = _Row(part)
            self.rows.append(row)
            if row.kind == "guard_eq":
                self.guard_idx.setdefault((row.var, row.const), []).append(idx)
            elif row.kind == "neq_guard":
                self.neq_idx.setdefault(row.var, []).append(idx)
            else:
                self.plain_rows.append(idx)
                syms: set = set()
                _symbols(part, syms)
                for s in syms & self.var_set:
                    self.plain_adj.setdefault(s, []).append(idx)
                self._scan_bound(part)

    def _flatten(self, e) -> list:
        if isinstance(e, list) and e and e[0] == "and":
            out = []
            for x in e[1:]:
                out.extend(self._flatten(x))
            return out
        return [e]

    def _scan_bound(self, e) -> None:
        if not (isinstance(e, list) and len(e) == 3):
            return
        op, a, b = e
        if op not in ("<=", ">=", "="):
            return
        if isinstance(a, str) and isinstance(b, int):
            var, val, side = a, b, "right"
        elif isinstance(b, str) and isinstance(a, int):
            var, val, side = b, a, "left"
        else:
            return
        if var not in self.var_set:
            return
        lo, hi = self.bounds.get(var, (None, None))
        if op == "=":
            lo = val if lo is None else max(lo, val)
            hi = val if hi is None else min(hi, val)
        elif (op == "<=" and side == "right") or (op == ">=" and side == "left"):
            hi = val if hi is None else min(hi, val)  # var <= val
        else:
            lo = val if lo is None else max(lo, val)  # var >= val
        self.bounds[var] = (lo, hi)

    # -- evaluation ---------------------------------------------------------

    def _linear(self, e, asg):
        """(const, {var: coef}) over unassigned vars, or None if nonlinear."""
        if isinstance(e, int):
            return (e, {})
        if isinstance(e, str):
            v = asg.get(e)
            if v is not None:
                return (v, {})
            return (0, {e: 1})
        op = e[0]
        if op == "+":
            c, coefs = 0, {}
            for x in e[1:]:
                r = self._linear(x, asg)
                if r is None:
                    return None
                c += r[0]
                for v, k in r[1].items():
                    coefs[v] = coefs.get(v, 0) + k
            return (c, coefs)
        if op == "-":
            first = self._linear(e[1], asg)
            if first is None:
                return None
            if len(e) == 2:
                return (-first[0], {v: -k for v, k in first[1].items()})
            c, coefs = first
            for x in e[2:]:
                r = self._linear(x, asg)
                if r is None:
                    return None
                c -= r[0]
                for v, k in r[1].items():
                    coefs[v] = coefs.get(v, 0) - k
            return (c, coefs)
        if op == "*":
            const = 1
            sym = None
            for x in e[1:]:
                r = self._linear(x, asg)
                if r is None:
                    return None
                if r[1]:
                    if sym is not None:
                        return None
                    sym = r
                else:
                    const *= r[0]
            if sym is None:
                return (const, {})
            return (sym[0] * const, {v: k * const for v, k in sym[1].items()})
        return None

    def _analyze(self, e, asg, units):
        """Three-valued status; when `units` is a list, collect implied
        single-variable assignments of asserted subformulas."""
        if e == "true" or e is True:
            return True
        if e == "false" or e is False:
            return False
        if isinstance(e, str):
            raise _Unknown
        op = e[0]
        if op == "and":
            status = True
            for x in e[1:]:
                s = self._analyze(x, asg, units)
                if s is False:
                    return False
                if s is None:
                    status = None
            return status
        if op == "or":
            unknowns = []
            for x in e[1:]:
                s = self._analyze(x, asg, None)
                if s is True:
                    return True
                if s is None:
                    unknowns.append(x)
            if not unknowns:
                return False
            if len(unknowns) == 1 and units is not None:
                self._analyze(unknowns[0], asg, units)
            return None
        if op == "=>":
            p = self._analyze(e[1], asg, None)
            if p is False:
                return True
            if p is True:
                return self._analyze(e[2], asg, units)
            return None
        if op == "not":
            s = self._analyze(e[1], asg, None)
            return None if s is None else (not s)
        if op in ("=", "distinct", "<=", ">=", "<", ">"):
            left = self._linear(e[1], asg)
            right = self._linear(e[2], asg)
            if left is None or right is None:
                return None
            c = left[0] - right[0]
            coefs = dict(left[1])
            for v, k in right[1].items():
                coefs[v] = coefs.get(v, 0) - k
            coefs = {v: k for v, k in coefs.items() if k != 0}
            if not coefs:
                return {"=": c == 0, "distinct": c != 0, "<=": c <= 0,
                        ">=": c >= 0, "<": c < 0, ">": c > 0}[op]
            if op == "=" and len(coefs) == 1:
                (v, k), = coefs.items()
                if (-c) % k == 0:
                    if units is not None:
                        units.append((v, (-c) // k))
                    return None
                return False
            return None
        raise _Unknown

    # -- search ---------------------------------------------------------------

    def solve(self) -> bool:
        asg: dict = {}
        trail: list = []
        branchable = [v for v in self.vars
                      if self.bounds.get(v, (None, None))[0] is not None
                      and self.bounds.get(v, (None, None))[1] is not None]

        def rows_for(v: str, val: int) -> list:
            out = list(self.guard_idx.get((v, val), ()))
            for idx in self.neq_idx.get(v, ()):
                if val not in self.rows[idx].excluded:
                    out.append(idx)
            out.extend(self.plain_adj.get(v, ()))
            return out

        def propagate(queue: list) -> bool:
            while queue:
                idx = queue.pop()
                row = self.rows[idx]
                units: list = []
                expr = row.body if row.kind != "plain" else row.expr
                s = self._analyze(expr, asg, units)
                if s is False:
                    return False
                for v, val in units:
                    cur = asg.get(v)
                    if cur is None:
                        lo, hi = self.bounds.get(v, (None, None))
                        if (lo is not None and val < lo) or \
                           (hi is not None and val > hi):
                            return False
                        asg[v] = val
                        trail.append(v)
                        queue.extend(rows_for(v, val))
                    elif cur != val:
                        return False
            return True

        def assign(v: str, val: int) -> bool:
            asg[v] = val
            trail.append(v)
            return propagate(rows_for(v, val))

        def undo(mark: int) -> None:
            while len(trail) > mark:
                del asg[trail.pop()]

        def verify() -> bool:
            for row in self.rows:
                s = self._analyze(row.expr, asg, None)
                if s is False:
                    return False
                if s is None:
                    raise _Unknown
            return True

        def search() -> bool:
            v = next((x for x in branchable if x not in asg), None)
            if v is None:
                return verify()
            lo, hi = self.bounds[v]
            for val in range(lo, hi + 1):
                mark = len(trail)
                if assign(v, val) and search():
                    return True
                undo(mark)
            return False

        if not propagate(list(self.plain_rows)):
            return False
        if search():
            self.model = {v: asg.get(v, 0) for v in self.vars}
            return True
        return False

    # -- protocol -------------------------------------------------------------

    def command(self, e) -> Optional[str]:
        if not isinstance(e, list) or not e:
            return None
        op = e[0]
        if op in ("set-logic", "set-option", "set-info"):
            return None
        if op in ("declare-const", "declare-fun"):
            self.declare(e[1])
            return None
        if op == "assert":
            self.add_assert(e[1])
            return None
        if op == "check-sat":
            try:
                return "sat" if self.solve() else "unsat"
            except (_Unknown, RecursionError):
                return "unknown"
        if op == "get-value":
            model = self.model or {}
            parts = []
            for name in e[1]:
                val = model.get(name, 0)
                parts.append(f"({name} {val})" if val >= 0
                             else f"({name} (- {-val}))")
            return f"({' '.join(parts)})"
        if op == "reset":
            self.reset()
            return None
        if op == "exit":
            raise SystemExit(0)
        return f"(error \"unsupported command {op}\")"


def main() -> None:
    solver = MiniSmt()
    buf = ""
    stdin = sys.stdin
    while True:
        line = stdin.readline()
        if line == "":
            break
        buf += line
        while True:
            expr, rest = _take_sexpr(buf)
            if expr is None:
                break
            buf = rest
            try:
                reply = solver.command(_parse_all(_tokenize(expr))[0])
            except SystemExit:
                return
            except Exception as e:  # protocol robustness over crashing
                reply = f"(error \"{e}\")"
            if reply is not None:
                sys.stdout.write(reply + "\n")
                sys.stdout.flush()


def _take_sexpr(buf: str):
    """First balanced s-expression in buf, or (None, buf) if incomplete."""
    depth = 0
    start = None
    for i, c in enumerate(buf):
        if c == "(":
            if start is None:
                start = i
            depth += 1
        elif c == ")":
            depth -= 1
            if depth == 0 and start is not None:
                return buf[start:i + 1], buf[i + 1:]
    return None, buf


if __name__ == "__main__":
    main()
