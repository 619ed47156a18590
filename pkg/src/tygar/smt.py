"""SMT-LIB 2 text-protocol client over a solver subprocess.

The client emits a QF_LIA subset (`declare-const ... Int`, `assert` with
and/or/=>/=/<=/>=/+/-, `check-sat`, `get-value`) and parses `sat`,
`unsat`, `unknown` and s-expression value bindings. Any compliant solver
works; the command is configuration. `unknown` is a solver error.
"""

from __future__ import annotations

import os
import shlex
import subprocess
import sys
from typing import Sequence, Union


class SolverError(Exception):
    """Solver-process failure: spawn, protocol, or unknown result."""


def default_solver_command() -> list:
    """Resolve the solver command: TYGAR_SOLVER, else the bundled solver."""
    env = os.environ.get("TYGAR_SOLVER")
    if env:
        return shlex.split(env)
    return [sys.executable, "-m", "tygar.minismt"]


def resolve_command(cmd: Union[str, Sequence, None]) -> list:
    if cmd is None:
        return default_solver_command()
    if isinstance(cmd, str):
        return shlex.split(cmd)
    return list(cmd)


class SolverClient:
    """One solver subprocess; queries are separated by (reset)."""

    def __init__(self, cmd: Union[str, Sequence, None] = None):
        self.cmd = resolve_command(cmd)
        try:
            self.proc = subprocess.Popen(
                self.cmd,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
            )
        except OSError as e:
            raise SolverError(f"cannot spawn solver {self.cmd!r}: {e}") from e

    def _write(self, text: str) -> None:
        if self.proc.poll() is not None:
            raise SolverError("solver process exited unexpectedly")
        try:
            self.proc.stdin.write(text)
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as e:
            raise SolverError(f"solver pipe failure: {e}") from e

    def _read_line(self) -> str:
        line = self.proc.stdout.readline()
        if line == "":
            raise SolverError("solver closed its output stream")
        return line.strip()

    def _read_sexpr(self) -> str:
        """Read lines until parentheses balance (one response expression)."""
        buf = []
        depth = 0
        while True:
            line = self._read_line()
            buf.append(line)
            depth += line.count("(") - line.count(")")
            if depth <= 0 and buf:
                return " ".join(buf)

    def send(self, script: str) -> None:
        self._write(script if script.endswith("\n") else script + "\n")

    def reset(self) -> None:
        self._write("(reset)\n")

    def check_sat(self) -> bool:
        self._write("(check-sat)\n")
        answer = self._read_line()
        if answer == "sat":
            return True
        if answer == "unsat":
            return False
        raise SolverError(f"solver answered {answer!r}")

    def get_values(self, names: Sequence) -> dict:
        if not names:
            return {}
        self._write(f"(get-value ({' '.join(names)}))\n")
        reply = self._read_sexpr()
        return _parse_values(reply)

    def close(self) -> None:
        try:
            self._write("(exit)\n")
        except SolverError:
            pass
        try:
            self.proc.stdin.close()
        except OSError:
            pass
        self.proc.wait(timeout=5)

    def __enter__(self) -> "SolverClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def _tokenize_sexpr(text: str) -> list:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def _parse_values(text: str) -> dict:
    """Parse `((name val) ...)`; values are integers, possibly `(- n)`."""
    toks = _tokenize_sexpr(text)
    pos = 0

    def parse() -> object:
        nonlocal pos
        tok = toks[pos]
        pos += 1
        if tok == "(":
            items = []
            while toks[pos] != ")":
                items.append(parse())
            pos += 1
            return items
        return tok

    try:
        tree = parse()
    except IndexError as e:
        raise SolverError(f"malformed value response: {text!r}") from e
    out = {}
    if not isinstance(tree, list):
        raise SolverError(f"malformed value response: {text!r}")
    for pair in tree:
        if not (isinstance(pair, list) and len(pair) == 2):
            raise SolverError(f"malformed value binding in: {text!r}")
        name, val = pair
        if isinstance(val, list):
            if len(val) == 2 and val[0] == "-":
                out[name] = -int(val[1])
            else:
                raise SolverError(f"non-integer value for {name}: {val!r}")
        else:
            out[name] = int(val)
    return out
