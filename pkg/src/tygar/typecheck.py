"""Type-transformer semantics for components and the concrete/abstract checker."""

from __future__ import annotations

from .lattice import mgu_pairs, subsumes
from .types import (
    BOTTOM,
    BaseType,
    Environment,
    FnType,
    Library,
    NormalForm,
    Term,
    TermApp,
    TermVar,
    TypingError,
    apply_subst,
    canonical,
    free_vars,
    rename_vars,
)


def _freshen(t: BaseType, prefix: str) -> BaseType:
    mapping = {v: f"{prefix}{i}" for i, v in enumerate(free_vars(t))}
    return rename_vars(t, mapping)


def apply_transformer(lib: Library, component: str, args: list) -> BaseType:
    """Result type of applying a component to argument types.

    Fresh-instantiates the signature, takes the simultaneous MGU of the
    formal/actual pairs and applies it to the return type. Arguments are
    renamed apart from each other and from the instance (variables scope
    per argument); any bottom argument short-circuits to bottom. The
    result is canonical.
    """
    poly = lib.components.get(component)
    if poly is None:
        raise TypingError(f"unknown component {component}")
    if len(poly.body.params) != len(args):
        raise TypingError(
            f"{component} expects {len(poly.body.params)} arguments, got {len(args)}")
    if any(a is BOTTOM for a in args):
        return BOTTOM
    inst_map = {v: f"^c{i}" for i, v in enumerate(poly.quantified)}
    params = [rename_vars(b, inst_map) for b in poly.body.params]
    ret = rename_vars(poly.body.ret, inst_map)
    actuals = [_freshen(a, f"^a{j}_") for j, a in enumerate(args)]
    sigma = mgu_pairs(list(zip(params, actuals)))
    return canonical(apply_subst(sigma, ret))


def infer(lib: Library, env: Environment, domain, e: Term) -> BaseType:
    """Bidirectional inference over application terms.

    `domain` supplies the abstraction applied at every step; passing the
    concrete domain makes it the identity. Total: never fails on typable
    or untypable terms, may return bottom.
    """
    if isinstance(e, TermVar):
        if e.name not in env:
            raise TypingError(f"unbound variable {e.name}")
        return domain.abstract(env[e.name])
    assert isinstance(e, TermApp)
    arg_types = [infer(lib, env, domain, a) for a in e.args]
    if any(t is BOTTOM for t in arg_types):
        return BOTTOM
    return domain.abstract(apply_transformer(lib, e.component, arg_types))


def check(lib: Library, domain, nf: NormalForm, t: FnType) -> bool:
    """Check a normal-form term against a ground function type."""
    if len(nf.params) != len(t.params):
        raise TypingError(
            f"arity mismatch: term binds {len(nf.params)}, type has {len(t.params)}")
    env: Environment = dict(zip(nf.params, t.params))
    inferred = infer(lib, env, domain, nf.body)
    return subsumes(t.ret, inferred)
