"""
Cost-based inlining of nonterminal calls.

A call is replaced by the body of its production when the body compiles to at
most two instructions or when the call is the only reference to the
production. Recursive productions are never inlined.
"""

import logging
from typing import Dict, Optional, Set

from src.compiler.convert import compiled_size
from src.grammar.expression import (
    Choice, Expression, Grammar, Nonterminal, Sequence, UNARY_TYPES,
    make_choice, make_sequence, referenced_names,
)

logger = logging.getLogger(__name__)

MAX_INLINE_SIZE = 2


def recursive_productions(g: Grammar) -> Set[str]:
    """Names of productions that can reach a call to themselves."""
    calls: Dict[str, Set[str]] = {
        name: {ref for ref in referenced_names(body) if ref in g.rules}
        for name, body in g.productions
    }
    recursive = set()
    for name in calls:
        seen = set()
        work = list(calls[name])
        while work:
            current = work.pop()
            if current == name:
                recursive.add(name)
                break
            if current in seen:
                continue
            seen.add(current)
            work.extend(calls[current])
    return recursive


def substitute(e: Expression, name: str, body: Expression) -> Expression:
    """
    Replace every call of name in e by body.

    A sequence body spliced into a sequence (and a choice body into a choice)
    is flattened, which is the code the call site would have produced anyway.
    """
    if isinstance(e, Nonterminal):
        return body if e.name == name else e
    if isinstance(e, (Sequence, Choice)):
        flat_type = type(e)
        items = []
        for item in e.items:
            if isinstance(item, Nonterminal) and item.name == name and isinstance(body, flat_type):
                items.extend(body.items)
            else:
                items.append(substitute(item, name, body))
        return make_sequence(items) if flat_type is Sequence else make_choice(items)
    if isinstance(e, UNARY_TYPES):
        return type(e)(substitute(e.expr, name, body))
    return e


def drop_unreferenced(g: Grammar) -> Grammar:
    while True:
        refs = g.references()
        kept = [(name, body) for name, body in g.productions if refs[name] > 0]
        if len(kept) == len(g.productions):
            return g
        g = g.replace(kept)


def _pick_candidate(g: Grammar) -> Optional[str]:
    refs = g.references()
    recursive = recursive_productions(g)
    for name, body in g.productions:
        if name == g.start or name in recursive or refs[name] == 0:
            continue
        if refs[name] == 1 or compiled_size(body) <= MAX_INLINE_SIZE:
            return name
    return None


def inline_pass(g: Grammar) -> Grammar:
    """
    Inline productions until no candidate is left.

    Args:
        g: Validated grammar

    Returns:
        Grammar with the same start production and language
    """
    before = len(g.productions)
    g = drop_unreferenced(g)
    while True:
        name = _pick_candidate(g)
        if name is None:
            break
        body = g.body(name)
        logger.debug("Inlining %s (%d instruction(s))", name, compiled_size(body))
        g = drop_unreferenced(g.replace(
            (other, substitute(expr, name, body)) for other, expr in g.productions if other != name
        ))
    logger.debug("Inlining kept %d of %d production(s)", len(g.productions), before)
    return g
