"""Translate LTLf goals into infinite-trace LTL for external synthesizers.

A fresh proposition ``alive`` marks the positions of the finite trace.  The
translation guards every step forward with ``alive`` and the result is
conjoined with ``alive & (alive U G !alive)``, which forces a nonempty
finite alive-prefix followed by a dead tail.  The assumption is then put in
front as an implication.
"""
from __future__ import annotations

from . import formula as fm
from .formula import (Always, And, Atom, Eventually, Implies, Next, Not, Or,
                      Until)
from .trace_semantics import LassoTrace

ALIVE = 'alive'
GENERAL = 'general'


class ReservedVariable(fm.FormulaError):
    pass


def translate(f: fm.Formula, alive=ALIVE) -> fm.Formula:
    """The stepwise translation without the trailing liveness conjuncts."""
    live = Atom(alive)
    memo = {}

    def t(g):
        r = memo.get(g)
        if r is not None:
            return r
        op = g.op
        a = g.args
        if op in (fm.TRUE_OP, fm.FALSE_OP, fm.ATOM):
            r = g
        elif op == fm.NOT:
            r = Not(t(a[0]))
        elif op == fm.AND:
            r = And(*[t(c) for c in a])
        elif op == fm.OR:
            r = Or(*[t(c) for c in a])
        elif op == fm.IMPLIES:
            r = Implies(t(a[0]), t(a[1]))
        elif op == fm.NEXT:
            r = Next(And(live, t(a[0])))
        elif op == fm.WNEXT:
            # Xw g == !X !g
            r = Not(Next(And(live, Not(t(a[0])))))
        elif op == fm.UNTIL:
            r = Until(t(a[0]), And(live, t(a[1])))
        elif op == fm.RELEASE:
            # g R h == !(!g U !h)
            r = Not(Until(Not(t(a[0])), And(live, Not(t(a[1])))))
        elif op == fm.EVENTUALLY:
            # F g == true U g
            r = Until(fm.TRUE, And(live, t(a[0])))
        elif op == fm.ALWAYS:
            # G g == !F !g
            r = Not(Until(fm.TRUE, And(live, Not(t(a[0])))))
        else:
            raise fm.FormulaError('unknown operator {!r}'.format(op))
        memo[g] = r
        return r

    return t(f)


def ltlf_to_ltl(f: fm.Formula, alive=ALIVE) -> fm.Formula:
    """``t(f) & alive & (alive U G !alive)``."""
    if alive in fm.variables(f):
        raise ReservedVariable('{!r} already occurs in the formula'.format(alive))
    live = Atom(alive)
    return And(translate(f, alive), live, Until(live, Always(Not(live))))


def assemble(kind: str, assumption: fm.Formula, psi: fm.Formula) -> fm.Formula:
    """``GF a -> psi``, ``FG a -> psi`` or ``A -> psi`` for a general assumption."""
    if kind == fm.FAIR:
        fm.as_constraint(assumption, fm.variables(assumption))
        return Implies(Always(Eventually(assumption)), psi)
    if kind == fm.STABLE:
        fm.as_constraint(assumption, fm.variables(assumption))
        return Implies(Eventually(Always(assumption)), psi)
    if kind == GENERAL:
        return Implies(assumption, psi)
    raise ValueError('unknown assumption kind {!r}'.format(kind))


def extend_trace(tau, alive=ALIVE) -> LassoTrace:
    """Mark every position alive, then loop forever on the empty assignment."""
    if len(tau) == 0:
        raise ValueError('trace must be nonempty')
    return LassoTrace(tuple(frozenset(a) | {alive} for a in tau), (frozenset(),))


def emit(f: fm.Formula) -> str:
    """Fully parenthesized text accepted by `formula.parse`."""
    return fm.emit(f)


def emit_partition(p: fm.Partition, alive=ALIVE) -> str:
    return fm.format_partition(fm.Partition(p.inputs, tuple(p.outputs) + (alive,)))
