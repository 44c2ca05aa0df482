"""Finite-trace LTLf semantics, empty-suffix evaluation, and lasso LTL.

`holds` is the reference evaluator and follows the inductive definition
clause by clause.  `eval_batch` evaluates one formula over a whole array of
equal-length traces with numpy and exists so that exhaustive checks over
every trace up to a given length stay fast.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import formula as fm


class IndexOutOfRange(IndexError):
    pass


class UnsupportedOperator(ValueError):
    pass


Trace = Sequence[frozenset]


def holds(f: fm.Formula, rho: Trace, i: int = 0) -> bool:
    """``rho, i |= f`` for a finite nonempty trace."""
    n = len(rho)
    if not 0 <= i < n:
        raise IndexOutOfRange('position {} outside trace of length {}'.format(i, n))
    return _holds(f, rho, i, n, {})


# public name used throughout the package
eval = holds  # noqa: A001


def _holds(f, rho, i, n, memo):
    key = (f, i)
    r = memo.get(key)
    if r is not None:
        return r
    op = f.op
    a = f.args
    if op == fm.ATOM:
        r = f.name in rho[i]
    elif op == fm.TRUE_OP:
        r = True
    elif op == fm.FALSE_OP:
        r = False
    elif op == fm.NOT:
        r = not _holds(a[0], rho, i, n, memo)
    elif op == fm.AND:
        r = all(_holds(g, rho, i, n, memo) for g in a)
    elif op == fm.OR:
        r = any(_holds(g, rho, i, n, memo) for g in a)
    elif op == fm.IMPLIES:
        r = not _holds(a[0], rho, i, n, memo) or _holds(a[1], rho, i, n, memo)
    elif op == fm.NEXT:
        r = i + 1 < n and _holds(a[0], rho, i + 1, n, memo)
    elif op == fm.WNEXT:
        r = i + 1 >= n or _holds(a[0], rho, i + 1, n, memo)
    elif op == fm.UNTIL:
        r = False
        for j in range(i, n):
            if _holds(a[1], rho, j, n, memo):
                r = True
                break
            if not _holds(a[0], rho, j, n, memo):
                break
    elif op == fm.RELEASE:
        # not (not g U not h)
        r = True
        for j in range(i, n):
            if not _holds(a[1], rho, j, n, memo):
                r = False
                break
            if _holds(a[0], rho, j, n, memo):
                break
    elif op == fm.EVENTUALLY:
        r = any(_holds(a[0], rho, j, n, memo) for j in range(i, n))
    elif op == fm.ALWAYS:
        r = all(_holds(a[0], rho, j, n, memo) for j in range(i, n))
    else:
        raise UnsupportedOperator(op)
    memo[key] = r
    return r


def eval_empty(f: fm.Formula) -> bool:
    """Value of an NNF obligation on the empty remaining suffix.

    Strong operators (atoms, ``X``, ``U``) are false, weak ones (negated
    atoms, ``Xw``, ``R``) are true.
    """
    op = f.op
    if op == fm.TRUE_OP:
        return True
    if op == fm.FALSE_OP:
        return False
    if op == fm.ATOM:
        return False
    if op == fm.NOT:
        if f.args[0].op != fm.ATOM:
            raise fm.NotInNNF('negation above {}'.format(f.args[0].op))
        return True
    if op == fm.NEXT or op == fm.UNTIL:
        return False
    if op == fm.WNEXT or op == fm.RELEASE:
        return True
    if op == fm.AND:
        return all(eval_empty(g) for g in f.args)
    if op == fm.OR:
        return any(eval_empty(g) for g in f.args)
    raise fm.NotInNNF('operator {} is not allowed in NNF'.format(op))


# ---------------------------------------------------------------------------
# vectorized evaluation

def letters_to_bits(letters, nvars):
    """Unpack letter indices (first variable = most significant bit)."""
    letters = np.asarray(letters)
    shifts = np.arange(nvars - 1, -1, -1)
    return ((letters[..., None] >> shifts) & 1).astype(bool)


def eval_batch(f: fm.Formula, letters, variables) -> np.ndarray:
    """Evaluate `f` at position 0 of many traces at once.

    `letters` is an integer array of shape (N, L), L >= 1, holding letter
    indices over `variables` (first variable is the most significant bit).
    Returns a boolean array of shape (N,).
    """
    letters = np.asarray(letters)
    if letters.ndim != 2 or letters.shape[1] < 1:
        raise ValueError('need an (N, L) array with L >= 1')
    variables = list(variables)
    bits = letters_to_bits(letters, len(variables))
    index = {v: k for k, v in enumerate(variables)}
    N, L = letters.shape
    vals = {}
    for g in fm.subformulas(f):
        op = g.op
        a = [vals[c] for c in g.args]
        if op == fm.ATOM:
            if g.name in index:
                r = bits[:, :, index[g.name]]
            else:
                r = np.zeros((N, L), dtype=bool)
        elif op == fm.TRUE_OP:
            r = np.ones((N, L), dtype=bool)
        elif op == fm.FALSE_OP:
            r = np.zeros((N, L), dtype=bool)
        elif op == fm.NOT:
            r = ~a[0]
        elif op == fm.AND:
            r = np.logical_and.reduce(a)
        elif op == fm.OR:
            r = np.logical_or.reduce(a)
        elif op == fm.IMPLIES:
            r = ~a[0] | a[1]
        elif op in (fm.NEXT, fm.WNEXT):
            r = np.empty((N, L), dtype=bool)
            r[:, :-1] = a[0][:, 1:]
            r[:, -1] = op == fm.WNEXT
        elif op in (fm.UNTIL, fm.EVENTUALLY):
            lhs, rhs = (a[0], a[1]) if op == fm.UNTIL else (None, a[0])
            r = np.empty((N, L), dtype=bool)
            r[:, -1] = rhs[:, -1]
            for j in range(L - 2, -1, -1):
                step = r[:, j + 1] if lhs is None else (lhs[:, j] & r[:, j + 1])
                r[:, j] = rhs[:, j] | step
        elif op in (fm.RELEASE, fm.ALWAYS):
            lhs, rhs = (a[0], a[1]) if op == fm.RELEASE else (None, a[0])
            r = np.empty((N, L), dtype=bool)
            r[:, -1] = rhs[:, -1]
            for j in range(L - 2, -1, -1):
                step = r[:, j + 1] if lhs is None else (lhs[:, j] | r[:, j + 1])
                r[:, j] = rhs[:, j] & step
        else:
            raise UnsupportedOperator(op)
        vals[g] = r
    return vals[f][:, 0].copy()


def all_traces(nvars, length):
    """Every trace of the given length as an (N, length) letter array."""
    k = 1 << nvars
    grids = np.indices((k,) * length).reshape(length, -1).T
    return grids.astype(np.int64)


# ---------------------------------------------------------------------------
# ultimately periodic traces

@dataclass(frozen=True)
class LassoTrace:
    prefix: tuple
    loop: tuple

    def __post_init__(self):
        object.__setattr__(self, 'prefix', tuple(frozenset(a) for a in self.prefix))
        object.__setattr__(self, 'loop', tuple(frozenset(a) for a in self.loop))
        if not self.loop:
            raise ValueError('lasso loop must be nonempty')

    def letter(self, i):
        p = len(self.prefix)
        if i < p:
            return self.prefix[i]
        return self.loop[(i - p) % len(self.loop)]


def eval_lasso(psi: fm.Formula, t: LassoTrace) -> bool:
    """Infinite-trace LTL truth of `psi` at position 0 of the lasso `t`.

    The lasso has ``len(prefix) + len(loop)`` distinct positions; position
    ``p + l`` folds back to ``p``.  Until and Release are solved as least and
    greatest fixpoints over that finite position graph.
    """
    p, l = len(t.prefix), len(t.loop)
    n = p + l
    succ = [i + 1 for i in range(n - 1)] + [p]
    letters = [t.letter(i) for i in range(n)]
    vals = {}
    for g in fm.subformulas(psi):
        op = g.op
        a = [vals[c] for c in g.args]
        if op == fm.ATOM:
            r = [g.name in letters[i] for i in range(n)]
        elif op == fm.TRUE_OP:
            r = [True] * n
        elif op == fm.FALSE_OP:
            r = [False] * n
        elif op == fm.NOT:
            r = [not v for v in a[0]]
        elif op == fm.AND:
            r = [all(c[i] for c in a) for i in range(n)]
        elif op == fm.OR:
            r = [any(c[i] for c in a) for i in range(n)]
        elif op == fm.IMPLIES:
            r = [(not a[0][i]) or a[1][i] for i in range(n)]
        elif op in (fm.NEXT, fm.WNEXT):
            r = [a[0][succ[i]] for i in range(n)]
        elif op in (fm.UNTIL, fm.EVENTUALLY):
            lhs, rhs = (a[0], a[1]) if op == fm.UNTIL else ([True] * n, a[0])
            r = _fix(n, succ, lambda i, cur: rhs[i] or (lhs[i] and cur[succ[i]]),
                     False)
        elif op in (fm.RELEASE, fm.ALWAYS):
            lhs, rhs = (a[0], a[1]) if op == fm.RELEASE else ([False] * n, a[0])
            r = _fix(n, succ, lambda i, cur: rhs[i] and (lhs[i] or cur[succ[i]]),
                     True)
        else:
            raise UnsupportedOperator(op)
        vals[g] = r
    return vals[psi][0]


def _fix(n, succ, step, start):
    cur = [start] * n
    while True:
        new = [step(i, cur) for i in range(n)]
        if new == cur:
            return cur
        cur = new


# ---------------------------------------------------------------------------
# trace literals: ``{a,b};{};{a}``

def parse_trace(text: str) -> list:
    text = text.strip()
    if not text:
        return []
    out = []
    for part in text.split(';'):
        part = part.strip()
        if not (part.startswith('{') and part.endswith('}')):
            raise ValueError('bad trace element {!r}'.format(part))
        names = [x.strip() for x in part[1:-1].split(',') if x.strip()]
        out.append(frozenset(names))
    return out


def format_trace(rho) -> str:
    return ';'.join('{' + ','.join(sorted(a)) + '}' for a in rho)
