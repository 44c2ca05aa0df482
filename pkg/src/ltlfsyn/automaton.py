"""LTLf to DFA compilation by formula progression.

Every DFA state carries an obligation on the rest of the trace, kept in
next-normal form: ``true``, ``false``, ``X b`` (another letter must follow
and the suffix must satisfy ``b``) or ``Xw b`` (either the trace stops here
or the suffix satisfies ``b``).  Keeping the strength at the top is what lets
acceptance be read off the state: it accepts iff the obligation holds on the
empty suffix.

Transitions are not enumerated letter by letter.  Expanding a formula yields
a partition of the letters into guard cells (decision diagrams over the
letter variables), each mapped to one successor obligation.  This keeps
instances with a couple of dozen variables tractable.
"""
from __future__ import annotations

import json
import logging
import time
from collections import deque
from functools import lru_cache

import numpy as np

from . import formula as fm
from .bdd import BDD, FALSE as G_FALSE, TRUE as G_TRUE, CapacityExceeded
from .trace_semantics import eval_empty


log = logging.getLogger(__name__)


class UndeclaredVariable(fm.FormulaError):
    pass


class Timeout(Exception):
    """A cooperative deadline passed."""


def check_deadline(deadline):
    if deadline is not None and time.monotonic() > deadline:
        raise Timeout('deadline exceeded')


# ---------------------------------------------------------------------------
# obligations

def _dnf(f):
    """Clauses (frozensets of non-junction formulas), absorption-reduced."""
    op = f.op
    if op == fm.TRUE_OP:
        return [frozenset()]
    if op == fm.FALSE_OP:
        return []
    if op == fm.OR:
        clauses = [c for g in f.args for c in _dnf(g)]
    elif op == fm.AND:
        clauses = [frozenset()]
        for g in f.args:
            clauses = [c | d for c in clauses for d in _dnf(g)]
            clauses = _absorb([c for c in clauses if not _clash(c)])
    else:
        return [frozenset([f])]
    return _absorb(clauses)


def _clash(clause):
    return any(g.op == fm.NOT and g.args[0] in clause for g in clause)


def _absorb(clauses):
    out = []
    for c in sorted(set(clauses), key=len):
        if not any(d <= c for d in out):
            out.append(c)
    return out


@lru_cache(maxsize=1 << 16)
def canonical_body(f):
    """Boolean normal form that makes equivalent obligation bodies identical.

    Without it progression can keep producing new spellings such as
    ``p & (p | q)`` of the same obligation and never close the state set.
    """
    return fm.mk_or(*[fm.mk_and(*c) for c in _dnf(f)])


def _x(op, body):
    body = canonical_body(body)
    if op == fm.NEXT and body is fm.FALSE:
        return fm.FALSE
    if op == fm.WNEXT and body is fm.TRUE:
        return fm.TRUE
    return fm.Next(body) if op == fm.NEXT else fm.WeakNext(body)


def ob_and(a, b):
    if a is fm.FALSE or b is fm.FALSE:
        return fm.FALSE
    if a is fm.TRUE:
        return b
    if b is fm.TRUE or a is b:
        return a
    op = fm.NEXT if fm.NEXT in (a.op, b.op) else fm.WNEXT
    return _x(op, fm.mk_and(a.args[0], b.args[0]))


def ob_or(a, b):
    if a is fm.TRUE or b is fm.TRUE:
        return fm.TRUE
    if a is fm.FALSE:
        return b
    if b is fm.FALSE or a is b:
        return a
    op = fm.NEXT if a.op == b.op == fm.NEXT else fm.WNEXT
    return _x(op, fm.mk_or(a.args[0], b.args[0]))


def is_accepting(ob):
    return eval_empty(ob)


def progress(f: fm.Formula, letter) -> fm.Formula:
    """Obligation on the suffix after reading `letter` at the current position.

    `f` must be in NNF; `letter` is the collection of true atom names.  The
    result is ``true``, ``false``, ``X b`` or ``Xw b``.
    """
    return _prog(f, frozenset(letter), {})


def _prog(f, letter, memo):
    r = memo.get(f)
    if r is not None:
        return r
    op = f.op
    a = f.args
    if op == fm.TRUE_OP or op == fm.FALSE_OP:
        r = f
    elif op == fm.ATOM:
        r = fm.TRUE if f.name in letter else fm.FALSE
    elif op == fm.NOT:
        if a[0].op != fm.ATOM:
            raise fm.NotInNNF('negation above {}'.format(a[0].op))
        r = fm.FALSE if a[0].name in letter else fm.TRUE
    elif op == fm.AND:
        r = fm.TRUE
        for g in a:
            r = ob_and(r, _prog(g, letter, memo))
            if r is fm.FALSE:
                break
    elif op == fm.OR:
        r = fm.FALSE
        for g in a:
            r = ob_or(r, _prog(g, letter, memo))
            if r is fm.TRUE:
                break
    elif op == fm.NEXT or op == fm.WNEXT:
        r = _x(op, a[0])
    elif op == fm.UNTIL:
        r = ob_or(_prog(a[1], letter, memo),
                  ob_and(_prog(a[0], letter, memo), fm.Next(f)))
    elif op == fm.RELEASE:
        r = ob_and(_prog(a[1], letter, memo),
                   ob_or(_prog(a[0], letter, memo), fm.WeakNext(f)))
    else:
        raise fm.NotInNNF('operator {} is not allowed in NNF'.format(op))
    memo[f] = r
    return r


def step_obligation(ob, letter):
    """Successor of a state obligation (``X b`` / ``Xw b`` / constant)."""
    if ob.op in (fm.TRUE_OP, fm.FALSE_OP):
        return ob
    return progress(ob.args[0], letter)


# ---------------------------------------------------------------------------
# symbolic expansion into guard partitions

class _Expander:
    """Maps NNF formulas to {obligation: guard} partitions of the letters."""

    def __init__(self, store):
        self.store = store
        self.memo = {}

    def expand(self, f):
        r = self.memo.get(f)
        if r is None:
            r = self._expand(f)
            self.memo[f] = r
        return r

    def _expand(self, f):
        s = self.store
        op = f.op
        a = f.args
        if op == fm.TRUE_OP or op == fm.FALSE_OP:
            return {f: G_TRUE}
        if op == fm.ATOM:
            v = s.var(f.name)
            return {fm.TRUE: v, fm.FALSE: s.neg(v)}
        if op == fm.NOT:
            if a[0].op != fm.ATOM:
                raise fm.NotInNNF('negation above {}'.format(a[0].op))
            v = s.var(a[0].name)
            return {fm.TRUE: s.neg(v), fm.FALSE: v}
        if op == fm.NEXT or op == fm.WNEXT:
            return {_x(op, a[0]): G_TRUE}
        if op == fm.AND:
            return self._fold([self.expand(g) for g in a], ob_and)
        if op == fm.OR:
            return self._fold([self.expand(g) for g in a], ob_or)
        if op == fm.UNTIL:
            later = self.product(self.expand(a[0]), {fm.Next(f): G_TRUE}, ob_and)
            return self.product(self.expand(a[1]), later, ob_or)
        if op == fm.RELEASE:
            later = self.product(self.expand(a[0]), {fm.WeakNext(f): G_TRUE}, ob_or)
            return self.product(self.expand(a[1]), later, ob_and)
        raise fm.NotInNNF('operator {} is not allowed in NNF'.format(op))

    def _fold(self, parts, combine):
        # small partitions (literals) first keeps intermediate products small
        parts = sorted(parts, key=len)
        acc = parts[0]
        for p in parts[1:]:
            acc = self.product(acc, p, combine)
        return acc

    def product(self, p, q, combine):
        s = self.store
        out = {}
        for o1, g1 in p.items():
            for o2, g2 in q.items():
                g = s.conj(g1, g2)
                if g == G_FALSE:
                    continue
                o = combine(o1, o2)
                prev = out.get(o)
                out[o] = g if prev is None else s.disj(prev, g)
        return out


# ---------------------------------------------------------------------------
# the automaton

class Dfa:
    """Explicit DFA over the letters of a partitioned variable set.

    Transitions are stored per state as ``(guard, target)`` pairs whose
    guards are disjoint decision diagrams covering every letter.  A letter
    index numbers the assignments over `vars` with the first variable as the
    most significant bit, so with inputs first the index is
    ``x_index * 2**len(outputs) + y_index``.
    """

    def __init__(self, inputs, outputs, store, edges, initial, accepting, labels=None):
        self.inputs = tuple(inputs)
        self.outputs = tuple(outputs)
        self.vars = self.inputs + self.outputs
        self.store = store
        self.edges = edges
        self.initial = initial
        self.accepting = frozenset(accepting)
        self.labels = labels
        self._table = None

    @property
    def n_states(self):
        return len(self.edges)

    @property
    def states(self):
        return range(len(self.edges))

    def __repr__(self):
        return 'Dfa(states={}, vars={})'.format(self.n_states, list(self.vars))

    # letters ---------------------------------------------------------
    def _bits(self, letter):
        if isinstance(letter, (int, np.integer)):
            n = len(self.vars)
            return [(int(letter) >> (n - 1 - k)) & 1 for k in range(n)]
        letter = frozenset(letter)
        extra = letter - set(self.vars)
        if extra:
            raise UndeclaredVariable('undeclared variables {}'.format(sorted(extra)))
        return [v in letter for v in self.vars]

    def letter_index(self, letter):
        n = len(self.vars)
        bits = self._bits(letter)
        return sum(1 << (n - 1 - k) for k, b in enumerate(bits) if b)

    def letter_of(self, index):
        bits = self._bits(index)
        return frozenset(v for v, b in zip(self.vars, bits) if b)

    def step(self, s, letter):
        bits = self._bits(letter)
        ev = self.store.evaluate_levels
        for g, t in self.edges[s]:
            if ev(g, bits):
                return t
        raise RuntimeError('transition relation is not total')

    def run(self, word, start=None):
        s = self.initial if start is None else start
        for letter in word:
            s = self.step(s, letter)
        return s

    def accepts(self, word):
        if len(word) == 0:
            return False
        return self.run(word) in self.accepting

    def successors(self, s):
        return [t for _, t in self.edges[s]]

    # tables ----------------------------------------------------------
    def table(self):
        """Successor table of shape (states, 2**|inputs|, 2**|outputs|)."""
        if self._table is None:
            n = len(self.vars)
            levels = list(range(n))
            flat = np.full((self.n_states, 1 << n), -1, dtype=np.int32)
            for s, out in enumerate(self.edges):
                for g, t in out:
                    flat[s, self.store.indices(g, levels)] = t
            if (flat < 0).any():
                raise RuntimeError('transition relation is not total')
            self._table = flat.reshape(self.n_states, 1 << len(self.inputs),
                                       1 << len(self.outputs))
        return self._table

    def run_batch(self, letters):
        """Final states for an (N, L) array of letter indices."""
        flat = self.table().reshape(self.n_states, -1)
        letters = np.asarray(letters)
        cur = np.full(letters.shape[0], self.initial, dtype=np.int64)
        for j in range(letters.shape[1]):
            cur = flat[cur, letters[:, j]]
        return cur

    def accepts_batch(self, letters):
        acc = np.zeros(self.n_states, dtype=bool)
        acc[list(self.accepting)] = True
        return acc[self.run_batch(letters)]

    # export ----------------------------------------------------------
    def _cube_label(self, cube):
        if not cube:
            return 'true'
        names = self.store.vars
        return ' & '.join(names[l] if v else '!' + names[l]
                          for l, v in sorted(cube.items()))

    def to_dot(self):
        lines = ['digraph dfa {', '  rankdir=LR;', '  init [shape=point];']
        for s in self.states:
            shape = 'doublecircle' if s in self.accepting else 'circle'
            lines.append('  {} [shape={}];'.format(s, shape))
        lines.append('  init -> {};'.format(self.initial))
        for s, out in enumerate(self.edges):
            for g, t in out:
                label = ' | '.join('(' + self._cube_label(c) + ')'
                                   for c in self.store.cubes(g))
                lines.append('  {} -> {} [label="{}"];'.format(s, t, label))
        lines.append('}')
        return '\n'.join(lines) + '\n'

    def to_json(self):
        return json.dumps({
            'vars': list(self.vars),
            'inputs': list(self.inputs),
            'outputs': list(self.outputs),
            'states': self.n_states,
            'initial': self.initial,
            'accepting': sorted(self.accepting),
            'transitions': self.table().reshape(self.n_states, -1).tolist(),
        })


def build_dfa(f: fm.Formula, p: fm.Partition, minimal=True, max_states=None,
              deadline=None) -> Dfa:
    """Compile `f` over the letters of `p` into a DFA.

    The initial state carries ``X nnf(f)`` so it is never accepting and the
    empty word is rejected.  With `minimal` the result is minimized.
    """
    undeclared = fm.variables(f) - set(p.variables)
    if undeclared:
        raise UndeclaredVariable('undeclared variables {}'.format(sorted(undeclared)))
    store = BDD(list(p.inputs) + list(p.outputs))
    ex = _Expander(store)
    init = fm.Next(fm.to_nnf(f))
    index = {init: 0}
    labels = [init]
    edges = []
    queue = deque([init])
    while queue:
        check_deadline(deadline)
        ob = queue.popleft()
        if ob.op in (fm.TRUE_OP, fm.FALSE_OP):
            cells = {ob: G_TRUE}
        else:
            cells = ex.expand(ob.args[0])
        out = []
        for nxt, g in cells.items():
            t = index.get(nxt)
            if t is None:
                t = len(labels)
                if max_states is not None and t >= max_states:
                    raise CapacityExceeded('DFA exceeds {} states'.format(max_states))
                index[nxt] = t
                labels.append(nxt)
                queue.append(nxt)
            out.append((g, t))
        edges.append(out)
    accepting = {i for i, ob in enumerate(labels) if is_accepting(ob)}
    d = Dfa(p.inputs, p.outputs, store, edges, 0, accepting, labels)
    log.debug('progression produced %d states', d.n_states)
    return minimize(d) if minimal else d


def minimize(d: Dfa) -> Dfa:
    """Moore partition refinement plus BFS renumbering from the initial state.

    Unreachable states are dropped.  Successors are visited in the order of
    the smallest letter index on their edge.
    """
    store = d.store
    reach = _reachable(d)
    block = {s: int(s in d.accepting) for s in reach}
    nblocks = len(set(block.values()))
    while True:
        sigs = {}
        new = {}
        for s in reach:
            merged = {}
            for g, t in d.edges[s]:
                b = block[t]
                merged[b] = store.disj(merged.get(b, G_FALSE), g)
            sig = (block[s], tuple(sorted(merged.items())))
            new[s] = sigs.setdefault(sig, len(sigs))
        block = new
        if len(sigs) == nblocks:
            break
        nblocks = len(sigs)
    # one representative per block, then renumber in BFS order
    rep = {}
    for s in reach:
        rep.setdefault(block[s], s)
    n = len(store.vars)
    levels = list(range(n))

    def first_letter(g):
        m = store.least_model(g)
        return sum(1 << (n - 1 - l) for l in levels if m.get(l))

    order = {block[d.initial]: 0}
    queue = deque([block[d.initial]])
    new_edges = []
    labels = []
    while queue:
        b = queue.popleft()
        s = rep[b]
        merged = {}
        for g, t in d.edges[s]:
            tb = block[t]
            merged[tb] = store.disj(merged.get(tb, G_FALSE), g)
        out = sorted(((g, tb) for tb, g in merged.items()),
                     key=lambda e: first_letter(e[0]))
        row = []
        for g, tb in out:
            if tb not in order:
                order[tb] = len(order)
                queue.append(tb)
            row.append((g, order[tb]))
        new_edges.append(row)
        if d.labels is not None:
            labels.append(d.labels[s])
    accepting = {order[block[s]] for s in reach if s in d.accepting}
    return Dfa(d.inputs, d.outputs, store, new_edges, 0, accepting,
               labels if d.labels is not None else None)


def _reachable(d):
    seen = {d.initial}
    stack = [d.initial]
    while stack:
        s = stack.pop()
        for _, t in d.edges[s]:
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return sorted(seen)


def from_table(inputs, outputs, table, initial, accepting):
    """Build a Dfa from an explicit successor table (states x letters)."""
    store = BDD(list(inputs) + list(outputs))
    n = len(store.vars)
    table = np.asarray(table).reshape(len(table), -1)
    edges = []
    for s in range(table.shape[0]):
        by_target = {}
        for idx in range(table.shape[1]):
            cube = store.cube_levels({l: bool((idx >> (n - 1 - l)) & 1)
                                      for l in range(n)})
            t = int(table[s, idx])
            by_target[t] = store.disj(by_target.get(t, G_FALSE), cube)
        edges.append(sorted(((g, t) for t, g in by_target.items()),
                            key=lambda e: e[1]))
    return Dfa(inputs, outputs, store, edges, initial, accepting)


def accepts(d: Dfa, rho) -> bool:
    return d.accepts(rho)
