"""Strategy extraction, independent verification and a brute-force oracle.

A transducer is memoryless over DFA states: in state ``q`` on input letter
``x`` it outputs ``out[q, x]`` and moves to ``trans[q, x]``, which must be
the DFA successor on ``x`` together with that output.  Letters are integer
indices (first variable = most significant bit).

`verify` does not trust the ranks used during extraction.  It walks the
reachable non-accepting pairs (transducer state, automaton state) and looks
for an infinite play the environment could use to win while respecting its
assumption: a reachable cycle through an alpha-edge for fairness, a
reachable cycle made only of alpha-edges for stability.
"""
from __future__ import annotations

import itertools
import json
import logging
import math
from collections import deque
from dataclasses import dataclass, field

from . import formula as fm
from .bdd import FALSE as G_FALSE
from .game import GameSpec, WinningRegion


log = logging.getLogger(__name__)


class ExtractionFailure(RuntimeError):
    pass


class TooLarge(ValueError):
    pass


class TransducerFormatError(ValueError):
    pass


def _bits(value, width):
    return ''.join('1' if (value >> (width - 1 - k)) & 1 else '0' for k in range(width))


def _names(value, names):
    n = len(names)
    return frozenset(v for k, v in enumerate(names) if (value >> (n - 1 - k)) & 1)


def _index(assignment, names):
    assignment = frozenset(assignment)
    n = len(names)
    return sum(1 << (n - 1 - k) for k, v in enumerate(names) if v in assignment)


@dataclass
class Transducer:
    inputs: tuple
    outputs: tuple
    states: tuple
    initial: int
    trans: dict
    out: dict
    accepting: frozenset = frozenset()

    @property
    def n_inputs(self):
        return 1 << len(self.inputs)

    def output(self, q, x):
        """Output assignment (set of names) for state q on input set x."""
        return _names(self.out[q, _index(x, self.inputs)], self.outputs)

    def to_dict(self):
        nx, ny = len(self.inputs), len(self.outputs)
        edges = [{'from': q, 'on': _bits(xi, nx), 'out': _bits(self.out[q, xi], ny),
                  'to': self.trans[q, xi]}
                 for q in self.states for xi in range(self.n_inputs)]
        return {'vars_in': list(self.inputs), 'vars_out': list(self.outputs),
                'states': list(self.states), 'initial': self.initial,
                'accepting': sorted(self.accepting), 'edges': edges}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, data):
        try:
            inputs = tuple(data['vars_in'])
            outputs = tuple(data['vars_out'])
            trans, out = {}, {}
            for e in data['edges']:
                on, o = e['on'], e['out']
                if len(on) != len(inputs) or len(o) != len(outputs):
                    raise TransducerFormatError('edge bit width mismatch')
                xi = int(on, 2) if on else 0
                trans[int(e['from']), xi] = int(e['to'])
                out[int(e['from']), xi] = int(o, 2) if o else 0
            return cls(inputs, outputs, tuple(int(s) for s in data['states']),
                       int(data['initial']), trans, out,
                       frozenset(int(s) for s in data.get('accepting', ())))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, TransducerFormatError):
                raise
            raise TransducerFormatError('malformed transducer: {}'.format(exc)) from exc

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise TransducerFormatError(str(exc)) from exc
        return cls.from_dict(data)

    def to_dot(self):
        nx, ny = len(self.inputs), len(self.outputs)
        lines = ['digraph transducer {', '  rankdir=LR;', '  init [shape=point];']
        for q in self.states:
            shape = 'doublecircle' if q in self.accepting else 'circle'
            lines.append('  {} [shape={}];'.format(q, shape))
        lines.append('  init -> {};'.format(self.initial))
        for q in self.states:
            for xi in range(self.n_inputs):
                lines.append('  {} -> {} [label="{}/{}"];'.format(
                    q, self.trans[q, xi], _bits(xi, nx) or '-',
                    _bits(self.out[q, xi], ny) or '-'))
        lines.append('}')
        return '\n'.join(lines) + '\n'


# ---------------------------------------------------------------------------
# extraction

class _Moves:
    """Per (state, input letter): the reachable targets with their least output."""

    def __init__(self, g: GameSpec):
        self.d = g.dfa
        self.nx = len(self.d.inputs)
        self.ny = len(self.d.outputs)
        self.alpha = g.alpha_mask()

    def options(self, q, xi):
        """List of (target, least output index) over the edges alive on xi."""
        d, store = self.d, self.d.store
        fix = {l: bool((xi >> (self.nx - 1 - l)) & 1) for l in range(self.nx)}
        out = []
        for gd, t in d.edges[q]:
            h = store.let(gd, fix)
            if h == G_FALSE:
                continue
            m = store.least_model(h)
            y = 0
            for l, v in m.items():
                if v:
                    y |= 1 << (self.nx + self.ny - 1 - l)
            out.append((t, y))
        return out


def _extract(g, w, choose):
    if g.dfa.initial not in w.states:
        raise ExtractionFailure('initial state is not agent-winning')
    mv = _Moves(g)
    acc = g.dfa.accepting
    nxl = 1 << mv.nx
    trans, out = {}, {}
    seen = {g.dfa.initial}
    queue = deque([g.dfa.initial])
    while queue:
        q = queue.popleft()
        for xi in range(nxl):
            opts = mv.options(q, xi)
            if q in acc or q not in w.states:
                t, y = min(opts, key=lambda o: o[1])
            else:
                pick = choose(q, bool(mv.alpha[xi]), opts)
                if pick is None:
                    raise ExtractionFailure(
                        'no compliant output in state {} on input {}'.format(
                            q, _bits(xi, mv.nx)))
                t, y = pick
            trans[q, xi] = t
            out[q, xi] = y
            if t not in seen:
                seen.add(t)
                queue.append(t)
    states = tuple(sorted(seen))
    return Transducer(tuple(g.dfa.inputs), tuple(g.dfa.outputs), states,
                      g.dfa.initial, trans, out,
                      frozenset(s for s in states if s in acc))


def _rank_key(w, acc):
    def key(t):
        return -math.inf if t in acc else w.rank[t]
    return key


def extract_fair(g: GameSpec, w: WinningRegion, literal=False) -> Transducer:
    """Memoryless strategy from the agent's fair winning region.

    On an alpha-input the output must move to a strictly lower rank (accepting
    counts as lowest) and the lowest reachable rank is preferred.  On other
    inputs the rank may not grow; with `literal` that restriction is dropped
    and any winning successor is allowed.
    """
    acc = g.dfa.accepting
    rank = _rank_key(w, acc)
    win = w.states

    def choose(q, alpha, opts):
        rq = rank(q)
        if alpha:
            ok = [(rank(t), y, t) for t, y in opts
                  if t in acc or (t in win and rank(t) < rq)]
            if not ok:
                return None
            if literal:
                r, y, t = min(ok, key=lambda o: o[1])
            else:
                r, y, t = min(ok)
            return t, y
        if literal:
            ok = [(y, t) for t, y in opts if t in acc or t in win]
        else:
            ok = [(y, t) for t, y in opts if t in acc or (t in win and rank(t) <= rq)]
        if not ok:
            return None
        y, t = min(ok)
        return t, y

    return _extract(g, w, choose)


def extract_stable(g: GameSpec, w: WinningRegion) -> Transducer:
    """Memoryless strategy from the agent's stable winning region.

    Alpha-inputs must lower the rank (inner stage at the outer fixpoint);
    other inputs only have to stay winning.  Least output wins ties.
    """
    acc = g.dfa.accepting
    rank = _rank_key(w, acc)
    win = w.states

    def choose(q, alpha, opts):
        rq = rank(q)
        if alpha:
            ok = [(y, t) for t, y in opts if t in acc or (t in win and rank(t) < rq)]
        else:
            ok = [(y, t) for t, y in opts if t in acc or t in win]
        if not ok:
            return None
        y, t = min(ok)
        return t, y

    return _extract(g, w, choose)


def extract(g: GameSpec, w: WinningRegion, **kw) -> Transducer:
    if g.kind == fm.FAIR:
        return extract_fair(g, w, **kw)
    return extract_stable(g, w)


# ---------------------------------------------------------------------------
# verification

@dataclass
class Lasso:
    """Play as (state, input letter, output letter) steps; `loop` repeats."""
    prefix: list
    loop: list

    def describe(self, inputs, outputs):
        def fmt(step):
            q, xi, y = step
            return '{}:{{{}}}/{{{}}}'.format(
                q, ','.join(sorted(_names(xi, inputs))),
                ','.join(sorted(_names(y, outputs))))
        return 'prefix: {}\nloop: {}'.format(
            ' '.join(fmt(s) for s in self.prefix) or '-',
            ' '.join(fmt(s) for s in self.loop))


@dataclass
class VerificationReport:
    passed: bool
    counterexample: Lasso | None = None
    reason: str = ''

    def __bool__(self):
        return self.passed


def strongly_connected(nodes, succ):
    """Tarjan's algorithm, iterative; returns a list of components."""
    index, low = {}, {}
    on_stack = set()
    stack, comps = [], []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for u in it:
                if u not in index:
                    index[u] = low[u] = counter
                    counter += 1
                    stack.append(u)
                    on_stack.add(u)
                    work.append((u, iter(succ(u))))
                    advanced = True
                    break
                if u in on_stack:
                    low[v] = min(low[v], index[u])
            if advanced:
                continue
            work.pop()
            if work:
                p = work[-1][0]
                low[p] = min(low[p], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    u = stack.pop()
                    on_stack.discard(u)
                    comp.append(u)
                    if u == v:
                        break
                comps.append(comp)
    return comps


def _bfs_path(start, goal, edges, allowed):
    """Edge list [(node, label)] from start to goal within `allowed` nodes."""
    if start == goal:
        return []
    prev = {start: None}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for lab, u in edges[v]:
            if u in allowed and u not in prev:
                prev[u] = (v, lab)
                if u == goal:
                    path = []
                    while u != start:
                        p, l = prev[u]
                        path.append((p, l))
                        u = p
                    return path[::-1]
                queue.append(u)
    return None


def find_violation(initial, edges, alpha_edge, kind):
    """Search a reachable environment-winning cycle.

    `edges[v]` lists (label, target) pairs over non-accepting nodes only;
    `alpha_edge(label)` tells whether the move respects alpha.  Returns
    (prefix, loop) as lists of (node, label) or None.
    """
    reach = {initial}
    queue = deque([initial])
    while queue:
        v = queue.popleft()
        for _, u in edges[v]:
            if u not in reach:
                reach.add(u)
                queue.append(u)
    order = sorted(reach)
    if kind == fm.FAIR:
        comps = strongly_connected(order, lambda v: [u for _, u in edges[v]])
        for comp in comps:
            members = set(comp)
            for v in sorted(members):
                for lab, u in edges[v]:
                    if u in members and alpha_edge(lab):
                        back = _bfs_path(u, v, edges, members)
                        loop = [(v, lab)] + back
                        return _bfs_path(initial, v, edges, reach), loop
        return None
    sub = {v: [(l, u) for l, u in edges[v] if alpha_edge(l)] for v in order}
    comps = strongly_connected(order, lambda v: [u for _, u in sub[v]])
    for comp in comps:
        members = set(comp)
        for v in sorted(members):
            for lab, u in sub[v]:
                if u in members:
                    back = _bfs_path(u, v, sub, members)
                    loop = [(v, lab)] + back
                    return _bfs_path(initial, v, edges, reach), loop
    return None


def verify(t: Transducer, g: GameSpec) -> VerificationReport:
    """Check that `t` wins the game `g` from its initial state.

    Plays are tracked as pairs (transducer state, automaton state) so that
    the automaton position comes from the real transition function even if
    the transducer's own bookkeeping is wrong.  Any mismatch between the two
    also fails the check.
    """
    d = g.dfa
    if tuple(t.inputs) != tuple(d.inputs) or tuple(t.outputs) != tuple(d.outputs):
        return VerificationReport(False, reason='transducer variables differ from the game')
    acc = d.accepting
    alpha = g.alpha_mask()
    nx, ny = len(d.inputs), len(d.outputs)
    nxl = 1 << nx
    root = (t.initial, d.initial)
    edges = {}
    parent = {root: None}
    queue = deque([root])
    mismatch = None
    while queue:
        node = queue.popleft()
        q, s = node
        row = []
        for xi in range(nxl):
            if (q, xi) not in t.trans or (q, xi) not in t.out:
                return VerificationReport(
                    False, reason='no move in state {} on input {}'.format(q, _bits(xi, nx)))
            y = t.out[q, xi]
            if not 0 <= y < (1 << ny):
                return VerificationReport(False, reason='output out of range')
            s2 = d.step(s, (xi << ny) | y)
            q2 = t.trans[q, xi]
            if mismatch is None and (q != s or q2 != s2):
                mismatch = (node, xi, q2, s2)
            if s2 in acc:
                continue
            nxt = (q2, s2)
            row.append((xi, nxt))
            if nxt not in parent:
                parent[nxt] = (node, xi)
                queue.append(nxt)
        edges[node] = row

    def step(node, xi):
        return (node[0], xi, t.out[node[0], xi])

    if d.initial in acc:
        return VerificationReport(True)
    hit = find_violation(root, edges, lambda xi: bool(alpha[xi]), g.kind)
    if hit is not None:
        prefix, loop = hit
        lasso = Lasso([step(n, xi) for n, xi in prefix], [step(n, xi) for n, xi in loop])
        what = 'alpha-edge' if g.kind == fm.FAIR else 'alpha-only'
        return VerificationReport(False, lasso,
                                  'reachable {} cycle avoiding acceptance'.format(what))
    if mismatch is not None:
        node, xi, q2, s2 = mismatch
        path = []
        cur = node
        while parent[cur] is not None:
            prev, lab = parent[cur]
            path.append(step(prev, lab))
            cur = prev
        path = path[::-1] + [step(node, xi)]
        return VerificationReport(
            False, Lasso(path, []),
            'transducer state {} on input {} moves to {}, automaton moves from {} to {}'
            .format(node[0], _bits(xi, nx) or '-', q2, node[1], s2))
    return VerificationReport(True)


# ---------------------------------------------------------------------------
# brute-force oracle

ORACLE_MAX_CELLS = 16
ORACLE_MAX_OUTPUTS = 4


def oracle_solve(g: GameSpec, start=None) -> bool:
    """Does some memoryless agent strategy win from `start` (default: initial)?

    Enumerates every output function (identified by the successor it picks
    per state and input letter) and checks each with the same cycle
    criterion as `verify`.
    """
    d = g.dfa
    nxl = 1 << len(d.inputs)
    if d.n_states * nxl > ORACLE_MAX_CELLS or (1 << len(d.outputs)) > ORACLE_MAX_OUTPUTS:
        raise TooLarge('game too large for enumeration ({} states, {} inputs, {} outputs)'
                       .format(d.n_states, len(d.inputs), len(d.outputs)))
    start = d.initial if start is None else start
    acc = d.accepting
    if start in acc:
        return True
    alpha = g.alpha_mask()
    table = d.table()
    free = [s for s in range(d.n_states) if s not in acc]
    cells = [(s, xi) for s in free for xi in range(nxl)]
    choices = [sorted(set(table[s, xi].tolist())) for s, xi in cells]
    for pick in itertools.product(*choices):
        edges = {s: [] for s in free}
        for (s, xi), t in zip(cells, pick):
            if t not in acc:
                edges[s].append((xi, t))
        if find_violation(start, edges, lambda xi: bool(alpha[xi]), g.kind) is None:
            return True
    return False


# ---------------------------------------------------------------------------
# simulation

@dataclass
class Play:
    trace: list
    first_accept: int | None
    states: list = field(default_factory=list)


def simulate(t: Transducer, env_word) -> Play:
    """Run the transducer on input sets; report the first accepting step."""
    q = t.initial
    trace, states = [], [q]
    first = None
    for j, x in enumerate(env_word):
        xi = _index(x, t.inputs)
        y = _names(t.out[q, xi], t.outputs)
        trace.append(frozenset(x) | y)
        q = t.trans[q, xi]
        states.append(q)
        if first is None and q in t.accepting:
            first = j
    return Play(trace, first, states)
