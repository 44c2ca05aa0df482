"""Fair and stable DFA games: nested fixpoints for both players.

The environment moves first (inputs), the agent answers (outputs), and the
DFA follows.  The agent wins a play by reaching an accepting state or by the
environment breaking its assumption; accepting states are absorbing wins.

Two backends compute the same fixpoints.  The explicit one works on the
successor table with numpy; the symbolic one encodes states in binary,
keeps one decision diagram per next-state bit and evaluates ``succ in W``
by functional composition.

Each region carries ranks, the approximation stage at which a state
entered, which the strategy extraction uses as a progress measure:

========  ========  ==========================================
kind      player    rank
========  ========  ==========================================
fair      agent     outer least-fixpoint stage
fair      env       inner least-fixpoint stage at the outer end
stable    agent     inner least-fixpoint stage at the outer end
stable    env       outer least-fixpoint stage
========  ========  ==========================================
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import formula as fm
from .automaton import Dfa, Timeout, build_dfa, check_deadline
from .bdd import BDD, FALSE, TRUE, CapacityExceeded


log = logging.getLogger(__name__)

AGENT = 'agent'
ENVIRONMENT = 'environment'
EXPLICIT = 'explicit'
SYMBOLIC = 'symbolic'

EXPLICIT_MAX_VARS = 16
EXPLICIT_MAX_STATES = 4096
EXPLICIT_MAX_CELLS = 1 << 27

__all__ = ['GameSpec', 'WinningRegion', 'Verdict', 'env_region_fair',
           'agent_region_fair', 'env_region_stable', 'agent_region_stable',
           'check_realizable', 'solve_symbolic', 'reachability_region',
           'Timeout', 'CapacityExceeded']


@dataclass(frozen=True)
class GameSpec:
    dfa: Dfa
    partition: fm.Partition
    alpha: fm.Formula
    kind: str

    def __post_init__(self):
        if self.kind not in fm.KINDS:
            raise fm.ConstraintError('unknown game kind {!r}'.format(self.kind))
        fm.as_constraint(self.alpha, self.partition.inputs)
        if tuple(self.dfa.vars) != tuple(self.partition.variables):
            raise fm.PartitionError('DFA letters do not match the partition')

    def with_kind(self, kind):
        return GameSpec(self.dfa, self.partition, self.alpha, kind)

    def with_alpha(self, alpha):
        return GameSpec(self.dfa, self.partition, alpha, self.kind)

    def alpha_mask(self):
        """Boolean vector over input letters: does the letter satisfy alpha."""
        inputs = self.partition.inputs
        nx = len(inputs)
        out = np.zeros(1 << nx, dtype=bool)
        for xi in range(1 << nx):
            true = {v for k, v in enumerate(inputs) if (xi >> (nx - 1 - k)) & 1}
            out[xi] = fm.eval_constraint(self.alpha, true)
        return out


def make_game(phi, partition, assumption, **kw) -> GameSpec:
    d = build_dfa(phi, partition, **kw)
    return GameSpec(d, partition, assumption.alpha, assumption.kind)


@dataclass
class WinningRegion:
    protagonist: str
    kind: str
    states: frozenset
    rank: dict
    backend: str
    outer_iterations: int = 0
    inner_iterations: int = 0
    stages: list = field(default_factory=list, repr=False)
    inner_stages: list = field(default_factory=list, repr=False)

    def __contains__(self, s):
        return s in self.states


@dataclass
class Verdict:
    realizable: bool
    agent_region: WinningRegion
    backend: str
    seconds: float = 0.0

    def __bool__(self):
        return self.realizable


# ---------------------------------------------------------------------------
# explicit backend

class _Explicit:
    def __init__(self, g: GameSpec, deadline=None):
        d = g.dfa
        cells = d.n_states << len(d.vars)
        if cells > EXPLICIT_MAX_CELLS:
            raise CapacityExceeded('explicit table would hold {} cells'.format(cells))
        self.succ = d.table()
        self.n = d.n_states
        self.acc = np.zeros(self.n, dtype=bool)
        self.acc[list(d.accepting)] = True
        self.alpha = g.alpha_mask()[None, :, None]
        self.deadline = deadline

    def agent(self, a, b):
        """forall x exists y: (x |= !alpha or succ in a+Acc) and succ in b+Acc."""
        acc = self.acc
        good = (~self.alpha | (a | acc)[self.succ]) & (b | acc)[self.succ]
        return good.any(axis=2).all(axis=1)

    def env(self, a, b):
        """exists x forall y: (x |= alpha and succ in a-Acc) or succ in b-Acc."""
        nacc = ~self.acc
        bad = (self.alpha & (a & nacc)[self.succ]) | (b & nacc)[self.succ]
        return bad.all(axis=2).any(axis=1)

    def empty(self):
        return np.zeros(self.n, dtype=bool)

    def full(self):
        return np.ones(self.n, dtype=bool)

    @staticmethod
    def same(a, b):
        return np.array_equal(a, b)

    def check(self):
        check_deadline(self.deadline)


def _nested(ops, outer_least, inner_least, body):
    """Two-level fixpoint; returns (value, outer stages, last inner stages, inner count).

    `body(z, zh)` is the one-step operator; the outer variable starts at the
    empty set for a least fixpoint and at the full set for a greatest one,
    and likewise the inner.
    """
    z = ops.empty() if outer_least else ops.full()
    stages = [z]
    inner_total = 0
    while True:
        zh = ops.empty() if inner_least else ops.full()
        inner = [zh]
        while True:
            ops.check()
            nxt = body(z, zh)
            inner_total += 1
            if ops.same(nxt, zh):
                break
            zh = nxt
            inner.append(zh)
        if ops.same(zh, z):
            return z, stages, inner, inner_total
        z = zh
        stages.append(z)


def _first_stage(stages, states):
    """Least index of a stage containing each state (stages are monotone)."""
    first = {}
    for i, st in enumerate(stages):
        for s in st:
            first.setdefault(s, i)
    return {s: first[s] for s in states}


def _solve(g: GameSpec, protagonist, ops, backend):
    fair = g.kind == fm.FAIR
    if protagonist == AGENT:
        if fair:
            body = ops.agent  # mu Z. nu Zh. (!a | d in Z+Acc) & d in Zh+Acc
            value, stages, inner, n_in = _nested(ops, True, False, body)
        else:
            body = lambda z, zh: ops.agent(zh, z)  # nu Z. mu Zh.
            value, stages, inner, n_in = _nested(ops, False, True, body)
    else:
        if fair:
            body = ops.env  # nu Z. mu Zh. (a & d in Z-Acc) | d in Zh-Acc
            value, stages, inner, n_in = _nested(ops, False, True, body)
        else:
            body = lambda z, zh: ops.env(zh, z)  # mu Z. nu Zh.
            value, stages, inner, n_in = _nested(ops, True, False, body)
    stage_sets = [ops.members(s) for s in stages]
    inner_sets = [ops.members(s) for s in inner]
    acc = g.dfa.accepting
    fixed = ops.members(value)
    if protagonist == AGENT:
        states = fixed | acc
    else:
        states = fixed - acc
    rank_from_outer = (protagonist == AGENT) == fair
    chain = stage_sets if rank_from_outer else inner_sets
    rank = _first_stage(chain, [s for s in states if s not in acc])
    for s in states & acc:
        rank[s] = 0
    return WinningRegion(protagonist, g.kind, frozenset(states), rank, backend,
                         outer_iterations=len(stages), inner_iterations=n_in,
                         stages=stage_sets, inner_stages=inner_sets)


class _ExplicitOps(_Explicit):
    @staticmethod
    def members(a):
        return frozenset(np.flatnonzero(a).tolist())


def _explicit(g, protagonist, deadline=None):
    return _solve(g, protagonist, _ExplicitOps(g, deadline), EXPLICIT)


def _need(g, kind):
    if g.kind != kind:
        raise ValueError('game kind is {}, expected {}'.format(g.kind, kind))


def env_region_fair(g: GameSpec, backend=EXPLICIT, **kw) -> WinningRegion:
    _need(g, fm.FAIR)
    return _dispatch(g, ENVIRONMENT, backend, **kw)


def agent_region_fair(g: GameSpec, backend=EXPLICIT, **kw) -> WinningRegion:
    _need(g, fm.FAIR)
    return _dispatch(g, AGENT, backend, **kw)


def env_region_stable(g: GameSpec, backend=EXPLICIT, **kw) -> WinningRegion:
    _need(g, fm.STABLE)
    return _dispatch(g, ENVIRONMENT, backend, **kw)


def agent_region_stable(g: GameSpec, backend=EXPLICIT, **kw) -> WinningRegion:
    _need(g, fm.STABLE)
    return _dispatch(g, AGENT, backend, **kw)


def agent_region(g: GameSpec, backend=EXPLICIT, **kw):
    return _dispatch(g, AGENT, backend, **kw)


def env_region(g: GameSpec, backend=EXPLICIT, **kw):
    return _dispatch(g, ENVIRONMENT, backend, **kw)


def choose_backend(g: GameSpec):
    d = g.dfa
    if len(d.vars) <= EXPLICIT_MAX_VARS and d.n_states <= EXPLICIT_MAX_STATES:
        return EXPLICIT
    return SYMBOLIC


def _dispatch(g, protagonist, backend, deadline=None, max_nodes=None):
    if backend == 'auto':
        backend = choose_backend(g)
    if backend == EXPLICIT:
        return _explicit(g, protagonist, deadline)
    if backend == SYMBOLIC:
        return _solve(g, protagonist, _SymbolicOps(g, deadline, max_nodes), SYMBOLIC)
    raise ValueError('unknown backend {!r}'.format(backend))


def check_realizable(g: GameSpec, backend='auto', deadline=None, max_nodes=None) -> Verdict:
    """Realizable iff the initial state is in the agent's winning region."""
    t0 = time.monotonic()
    if backend == 'auto':
        backend = choose_backend(g)
    w = _dispatch(g, AGENT, backend, deadline=deadline, max_nodes=max_nodes)
    return Verdict(g.dfa.initial in w.states, w, backend, time.monotonic() - t0)


def reachability_region(g: GameSpec) -> frozenset:
    """Classical reachability game, assumption ignored: mu Z. forall x exists y. succ in Z+Acc."""
    ops = _ExplicitOps(g)
    acc = ops.acc
    z = ops.empty()
    while True:
        nxt = (z | acc)[ops.succ].any(axis=2).all(axis=1)
        if np.array_equal(nxt, z):
            break
        z = nxt
    return ops.members(z) | g.dfa.accepting


# ---------------------------------------------------------------------------
# symbolic backend

def bool_to_bdd(store, f):
    """Decision diagram of a Boolean formula (atoms must be store variables)."""
    op = f.op
    if op == fm.TRUE_OP:
        return TRUE
    if op == fm.FALSE_OP:
        return FALSE
    if op == fm.ATOM:
        return store.var(f.name)
    a = [bool_to_bdd(store, c) for c in f.args]
    if op == fm.NOT:
        return store.neg(a[0])
    if op == fm.AND:
        r = TRUE
        for u in a:
            r = store.conj(r, u)
        return r
    if op == fm.OR:
        r = FALSE
        for u in a:
            r = store.disj(r, u)
        return r
    if op == fm.IMPLIES:
        return store.implies(a[0], a[1])
    raise fm.ConstraintError('not a Boolean formula')


class SymbolicArena:
    """Binary state encoding and next-state functions of a DFA.

    Variable order: state bits (most significant first), then inputs, then
    outputs.
    """

    def __init__(self, g: GameSpec, max_nodes=None):
        d = g.dfa
        self.n = d.n_states
        self.nbits = max(1, (self.n - 1).bit_length())
        self.state_vars = ['_s{}'.format(k) for k in range(self.nbits)]
        names = set(d.vars)
        while any(v in names for v in self.state_vars):
            self.state_vars = ['_' + v for v in self.state_vars]
        store = BDD(self.state_vars + list(d.vars), max_nodes=max_nodes)
        self.store = store
        self.state_levels = list(range(self.nbits))
        self.x_levels = [store.level_of(v) for v in d.inputs]
        self.y_levels = [store.level_of(v) for v in d.outputs]
        memo = {}
        # per state, per next-state bit: guard of the letters setting that bit
        per_state = []
        for s in range(self.n):
            bits = [FALSE] * self.nbits
            for gd, t in d.edges[s]:
                gg = d.store.copy_to(store, gd, memo=memo)
                for k in range(self.nbits):
                    if (t >> (self.nbits - 1 - k)) & 1:
                        bits[k] = store.disj(bits[k], gg)
            per_state.append(bits)
        self.next_bits = [self._mux(0, 0, [ps[k] for ps in per_state], FALSE)
                          for k in range(self.nbits)]
        self.valid = self.set_of(range(self.n))
        self.acc = self.set_of(d.accepting)
        self.alpha = bool_to_bdd(store, g.alpha)
        self.sub = {l: self.next_bits[l] for l in self.state_levels}
        self.compose_cache = {}

    def _mux(self, level, base, leaves, pad):
        # leaves indexed by state number; states beyond n map to `pad`
        if level == self.nbits:
            return leaves[base] if base < self.n else pad
        half = 1 << (self.nbits - 1 - level)
        lo = self._mux(level + 1, base, leaves, pad)
        hi = self._mux(level + 1, base + half, leaves, pad) if base + half < self.n else pad
        return self.store.ite(self.store.var(self.state_vars[level]), hi, lo)

    def state_cube(self, s):
        return self.store.cube_levels({k: bool((s >> (self.nbits - 1 - k)) & 1)
                                       for k in range(self.nbits)})

    def set_of(self, states):
        leaves = [FALSE] * self.n
        for s in states:
            leaves[s] = TRUE
        return self._mux(0, 0, leaves, FALSE)

    def members(self, u):
        if u == FALSE:
            return frozenset()
        idx = self.store.indices(u, self.state_levels)
        return frozenset(int(i) for i in idx if i < self.n)

    def pre(self, w):
        """``succ(s, x, y) in w`` as a function of state bits and letters."""
        return self.store.compose(w, self.sub, self.compose_cache)


class _SymbolicOps:
    def __init__(self, g, deadline=None, max_nodes=None):
        self.arena = SymbolicArena(g, max_nodes=max_nodes)
        self.deadline = deadline
        self._pre_memo = {}

    def _pre(self, w):
        r = self._pre_memo.get(w)
        if r is None:
            r = self.arena.pre(w)
            self._pre_memo[w] = r
        return r

    def agent(self, a, b):
        ar = self.arena
        s = ar.store
        lhs = s.disj(s.neg(ar.alpha), self._pre(s.disj(a, ar.acc)))
        body = s.conj(lhs, self._pre(s.disj(b, ar.acc)))
        r = s.forall_levels(ar.x_levels, s.exist_levels(ar.y_levels, body))
        return s.conj(r, ar.valid)

    def env(self, a, b):
        ar = self.arena
        s = ar.store
        nacc = s.neg(ar.acc)
        lhs = s.conj(ar.alpha, self._pre(s.conj(a, nacc)))
        body = s.disj(lhs, self._pre(s.conj(b, nacc)))
        r = s.exist_levels(ar.x_levels, s.forall_levels(ar.y_levels, body))
        return s.conj(r, ar.valid)

    def empty(self):
        return FALSE

    def full(self):
        return self.arena.valid

    @staticmethod
    def same(a, b):
        return a == b

    def members(self, u):
        return self.arena.members(u)

    def check(self):
        check_deadline(self.deadline)


def solve_symbolic(g: GameSpec, protagonist=AGENT, deadline=None, max_nodes=None) -> WinningRegion:
    return _solve(g, protagonist, _SymbolicOps(g, deadline, max_nodes), SYMBOLIC)
