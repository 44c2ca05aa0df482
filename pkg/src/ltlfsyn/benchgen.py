"""Benchmark families: the binary counter game and random conjunctions.

Random instances draw conjuncts from a fixed pool of small patterns:

    response      G(a -> F b)
    reachability  F a
    ordering      !b U a
    next-step     G(a -> X b)
    weak-step     a -> Xw b

Pattern variables are sampled from inputs and outputs alike; the assumption
constrains one input variable chosen uniformly.
"""
from __future__ import annotations

import os
import random
from dataclasses import dataclass, field

from . import formula as fm
from .formula import (Always, And, Atom, Eventually, Implies, Next, Not,
                      Until, WeakNext)


class BadArity(ValueError):
    pass


@dataclass(frozen=True)
class Instance:
    formula: fm.Formula
    partition: fm.Partition
    assumption: fm.Assumption
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def name(self):
        return self.meta.get('id', 'instance')

    def with_kind(self, kind):
        return Instance(self.formula, self.partition,
                        fm.Assumption(kind, self.assumption.alpha), dict(self.meta))


def _carry_rules(n, i, b, c, double):
    ci, bi, cn = c[i], b[i], c[i + 1]
    nci, nbi, ncn = Not(ci), Not(bi), Not(cn)
    rules = [
        Implies(And(nci, nbi), WeakNext(And(nbi, ncn))),
        Implies(And(nci, bi), WeakNext(And(bi, ncn))),
    ]
    if double:
        # a granted request adds two: bit 0 keeps its value, carry goes up
        rules += [
            Implies(And(ci, nbi), WeakNext(And(nbi, cn))),
            Implies(And(ci, bi), WeakNext(And(bi, cn))),
        ]
    else:
        rules += [
            Implies(And(ci, nbi), WeakNext(And(bi, ncn))),
            Implies(And(ci, bi), WeakNext(And(nbi, cn))),
        ]
    return And(*rules)


def counter_game(n: int, variant: str = 'realizable', kind: str = fm.FAIR) -> Instance:
    """n-bit counter that the environment asks to increment (input ``add``).

    The agent grants a request by raising carry ``c0`` on the next step and
    wins once every bit is set.  The unrealizable variant makes a grant add
    two, so the all-ones value (odd) is never reached.
    """
    if n < 1:
        raise BadArity('counter needs at least one bit')
    if variant not in ('realizable', 'unrealizable'):
        raise ValueError('unknown variant {!r}'.format(variant))
    b = [Atom('b{}'.format(i)) for i in range(n)]
    c = [Atom('c{}'.format(i)) for i in range(n + 1)]
    add = Atom('add')
    init = And(*[Not(x) for x in c], *[Not(x) for x in b])
    goal = Eventually(And(*b))
    grant = Always(Implies(Not(add), WeakNext(Not(c[0]))))
    bits = [Always(_carry_rules(n, i, b, c, double=(i == 0 and variant == 'unrealizable')))
            for i in range(n)]
    phi = And(And(init, grant, *bits), goal)
    outputs = []
    for i in range(n):
        outputs += ['c{}'.format(i), 'b{}'.format(i)]
    outputs.append('c{}'.format(n))
    part = fm.Partition(('add',), tuple(outputs))
    meta = {'family': 'counter', 'n': n, 'variant': variant,
            'expected': variant == 'realizable',
            'id': 'counter_{}_{}'.format(variant, n)}
    return Instance(phi, part, fm.Assumption(kind, add), meta)


POOL = ('response', 'reachability', 'ordering', 'next-step', 'weak-step')


def _pattern(name, a, b):
    if name == 'response':
        return Always(Implies(a, Eventually(b)))
    if name == 'reachability':
        return Eventually(a)
    if name == 'ordering':
        return Until(Not(b), a)
    if name == 'next-step':
        return Always(Implies(a, Next(b)))
    return Implies(a, WeakNext(b))


def random_instance(seed: int, k: int, nvars=(1, 1), kind: str = fm.FAIR) -> Instance:
    """Conjunction of `k` pool patterns; deterministic in `seed`."""
    nx, ny = nvars
    if not 1 <= k <= 5:
        raise BadArity('conjunct count must be within 1..5, got {}'.format(k))
    if nx < 1 or ny < 0:
        raise BadArity('need at least one input variable')
    rng = random.Random(seed)
    inputs = tuple('x{}'.format(i) for i in range(nx))
    outputs = tuple('y{}'.format(i) for i in range(ny))
    pool = inputs + outputs
    conjuncts = []
    names = []
    for _ in range(k):
        name = rng.choice(POOL)
        a = Atom(rng.choice(pool))
        b = Atom(rng.choice(pool))
        conjuncts.append(_pattern(name, a, b))
        names.append(name)
    # k == 1 keeps the bare pattern, otherwise an explicit k-ary conjunction
    phi = conjuncts[0] if k == 1 else And(*conjuncts)
    alpha = Atom(rng.choice(inputs))
    meta = {'family': 'random', 'seed': seed, 'k': k, 'patterns': names,
            'id': 'random_{}'.format(seed)}
    return Instance(phi, fm.Partition(inputs, outputs), fm.Assumption(kind, alpha), meta)


def random_corpus(count, seed=0, max_k=3, nvars=(1, 1)):
    rng = random.Random(seed)
    out = []
    for i in range(count):
        k = rng.randint(1, max_k)
        inst = random_instance(rng.getrandbits(64), k, nvars)
        inst.meta['id'] = 'random_{:04d}'.format(i)
        out.append(inst)
    return out


def write_instance(inst: Instance, directory, stem=None):
    """Write ``.ltlf``, ``.part`` and ``.assume`` files; returns the stem path."""
    stem = os.path.join(directory, stem or inst.name)
    with open(stem + '.ltlf', 'w', encoding='utf-8') as fh:
        fh.write(fm.to_str(inst.formula) + '\n')
    with open(stem + '.part', 'w', encoding='utf-8') as fh:
        fh.write(fm.format_partition(inst.partition))
    with open(stem + '.assume', 'w', encoding='utf-8') as fh:
        fh.write(format_assumption(inst.assumption))
    return stem


def format_assumption(a: fm.Assumption) -> str:
    return '{} {}\n'.format(a.kind, fm.to_str(a.alpha))


def parse_assumption(text: str) -> fm.Assumption:
    text = '\n'.join(line.split('#', 1)[0] for line in text.splitlines()).strip()
    kind, _, rest = text.partition(' ')
    if kind not in fm.KINDS or not rest.strip():
        raise fm.FormulaError('assumption must read "fair <expr>" or "stable <expr>"')
    return fm.Assumption(kind, fm.parse(rest))


def read_instance(stem) -> Instance:
    phi = fm.read_formula(stem + '.ltlf')
    part = fm.read_partition(stem + '.part')
    with open(stem + '.assume', encoding='utf-8') as fh:
        assume = parse_assumption(fh.read())
    return Instance(phi, part, assume, {'id': os.path.basename(stem)})
