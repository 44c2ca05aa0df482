import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings

from ltlfsyn import automaton as au
from ltlfsyn import formula as fm
from ltlfsyn import trace_semantics as ts
from ltlfsyn.automaton import build_dfa, minimize, progress
from ltlfsyn.formula import parse, to_nnf

from corpus import FORMULAS, random_formula, seeded
from strategies import formulas, letters

ABC = fm.Partition(('a',), ('b', 'c'))


def exhaustive_ok(f, d, names, max_len=6):
    for length in range(1, max_len + 1):
        t = ts.all_traces(len(names), length)
        if not (d.accepts_batch(t) == ts.eval_batch(f, t, names)).all():
            return False
    return True


def continuations(names, max_len):
    alphabet = [frozenset(s) for r in range(len(names) + 1)
                for s in itertools.combinations(names, r)]
    for n in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=n)


def test_progress_examples():
    assert progress(parse('a'), {'a'}) is fm.TRUE
    assert progress(parse('!a'), {'a'}) is fm.FALSE
    # strength stays on top: a letter must follow before b can be checked
    assert progress(parse('X b'), {'a'}) is parse('X b')
    assert progress(parse('Xw b'), {'a'}) is parse('Xw b')
    assert progress(to_nnf(parse('a U b')), {'a'}) is parse('X (a U b)')
    assert progress(to_nnf(parse('a U b')), {'b'}) is fm.TRUE
    assert progress(to_nnf(parse('a U b')), set()) is fm.FALSE
    with pytest.raises(fm.NotInNNF):
        progress(parse('F a'), set())


@pytest.mark.parametrize('text', ['X b', 'a U b', 'X !a', 'a R b', 'Xw (a & b)', 'G (a -> X b)'])
def test_progress_against_continuations(text):
    f = to_nnf(parse(text))
    for w in [frozenset(), frozenset('a'), frozenset('b'), frozenset('ab')]:
        ob = progress(f, w)
        for c in continuations(['a', 'b'], 4):
            rho = [w] + list(c)
            assert ts.eval(f, rho, 0) == ts.eval(ob, rho, 0)


@settings(max_examples=200, deadline=None)
@given(formulas, letters)
def test_progress_property(f, w):
    g = to_nnf(f)
    ob = progress(g, w)
    assert ob.op in (fm.TRUE_OP, fm.FALSE_OP, fm.NEXT, fm.WNEXT)
    for c in continuations(['a', 'b', 'c'], 2):
        rho = [w] + list(c)
        assert ts.eval(f, rho, 0) == ts.eval(ob, rho, 0)


def test_dfa_examples():
    d = build_dfa(parse('a'), fm.Partition(('a',), ()))
    assert d.n_states == 3
    assert d.initial not in d.accepting
    assert len(d.accepting) == 1
    assert d.accepts([{'a'}]) and not d.accepts([set()])

    d = build_dfa(parse('F x'), fm.Partition(('x',), ()))
    assert d.n_states == 2
    pending = d.initial
    assert d.step(pending, set()) == pending
    assert d.step(pending, {'x'}) in d.accepting
    assert d.accepts([set(), set(), {'x'}])

    d = build_dfa(fm.TRUE, fm.Partition(('x',), ()))
    assert d.n_states == 2
    assert d.initial not in d.accepting
    assert not d.accepts([])
    assert d.accepts([set()]) and d.accepts([{'x'}, set()])


def test_undeclared():
    with pytest.raises(au.UndeclaredVariable):
        build_dfa(parse('a & z'), fm.Partition(('a',), ()))
    d = build_dfa(parse('a'), fm.Partition(('a',), ()))
    with pytest.raises(au.UndeclaredVariable):
        d.accepts([{'z'}])


@pytest.mark.parametrize('text', FORMULAS)
def test_corpus_exhaustive(text):
    f = parse(text)
    names = list(ABC.variables)
    d = build_dfa(f, ABC)
    assert exhaustive_ok(f, d, names)
    raw = build_dfa(f, ABC, minimal=False)
    assert exhaustive_ok(f, raw, names, max_len=4)
    assert minimize(d).n_states == d.n_states
    assert d.initial not in d.accepting


def test_padded_f_x_minimizes():
    p = fm.Partition(('x',), ())
    d = build_dfa(parse('F x'), p)
    assert d.table().reshape(2, -1).tolist() == [[0, 1], [1, 1]]
    # pending state 0 and its copy 2 swap on !x, both accept on x
    padded = au.from_table(('x',), (), [[2, 1], [1, 1], [0, 1]], 0, {1})
    m = minimize(padded)
    assert m.n_states == 2
    names = ['x']
    f = parse('F x')
    assert exhaustive_ok(f, m, names) and exhaustive_ok(f, padded, names)


def test_random_traces_preserved_by_minimization():
    rng = np.random.default_rng(5)
    names = list(ABC.variables)
    for text in FORMULAS:
        f = parse(text)
        raw = build_dfa(f, ABC, minimal=False)
        m = minimize(raw)
        for length in (3, 7, 12):
            t = rng.integers(0, 8, size=(334, length))
            assert (raw.accepts_batch(t) == m.accepts_batch(t)).all()
            assert (m.accepts_batch(t) == ts.eval_batch(f, t, names)).all()


def test_build_order_does_not_matter():
    # the same language written two ways yields the same numbered automaton
    pairs = [('F a & F b', 'F b & F a'), ('a U b', '!(!a R !b)'),
             ('G (a -> X b)', '!F (a & !X b)'), ('F F a', 'F a')]
    for s1, s2 in pairs:
        d1, d2 = build_dfa(parse(s1), ABC), build_dfa(parse(s2), ABC)
        assert d1.n_states == d2.n_states
        assert d1.accepting == d2.accepting
        assert (d1.table() == d2.table()).all()


def test_every_state_reachable():
    rng = seeded(7)
    for _ in range(40):
        f = random_formula(rng)
        d = build_dfa(f, ABC)
        seen = {d.initial}
        stack = [d.initial]
        while stack:
            s = stack.pop()
            for t in d.successors(s):
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        assert seen == set(d.states)


def test_random_formulas_exhaustive():
    rng = seeded(13)
    names = list(ABC.variables)
    for _ in range(60):
        f = random_formula(rng)
        assert exhaustive_ok(f, build_dfa(f, ABC), names, max_len=5)


def test_accepting_iff_empty_suffix_holds():
    rng = seeded(17)
    for _ in range(30):
        f = random_formula(rng)
        raw = build_dfa(f, ABC, minimal=False)
        for s, ob in enumerate(raw.labels):
            assert (s in raw.accepting) == ts.eval_empty(ob)


def test_exports():
    d = build_dfa(parse('F x'), fm.Partition(('x',), ()))
    data = json.loads(d.to_json())
    assert data['vars'] == ['x'] and data['states'] == 2
    assert data['transitions'] == [[0, 1], [1, 1]]
    dot = d.to_dot()
    assert 'doublecircle' in dot and 'x' in dot


def test_timeout():
    from benchgen_helpers import big_counter
    with pytest.raises(au.Timeout):
        build_dfa(*big_counter(), deadline=0.0)
