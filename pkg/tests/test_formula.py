import pickle

import pytest
from hypothesis import given, settings

from ltlfsyn import formula as fm
from ltlfsyn import trace_semantics as ts
from ltlfsyn.formula import (And, Atom, Eventually, Next, Not, Release, Until,
                             WeakNext, parse, to_nnf, to_str)

from corpus import FORMULAS
from strategies import formulas

a, b = Atom('a'), Atom('b')


def test_parse_examples():
    assert parse('a U b') is Until(a, b)
    assert parse('G (F a)') is fm.Always(Eventually(a))


def test_parse_error_offset():
    with pytest.raises(fm.ParseError) as info:
        parse('a U')
    assert info.value.offset == 3
    assert 'identifier' in info.value.expected


@pytest.mark.parametrize('text', ['', '(a', 'a b', 'a &', '& a', 'U', 'a ) b', 'X'])
def test_parse_rejects(text):
    with pytest.raises(fm.ParseError):
        parse(text)


def test_offset_counts_bytes():
    with pytest.raises(fm.ParseError) as info:
        parse('a & é')
    assert info.value.offset == 4


def test_precedence():
    assert parse('a -> b -> a') is fm.Implies(a, fm.Implies(b, a))
    assert parse('a | b & a') is fm.Or(a, And(b, a))
    assert parse('a & b U a') is And(a, Until(b, a))
    assert parse('!a U b') is Until(Not(a), b)
    assert parse('X a U b') is Until(Next(a), b)
    assert parse('a U b U a') is Until(a, Until(b, a))
    assert parse('a | b -> a') is fm.Implies(fm.Or(a, b), a)


def test_keywords_and_fused_operators():
    assert parse('true') is fm.TRUE
    assert parse('GF a') is fm.Always(Eventually(a))
    assert parse('Xw a') is WeakNext(a)
    with pytest.raises(fm.FormulaError):
        Atom('true')
    with pytest.raises(fm.FormulaError):
        Atom('GF')


def test_comments_and_aliases():
    assert parse('a && b # trailing\n') is And(a, b)
    assert parse('~a => b') is fm.Implies(Not(a), b)


def test_nnf_examples():
    assert to_nnf(parse('!(a U b)')) is Release(Not(a), Not(b))
    assert to_nnf(parse('!X a')) is WeakNext(Not(a))
    assert to_nnf(parse('F a')) is Until(fm.TRUE, a)
    assert to_nnf(parse('G a')) is Release(fm.FALSE, a)


def test_vars():
    assert fm.variables(parse('a U b')) == {'a', 'b'}
    assert fm.variables(fm.TRUE) == frozenset()
    assert fm.variables(parse('G(a -> X a)')) == {'a'}


def test_eval_constraint():
    assert fm.eval_constraint(Atom('add'), {'add'}) is True
    assert fm.eval_constraint(Atom('add'), set()) is False
    assert fm.eval_constraint(parse('a & !b'), {'a'}) is True
    with pytest.raises(fm.UnboundAtom):
        fm.eval_constraint(parse('a & b'), {'a': True})


def test_constraint_checks():
    with pytest.raises(fm.ConstraintError):
        fm.as_constraint(parse('F a'), ['a'])
    with pytest.raises(fm.ConstraintError):
        fm.as_constraint(parse('a & b'), ['a'])
    with pytest.raises(fm.ConstraintError):
        fm.Assumption('sometimes', a)
    assert fm.Assumption(fm.FAIR, a).formula() is parse('G F a')
    assert fm.Assumption(fm.STABLE, a).formula() is parse('F G a')


def test_partition():
    p = fm.parse_partition('.inputs: a b\n.outputs: c\n')
    assert p.inputs == ('a', 'b') and p.outputs == ('c',)
    assert fm.parse_partition('# none\n.inputs:\n.outputs:\n') == fm.Partition((), ())
    for bad in ['.inputs: a\n', '.inputs: a\n.outputs: a\n', '.inputs: a a\n.outputs:\n',
                'inputs: a\n.outputs:\n', '.inputs: a\n.inputs: b\n.outputs:\n',
                '.inputs: 1a\n.outputs:\n']:
        with pytest.raises(fm.PartitionError):
            fm.parse_partition(bad)
    assert fm.parse_partition(fm.format_partition(p)) == p


def test_hash_consing_and_pickle():
    f = parse('G (a -> F b)')
    assert parse(to_str(f)) is f
    assert pickle.loads(pickle.dumps(f)) is f


def test_nary_constructors():
    assert And() is fm.TRUE and fm.Or() is fm.FALSE
    assert And(a) is a
    assert fm.mk_and(b, a, fm.TRUE, a) is fm.mk_and(a, b)
    assert fm.mk_and(a, Not(a)) is fm.FALSE
    assert fm.mk_or(a, Not(a)) is fm.TRUE


@pytest.mark.parametrize('text', FORMULAS)
def test_corpus_roundtrip(text):
    f = parse(text)
    assert parse(to_str(f)) is f
    assert parse(fm.emit(f)) is f


@settings(max_examples=300, deadline=None)
@given(formulas)
def test_print_parse_roundtrip(f):
    assert parse(to_str(f)) is f
    assert parse(fm.emit(f)) is f


@settings(max_examples=200, deadline=None)
@given(formulas)
def test_nnf_shape_and_idempotence(f):
    g = to_nnf(f)
    assert fm.is_nnf(g)
    assert to_nnf(g) is g


@pytest.mark.parametrize('text', FORMULAS)
def test_nnf_equivalent_exhaustive(text):
    f = parse(text)
    g = to_nnf(f)
    names = ['a', 'b', 'c']
    for length in range(1, 7):
        t = ts.all_traces(3, length)
        assert (ts.eval_batch(f, t, names) == ts.eval_batch(g, t, names)).all()
