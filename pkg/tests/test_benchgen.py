import filecmp

import pytest

from ltlfsyn import benchgen as bg
from ltlfsyn import formula as fm
from ltlfsyn import game as gm


def verdict(inst, kind=None, backend='auto'):
    if kind:
        inst = inst.with_kind(kind)
    g = gm.make_game(inst.formula, inst.partition, inst.assumption)
    return gm.check_realizable(g, backend=backend).realizable


@pytest.mark.parametrize('kind', fm.KINDS)
def test_counter_one_bit(kind):
    assert verdict(bg.counter_game(1), kind)
    assert not verdict(bg.counter_game(1, 'unrealizable'), kind)


@pytest.mark.parametrize('n', [2, 3, 4])
@pytest.mark.parametrize('kind', fm.KINDS)
def test_counter_verdicts(n, kind):
    assert verdict(bg.counter_game(n), kind)
    assert not verdict(bg.counter_game(n, 'unrealizable'), kind)


def test_counter_two_bits_structure():
    inst = bg.counter_game(2)
    assert inst.partition.inputs == ('add',)
    assert set(inst.partition.outputs) == {'b0', 'b1', 'c0', 'c1', 'c2'}
    assert inst.assumption.alpha is fm.Atom('add')
    always = [g for g in fm.subformulas(inst.formula) if g.op == fm.ALWAYS]
    # the grant rule plus one carry rule per bit
    assert len(always) == 3
    rules = {fm.to_str(g) for g in always}
    assert any('b0' in r and 'c1' in r and 'b1' not in r for r in rules)
    assert any('b1' in r and 'c2' in r for r in rules)
    assert inst.meta == {'family': 'counter', 'n': 2, 'variant': 'realizable',
                         'expected': True, 'id': 'counter_realizable_2'}


def test_counter_initial_state_clears_everything():
    inst = bg.counter_game(3)
    assert not fm.variables(inst.formula) - set(inst.partition.variables)
    init = inst.formula.args[0].args[0]
    negated = {a.args[0].name for a in init.args}
    assert negated == set(inst.partition.outputs)


def test_counter_bad_args():
    with pytest.raises(bg.BadArity):
        bg.counter_game(0)
    with pytest.raises(ValueError):
        bg.counter_game(2, 'sideways')


def test_random_deterministic():
    a = bg.random_instance(12345, 3, (2, 2))
    b = bg.random_instance(12345, 3, (2, 2))
    assert a.formula is b.formula and a.assumption == b.assumption
    assert a.partition == b.partition


@pytest.mark.parametrize('k', [1, 2, 3, 4, 5])
def test_random_conjunct_count(k):
    inst = bg.random_instance(99 + k, k, (1, 2))
    top = inst.formula
    if k == 1:
        assert top.op != fm.AND
    else:
        assert top.op == fm.AND and len(top.args) == k
    assert len(inst.meta['patterns']) == k
    assert set(inst.meta['patterns']) <= set(bg.POOL)
    assert inst.assumption.alpha.op == fm.ATOM
    assert inst.assumption.alpha.name in inst.partition.inputs


def test_random_bad_args():
    with pytest.raises(bg.BadArity):
        bg.random_instance(1, 0)
    with pytest.raises(bg.BadArity):
        bg.random_instance(1, 6)
    with pytest.raises(bg.BadArity):
        bg.random_instance(1, 2, (0, 1))


def test_random_corpus_ids_and_determinism():
    a = bg.random_corpus(20, seed=3)
    b = bg.random_corpus(20, seed=3)
    assert [i.name for i in a] == ['random_{:04d}'.format(i) for i in range(20)]
    assert [i.formula for i in a] == [i.formula for i in b]


def test_random_corpus_containment():
    for inst in bg.random_corpus(60, seed=11, max_k=3):
        if verdict(inst, fm.FAIR):
            assert verdict(inst, fm.STABLE), inst.name


def test_files_round_trip_and_are_reproducible(tmp_path):
    inst = bg.counter_game(2, kind='stable')
    (tmp_path / 'a').mkdir()
    (tmp_path / 'b').mkdir()
    stem = bg.write_instance(inst, str(tmp_path / 'a'))
    bg.write_instance(bg.counter_game(2, kind='stable'), str(tmp_path / 'b'))
    for ext in ('.ltlf', '.part', '.assume'):
        name = 'counter_realizable_2' + ext
        assert filecmp.cmp(tmp_path / 'a' / name, tmp_path / 'b' / name, shallow=False)
    assert (tmp_path / 'a' / 'counter_realizable_2.assume').read_text() == 'stable add\n'
    back = bg.read_instance(stem)
    assert back.formula is inst.formula
    assert back.partition == inst.partition
    assert back.assumption == inst.assumption


def test_parse_assumption():
    assert bg.parse_assumption('fair add\n') == fm.Assumption('fair', fm.Atom('add'))
    assert bg.parse_assumption('# c\nstable x & !z') == \
        fm.Assumption('stable', fm.parse('x & !z'))
    for bad in ('', 'fair', 'weekly add'):
        with pytest.raises(fm.FormulaError):
            bg.parse_assumption(bad)
