import csv
import io
import json
import subprocess
import sys

import pytest

from ltlfsyn import benchgen as bg
from ltlfsyn.cli import main


def instance(tmp_path, n=1, variant='realizable', kind='fair'):
    return bg.write_instance(bg.counter_game(n, variant, kind), str(tmp_path))


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize('kind', ['fair', 'stable'])
def test_synth_counter(tmp_path, capsys, kind):
    stem = instance(tmp_path, kind=kind)
    code, out, _ = run(capsys, 'synth', stem + '.ltlf', stem + '.part')
    assert code == 0 and out.splitlines()[0] == 'REALIZABLE'
    stem = instance(tmp_path, variant='unrealizable', kind=kind)
    code, out, _ = run(capsys, 'synth', stem + '.ltlf', stem + '.part')
    assert code == 0 and out.splitlines()[0] == 'UNREALIZABLE'


def test_synth_outputs_and_verify(tmp_path, capsys):
    stem = instance(tmp_path, n=2)
    strat, dot, report = tmp_path / 's.json', tmp_path / 's.dot', tmp_path / 'r.json'
    code, out, _ = run(capsys, 'synth', stem + '.ltlf', stem + '.part', '--strategy', strat,
                       '--dot', dot, '--report', report, '--backend', 'symbolic')
    assert code == 0
    rep = json.loads(report.read_text())
    assert rep['verdict'] == 'REALIZABLE' and rep['backend'] == 'symbolic'
    assert rep['states_before_minimization'] >= rep['states_after_minimization']
    assert rep['outer_iterations'] > 0 and rep['strategy_verified']
    assert {'dfa_ms', 'minimize_ms', 'solve_ms', 'extract_ms', 'verify_ms'} <= set(rep['times'])
    assert dot.read_text().startswith('digraph')
    code, out, _ = run(capsys, 'verify', strat, stem + '.ltlf', stem + '.part')
    assert code == 0 and out.strip() == 'PASS'

    data = json.loads(strat.read_text())
    # redirect one edge so the transducer's bookkeeping lies
    edge = next(e for e in data['edges'] if e['from'] == data['initial'])
    edge['to'] = next(s for s in data['states'] if s != edge['to'])
    bad = tmp_path / 'bad.json'
    bad.write_text(json.dumps(data))
    code, out, _ = run(capsys, 'verify', bad, stem + '.ltlf', stem + '.part')
    assert code == 1
    assert out.startswith('FAIL') and 'prefix:' in out


def test_verify_missing_file(tmp_path, capsys):
    stem = instance(tmp_path)
    code, _, err = run(capsys, 'verify', tmp_path / 'nope.json', stem + '.ltlf', stem + '.part')
    assert code == 2 and err


def test_verdict_same_across_backends(tmp_path, capsys):
    stem = instance(tmp_path, n=2, variant='unrealizable')
    lines = set()
    for backend in ('explicit', 'symbolic', 'auto'):
        code, out, _ = run(capsys, 'synth', stem + '.ltlf', stem + '.part', '--backend', backend)
        lines.add(out.splitlines()[0])
    assert lines == {'UNREALIZABLE'}


def test_assume_flags(tmp_path, capsys):
    f = tmp_path / 'g.ltlf'
    f.write_text('F (x & X x)\n')
    p = tmp_path / 'g.part'
    p.write_text('.inputs: x\n.outputs:\n')
    code, out, _ = run(capsys, 'synth', f, p, '--assume', 'x', '--kind', 'fair')
    assert (code, out.strip()) == (0, 'UNREALIZABLE')
    code, out, _ = run(capsys, 'synth', f, p, '--assume', 'x', '--kind', 'stable')
    assert (code, out.strip()) == (0, 'REALIZABLE')
    a = tmp_path / 'other.assume'
    a.write_text('stable x\n')
    code, out, _ = run(capsys, 'synth', f, p, '--assume-file', a)
    assert out.strip() == 'REALIZABLE'


@pytest.mark.parametrize('part,formula', [
    ('.inputs: add\n.outputs: add\n', 'F add'),
    ('.inputs: x\n', 'F x'),
    ('.inputs: x\n.outputs: y\n', 'F (x &'),
    ('.inputs: x\n.outputs: y\n', 'F z'),
])
def test_input_errors(tmp_path, capsys, part, formula):
    (tmp_path / 'g.ltlf').write_text(formula)
    (tmp_path / 'g.part').write_text(part)
    code, out, err = run(capsys, 'synth', tmp_path / 'g.ltlf', tmp_path / 'g.part',
                         '--assume', 'x')
    assert code == 2
    assert err.startswith('error') and not out


def test_bad_assumption_over_outputs(tmp_path, capsys):
    (tmp_path / 'g.ltlf').write_text('F y')
    (tmp_path / 'g.part').write_text('.inputs: x\n.outputs: y\n')
    code, _, _ = run(capsys, 'synth', tmp_path / 'g.ltlf', tmp_path / 'g.part', '--assume', 'y')
    assert code == 2


def test_usage_error(capsys):
    assert run(capsys, 'synth')[0] == 2
    assert run(capsys, 'frobnicate')[0] == 2


def test_resource_limits(tmp_path, capsys):
    stem = instance(tmp_path, n=3)
    code, _, err = run(capsys, 'synth', stem + '.ltlf', stem + '.part',
                       '--backend', 'symbolic', '--max-nodes', '40')
    assert code == 3 and 'resource' in err
    stem = instance(tmp_path, n=6)
    code, _, _ = run(capsys, 'synth', stem + '.ltlf', stem + '.part', '--timeout', '0.001')
    assert code == 3


def test_internal_failure_exit(tmp_path, capsys):
    # without the rank bound on non-alpha inputs this instance yields a losing loop
    stem = instance(tmp_path, n=1)
    code, out, err = run(capsys, 'synth', stem + '.ltlf', stem + '.part', '--literal')
    assert code == 4
    assert out.splitlines()[0] == 'REALIZABLE'
    assert 'verification' in err


def test_translate(tmp_path, capsys):
    f = tmp_path / 'a.ltlf'
    f.write_text('a\n')
    code, out, _ = run(capsys, 'translate', f, '--assume', 'add')
    assert out.strip() == '((G (F add)) -> ((a) & (alive) & ((alive) U (G (! alive)))))'
    code, out, _ = run(capsys, 'translate', f, '--assume', 'add', '--kind', 'stable')
    assert out.startswith('((F (G add)) ->')
    code, out, _ = run(capsys, 'translate', f)
    assert 'G add' not in out and 'alive' in out
    part = tmp_path / 'a.part'
    part.write_text('.inputs: add\n.outputs: a\n')
    side = tmp_path / 'side.part'
    code, _, _ = run(capsys, 'translate', f, '--partition', part, '--sidecar', side)
    assert code == 0 and 'alive' in side.read_text()
    f.write_text('F alive')
    assert run(capsys, 'translate', f)[0] == 2


def test_dfa_command(tmp_path, capsys):
    (tmp_path / 'g.ltlf').write_text('F (x & y)')
    (tmp_path / 'g.part').write_text('.inputs: x\n.outputs: y\n')
    code, out, _ = run(capsys, 'dfa', tmp_path / 'g.ltlf', tmp_path / 'g.part',
                       '--dot', tmp_path / 'g.dot')
    assert code == 0
    data = json.loads(out)
    assert data['initial'] == 0 and len(data['accepting']) == 1
    assert (tmp_path / 'g.dot').read_text().startswith('digraph')


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_bench_counter(capsys):
    code, out, _ = run(capsys, 'bench', 'run', '--family', 'counter', '--n-min', 1,
                       '--n-max', 4, '--variant', 'both', '--kind', 'fair')
    rows = _rows(out)
    assert code == 0 and len(rows) == 8
    assert list(rows[0]) == ['id', 'kind', 'verdict', 'states', 'time_ms', 'backend']
    assert [r['verdict'] for r in rows] == ['REALIZABLE', 'UNREALIZABLE'] * 4


def test_bench_random_deterministic(capsys):
    args = ('bench', 'run', '--family', 'random', '--count', 12, '--seed', 5, '--kind', 'both')
    first = _rows(run(capsys, *args)[1])
    second = _rows(run(capsys, *args)[1])
    strip = lambda rows: [(r['id'], r['kind'], r['verdict'], r['states']) for r in rows]
    assert strip(first) == strip(second) and len(first) == 24


def test_bench_timeout_row(capsys):
    code, out, _ = run(capsys, 'bench', 'run', '--family', 'counter', '--n-min', 10,
                       '--n-max', 10, '--variant', 'realizable', '--backend', 'explicit',
                       '--timeout', 1)
    assert code == 0
    assert _rows(out)[0]['verdict'] == 'TIMEOUT'


def test_bench_gen_then_run(tmp_path, capsys):
    out_dir = tmp_path / 'inst'
    code, out, _ = run(capsys, 'bench', 'gen', '--family', 'counter', '--n-min', 1,
                       '--n-max', 2, '--variant', 'both', '--kind', 'stable', '--out', out_dir)
    assert code == 0 and len(out.split()) == 4
    assert (out_dir / 'counter_realizable_1.assume').read_text() == 'stable add\n'
    code, out, _ = run(capsys, 'bench', 'run', '--dir', out_dir, '--kind', 'stable',
                       '--csv', tmp_path / 'r.csv')
    rows = _rows((tmp_path / 'r.csv').read_text())
    assert {r['id']: r['verdict'] for r in rows} == {
        'counter_realizable_1': 'REALIZABLE', 'counter_realizable_2': 'REALIZABLE',
        'counter_unrealizable_1': 'UNREALIZABLE', 'counter_unrealizable_2': 'UNREALIZABLE'}


def test_module_entry_point(tmp_path):
    stem = instance(tmp_path)
    proc = subprocess.run([sys.executable, '-m', 'ltlfsyn', 'synth', stem + '.ltlf',
                           stem + '.part'], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith('REALIZABLE')
