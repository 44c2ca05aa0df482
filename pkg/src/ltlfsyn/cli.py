"""Command line interface.

Exit codes: 0 success, 1 strategy rejected by ``verify``, 2 bad input or
I/O error, 3 timeout or resource cap, 4 an extracted strategy failed the
internal soundness check.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import benchgen, formula as fm, game, strategy
from .automaton import Timeout, build_dfa, minimize
from .bdd import CapacityExceeded
from . import reduction_ltl


log = logging.getLogger('ltlfsyn')

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3
EXIT_INTERNAL = 4


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    formula: str | None = None
    partition: str | None = None
    assume_file: str | None = None
    assume: str | None = None
    kind: str | None = None
    backend: str = 'auto'
    strategy: str | None = None
    dot: str | None = None
    report: str | None = None
    max_nodes: int | None = None
    timeout: float | None = None
    literal: bool = False
    verbosity: int = 0
    extra: dict = field(default_factory=dict)

    def deadline(self):
        if self.timeout is None:
            return None
        return time.monotonic() + self.timeout


# ---------------------------------------------------------------------------
# loading

def _read(path):
    try:
        with open(path, encoding='utf-8') as fh:
            return fh.read()
    except OSError as exc:
        raise InputError('cannot read {}: {}'.format(path, exc.strerror or exc)) from exc


def load_problem(cfg: RunConfig):
    """Parse formula, partition and assumption named by `cfg`."""
    if cfg.formula is None or cfg.partition is None:
        raise InputError('need a formula file and a partition file')
    try:
        phi = fm.parse(_read(cfg.formula))
    except fm.ParseError as exc:
        raise InputError('{}: {}'.format(cfg.formula, exc)) from exc
    try:
        part = fm.parse_partition(_read(cfg.partition))
    except fm.FormulaError as exc:
        raise InputError('{}: {}'.format(cfg.partition, exc)) from exc
    assumption = None
    if cfg.assume is not None:
        try:
            alpha = fm.parse(cfg.assume)
        except fm.ParseError as exc:
            raise InputError('--assume: {}'.format(exc)) from exc
        assumption = fm.Assumption(cfg.kind or fm.FAIR, alpha)
    else:
        path = cfg.assume_file
        if path is None:
            stem = os.path.splitext(cfg.formula)[0]
            if os.path.exists(stem + '.assume'):
                path = stem + '.assume'
        if path is None:
            raise InputError('no assumption given (use --assume or an .assume file)')
        try:
            assumption = benchgen.parse_assumption(_read(path))
        except fm.FormulaError as exc:
            raise InputError('{}: {}'.format(path, exc)) from exc
        if cfg.kind is not None:
            assumption = fm.Assumption(cfg.kind, assumption.alpha)
    try:
        fm.as_constraint(assumption.alpha, part.inputs)
    except fm.FormulaError as exc:
        raise InputError('assumption: {}'.format(exc)) from exc
    undeclared = fm.variables(phi) - set(part.variables)
    if undeclared:
        raise InputError('formula uses undeclared variables: {}'.format(
            ', '.join(sorted(undeclared))))
    return phi, part, assumption


def _write(path, text):
    try:
        with open(path, 'w', encoding='utf-8') as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError('cannot write {}: {}'.format(path, exc.strerror or exc)) from exc


# ---------------------------------------------------------------------------
# commands

def run_synth(cfg: RunConfig, out=None):
    out = out or sys.stdout
    phi, part, assumption = load_problem(cfg)
    deadline = cfg.deadline()
    times = {}
    t0 = time.monotonic()
    raw = build_dfa(phi, part, minimal=False, deadline=deadline)
    times['dfa_ms'] = _ms(t0)
    t0 = time.monotonic()
    d = minimize(raw)
    times['minimize_ms'] = _ms(t0)
    g = game.GameSpec(d, part, assumption.alpha, assumption.kind)
    t0 = time.monotonic()
    verdict = game.check_realizable(g, backend=cfg.backend, deadline=deadline,
                                    max_nodes=cfg.max_nodes)
    times['solve_ms'] = _ms(t0)
    w = verdict.agent_region
    print('REALIZABLE' if verdict.realizable else 'UNREALIZABLE', file=out)
    report = {
        'verdict': 'REALIZABLE' if verdict.realizable else 'UNREALIZABLE',
        'kind': assumption.kind,
        'alpha': fm.to_str(assumption.alpha),
        'backend': verdict.backend,
        'states_before_minimization': raw.n_states,
        'states_after_minimization': d.n_states,
        'outer_iterations': w.outer_iterations,
        'inner_iterations': w.inner_iterations,
        'times': times,
    }
    status = EXIT_OK
    if verdict.realizable:
        t0 = time.monotonic()
        if assumption.kind == fm.FAIR:
            t = strategy.extract_fair(g, w, literal=cfg.literal)
        else:
            t = strategy.extract_stable(g, w)
        times['extract_ms'] = _ms(t0)
        t0 = time.monotonic()
        rep = strategy.verify(t, g)
        times['verify_ms'] = _ms(t0)
        report['strategy_states'] = len(t.states)
        report['strategy_verified'] = rep.passed
        if not rep.passed:
            print('internal error: extracted strategy failed verification: {}'
                  .format(rep.reason), file=sys.stderr)
            if rep.counterexample is not None:
                print(rep.counterexample.describe(t.inputs, t.outputs), file=sys.stderr)
            status = EXIT_INTERNAL
        else:
            if cfg.strategy:
                _write(cfg.strategy, t.to_json() + '\n')
            if cfg.dot:
                _write(cfg.dot, t.to_dot())
    if cfg.report:
        _write(cfg.report, json.dumps(report, indent=1) + '\n')
    return status


def run_verify(cfg: RunConfig, out=None):
    out = out or sys.stdout
    if cfg.strategy is None:
        raise InputError('need a strategy file')
    try:
        t = strategy.Transducer.from_json(_read(cfg.strategy))
    except strategy.TransducerFormatError as exc:
        raise InputError('{}: {}'.format(cfg.strategy, exc)) from exc
    phi, part, assumption = load_problem(cfg)
    d = build_dfa(phi, part, deadline=cfg.deadline())
    g = game.GameSpec(d, part, assumption.alpha, assumption.kind)
    rep = strategy.verify(t, g)
    if rep.passed:
        print('PASS', file=out)
        return EXIT_OK
    print('FAIL', file=out)
    print(rep.reason, file=out)
    if rep.counterexample is not None:
        print(rep.counterexample.describe(t.inputs, t.outputs), file=out)
    return EXIT_REJECTED


def run_translate(cfg: RunConfig, out=None):
    out = out or sys.stdout
    try:
        phi = fm.parse(_read(cfg.formula))
    except fm.ParseError as exc:
        raise InputError('{}: {}'.format(cfg.formula, exc)) from exc
    kind = cfg.kind or fm.FAIR
    if cfg.assume is not None:
        text = cfg.assume
    elif cfg.assume_file is not None:
        a = benchgen.parse_assumption(_read(cfg.assume_file))
        text = fm.to_str(a.alpha)
        kind = cfg.kind or a.kind
    else:
        text = None
    try:
        psi = reduction_ltl.ltlf_to_ltl(phi)
        if text is not None:
            psi = reduction_ltl.assemble(kind, fm.parse(text), psi)
    except fm.FormulaError as exc:
        raise InputError(str(exc)) from exc
    print(reduction_ltl.emit(psi), file=out)
    sidecar = cfg.extra.get('sidecar')
    if sidecar:
        if cfg.partition is None:
            raise InputError('--sidecar needs --partition')
        part = fm.parse_partition(_read(cfg.partition))
        _write(sidecar, reduction_ltl.emit_partition(part))
    return EXIT_OK


def run_dfa(cfg: RunConfig, out=None):
    out = out or sys.stdout
    try:
        phi = fm.parse(_read(cfg.formula))
        part = fm.parse_partition(_read(cfg.partition))
        d = build_dfa(phi, part, deadline=cfg.deadline())
    except fm.FormulaError as exc:
        raise InputError(str(exc)) from exc
    if cfg.dot:
        _write(cfg.dot, d.to_dot())
    js = cfg.extra.get('json')
    if js:
        _write(js, d.to_json() + '\n')
    else:
        print(d.to_json(), file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# benchmarks

BENCH_FIELDS = ('id', 'kind', 'verdict', 'states', 'time_ms', 'backend')


def _instances(args):
    if getattr(args, 'dir', None):
        stems = sorted({os.path.join(args.dir, os.path.splitext(f)[0])
                        for f in os.listdir(args.dir) if f.endswith('.ltlf')})
        return [benchgen.read_instance(s) for s in stems]
    if args.family == 'counter':
        variants = ['realizable', 'unrealizable'] if args.variant == 'both' else [args.variant]
        return [benchgen.counter_game(n, v) for n in range(args.n_min, args.n_max + 1)
                for v in variants]
    return benchgen.random_corpus(args.count, seed=args.seed, max_k=args.max_k,
                                  nvars=(args.inputs, args.outputs))


def bench_one(inst, kind, backend, timeout, max_nodes=None):
    """One CSV row for `inst` under assumption `kind`."""
    t0 = time.monotonic()
    deadline = None if timeout is None else t0 + timeout
    states = ''
    used = backend
    try:
        d = build_dfa(inst.formula, inst.partition, deadline=deadline)
        states = d.n_states
        g = game.GameSpec(d, inst.partition, inst.assumption.alpha, kind)
        v = game.check_realizable(g, backend=backend, deadline=deadline,
                                  max_nodes=max_nodes)
        used = v.backend
        verdict = 'REALIZABLE' if v.realizable else 'UNREALIZABLE'
    except Timeout:
        verdict = 'TIMEOUT'
    except CapacityExceeded:
        verdict = 'CAPACITY'
    return {'id': inst.name, 'kind': kind, 'verdict': verdict, 'states': states,
            'time_ms': _ms(t0), 'backend': used}


def run_bench(args, out=None):
    out = out or sys.stdout
    insts = _instances(args)
    kinds = list(fm.KINDS) if args.kind == 'both' else [args.kind]
    jobs = [(inst, k) for inst in insts for k in kinds]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futs = [pool.submit(bench_one, i, k, args.backend, args.timeout, args.max_nodes)
                    for i, k in jobs]
            rows = [f.result() for f in futs]
    else:
        rows = [bench_one(i, k, args.backend, args.timeout, args.max_nodes) for i, k in jobs]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator='\n')
    w.writeheader()
    w.writerows(rows)
    if args.csv:
        _write(args.csv, buf.getvalue())
    else:
        out.write(buf.getvalue())
    return EXIT_OK


def run_bench_gen(args, out=None):
    out = out or sys.stdout
    insts = _instances(args)
    try:
        os.makedirs(args.out, exist_ok=True)
    except OSError as exc:
        raise InputError(str(exc)) from exc
    for inst in insts:
        if args.kind in fm.KINDS:
            inst = inst.with_kind(args.kind)
        stem = benchgen.write_instance(inst, args.out)
        print(stem, file=out)
    return EXIT_OK


def _ms(t0):
    return int(round((time.monotonic() - t0) * 1000))


# ---------------------------------------------------------------------------
# argument parsing

def _common(p, partition=True):
    p.add_argument('formula', help='.ltlf file')
    if partition:
        p.add_argument('partition', help='.part file')
    p.add_argument('--assume', help='Boolean constraint over inputs, e.g. "add"')
    p.add_argument('--assume-file', help='.assume file (default: next to the formula)')
    p.add_argument('--kind', choices=fm.KINDS)
    p.add_argument('--timeout', type=float, help='seconds')


def build_parser():
    ap = argparse.ArgumentParser(prog='ltlfsyn', description=(
        'Synthesis for LTLf goals under fairness (GF a) or stability (FG a) assumptions.'))
    ap.add_argument('-v', '--verbose', action='count', default=0)
    sub = ap.add_subparsers(dest='command', required=True)

    p = sub.add_parser('synth', help='decide realizability and extract a strategy')
    _common(p)
    p.add_argument('--backend', choices=('auto', 'explicit', 'symbolic'), default='auto')
    p.add_argument('--strategy', help='write the transducer as JSON')
    p.add_argument('--dot', help='write the transducer as DOT')
    p.add_argument('--report', help='write a JSON run report')
    p.add_argument('--max-nodes', type=int, help='decision diagram node bound')
    p.add_argument('--literal', action='store_true',
                   help='fair extraction without the rank bound on non-alpha inputs')

    p = sub.add_parser('verify', help='check a stored strategy')
    p.add_argument('strategy', help='transducer JSON')
    _common(p)

    p = sub.add_parser('translate', help='emit the equivalent LTL synthesis formula')
    p.add_argument('formula', help='.ltlf file')
    p.add_argument('--assume')
    p.add_argument('--assume-file')
    p.add_argument('--kind', choices=fm.KINDS + (reduction_ltl.GENERAL,))
    p.add_argument('--partition', help='.part file for --sidecar')
    p.add_argument('--sidecar', help='write the widened partition here')

    p = sub.add_parser('dfa', help='compile a formula and dump the minimal DFA')
    p.add_argument('formula')
    p.add_argument('partition')
    p.add_argument('--dot')
    p.add_argument('--json')
    p.add_argument('--timeout', type=float)

    bench = sub.add_parser('bench', help='benchmark families')
    bsub = bench.add_subparsers(dest='bench_command', required=True)
    for name in ('gen', 'run'):
        b = bsub.add_parser(name)
        b.add_argument('--family', choices=('counter', 'random'), default='counter')
        b.add_argument('--n-min', type=int, default=1)
        b.add_argument('--n-max', type=int, default=4)
        b.add_argument('--variant', choices=('realizable', 'unrealizable', 'both'),
                       default='both')
        b.add_argument('--count', type=int, default=20)
        b.add_argument('--seed', type=int, default=0)
        b.add_argument('--max-k', type=int, default=3)
        b.add_argument('--inputs', type=int, default=1)
        b.add_argument('--outputs', type=int, default=1)
        if name == 'gen':
            b.add_argument('--out', required=True, help='output directory')
            b.add_argument('--kind', choices=fm.KINDS)
        else:
            b.add_argument('--dir', help='read instances from a directory instead')
            b.add_argument('--kind', choices=fm.KINDS + ('both',), default='fair')
            b.add_argument('--backend', choices=('auto', 'explicit', 'symbolic'),
                           default='auto')
            b.add_argument('--timeout', type=float)
            b.add_argument('--max-nodes', type=int)
            b.add_argument('--jobs', type=int, default=1)
            b.add_argument('--csv', help='write rows here instead of stdout')
    return ap


def _config(args):
    return RunConfig(
        command=args.command,
        formula=getattr(args, 'formula', None),
        partition=getattr(args, 'partition', None),
        assume_file=getattr(args, 'assume_file', None),
        assume=getattr(args, 'assume', None),
        kind=getattr(args, 'kind', None),
        backend=getattr(args, 'backend', 'auto'),
        strategy=getattr(args, 'strategy', None),
        dot=getattr(args, 'dot', None),
        report=getattr(args, 'report', None),
        max_nodes=getattr(args, 'max_nodes', None),
        timeout=getattr(args, 'timeout', None),
        literal=getattr(args, 'literal', False),
        verbosity=args.verbose,
        extra={'json': getattr(args, 'json', None),
               'sidecar': getattr(args, 'sidecar', None)},
    )


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        if args.command == 'bench':
            if args.bench_command == 'gen':
                return run_bench_gen(args)
            return run_bench(args)
        cfg = _config(args)
        handler = {'synth': run_synth, 'verify': run_verify,
                   'translate': run_translate, 'dfa': run_dfa}[args.command]
        return handler(cfg)
    except InputError as exc:
        print('error: {}'.format(exc), file=sys.stderr)
        return EXIT_INPUT
    except (Timeout, CapacityExceeded) as exc:
        print('resource limit: {}'.format(exc or type(exc).__name__), file=sys.stderr)
        return EXIT_RESOURCE
    except fm.FormulaError as exc:
        print('error: {}'.format(exc), file=sys.stderr)
        return EXIT_INPUT


if __name__ == '__main__':
    sys.exit(main())
