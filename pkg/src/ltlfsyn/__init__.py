"""LTLf synthesis under fairness and stability assumptions."""
from .formula import Assumption, Formula, Partition, parse, to_nnf, to_str
from .automaton import Dfa, build_dfa, minimize
from .game import GameSpec, WinningRegion, check_realizable
from .strategy import Transducer, extract, verify

__version__ = '0.1.0'

__all__ = ['Assumption', 'Formula', 'Partition', 'parse', 'to_nnf', 'to_str',
           'Dfa', 'build_dfa', 'minimize', 'GameSpec', 'WinningRegion',
           'check_realizable', 'Transducer', 'extract', 'verify']
