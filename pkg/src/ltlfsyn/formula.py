"""LTLf abstract syntax, parsing, printing and negation normal form.

Formulas are immutable and hash-consed: structurally equal formulas are the
same object, so ``==`` and hashing are identity based and cheap.

Concrete grammar, loosest to tightest binding::

    f ::= f -> f          (right associative)
        | f | f | ...     (n-ary)
        | f & f & ...     (n-ary)
        | f U f | f R f   (right associative)
        | ! f | X f | Xw f | F f | G f
        | true | false | atom | ( f )

``~`` is accepted for ``!``, ``&&``/``||`` for ``&``/``|``.  An identifier made
only of the letters ``F``, ``G`` and ``X`` (such as ``GF``) is read as a chain
of unary operators.  ``#`` starts a comment running to the end of the line.
"""
from __future__ import annotations

import re
import weakref
from dataclasses import dataclass
from typing import Iterable, Mapping


TRUE_OP = 'true'
FALSE_OP = 'false'
ATOM = 'atom'
NOT = '!'
AND = '&'
OR = '|'
IMPLIES = '->'
NEXT = 'X'
WNEXT = 'Xw'
UNTIL = 'U'
RELEASE = 'R'
EVENTUALLY = 'F'
ALWAYS = 'G'

UNARY = (NOT, NEXT, WNEXT, EVENTUALLY, ALWAYS)
TEMPORAL = (NEXT, WNEXT, UNTIL, RELEASE, EVENTUALLY, ALWAYS)
KEYWORDS = {'true', 'false', 'X', 'Xw', 'F', 'G', 'U', 'R'}
IDENT_RE = re.compile(r'[A-Za-z_][A-Za-z0-9_]*\Z')


class FormulaError(ValueError):
    pass


class NotInNNF(FormulaError):
    pass


class UnboundAtom(FormulaError):
    pass


class ConstraintError(FormulaError):
    pass


class PartitionError(FormulaError):
    pass


class ParseError(FormulaError):
    """Malformed formula text.

    ``offset`` is a byte offset into the UTF-8 encoding of the input and
    ``expected`` the set of tokens that would have been accepted there.
    """

    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        exp = ''
        if self.expected:
            exp = ' (expected one of: {})'.format(
                ', '.join(sorted(self.expected)))
        super().__init__('{} at offset {}{}'.format(message, offset, exp))


class Formula:
    """Hash-consed LTLf syntax node.

    Build formulas with the constructor functions of this module
    (`Atom`, `And`, `Until`, ...), never by calling the class directly.
    """

    __slots__ = ('op', 'args', 'name', '_key', '__weakref__')

    def __init__(self, op, args, name):
        self.op = op
        self.args = args
        self.name = name
        self._key = None

    def __repr__(self):
        return 'Formula({!r})'.format(str(self))

    def __str__(self):
        return to_str(self)

    def __reduce__(self):
        return (parse, (to_str(self),))

    @property
    def key(self):
        """Total-order sort key (the fully parenthesized text)."""
        if self._key is None:
            self._key = _emit(self)
        return self._key

    def __lt__(self, other):
        return self.key < other.key

    # operator sugar, mostly for tests
    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)


_table = weakref.WeakValueDictionary()


def _make(op, args=(), name=None):
    key = (op, name, args)
    f = _table.get(key)
    if f is None:
        f = Formula(op, args, name)
        f = _table.setdefault(key, f)
    return f


TRUE = _make(TRUE_OP)
FALSE = _make(FALSE_OP)


def valid_name(name):
    return (isinstance(name, str) and IDENT_RE.match(name) is not None
            and name not in KEYWORDS
            and not (len(name) > 1 and set(name) <= {'F', 'G', 'X'}))


def Atom(name: str) -> Formula:
    if not valid_name(name):
        raise FormulaError('invalid atom name: {!r}'.format(name))
    return _make(ATOM, (), name)


def Not(f):
    return _make(NOT, (f,))


def _nary(op, fs):
    fs = tuple(fs)
    if len(fs) == 1:
        return fs[0]
    if not fs:
        return TRUE if op == AND else FALSE
    return _make(op, fs)


def And(*fs):
    """Conjunction; argument order and nesting are kept as given."""
    return _nary(AND, fs)


def Or(*fs):
    return _nary(OR, fs)


def Implies(f, g):
    return _make(IMPLIES, (f, g))


def Next(f):
    return _make(NEXT, (f,))


def WeakNext(f):
    return _make(WNEXT, (f,))


def Until(f, g):
    return _make(UNTIL, (f, g))


def Release(f, g):
    return _make(RELEASE, (f, g))


def Eventually(f):
    return _make(EVENTUALLY, (f,))


def Always(f):
    return _make(ALWAYS, (f,))


def is_literal(f):
    return f.op == ATOM or (f.op == NOT and f.args[0].op == ATOM)


def variables(f: Formula) -> frozenset:
    """Names of the atoms occurring in `f`."""
    out = set()
    stack = [f]
    seen = set()
    while stack:
        g = stack.pop()
        if g in seen:
            continue
        seen.add(g)
        if g.op == ATOM:
            out.add(g.name)
        stack.extend(g.args)
    return frozenset(out)


def subformulas(f):
    """All distinct subformulas, children before parents."""
    order = []
    seen = set()

    def visit(g):
        if g in seen:
            return
        seen.add(g)
        for a in g.args:
            visit(a)
        order.append(g)
    visit(f)
    return order


def is_boolean(f):
    return all(g.op not in TEMPORAL for g in subformulas(f))


def is_nnf(f):
    for g in subformulas(f):
        if g.op in (IMPLIES, EVENTUALLY, ALWAYS):
            return False
        if g.op == NOT and g.args[0].op != ATOM:
            return False
    return True


# ---------------------------------------------------------------------------
# canonical Boolean simplification

def mk_and(*fs):
    """Canonical conjunction: flattened, constant-folded, sorted, deduplicated.

    Complementary literals fold to false.
    """
    return _mk_junction(AND, fs)


def mk_or(*fs):
    return _mk_junction(OR, fs)


def _mk_junction(op, fs):
    unit, zero = (TRUE, FALSE) if op == AND else (FALSE, TRUE)
    items = set()
    stack = list(fs)
    while stack:
        g = stack.pop()
        if g is unit:
            continue
        if g is zero:
            return zero
        if g.op == op:
            stack.extend(g.args)
        else:
            items.add(g)
    for g in items:
        if g.op == NOT and g.args[0] in items:
            return zero
    if not items:
        return unit
    if len(items) == 1:
        return next(iter(items))
    return _make(op, tuple(sorted(items, key=_sort_key)))


def _sort_key(f):
    return f.key


def mk_not(f):
    if f is TRUE:
        return FALSE
    if f is FALSE:
        return TRUE
    if f.op == NOT:
        return f.args[0]
    return Not(f)


def to_nnf(f: Formula) -> Formula:
    """Negation normal form with implications, F and G eliminated.

    ``F g`` becomes ``true U g`` and ``G g`` becomes ``false R g``; Boolean
    structure is canonicalized as in `mk_and`.
    """
    return _nnf(f, False, {})


def _nnf(f, neg, memo):
    key = (f, neg)
    r = memo.get(key)
    if r is not None:
        return r
    op = f.op
    a = f.args
    if op == TRUE_OP:
        r = FALSE if neg else TRUE
    elif op == FALSE_OP:
        r = TRUE if neg else FALSE
    elif op == ATOM:
        r = Not(f) if neg else f
    elif op == NOT:
        r = _nnf(a[0], not neg, memo)
    elif op == AND:
        parts = [_nnf(g, neg, memo) for g in a]
        r = mk_or(*parts) if neg else mk_and(*parts)
    elif op == OR:
        parts = [_nnf(g, neg, memo) for g in a]
        r = mk_and(*parts) if neg else mk_or(*parts)
    elif op == IMPLIES:
        lhs = _nnf(a[0], not neg, memo)
        rhs = _nnf(a[1], neg, memo)
        r = mk_and(lhs, rhs) if neg else mk_or(lhs, rhs)
    elif op == NEXT:
        r = (WeakNext if neg else Next)(_nnf(a[0], neg, memo))
    elif op == WNEXT:
        r = (Next if neg else WeakNext)(_nnf(a[0], neg, memo))
    elif op == UNTIL:
        r = (Release if neg else Until)(
            _nnf(a[0], neg, memo), _nnf(a[1], neg, memo))
    elif op == RELEASE:
        r = (Until if neg else Release)(
            _nnf(a[0], neg, memo), _nnf(a[1], neg, memo))
    elif op == EVENTUALLY:
        g = _nnf(a[0], neg, memo)
        r = Release(FALSE, g) if neg else Until(TRUE, g)
    elif op == ALWAYS:
        g = _nnf(a[0], neg, memo)
        r = Until(TRUE, g) if neg else Release(FALSE, g)
    else:
        raise FormulaError('unknown operator {!r}'.format(op))
    memo[key] = r
    return r


# ---------------------------------------------------------------------------
# environment constraints and assumptions

@dataclass(frozen=True)
class Partition:
    inputs: tuple
    outputs: tuple

    def __post_init__(self):
        object.__setattr__(self, 'inputs', tuple(self.inputs))
        object.__setattr__(self, 'outputs', tuple(self.outputs))
        for names in (self.inputs, self.outputs):
            if len(set(names)) != len(names):
                raise PartitionError('duplicate variable in {}'.format(names))
            for n in names:
                if not valid_name(n):
                    raise PartitionError('invalid variable name {!r}'.format(n))
        both = set(self.inputs) & set(self.outputs)
        if both:
            raise PartitionError(
                'variables both input and output: {}'.format(sorted(both)))

    @property
    def variables(self):
        return self.inputs + self.outputs


FAIR = 'fair'
STABLE = 'stable'
KINDS = (FAIR, STABLE)


@dataclass(frozen=True)
class Assumption:
    """``GF alpha`` when kind is fair, ``FG alpha`` when kind is stable."""

    kind: str
    alpha: Formula

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConstraintError('unknown assumption kind {!r}'.format(self.kind))
        if not is_boolean(self.alpha):
            raise ConstraintError('assumption constraint must be Boolean')

    def formula(self):
        if self.kind == FAIR:
            return Always(Eventually(self.alpha))
        return Eventually(Always(self.alpha))


def as_constraint(f: Formula, inputs: Iterable[str]) -> Formula:
    """Check that `f` is a Boolean formula over `inputs` and return it."""
    if not is_boolean(f):
        raise ConstraintError('constraint {} has temporal operators'.format(f))
    extra = variables(f) - set(inputs)
    if extra:
        raise ConstraintError(
            'constraint mentions non-input variables {}'.format(sorted(extra)))
    return f


def eval_constraint(alpha: Formula, x) -> bool:
    """Evaluate a Boolean formula.

    `x` is either a mapping from names to truth values, in which case every
    atom of `alpha` must be a key, or a collection of the names that are true.
    """
    if isinstance(x, Mapping):
        def val(name):
            try:
                return bool(x[name])
            except KeyError:
                raise UnboundAtom('atom {!r} is not assigned'.format(name))
    else:
        true_names = frozenset(x)

        def val(name):
            return name in true_names
    return _eval_bool(alpha, val)


def _eval_bool(f, val):
    op = f.op
    if op == ATOM:
        return val(f.name)
    if op == TRUE_OP:
        return True
    if op == FALSE_OP:
        return False
    if op == NOT:
        return not _eval_bool(f.args[0], val)
    if op == AND:
        return all(_eval_bool(g, val) for g in f.args)
    if op == OR:
        return any(_eval_bool(g, val) for g in f.args)
    if op == IMPLIES:
        return (not _eval_bool(f.args[0], val)) or _eval_bool(f.args[1], val)
    raise ConstraintError('temporal operator {} in constraint'.format(op))


# ---------------------------------------------------------------------------
# printing

_LEVEL = {IMPLIES: 1, OR: 2, AND: 3, UNTIL: 4, RELEASE: 4,
          NOT: 5, NEXT: 5, WNEXT: 5, EVENTUALLY: 5, ALWAYS: 5}


def _level(f):
    return _LEVEL.get(f.op, 6)


def to_str(f: Formula) -> str:
    """Readable text with the fewest parentheses that still reparse exactly."""
    op = f.op
    if op == ATOM:
        return f.name
    if op in (TRUE_OP, FALSE_OP):
        return op
    if op in UNARY:
        inner = _wrap(f.args[0], 5)
        return ('!' + inner) if op == NOT else (op + ' ' + inner)
    if op in (AND, OR):
        return ' {} '.format(op).join(_wrap(g, _LEVEL[op] + 1) for g in f.args)
    lvl = _LEVEL[op]
    return '{} {} {}'.format(_wrap(f.args[0], lvl + 1), op,
                             _wrap(f.args[1], lvl))


def _wrap(f, min_level):
    s = to_str(f)
    return s if _level(f) >= min_level else '(' + s + ')'


def emit(f: Formula) -> str:
    """Fully parenthesized text, e.g. ``((a) & (alive))`` or ``(F a)``."""
    return f.key


def _emit(f):
    op = f.op
    if op == ATOM:
        return f.name
    if op in (TRUE_OP, FALSE_OP):
        return op
    if op in UNARY:
        return '({} {})'.format(op, f.args[0].key)
    return '(' + ' {} '.format(op).join(_emit_operand(g) for g in f.args) + ')'


def _emit_operand(f):
    if f.op in (ATOM, TRUE_OP, FALSE_OP):
        return '(' + f.key + ')'
    return f.key


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(r'''
    (?P<ws>\s+|\#[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>->|=>|&&|\|\||[()!~&|])
''', re.VERBOSE)

_SYM_ALIASES = {'=>': '->', '&&': '&', '||': '|', '~': '!'}
_PRIMARY_START = {'(', '!', 'X', 'Xw', 'F', 'G', 'true', 'false', 'identifier'}


def _tokenize(text):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError('unexpected character {!r}'.format(text[pos]),
                             len(text[:pos].encode('utf-8')))
        kind = m.lastgroup
        val = m.group()
        if kind == 'ident':
            if val in KEYWORDS:
                tokens.append((val, val, pos))
            elif len(val) > 1 and set(val) <= {'F', 'G', 'X'}:
                for i, ch in enumerate(val):
                    tokens.append((ch, ch, pos + i))
            else:
                tokens.append(('identifier', val, pos))
        elif kind == 'sym':
            val = _SYM_ALIASES.get(val, val)
            tokens.append((val, val, pos))
        pos = m.end()
    tokens.append(('end of input', None, n))
    return tokens


class _Parser:

    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i][0]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, expected):
        kind, val, pos = self.tokens[self.i]
        what = 'unexpected end of input' if val is None \
            else 'unexpected token {!r}'.format(val)
        raise ParseError(what, len(self.text[:pos].encode('utf-8')), expected)

    def parse(self):
        f = self.implies()
        if self.peek() != 'end of input':
            self.error({'end of input', '->', '|', '&', 'U', 'R'})
        return f

    def implies(self):
        lhs = self.disjunction()
        if self.peek() == '->':
            self.advance()
            return Implies(lhs, self.implies())
        return lhs

    def disjunction(self):
        parts = [self.conjunction()]
        while self.peek() == '|':
            self.advance()
            parts.append(self.conjunction())
        return Or(*parts)

    def conjunction(self):
        parts = [self.binary()]
        while self.peek() == '&':
            self.advance()
            parts.append(self.binary())
        return And(*parts)

    def binary(self):
        lhs = self.unary()
        tok = self.peek()
        if tok in ('U', 'R'):
            self.advance()
            rhs = self.binary()
            return Until(lhs, rhs) if tok == 'U' else Release(lhs, rhs)
        return lhs

    def unary(self):
        tok = self.peek()
        if tok in ('!', 'X', 'Xw', 'F', 'G'):
            self.advance()
            arg = self.unary()
            return {'!': Not, 'X': Next, 'Xw': WeakNext,
                    'F': Eventually, 'G': Always}[tok](arg)
        return self.primary()

    def primary(self):
        kind, val, _ = self.tokens[self.i]
        if kind == 'true':
            self.advance()
            return TRUE
        if kind == 'false':
            self.advance()
            return FALSE
        if kind == 'identifier':
            self.advance()
            return Atom(val)
        if kind == '(':
            self.advance()
            f = self.implies()
            if self.peek() != ')':
                self.error({')', '->', '|', '&', 'U', 'R'})
            self.advance()
            return f
        self.error(_PRIMARY_START)


def parse(text: str) -> Formula:
    """Parse formula text; raises `ParseError` on malformed input."""
    if isinstance(text, bytes):
        text = text.decode('utf-8')
    return _Parser(text).parse()


def read_formula(path) -> Formula:
    with open(path, encoding='utf-8') as fh:
        return parse(fh.read())


def parse_partition(text: str) -> Partition:
    """Parse the two-line ``.inputs: ...`` / ``.outputs: ...`` format."""
    found = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        head, sep, rest = line.partition(':')
        head = head.strip()
        if not sep or head not in ('.inputs', '.outputs'):
            raise PartitionError(
                'line {}: expected ".inputs:" or ".outputs:"'.format(lineno))
        if head in found:
            raise PartitionError('line {}: repeated {}'.format(lineno, head))
        found[head] = rest.split()
    missing = {'.inputs', '.outputs'} - set(found)
    if missing:
        raise PartitionError('missing {}'.format(', '.join(sorted(missing))))
    return Partition(found['.inputs'], found['.outputs'])


def read_partition(path) -> Partition:
    with open(path, encoding='utf-8') as fh:
        return parse_partition(fh.read())


def format_partition(p: Partition) -> str:
    return '.inputs: {}\n.outputs: {}\n'.format(
        ' '.join(p.inputs), ' '.join(p.outputs))
