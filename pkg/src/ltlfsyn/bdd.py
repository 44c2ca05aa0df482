"""Reduced ordered binary decision diagrams.

A `BDD` store owns a node table with hash-consing, per-operation caches and a
fixed variable order.  Nodes are plain integers: 0 is the constant false, 1
the constant true.  No complement edges, no reordering, no garbage
collection (the table lives as long as the store).

The integer interface (`conj`, `disj`, `neg`, `ite`, `exist`, ...) is what
the fixpoint code uses.  `Function` wraps a node together with its store,
adds operator sugar and refuses to mix stores; the module level functions
`apply`, `quantify`, `compose` and `eval_assign` take `Function` handles.
"""
from __future__ import annotations

import logging

import numpy as np


log = logging.getLogger(__name__)

FALSE = 0
TRUE = 1
_TERMINAL = 1 << 30


class BDDError(Exception):
    pass


class StoreMismatch(BDDError):
    pass


class UnknownVariable(BDDError, KeyError):
    pass


class CapacityExceeded(BDDError):
    pass


class BDD:
    """Shared ROBDD store with a static variable order."""

    def __init__(self, variables=(), max_nodes=None):
        self._names = []
        self._level = {}
        self._lvl = [_TERMINAL, _TERMINAL]
        self._lo = [0, 1]
        self._hi = [0, 1]
        self._unique = {}
        self.max_nodes = max_nodes
        self._var_nodes = []
        self.clear_cache()
        for v in variables:
            self.add_var(v)

    def clear_cache(self):
        self._and_c = {}
        self._or_c = {}
        self._xor_c = {}
        self._not_c = {}
        self._ite_c = {}

    def __len__(self):
        return len(self._lvl)

    @property
    def vars(self):
        return list(self._names)

    def level_of(self, name):
        try:
            return self._level[name]
        except KeyError:
            raise UnknownVariable(name) from None

    def name_of(self, level):
        return self._names[level]

    def add_var(self, name):
        """Append a variable below all existing ones; return its level."""
        if name in self._level:
            return self._level[name]
        lvl = len(self._names)
        self._names.append(name)
        self._level[name] = lvl
        self._var_nodes.append(self.mk(lvl, FALSE, TRUE))
        return lvl

    def var(self, name):
        return self._var_nodes[self.level_of(name)]

    def level(self, u):
        return self._lvl[u]

    def low(self, u):
        return self._lo[u]

    def high(self, u):
        return self._hi[u]

    def mk(self, lvl, lo, hi):
        if lo == hi:
            return lo
        key = (lvl, lo, hi)
        u = self._unique.get(key)
        if u is None:
            u = len(self._lvl)
            if self.max_nodes is not None and u >= self.max_nodes:
                raise CapacityExceeded(
                    'node table exceeds {} nodes'.format(self.max_nodes))
            self._lvl.append(lvl)
            self._lo.append(lo)
            self._hi.append(hi)
            self._unique[key] = u
        return u

    # ------------------------------------------------------------------
    # Boolean operations on node ids

    def neg(self, u):
        if u <= 1:
            return 1 - u
        r = self._not_c.get(u)
        if r is None:
            r = self.mk(self._lvl[u], self.neg(self._lo[u]), self.neg(self._hi[u]))
            self._not_c[u] = r
        return r

    def conj(self, u, v):
        if u == v or v == TRUE:
            return u
        if u == FALSE or v == FALSE:
            return FALSE
        if u == TRUE:
            return v
        if u > v:
            u, v = v, u
        key = (u, v)
        r = self._and_c.get(key)
        if r is not None:
            return r
        lu, lv = self._lvl[u], self._lvl[v]
        if lu == lv:
            r = self.mk(lu, self.conj(self._lo[u], self._lo[v]),
                        self.conj(self._hi[u], self._hi[v]))
        elif lu < lv:
            r = self.mk(lu, self.conj(self._lo[u], v), self.conj(self._hi[u], v))
        else:
            r = self.mk(lv, self.conj(u, self._lo[v]), self.conj(u, self._hi[v]))
        self._and_c[key] = r
        return r

    def disj(self, u, v):
        if u == v or v == FALSE:
            return u
        if u == TRUE or v == TRUE:
            return TRUE
        if u == FALSE:
            return v
        if u > v:
            u, v = v, u
        key = (u, v)
        r = self._or_c.get(key)
        if r is not None:
            return r
        lu, lv = self._lvl[u], self._lvl[v]
        if lu == lv:
            r = self.mk(lu, self.disj(self._lo[u], self._lo[v]),
                        self.disj(self._hi[u], self._hi[v]))
        elif lu < lv:
            r = self.mk(lu, self.disj(self._lo[u], v), self.disj(self._hi[u], v))
        else:
            r = self.mk(lv, self.disj(u, self._lo[v]), self.disj(u, self._hi[v]))
        self._or_c[key] = r
        return r

    def xor(self, u, v):
        if u == v:
            return FALSE
        if u == FALSE:
            return v
        if v == FALSE:
            return u
        if u == TRUE:
            return self.neg(v)
        if v == TRUE:
            return self.neg(u)
        if u > v:
            u, v = v, u
        key = (u, v)
        r = self._xor_c.get(key)
        if r is not None:
            return r
        lu, lv = self._lvl[u], self._lvl[v]
        if lu == lv:
            r = self.mk(lu, self.xor(self._lo[u], self._lo[v]),
                        self.xor(self._hi[u], self._hi[v]))
        elif lu < lv:
            r = self.mk(lu, self.xor(self._lo[u], v), self.xor(self._hi[u], v))
        else:
            r = self.mk(lv, self.xor(u, self._lo[v]), self.xor(u, self._hi[v]))
        self._xor_c[key] = r
        return r

    def implies(self, u, v):
        return self.disj(self.neg(u), v)

    def diff(self, u, v):
        return self.conj(u, self.neg(v))

    def ite(self, f, g, h):
        if f == TRUE:
            return g
        if f == FALSE:
            return h
        if g == h:
            return g
        if g == TRUE and h == FALSE:
            return f
        if g == FALSE and h == TRUE:
            return self.neg(f)
        if g == TRUE:
            return self.disj(f, h)
        if h == FALSE:
            return self.conj(f, g)
        key = (f, g, h)
        r = self._ite_c.get(key)
        if r is not None:
            return r
        lvl = self._lvl
        top = min(lvl[f], lvl[g], lvl[h])
        f0, f1 = self._cof(f, top)
        g0, g1 = self._cof(g, top)
        h0, h1 = self._cof(h, top)
        r = self.mk(top, self.ite(f0, g0, h0), self.ite(f1, g1, h1))
        self._ite_c[key] = r
        return r

    def _cof(self, u, top):
        if self._lvl[u] == top:
            return self._lo[u], self._hi[u]
        return u, u

    # ------------------------------------------------------------------
    # quantification, substitution, restriction

    def _levels(self, names):
        return frozenset(self.level_of(n) for n in names)

    def exist(self, names, u):
        return self._quant(self._levels(names), u, self.disj)

    def forall(self, names, u):
        return self._quant(self._levels(names), u, self.conj)

    def exist_levels(self, levels, u):
        return self._quant(frozenset(levels), u, self.disj)

    def forall_levels(self, levels, u):
        return self._quant(frozenset(levels), u, self.conj)

    def _quant(self, levels, u, combine):
        if not levels:
            return u
        bottom = max(levels)
        memo = {}
        lvl, lo, hi, mk = self._lvl, self._lo, self._hi, self.mk

        def rec(w):
            if lvl[w] > bottom:
                return w
            r = memo.get(w)
            if r is not None:
                return r
            l = lvl[w]
            a = rec(lo[w])
            b = rec(hi[w])
            r = combine(a, b) if l in levels else mk(l, a, b)
            memo[w] = r
            return r
        return rec(u)

    def compose(self, u, sub, cache=None):
        """Simultaneously substitute ``sub[level]`` for each variable level.

        `cache` may be kept across calls that use the same substitution.
        """
        if not sub:
            return u
        bottom = max(sub)
        memo = {} if cache is None else cache
        lvl, lo, hi = self._lvl, self._lo, self._hi
        var_nodes = self._var_nodes

        def rec(w):
            l = lvl[w]
            if l > bottom:
                return w
            r = memo.get(w)
            if r is not None:
                return r
            a = rec(lo[w])
            b = rec(hi[w])
            g = sub.get(l)
            r = self.ite(var_nodes[l] if g is None else g, b, a)
            memo[w] = r
            return r
        return rec(u)

    def let(self, u, values):
        """Cofactor: fix the variables in `values` (level -> bool)."""
        if not values:
            return u
        bottom = max(values)
        memo = {}
        lvl, lo, hi, mk = self._lvl, self._lo, self._hi, self.mk

        def rec(w):
            l = lvl[w]
            if l > bottom:
                return w
            r = memo.get(w)
            if r is not None:
                return r
            if l in values:
                r = rec(hi[w] if values[l] else lo[w])
            else:
                r = mk(l, rec(lo[w]), rec(hi[w]))
            memo[w] = r
            return r
        return rec(u)

    def cube(self, values):
        """Conjunction of literals, `values` maps variable names to bools."""
        u = TRUE
        for lvl_, val in sorted(((self.level_of(n), v) for n, v in values.items()),
                                reverse=True):
            u = self.mk(lvl_, FALSE, u) if val else self.mk(lvl_, u, FALSE)
        return u

    def cube_levels(self, values):
        u = TRUE
        for lvl_ in sorted(values, reverse=True):
            u = self.mk(lvl_, FALSE, u) if values[lvl_] else self.mk(lvl_, u, FALSE)
        return u

    # ------------------------------------------------------------------
    # inspection

    def evaluate(self, u, assignment):
        """Follow the path selected by `assignment` (name -> bool)."""
        names = self._names
        while u > 1:
            name = names[self._lvl[u]]
            try:
                val = assignment[name]
            except KeyError:
                raise UnknownVariable(
                    'assignment does not cover {!r}'.format(name)) from None
            u = self._hi[u] if val else self._lo[u]
        return u == TRUE

    def evaluate_levels(self, u, bits):
        """`bits` is indexable by level."""
        while u > 1:
            u = self._hi[u] if bits[self._lvl[u]] else self._lo[u]
        return u == TRUE

    def least_model(self, u):
        """Lexicographically least model as {level: bool} over the support.

        Variables are compared in level order with false < true; variables
        outside the returned dict are free (and taken as false).
        """
        if u == FALSE:
            return None
        out = {}
        while u > 1:
            l = self._lvl[u]
            if self._lo[u] != FALSE:
                out[l] = False
                u = self._lo[u]
            else:
                out[l] = True
                u = self._hi[u]
        return out

    def cubes(self, u):
        """Yield disjoint partial assignments {level: bool} covering `u`."""
        if u == FALSE:
            return
        stack = [(u, {})]
        while stack:
            w, path = stack.pop()
            if w == TRUE:
                yield path
                continue
            if w == FALSE:
                continue
            l = self._lvl[w]
            hi_path = dict(path)
            hi_path[l] = True
            path = dict(path)
            path[l] = False
            stack.append((self._hi[w], hi_path))
            stack.append((self._lo[w], path))

    def support(self, u):
        seen = set()
        out = set()
        stack = [u]
        while stack:
            w = stack.pop()
            if w <= 1 or w in seen:
                continue
            seen.add(w)
            out.add(self._names[self._lvl[w]])
            stack.append(self._lo[w])
            stack.append(self._hi[w])
        return out

    def count(self, u, nvars=None):
        """Number of satisfying assignments over the first `nvars` levels."""
        if nvars is None:
            nvars = len(self._names)
        memo = {}

        def rec(w):
            if w <= 1:
                return w, nvars
            r = memo.get(w)
            if r is None:
                c0, l0 = rec(self._lo[w])
                c1, l1 = rec(self._hi[w])
                l = self._lvl[w]
                r = (c0 * 2 ** (l0 - l - 1) + c1 * 2 ** (l1 - l - 1), l)
                memo[w] = r
            return r
        c, l = rec(u)
        return c * 2 ** l if u > 1 else c * 2 ** nvars

    def node_count(self, u):
        seen = set()
        stack = [u]
        while stack:
            w = stack.pop()
            if w in seen:
                continue
            seen.add(w)
            if w > 1:
                stack.append(self._lo[w])
                stack.append(self._hi[w])
        return len(seen)

    def indices(self, u, levels):
        """Sorted integer indices of the models of `u` over `levels`.

        `levels` lists the variables forming the index, most significant
        first; `u` must not depend on other variables.
        """
        pos = {l: len(levels) - 1 - k for k, l in enumerate(levels)}
        chunks = []
        for c in self.cubes(u):
            base = 0
            free = []
            for l in levels:
                if l in c:
                    if c[l]:
                        base |= 1 << pos[l]
                else:
                    free.append(1 << pos[l])
            if len(c) != sum(1 for l in c if l in pos):
                raise BDDError('function depends on variables outside the index')
            arr = np.array([base], dtype=np.int64)
            for w in free:
                arr = np.concatenate([arr, arr + w])
            chunks.append(arr)
        if not chunks:
            return np.zeros(0, dtype=np.int64)
        return np.sort(np.concatenate(chunks))

    def copy_to(self, other, u, rename=None, memo=None):
        """Rebuild `u` inside store `other` (variables matched by name)."""
        rename = rename or {}
        memo = {} if memo is None else memo

        def rec(w):
            if w <= 1:
                return w
            r = memo.get(w)
            if r is None:
                name = self._names[self._lvl[w]]
                v = other.var(rename.get(name, name))
                r = other.ite(v, rec(self._hi[w]), rec(self._lo[w]))
                memo[w] = r
            return r
        return rec(u)

    def to_dot(self, roots):
        """DOT text for the subgraph reachable from `roots`."""
        if isinstance(roots, int):
            roots = [roots]
        lines = ['digraph bdd {', '  0 [shape=box,label="0"];',
                 '  1 [shape=box,label="1"];']
        seen = set()
        stack = list(roots)
        while stack:
            w = stack.pop()
            if w <= 1 or w in seen:
                continue
            seen.add(w)
            lines.append('  {} [label="{}"];'.format(w, self._names[self._lvl[w]]))
            lines.append('  {} -> {} [style=dashed];'.format(w, self._lo[w]))
            lines.append('  {} -> {};'.format(w, self._hi[w]))
            stack.append(self._lo[w])
            stack.append(self._hi[w])
        for i, r in enumerate(roots):
            lines.append('  r{} [shape=plaintext,label="ref {}"];'.format(i, r))
            lines.append('  r{} -> {};'.format(i, r))
        lines.append('}')
        return '\n'.join(lines) + '\n'

    # ------------------------------------------------------------------
    # handles

    def ref(self, u):
        return Function(self, u)

    @property
    def true(self):
        return Function(self, TRUE)

    @property
    def false(self):
        return Function(self, FALSE)

    def variable(self, name):
        return Function(self, self.var(name))


class Function:
    """A node handle bound to its store."""

    __slots__ = ('store', 'node')

    def __init__(self, store, node):
        self.store = store
        self.node = node

    def _other(self, other):
        if not isinstance(other, Function) or other.store is not self.store:
            raise StoreMismatch('operands belong to different stores')
        return other.node

    def __eq__(self, other):
        return (isinstance(other, Function) and other.store is self.store
                and other.node == self.node)

    def __hash__(self):
        return hash((id(self.store), self.node))

    def __repr__(self):
        return 'Function(node={})'.format(self.node)

    def __and__(self, other):
        return Function(self.store, self.store.conj(self.node, self._other(other)))

    def __or__(self, other):
        return Function(self.store, self.store.disj(self.node, self._other(other)))

    def __xor__(self, other):
        return Function(self.store, self.store.xor(self.node, self._other(other)))

    def __invert__(self):
        return Function(self.store, self.store.neg(self.node))

    def implies(self, other):
        return Function(self.store,
                        self.store.implies(self.node, self._other(other)))

    @property
    def is_true(self):
        return self.node == TRUE

    @property
    def is_false(self):
        return self.node == FALSE


def _check(store, *fs):
    for f in fs:
        if not isinstance(f, Function) or f.store is not store:
            raise StoreMismatch('handle does not belong to this store')


def apply(store, op, f, g=None):
    """Boolean combination; `op` is one of and, or, xor, not, implies."""
    if op == 'not':
        _check(store, f)
        return Function(store, store.neg(f.node))
    _check(store, f, g)
    fn = {'and': store.conj, 'or': store.disj, 'xor': store.xor,
          'implies': store.implies}.get(op)
    if fn is None:
        raise ValueError('unknown operator {!r}'.format(op))
    return Function(store, fn(f.node, g.node))


def quantify(store, kind, names, f):
    _check(store, f)
    if kind == 'exists':
        return Function(store, store.exist(names, f.node))
    if kind == 'forall':
        return Function(store, store.forall(names, f.node))
    raise ValueError('unknown quantifier {!r}'.format(kind))


def compose(store, f, sub):
    """Substitute functions for variables, `sub` maps names to handles."""
    _check(store, f, *sub.values())
    levels = {store.level_of(n): g.node for n, g in sub.items()}
    return Function(store, store.compose(f.node, levels))


def eval_assign(store, f, assignment):
    _check(store, f)
    return store.evaluate(f.node, assignment)
