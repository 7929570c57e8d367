"""Symbolic exploration for systems whose per-context reach is infinite.

A symbolic state pairs a shared state with one stack-language automaton per
thread; it stands for every global state whose stacks the automata accept.
Running one context of thread i is exact: embed the thread's current stack
language into a store automaton, saturate it, and read off one successor per
shared state the thread can stop at, with that thread's automaton replaced by
the extracted row language.  The zero-step row subsumes the predecessor, so
layer unions and their visible projections grow monotonically.

Convergence is an exact language comparison: for each shared state, the
layer's per-thread languages are joined into one word language (threads in
order, separated by a reserved letter) and compared across rounds.
"""

import time

from . import automata
from .model import EMPTY, VisibleState, initial_state, visible_key
from .textfmt import matches


class SymbolicState:
    """A shared state plus one canonical stack-language DFA per thread."""

    def __init__(self, q, stack_langs):
        self.q = q
        self.stack_langs = tuple(stack_langs)
        self._key = (q, tuple(_dfa_key(a) for a in self.stack_langs))

    def __eq__(self, other):
        return isinstance(other, SymbolicState) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def sort_key(self):
        return (self.q.index, self._key[1])


def _dfa_key(a):
    """Comparable/orderable form of a canonical integer-state DFA."""
    edges = tuple(sorted((s, automata.label_key(l), t, _label_id(l))
                         for (s, l, t) in a.transitions))
    return (len(a.states), edges, tuple(sorted(a.finals)))


def _label_id(label):
    return label if isinstance(label, tuple) else str(label)


def make_symbolic_state(q, stack_langs):
    """Canonicalize the per-thread automata so equal languages compare equal."""
    return SymbolicState(q, [automata.canonical_dfa(a) for a in stack_langs])


class SymbolicLayer:
    """All symbolic states reachable within k contexts, with their tops."""

    def __init__(self, k, states, tops):
        self.k = k
        self.states = tuple(states)
        self.tops = frozenset(tops)


def tops_of(sym):
    """Visible states of a symbolic state: q crossed with per-thread tops."""
    per_thread = []
    for a in sym.stack_langs:
        start = next(iter(a.initials))
        tops = automata.project_tops(a, start)
        if not tops:
            return set()
        per_thread.append(sorted(tops, key=lambda t: (t is not EMPTY, t)))
    out = set()
    stack = [(0, ())]
    while stack:
        i, prefix = stack.pop()
        if i == len(per_thread):
            out.add(VisibleState(sym.q, prefix))
            continue
        for t in per_thread[i]:
            stack.append((i + 1, prefix + (t,)))
    return out


def initial_symbolic_layer(cpds):
    s0 = initial_state(cpds)
    langs = [automata.word_automaton(pds.alphabet, s0.stacks[i])
             for i, pds in enumerate(cpds.threads)]
    sym = make_symbolic_state(s0.q, langs)
    return SymbolicLayer(0, [sym], tops_of(sym))


def symbolic_context_post(cpds, sym, i):
    """Successors of sym when thread i runs one full context.

    One successor per shared state with a nonempty row; the row at sym.q
    covers sym itself (zero steps).
    """
    pds = cpds.threads[i]
    start = automata.psa_of_language(pds, sym.q, sym.stack_langs[i])
    saturated, _ = automata.post_star(pds, start)
    successors = []
    for q2 in cpds.shared:
        row = automata.row_language(saturated, q2)
        if not row.finals:
            continue
        langs = sym.stack_langs[:i] + (row,) + sym.stack_langs[i + 1:]
        successors.append(make_symbolic_state(q2, langs))
    return successors


def next_symbolic_layer(cpds, prev):
    """Deduplicated successors of every state of prev under every thread."""
    seen = {}
    for sym in prev.states:
        for i in range(len(cpds.threads)):
            for succ in symbolic_context_post(cpds, sym, i):
                seen.setdefault(succ, succ)
    states = sorted(seen, key=SymbolicState.sort_key)
    tops = set()
    for sym in states:
        tops |= tops_of(sym)
    return SymbolicLayer(prev.k + 1, states, tops)


def _aggregate(cpds, layer, q):
    """One automaton for every stack tuple the layer admits at q."""
    parts = [s for s in layer.states if s.q == q]
    if not parts:
        return automata.StackAutomaton([0], (), [], [0], [])
    joined = [automata.concat_with_separator(s.stack_langs) for s in parts]
    result = joined[0]
    for a in joined[1:]:
        result = automata.union(result, a)
    return result


def layers_equal(cpds, a, b):
    """True iff the two layers admit the same global states."""
    for q in cpds.shared:
        if not automata.language_equal(_aggregate(cpds, a, q), _aggregate(cpds, b, q)):
            return False
    return True


def find_violation(layer, prop):
    """The least bad visible state among the layer's tops, or None."""
    for v in sorted(layer.tops, key=visible_key):
        if matches(prop, v):
            return v
    return None


def scheme1_symbolic(cpds, prop, budgets):
    """Round-by-round symbolic search with exact plateau detection."""
    from .engine import Unsafe, SafeConverged, Inconclusive

    deadline = time.monotonic() + budgets.timeout
    layer = initial_symbolic_layer(cpds)
    hit = find_violation(layer, prop)
    if hit:
        return Unsafe(0, hit, None)
    for k in range(1, budgets.max_k + 1):
        if time.monotonic() > deadline:
            return Inconclusive("timeout", k - 1)
        nxt = next_symbolic_layer(cpds, layer)
        if len(nxt.states) > budgets.layer_budget:
            return Inconclusive("budget", k - 1)
        hit = find_violation(nxt, prop)
        if hit:
            return Unsafe(k, hit, None)
        if layers_equal(cpds, layer, nxt):
            return SafeConverged(k, "scheme1-symbolic")
        layer = nxt
    return Inconclusive("max-k", budgets.max_k)
