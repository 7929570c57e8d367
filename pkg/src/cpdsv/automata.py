"""Finite automata over stack alphabets, and pushdown store automata.

A StackAutomaton is a plain NFA whose labels are stack symbols or None
(epsilon).  A PSA wraps one automaton per pushdown system: the shared states
are embedded as automaton states, and the automaton accepts configuration
⟨q|w⟩ iff some w-labeled path (epsilon moves allowed) leads from q to a
final state.

Internally a PSA works over the thread alphabet extended with a bottom
marker: configuration ⟨q|w⟩ is stored as the word w·⊥.  Rules that act on
an empty stack then become ordinary rules on ⊥ — (q,ε)→(q′,σ) turns into
the push (q,⊥)→(q′,σ⊥), and (q,ε)→(q′,ε) into the rewrite (q,⊥)→(q′,⊥) —
so one saturation procedure covers every rule shape.  Every public entry
point converts at the boundary; callers never see ⊥.
"""

from collections import defaultdict, deque, namedtuple

from .model import EMPTY


class _Marker:
    """A private label; compares by identity."""

    def __init__(self, text):
        self.text = text

    def __repr__(self):
        return self.text


# Bottom-of-stack marker (PSA-internal) and the separator used when several
# stack languages are joined into one word language for comparison.
BOTTOM = _Marker("_|_")
SEPARATOR = _Marker("#")


def label_key(label):
    """Total order on transition labels, for deterministic iteration."""
    if label is None:
        return (0, 0, 0)
    if label is BOTTOM:
        return (2, 0, 0)
    if label is SEPARATOR:
        return (3, 0, 0)
    return (1, label.thread, label.index)


def _state_text(s):
    if hasattr(s, "name") and hasattr(s, "index"):
        return s.name
    if isinstance(s, tuple):
        return "(" + ",".join(_state_text(x) for x in s) + ")"
    return str(s)


def _state_key(s):
    return (_state_text(s), str(s))


class StackAutomaton:
    """An immutable NFA: states, labeled transitions, initials, finals.

    Labels are stack symbols, BOTTOM, SEPARATOR, or None for epsilon.
    """

    def __init__(self, states, alphabet, transitions, initials, finals):
        self.states = frozenset(states)
        self.alphabet = tuple(alphabet)
        self.transitions = frozenset(transitions)
        self.initials = frozenset(initials)
        self.finals = frozenset(finals)
        for (s, label, t) in self.transitions:
            if s not in self.states or t not in self.states:
                raise ValueError("transition references undeclared state")
        self._out = None
        self._eps = {}
        self._co = None

    def out(self, s):
        if self._out is None:
            table = defaultdict(list)
            for (src, label, dst) in sorted(self.transitions,
                                            key=lambda e: (_state_key(e[0]), label_key(e[1]), _state_key(e[2]))):
                table[src].append((label, dst))
            self._out = dict(table)
        return self._out.get(s, ())

    def eps_closure(self, states):
        result = set()
        for s in states:
            cached = self._eps.get(s)
            if cached is None:
                seen = {s}
                stack = [s]
                while stack:
                    x = stack.pop()
                    for (label, t) in self.out(x):
                        if label is None and t not in seen:
                            seen.add(t)
                            stack.append(t)
                cached = frozenset(seen)
                self._eps[s] = cached
            result |= cached
        return frozenset(result)

    def co_reachable(self):
        """States from which some final state can be reached."""
        if self._co is None:
            preds = defaultdict(set)
            for (s, label, t) in self.transitions:
                preds[t].add(s)
            seen = set(self.finals)
            queue = deque(seen)
            while queue:
                x = queue.popleft()
                for p in preds[x]:
                    if p not in seen:
                        seen.add(p)
                        queue.append(p)
            self._co = frozenset(seen)
        return self._co

    def reachable(self):
        seen = set(self.initials)
        queue = deque(seen)
        while queue:
            x = queue.popleft()
            for (label, t) in self.out(x):
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
        return frozenset(seen)

    def trimmed(self):
        """Restrict to states both reachable and co-reachable.

        An automaton with the empty language trims to a lone initial state.
        """
        live = self.reachable() & self.co_reachable()
        if not live:
            anchor = min(self.initials, key=_state_key) if self.initials else 0
            return StackAutomaton([anchor], self.alphabet, [], [anchor], [])
        transitions = [e for e in self.transitions if e[0] in live and e[2] in live]
        return StackAutomaton(live, self.alphabet, transitions,
                              self.initials & live, self.finals & live)

    def accepts_word(self, word, starts=None):
        cur = self.eps_closure(self.initials if starts is None else starts)
        for letter in word:
            step = {t for s in cur for (label, t) in self.out(s) if label == letter}
            cur = self.eps_closure(step)
            if not cur:
                return False
        return bool(cur & self.finals)

    def words(self, max_len):
        """All accepted words of length ≤ max_len, sorted."""
        found = []
        start = self.eps_closure(self.initials)
        queue = deque([((), start)])
        while queue:
            word, cur = queue.popleft()
            if cur & self.finals:
                found.append(word)
            if len(word) == max_len:
                continue
            by_label = defaultdict(set)
            for s in cur:
                for (label, t) in self.out(s):
                    if label is not None:
                        by_label[label].add(t)
            for label in sorted(by_label, key=label_key):
                queue.append((word + (label,), self.eps_closure(by_label[label])))
        return sorted(found, key=lambda w: (len(w), [label_key(x) for x in w]))


def word_automaton(alphabet, word):
    """The automaton accepting exactly {word}."""
    n = len(word)
    transitions = [(i, word[i], i + 1) for i in range(n)]
    return StackAutomaton(range(n + 1), alphabet, transitions, [0], [n])


def eliminate_epsilon(a):
    """An equivalent automaton without epsilon transitions."""
    transitions = set()
    finals = set()
    for s in a.states:
        closure = a.eps_closure([s])
        if closure & a.finals:
            finals.add(s)
        for x in closure:
            for (label, t) in a.out(x):
                if label is not None:
                    transitions.add((s, label, t))
    return StackAutomaton(a.states, a.alphabet, transitions, a.initials, finals)


def union(a, b):
    """Language union; states are tagged to keep the parts disjoint."""
    states = [(0, s) for s in a.states] + [(1, s) for s in b.states]
    transitions = [((0, s), l, (0, t)) for (s, l, t) in a.transitions]
    transitions += [((1, s), l, (1, t)) for (s, l, t) in b.transitions]
    initials = [(0, s) for s in a.initials] + [(1, s) for s in b.initials]
    finals = [(0, s) for s in a.finals] + [(1, s) for s in b.finals]
    alphabet = list(a.alphabet) + [x for x in b.alphabet if x not in a.alphabet]
    return StackAutomaton(states, alphabet, transitions, initials, finals)


def concat_with_separator(parts, label=SEPARATOR):
    """L(parts[0])·label·L(parts[1])·label·…, in the given order."""
    if not parts:
        raise ValueError("need at least one part")
    states, transitions, alphabet = [], [], []
    for i, part in enumerate(parts):
        states += [(i, s) for s in part.states]
        transitions += [((i, s), l, (i, t)) for (s, l, t) in part.transitions]
        alphabet += [x for x in part.alphabet if x not in alphabet]
        if i + 1 < len(parts):
            for f in parts[i].finals:
                for s0 in parts[i + 1].initials:
                    transitions.append(((i, f), label, (i + 1, s0)))
    initials = [(0, s) for s in parts[0].initials]
    last = len(parts) - 1
    finals = [(last, s) for s in parts[last].finals]
    return StackAutomaton(states, alphabet, transitions, initials, finals)


def _transition_labels(*automata):
    labels = set()
    for a in automata:
        for (s, label, t) in a.transitions:
            if label is not None:
                labels.add(label)
    return labels


def _determinize(a, labels):
    """Complete subset-construction DFA: (start, {set: {label: set}})."""
    labels = sorted(labels, key=label_key)
    start = a.eps_closure(a.initials)
    table = {}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        if cur in table:
            continue
        row = {}
        for label in labels:
            step = {t for s in cur for (l, t) in a.out(s) if l == label}
            nxt = a.eps_closure(step) if step else frozenset()
            row[label] = nxt
            if nxt not in table:
                queue.append(nxt)
        table[cur] = row
    return start, table


def _minimize(start, table, finals_of):
    """Moore partition refinement; returns (block of start, block table, final blocks)."""
    states = sorted(table, key=lambda s: sorted(map(_state_key, s)))
    labels = sorted(next(iter(table.values())), key=label_key) if table else []
    block = {s: (1 if finals_of(s) else 0) for s in states}
    while True:
        signature = {}
        for s in states:
            signature[s] = (block[s],) + tuple(block[table[s][l]] for l in labels)
        renumber = {}
        for s in states:
            renumber.setdefault(signature[s], len(renumber))
        new_block = {s: renumber[signature[s]] for s in states}
        if new_block == block:
            break
        block = new_block
    block_table = {}
    final_blocks = set()
    for s in states:
        b = block[s]
        if b not in block_table:
            block_table[b] = {l: block[table[s][l]] for l in labels}
        if finals_of(s):
            final_blocks.add(b)
    return block[start], block_table, final_blocks


def canonical_dfa(a):
    """The canonical trim minimal DFA: equal languages give equal automata.

    States are integers numbered in breadth-first order over sorted labels;
    equality of the returned automata (states, transitions, initials, finals)
    is language equality.
    """
    labels = _transition_labels(a)
    start, table = _determinize(a, labels)
    b0, block_table, final_blocks = _minimize(start, table, lambda s: bool(s & a.finals))

    # Drop blocks that cannot reach a final block (at most one such sink).
    preds = defaultdict(set)
    for b, row in block_table.items():
        for l, b2 in row.items():
            preds[b2].add(b)
    live = set(final_blocks)
    queue = deque(live)
    while queue:
        x = queue.popleft()
        for p in preds[x]:
            if p not in live:
                live.add(p)
                queue.append(p)

    number = {b0: 0}
    order = deque([b0])
    transitions = []
    sorted_labels = sorted(labels, key=label_key)
    while order:
        b = order.popleft()
        for l in sorted_labels:
            b2 = block_table.get(b, {}).get(l)
            if b2 is None or b2 not in live:
                continue
            if b2 not in number:
                number[b2] = len(number)
                order.append(b2)
            transitions.append((number[b], l, number[b2]))
    finals = [number[b] for b in final_blocks if b in number]
    return StackAutomaton(range(len(number)), a.alphabet, transitions, [0], finals)


def language_includes(a, b):
    """True iff L(a) ⊆ L(b), decided exactly."""
    labels = _transition_labels(a, b)
    d0, table = _determinize(b, labels)
    b_finals = lambda d: bool(d & b.finals)
    seen = set()
    queue = deque((s, d0) for s in a.eps_closure(a.initials))
    seen.update(queue)
    while queue:
        s, d = queue.popleft()
        if s in a.finals and not b_finals(d):
            return False
        for (label, t) in a.out(s):
            if label is None:
                pair = (t, d)
            else:
                pair = (t, table[d][label])
            if pair not in seen:
                seen.add(pair)
                queue.append(pair)
    return True


def language_equal(a, b):
    """True iff L(a) = L(b), via containment both ways."""
    return language_includes(a, b) and language_includes(b, a)


def find_cycle(a):
    """A cycle (state list) in the trimmed transition graph, or None.

    None means every accepting path is simple, so the language is finite.
    """
    trimmed = a.trimmed()
    color = {}
    for root in sorted(trimmed.states, key=_state_key):
        if color.get(root):
            continue
        stack = [(root, iter([t for (_, t) in trimmed.out(root)]))]
        color[root] = 1
        path = [root]
        while stack:
            node, edges = stack[-1]
            advanced = False
            for t in edges:
                if color.get(t) == 1:
                    return path[path.index(t):] + [t]
                if not color.get(t):
                    color[t] = 1
                    path.append(t)
                    stack.append((t, iter([u for (_, u) in trimmed.out(t)])))
                    advanced = True
                    break
            if not advanced:
                color[node] = 2
                path.pop()
                stack.pop()
    return None


def has_accepting_cycle(a):
    """True iff the trimmed automaton has a cycle (infinite language)."""
    if isinstance(a, PSA):
        a = a.automaton
    return find_cycle(a) is not None


SaturationStats = namedtuple("SaturationStats", "added_transitions aux_states iterations")


class PSA:
    """A pushdown store automaton for one thread.

    `automaton` ranges over the thread alphabet plus BOTTOM; its initials are
    the shared states that carry configurations, and shared states never have
    incoming transitions.  `shared` and `alphabet` echo the thread's PDS.
    """

    def __init__(self, automaton, shared, alphabet):
        self.automaton = automaton
        self.shared = tuple(shared)
        self.alphabet = tuple(alphabet)
        if not set(shared) <= automaton.states:
            raise ValueError("shared states must be embedded in the automaton")
        if set(shared) & automaton.finals:
            raise ValueError("shared states cannot be final")


_FINAL = "accept"


def initial_psa(pds, init=None):
    """A PSA for an initial configuration set.

    With init=(q, word) the language is the single configuration ⟨q|word⟩;
    with init=None it is every ⟨q|w⟩ for q shared and |w| ≤ 1.
    """
    states = set(pds.shared)
    states.add(_FINAL)
    transitions = []
    initials = set()
    if init is None:
        mid = "top"
        states.add(mid)
        for q in pds.shared:
            initials.add(q)
            transitions.append((q, BOTTOM, _FINAL))
            for sym in pds.alphabet:
                transitions.append((q, sym, mid))
        if pds.alphabet:
            transitions.append((mid, BOTTOM, _FINAL))
    else:
        q, word = init
        initials.add(q)
        prev = q
        for i, sym in enumerate(word):
            nxt = ("w", i)
            states.add(nxt)
            transitions.append((prev, sym, nxt))
            prev = nxt
        transitions.append((prev, BOTTOM, _FINAL))
    automaton = StackAutomaton(states, pds.alphabet, transitions, initials, [_FINAL])
    return PSA(automaton, pds.shared, pds.alphabet)


def psa_of_language(pds, q, lang):
    """A PSA accepting {⟨q|w⟩ : w ∈ L(lang)} for one shared state q."""
    lang = eliminate_epsilon(lang)
    states = set(pds.shared)
    states.add(_FINAL)
    states.update(("L", s) for s in lang.states)
    transitions = [(("L", s), l, ("L", t)) for (s, l, t) in lang.transitions]
    for s0 in lang.initials:
        transitions.append((q, None, ("L", s0)))
    for f in lang.finals:
        transitions.append((("L", f), BOTTOM, _FINAL))
    automaton = StackAutomaton(states, pds.alphabet, transitions, [q], [_FINAL])
    return PSA(automaton, pds.shared, pds.alphabet)


def _encoded_rules(pds):
    """Rules rewritten onto the ⊥-extended alphabet (see module docstring)."""
    rules = []
    for act in pds.program:
        if act.lhs_top is EMPTY:
            if act.rhs_word:
                rules.append((act.lhs_state, BOTTOM, act.rhs_state,
                              (act.rhs_word[0], BOTTOM)))
            else:
                rules.append((act.lhs_state, BOTTOM, act.rhs_state, (BOTTOM,)))
        else:
            rules.append((act.lhs_state, act.lhs_top, act.rhs_state, act.rhs_word))
    return rules


def post_star(pds, psa):
    """Saturate a PSA so it accepts every reachable configuration.

    Standard worklist saturation: a pop adds an epsilon transition, a rewrite
    adds a relabeled transition, a push adds an auxiliary state (memoized per
    target-state/pushed-symbol pair) plus two transitions.  Rule left-hand
    sides match combined transitions q --ε--> x --σ--> t; since epsilon
    transitions start only at shared states and no transition enters a shared
    state, such chains have length at most one.
    """
    base = psa.automaton
    rules_at = defaultdict(list)
    for (p, top, p2, word) in _encoded_rules(pds):
        rules_at[(p, top)].append((p2, word))

    transitions = set()
    out = defaultdict(set)        # src -> {(label, dst)}
    eps_preds = defaultdict(set)  # dst -> {src with (src, ε, dst)}
    states = set(base.states)
    aux = {}
    queue = deque()

    def add(s, label, t):
        edge = (s, label, t)
        if edge in transitions:
            return
        transitions.add(edge)
        out[s].add((label, t))
        if label is None:
            eps_preds[t].add(s)
        queue.append(edge)

    def fire(p2, word, t):
        if not word:
            add(p2, None, t)
        elif len(word) == 1:
            add(p2, word[0], t)
        else:
            key = (p2, word[0])
            helper = aux.get(key)
            if helper is None:
                helper = ("push", p2, word[0])
                aux[key] = helper
                states.add(helper)
            add(p2, word[0], helper)
            add(helper, word[1], t)

    for edge in base.transitions:
        add(*edge)
    before = len(base.transitions)

    iterations = 0
    while queue:
        s, label, t = queue.popleft()
        iterations += 1
        if label is None:
            # New combined transitions (s, l2, u) for each edge out of t.
            for (l2, u) in list(out[t]):
                if l2 is not None:
                    for (p2, word) in rules_at.get((s, l2), ()):
                        fire(p2, word, u)
        else:
            for p in [s] + sorted(eps_preds[s], key=_state_key):
                for (p2, word) in rules_at.get((p, label), ()):
                    fire(p2, word, t)

    automaton = StackAutomaton(states, base.alphabet, transitions,
                               base.initials, base.finals)
    stats = SaturationStats(len(transitions) - before, len(aux), iterations)
    return PSA(automaton, psa.shared, psa.alphabet), stats


def accepts(psa, q, word):
    """True iff the PSA accepts configuration ⟨q|word⟩."""
    return psa.automaton.accepts_word(tuple(word) + (BOTTOM,), starts=[q])


def row_language(psa, q):
    """The plain stack-word automaton for {w : ⟨q|w⟩ accepted}, trimmed."""
    a = psa.automaton
    finals = set()
    transitions = []
    for (s, label, t) in a.transitions:
        if label is BOTTOM:
            if a.eps_closure([t]) & a.finals:
                finals.add(s)
        else:
            transitions.append((s, label, t))
    return StackAutomaton(a.states, psa.alphabet, transitions, [q], finals).trimmed()


def project_tops(a, q):
    """{T(w) : ⟨q|w⟩ accepted}: first stack symbols, with EMPTY for ε.

    Scans the transitions leaving q's closure and keeps labels whose target
    still reaches a final state; no words are enumerated.
    """
    if isinstance(a, PSA):
        aut = a.automaton
        live = aut.co_reachable()
        tops = set()
        for x in aut.eps_closure([q]):
            for (label, t) in aut.out(x):
                if label is BOTTOM:
                    if aut.eps_closure([t]) & aut.finals:
                        tops.add(EMPTY)
                elif label is not None and t in live:
                    tops.add(label)
        return tops
    live = a.co_reachable()
    closure = a.eps_closure([q])
    tops = set()
    if closure & a.finals:
        tops.add(EMPTY)
    for x in closure:
        for (label, t) in a.out(x):
            if label is not None and t in live:
                tops.add(label)
    return tops


def to_dot(a, name="automaton"):
    """GraphViz rendering of an automaton (or a PSA's automaton)."""
    if isinstance(a, PSA):
        a = a.automaton
    ids = {s: "n%d" % i for i, s in enumerate(sorted(a.states, key=_state_key))}
    lines = ["digraph %s {" % name, "    rankdir=LR;"]
    for s in sorted(a.states, key=_state_key):
        shape = "doublecircle" if s in a.finals else "circle"
        lines.append('    %s [label="%s", shape=%s];' % (ids[s], _state_text(s), shape))
    for s in sorted(a.initials, key=_state_key):
        lines.append('    start_%s [shape=point];' % ids[s])
        lines.append('    start_%s -> %s;' % (ids[s], ids[s]))
    for (s, label, t) in sorted(a.transitions,
                                key=lambda e: (_state_key(e[0]), label_key(e[1]), _state_key(e[2]))):
        text = "eps" if label is None else _state_text(label) if hasattr(label, "name") else repr(label)
        lines.append('    %s -> %s [label="%s"];' % (ids[s], ids[t], text))
    lines.append("}")
    return "\n".join(lines)
