"""Context-insensitive overapproximation of the reachable visible states.

Each thread's rules are abstracted to a finite relation on (shared state,
top-of-stack) pairs: a rule's effect is cut off below the top symbol.  A rule
that empties its stack may expose any symbol that some push ever buried, so
such rules fan out to every buried ("emerging") symbol.  Running the threads'
abstract relations as an asynchronous product from the initial visible state
yields a finite set Z that contains every visible projection of a reachable
global state, at any context bound.

Generator states are the visible states from which a context switch can
strictly grow the set of later-visible configurations: some thread i just
finished a pop (its next top is ε or an emerging symbol) while every other
thread still has work on its stack.  Convergence tests compare the reachable
generators (overapproximated by G ∩ Z) against what exploration has seen.
"""

from collections import deque, namedtuple
from itertools import product

from .model import EMPTY, VisibleState, initial_state, visible, visible_key

# One thread's abstraction: transitions is a set of ((q, top), (q2, top2))
# pairs with tops in Σ_i ∪ {EMPTY}; emerging collects every symbol that some
# two-symbol push buries.
ThreadAbstraction = namedtuple("ThreadAbstraction", "transitions emerging")

GeneratorSpec = namedtuple("GeneratorSpec", "pop_targets emerging")


def build_abstraction(pds):
    """Abstract one thread's rules onto (shared state, top) pairs."""
    emerging = frozenset(act.rhs_word[1] for act in pds.program
                         if len(act.rhs_word) == 2)
    transitions = set()
    for act in pds.program:
        src = (act.lhs_state, act.lhs_top)
        top2 = act.rhs_word[0] if act.rhs_word else EMPTY
        transitions.add((src, (act.rhs_state, top2)))
        if not act.rhs_word:
            # The stack below is unknown; any buried symbol may surface.
            for sym in emerging:
                transitions.add((src, (act.rhs_state, sym)))
    return ThreadAbstraction(frozenset(transitions), emerging)


def compute_Z(cpds):
    """All visible states reachable in the product of the abstractions."""
    succ = []
    for pds in cpds.threads:
        table = {}
        for (src, dst) in build_abstraction(pds).transitions:
            table.setdefault(src, []).append(dst)
        succ.append(table)
    start = visible(initial_state(cpds))
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for i, table in enumerate(succ):
            for (q2, top2) in table.get((v.q, v.tops[i]), ()):
                tops = v.tops[:i] + (top2,) + v.tops[i + 1:]
                v2 = VisibleState(q2, tops)
                if v2 not in seen:
                    seen.add(v2)
                    queue.append(v2)
    return frozenset(seen)


def generator_spec(cpds):
    """Pop targets and emerging symbols per thread, read off the rules."""
    pop_targets = []
    emerging = []
    for pds in cpds.threads:
        pop_targets.append(frozenset(act.rhs_state for act in pds.program
                                     if act.kind == "pop"))
        emerging.append(frozenset(act.rhs_word[1] for act in pds.program
                                  if len(act.rhs_word) == 2))
    return GeneratorSpec(tuple(pop_targets), tuple(emerging))


def is_generator(spec, v):
    """True iff v is a state where a context switch can uncover new stacks.

    Some thread i must be at a pop target with its top gone (ε) or freshly
    emerged, while every other thread's stack is nonempty.
    """
    for i, targets in enumerate(spec.pop_targets):
        if v.q not in targets:
            continue
        if v.tops[i] is not EMPTY and v.tops[i] not in spec.emerging[i]:
            continue
        if all(v.tops[j] is not EMPTY for j in range(len(v.tops)) if j != i):
            return True
    return False


def enumerate_generators(cpds, spec=None):
    """The full generator set over Q × Σ_1^{≤1} × … × Σ_n^{≤1}, sorted."""
    if spec is None:
        spec = generator_spec(cpds)
    domains = [(EMPTY,) + tuple(pds.alphabet) for pds in cpds.threads]
    out = [VisibleState(q, tops)
           for q in cpds.shared
           for tops in product(*domains)
           if is_generator(spec, VisibleState(q, tops))]
    return sorted(out, key=visible_key)


def reachable_generators_upper(cpds):
    """G ∩ Z: every generator that could ever be visible, overapproximated."""
    spec = generator_spec(cpds)
    return frozenset(v for v in compute_Z(cpds) if is_generator(spec, v))
