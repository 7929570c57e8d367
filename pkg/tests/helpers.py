"""Shared test utilities: tiny random systems and brute-force oracles.

The oracles enumerate concrete configurations breadth-first, independently of
the layered exploration and the automaton saturation under test.  They cap
stack depth and state count and report whether any branch was cut off; with
no truncation the results are exact.
"""

from collections import deque

from cpdsv.automata import StackAutomaton
from cpdsv.model import (Action, CPDS, PDS, SharedState, StackSymbol, EMPTY,
                         enabled_successors, initial_state)


def make_shared(names):
    return tuple(SharedState(i, n) for i, n in enumerate(names))


def make_symbols(thread, names):
    return tuple(StackSymbol(thread, i, n) for i, n in enumerate(names))


def random_pds(rng, shared=None, thread=0, n_shared=3, n_symbols=3, n_rules=8):
    """A random pushdown thread; rules are deduplicated, order preserved."""
    if shared is None:
        shared = make_shared("q%d" % i for i in range(n_shared))
    alpha = make_symbols(thread, ("s%d_%d" % (thread, i) for i in range(n_symbols)))
    actions = []
    for _ in range(n_rules):
        lq = rng.choice(shared)
        top = rng.choice((EMPTY,) + alpha)
        rq = rng.choice(shared)
        length = rng.choice((0, 1, 1, 2))
        if top is EMPTY and length == 2:
            length = rng.choice((0, 1))
        word = tuple(rng.choice(alpha) for _ in range(length))
        actions.append(Action(lq, top, rq, word))
    seen, program = set(), []
    for act in actions:
        if act not in seen:
            seen.add(act)
            program.append(act)
    return PDS(shared, alpha, tuple(program), shared[0])


def random_cpds(rng, n_threads=2, n_shared=3, n_symbols=3, n_rules=6):
    shared = make_shared("q%d" % i for i in range(n_shared))
    threads = []
    stacks = []
    for t in range(n_threads):
        pds = random_pds(rng, shared=shared, thread=t,
                         n_symbols=n_symbols, n_rules=n_rules)
        threads.append(pds)
        depth = rng.randint(0, 1)
        stacks.append(tuple(rng.choice(pds.alphabet) for _ in range(depth)))
    return CPDS(shared, shared[0], tuple(threads), tuple(stacks))


def random_nfa(rng, labels, n_states=4, n_edges=6, with_eps=True):
    """A random automaton over the given stack symbols (plus epsilon)."""
    states = list(range(n_states))
    pool = list(labels) + ([None] if with_eps else [])
    transitions = {(rng.choice(states), rng.choice(pool), rng.choice(states))
                   for _ in range(n_edges)}
    initials = rng.sample(states, rng.randint(1, 2))
    finals = rng.sample(states, rng.randint(1, n_states))
    return StackAutomaton(states, tuple(labels), transitions, initials, finals)


def replay(cpds, path):
    """Re-execute a witness path step by step; returns the final state."""
    state = path.start
    for step in path.steps:
        hits = [s for (a, s) in enabled_successors(cpds, state, step.thread)
                if a == step.action]
        assert hits == [step.state], "step %s not enabled at %s" % (step, state)
        state = hits[0]
    return state


def bounded_context_reach(cpds, max_contexts, stack_cap=8, state_cap=40000):
    """(states reachable within max_contexts contexts, truncated flag).

    Tracks which thread ran last so maximal same-thread runs are counted as
    single contexts.  Branches whose stacks would exceed stack_cap are
    dropped and flagged; truncated False means the result is exact.
    """
    s0 = initial_state(cpds)
    start = (s0, -1, 0)
    seen = {start}
    states = {s0}
    queue = deque([start])
    truncated = False
    while queue:
        s, last, used = queue.popleft()
        for i in range(len(cpds.threads)):
            cost = 0 if i == last else 1
            if used + cost > max_contexts:
                continue
            for act, succ in enabled_successors(cpds, s, i):
                if len(succ.stacks[i]) > stack_cap:
                    truncated = True
                    continue
                key = (succ, i, used + cost)
                if key in seen:
                    continue
                if len(seen) >= state_cap:
                    return states, True
                seen.add(key)
                states.add(succ)
                queue.append(key)
    return states, truncated


def pds_successors(pds, q, word):
    top = word[0] if word else EMPTY
    out = []
    for act in pds.program:
        if act.lhs_state != q or act.lhs_top != top:
            continue
        rest = word[1:] if word else ()
        out.append((act.rhs_state, act.rhs_word + rest))
    return out


def pds_reach(pds, q, word, stack_cap=8, state_cap=20000):
    """(set of (q, word) configurations one thread can reach, truncated)."""
    start = (q, tuple(word))
    seen = {start}
    queue = deque([start])
    truncated = False
    while queue:
        cq, cw = queue.popleft()
        for config in pds_successors(pds, cq, cw):
            if len(config[1]) > stack_cap:
                truncated = True
                continue
            if config in seen:
                continue
            if len(seen) >= state_cap:
                return seen, True
            seen.add(config)
            queue.append(config)
    return seen, truncated


def full_expansion_layers(cpds, max_k, budget=10 ** 5):
    """Reference context-bounded exploration that re-expands every state.

    Returns cumulative state sets R_0..R_max_k.  Quadratic; only for
    cross-checking the frontier-based exploration on small systems.
    """
    from cpdsv.model import thread_closure

    current = {initial_state(cpds)}
    layers = [frozenset(current)]
    for _ in range(max_k):
        nxt = set(current)
        for s in current:
            for i in range(len(cpds.threads)):
                nxt |= thread_closure(cpds, s, i, budget)
        current = nxt
        layers.append(frozenset(current))
    return layers
