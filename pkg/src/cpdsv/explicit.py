"""Explicit-state exploration by context rounds.

Layer k holds every global state reachable with at most k contexts, where a
context is one thread running any number of steps.  Layers grow monotonically;
each layer records the states that are new at its bound together with a
witness path for each.  Exploration only expands the previous layer's new
states: closures of older states were already taken and can add nothing.
"""

import time

from . import model
from .model import BudgetExhausted, Path, state_key, visible
from .textfmt import matches


class ReachLayer:
    """One bound's worth of reachable states.

    states is cumulative, delta holds the states new at this bound, and
    witnesses maps each new state to a path reaching it within k contexts.
    Treat instances as immutable snapshots.
    """

    def __init__(self, k, states, delta, witnesses):
        self.k = k
        self.states = frozenset(states)
        self.delta = frozenset(delta)
        self.witnesses = witnesses

    def visibles(self):
        return {visible(s) for s in self.states}


class ReachTable:
    """Layers 0..k with per-bound visible-state deltas.

    exhausted marks a table cut short by a closure budget; the layers that
    were completed remain valid.
    """

    def __init__(self, layers, visible_deltas, exhausted):
        self.layers = tuple(layers)
        self.visible_deltas = tuple(visible_deltas)
        self.exhausted = exhausted


def initial_layer(cpds):
    s0 = model.initial_state(cpds)
    return ReachLayer(0, [s0], [s0], {s0: Path(s0, ())})


def next_layer(cpds, prev, budget):
    """The layer one context bound further out.

    Raises BudgetExhausted when a single context's closure exceeds budget
    states (the per-context reachable set is then likely infinite).
    """
    states = set(prev.states)
    delta = set()
    witnesses = {}
    for s in sorted(prev.delta, key=state_key):
        base = prev.witnesses[s]
        for i in range(len(cpds.threads)):
            paths = model.thread_closure_paths(cpds, s, i, budget)
            for t in sorted(paths, key=state_key):
                if t not in states:
                    states.add(t)
                    delta.add(t)
                    witnesses[t] = Path(base.start, base.steps + paths[t])
    return ReachLayer(prev.k + 1, states, delta, witnesses)


def build_table(cpds, max_k, budget):
    """Layers 0..max_k with visible deltas; stops early only on budget."""
    layer = initial_layer(cpds)
    layers = [layer]
    seen_visible = layer.visibles()
    visible_deltas = [frozenset(seen_visible)]
    exhausted = False
    for _ in range(max_k):
        try:
            layer = next_layer(cpds, layer, budget)
        except BudgetExhausted:
            exhausted = True
            break
        layers.append(layer)
        fresh = {visible(s) for s in layer.delta} - seen_visible
        seen_visible |= fresh
        visible_deltas.append(frozenset(fresh))
    return ReachTable(layers, visible_deltas, exhausted)


def find_violation(layer, prop):
    """(visible state, witness path) for the first new bad state, or None."""
    for s in sorted(layer.delta, key=state_key):
        v = visible(s)
        if matches(prop, v):
            return v, layer.witnesses[s]
    return None


def scheme1_rounds(cpds, prop, budgets):
    """The plateau scheme as a round generator, for lockstep racing.

    Yields ("round", k) after every bound explored without an answer and
    ("verdict", v) once: Unsafe as soon as a layer contains a state whose
    visible projection matches prop (the initial state reports k=0);
    SafeConverged once two consecutive layers are equal — the layer sequence
    is stutter-free, so one repeat means no layer ever grows again.
    """
    from .engine import Unsafe, SafeConverged, Inconclusive

    deadline = time.monotonic() + budgets.timeout
    layer = initial_layer(cpds)
    hit = find_violation(layer, prop)
    if hit:
        yield "verdict", Unsafe(0, hit[0], hit[1])
        return
    for k in range(1, budgets.max_k + 1):
        if time.monotonic() > deadline:
            yield "verdict", Inconclusive("timeout", k - 1)
            return
        try:
            nxt = next_layer(cpds, layer, budgets.closure_budget)
        except BudgetExhausted:
            yield "verdict", Inconclusive("budget", k - 1)
            return
        hit = find_violation(nxt, prop)
        if hit:
            yield "verdict", Unsafe(k, hit[0], hit[1])
            return
        if nxt.states == layer.states:
            yield "verdict", SafeConverged(k, "scheme1-explicit")
            return
        layer = nxt
        yield "round", k
    yield "verdict", Inconclusive("max-k", budgets.max_k)


def scheme1_explicit(cpds, prop, budgets):
    """Run the plateau scheme to completion; see scheme1_rounds."""
    for kind, payload in scheme1_rounds(cpds, prop, budgets):
        if kind == "verdict":
            return payload
    raise RuntimeError("analysis ended without a verdict")
