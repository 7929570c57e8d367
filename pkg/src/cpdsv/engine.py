"""Top-level analyses and the combined verification procedure.

Three verdicts: Unsafe carries the context bound of a found violation plus a
witness; SafeConverged means the visible (or full) state sets provably stopped
growing, so the property holds for every context bound; Inconclusive carries
why the search stopped (budget, timeout, or the round cap) and the last fully
completed bound.

The combined procedure first decides whether every context bound reaches only
finitely many states (fcr_check): if so, it races the explicit convergence
algorithm against the plain explicit plateau scheme, advancing both one round
at a time and returning the first conclusive answer; otherwise only the
symbolic convergence algorithm applies.  The race is deterministic: workers
are polled in a fixed order and ties are broken by smaller bound, then in
favor of the convergence algorithm.
"""

import time
from collections import namedtuple

from . import approx, explicit, symbolic
from .automata import find_cycle, initial_psa, post_star

Unsafe = namedtuple("Unsafe", "k witness path")
SafeConverged = namedtuple("SafeConverged", "k method")
Inconclusive = namedtuple("Inconclusive", "reason progress")

Budgets = namedtuple("Budgets", "max_k closure_budget layer_budget timeout")

DEFAULT_BUDGETS = Budgets(max_k=20, closure_budget=10 ** 6,
                          layer_budget=10 ** 4, timeout=1800.0)


class FcrResult:
    """Per-thread loop-freedom evidence; truthy iff every bound stays finite.

    cycles[i] is None when thread i's saturated store automaton is loop-free,
    else a state cycle witnessing an infinite per-context reach.
    """

    def __init__(self, holds, cycles):
        self.holds = holds
        self.cycles = tuple(cycles)

    def __bool__(self):
        return self.holds


def fcr_check(cpds):
    """Sufficient finiteness check: saturate each thread from every ⟨q|σ^{≤1}⟩
    and look for cycles on accepting paths."""
    cycles = []
    for pds in cpds.threads:
        saturated, _ = post_star(pds, initial_psa(pds))
        cycles.append(find_cycle(saturated.automaton))
    return FcrResult(all(c is None for c in cycles), cycles)


def _drive(rounds):
    for kind, payload in rounds:
        if kind == "verdict":
            return payload
    raise RuntimeError("analysis ended without a verdict")


def _alg3_explicit_rounds(cpds, prop, budgets):
    """Explicit convergence algorithm, one round per yield.

    A round k is safe-convergent when the visible sets plateau freshly
    (T-layer k−2 strictly below T-layer k−1 = T-layer k) and every possibly
    reachable generator has been seen; the reported bound is the plateau
    start k−1, the point the visible sets last grew.
    """
    deadline = time.monotonic() + budgets.timeout
    ginz = approx.reachable_generators_upper(cpds)
    layer = explicit.initial_layer(cpds)
    hit = explicit.find_violation(layer, prop)
    if hit:
        yield "verdict", Unsafe(0, hit[0], hit[1])
        return
    history = [frozenset(layer.visibles())]
    for k in range(1, budgets.max_k + 1):
        if time.monotonic() > deadline:
            yield "verdict", Inconclusive("timeout", k - 1)
            return
        try:
            layer = explicit.next_layer(cpds, layer, budgets.closure_budget)
        except explicit.BudgetExhausted:
            yield "verdict", Inconclusive("budget", k - 1)
            return
        hit = explicit.find_violation(layer, prop)
        if hit:
            yield "verdict", Unsafe(k, hit[0], hit[1])
            return
        tops = frozenset(layer.visibles())
        older = history[-2] if len(history) >= 2 else frozenset()
        if tops == history[-1] and older < history[-1] and ginz <= tops:
            yield "verdict", SafeConverged(k - 1, "alg3-explicit")
            return
        history.append(tops)
        yield "round", k
    yield "verdict", Inconclusive("max-k", budgets.max_k)


def _alg3_symbolic_rounds(cpds, prop, budgets):
    """Symbolic convergence algorithm; same plateau logic over tops(S_k)."""
    deadline = time.monotonic() + budgets.timeout
    ginz = approx.reachable_generators_upper(cpds)
    layer = symbolic.initial_symbolic_layer(cpds)
    hit = symbolic.find_violation(layer, prop)
    if hit:
        yield "verdict", Unsafe(0, hit, None)
        return
    history = [layer.tops]
    for k in range(1, budgets.max_k + 1):
        if time.monotonic() > deadline:
            yield "verdict", Inconclusive("timeout", k - 1)
            return
        layer = symbolic.next_symbolic_layer(cpds, layer)
        if len(layer.states) > budgets.layer_budget:
            yield "verdict", Inconclusive("budget", k - 1)
            return
        hit = symbolic.find_violation(layer, prop)
        if hit:
            yield "verdict", Unsafe(k, hit, None)
            return
        older = history[-2] if len(history) >= 2 else frozenset()
        if layer.tops == history[-1] and older < history[-1] and ginz <= layer.tops:
            yield "verdict", SafeConverged(k - 1, "alg3-symbolic")
            return
        history.append(layer.tops)
        yield "round", k
    yield "verdict", Inconclusive("max-k", budgets.max_k)


def alg3(cpds, prop, backend, budgets=DEFAULT_BUDGETS):
    """Convergence-test analysis over visible states (either backend)."""
    if backend == "explicit":
        return _drive(_alg3_explicit_rounds(cpds, prop, budgets))
    if backend == "symbolic":
        return _drive(_alg3_symbolic_rounds(cpds, prop, budgets))
    raise ValueError("unknown backend %r" % (backend,))


def scheme1(cpds, prop, backend, budgets=DEFAULT_BUDGETS):
    """Plain plateau scheme (layer k−1 = layer k), either backend."""
    if backend == "explicit":
        return explicit.scheme1_explicit(cpds, prop, budgets)
    if backend == "symbolic":
        return symbolic.scheme1_symbolic(cpds, prop, budgets)
    raise ValueError("unknown backend %r" % (backend,))


def _pick(verdicts):
    """Arbitrate conclusive verdicts from one polling window."""
    ranked = [v for v in verdicts if isinstance(v, Unsafe)]
    if not ranked:
        ranked = [v for v in verdicts if isinstance(v, SafeConverged)]
    return min(ranked, key=lambda v: v.k)


def cuba(cpds, prop, budgets=DEFAULT_BUDGETS):
    """The combined procedure: race explicit analyses under finiteness, else
    fall back to the symbolic convergence algorithm."""
    if not fcr_check(cpds):
        return alg3(cpds, prop, "symbolic", budgets)
    workers = [
        ("alg3", _alg3_explicit_rounds(cpds, prop, budgets)),
        ("scheme1", explicit.scheme1_rounds(cpds, prop, budgets)),
    ]
    parked = {}
    active = dict(workers)
    while active:
        window = {}
        for name, _ in workers:
            rounds = active.get(name)
            if rounds is None:
                continue
            kind, payload = next(rounds)
            if kind == "verdict":
                window[name] = payload
                del active[name]
        conclusive = [window[n] for n, _ in workers
                      if n in window and not isinstance(window[n], Inconclusive)]
        if conclusive:
            return _pick(conclusive)
        parked.update(window)
    return parked.get("alg3", parked.get("scheme1"))
