"""End-to-end checks of the verifier's headline behaviors, each with its own
runtime bound: refutation and convergence on the two flagship systems,
backend agreement and saturation exactness on random populations, soundness
of the finite overapproximation, layer monotonicity, and verdict stability.
"""

import random
import time

from cpdsv import approx, engine, explicit, symbolic
from cpdsv.automata import (accepts, initial_psa, language_includes,
                            post_star, row_language)
from cpdsv.engine import DEFAULT_BUDGETS, SafeConverged, Unsafe
from cpdsv.model import EMPTY, format_visible

from helpers import pds_reach, random_cpds, random_pds


def visible_names(items):
    return sorted(format_visible(v) for v in items)


def pair_names(pairs):
    return {((q.name, EMPTY if t is EMPTY else t.name),
             (q2.name, EMPTY if t2 is EMPTY else t2.name))
            for ((q, t), (q2, t2)) in pairs}


def test_flag_race_refuted_at_two_contexts_and_converges_without_property(
        flagrace, flagrace_safe):
    t0 = time.perf_counter()
    cpds, prop = flagrace

    verdict = engine.cuba(cpds, prop)
    assert isinstance(verdict, Unsafe) and verdict.k == 2
    assert format_visible(verdict.witness) == "<1|4,9>"

    # one context bound lower the bad visible state is not reachable
    layer1 = symbolic.next_symbolic_layer(cpds, symbolic.initial_symbolic_layer(cpds))
    assert symbolic.find_violation(layer1, prop) is None
    assert "<1|4,9>" not in {format_visible(v) for v in layer1.tops}

    # with no bad states the plain plateau scheme proves safety at bound 3
    safe_cpds, safe_prop = flagrace_safe
    assert engine.scheme1(safe_cpds, safe_prop, "symbolic") == \
        SafeConverged(3, "scheme1-symbolic")

    # both threads can pump their stack, so the explicit backend is out
    fcr = engine.fcr_check(cpds)
    assert not fcr.holds and all(c is not None for c in fcr.cycles)
    assert time.perf_counter() - t0 < 5.0


def test_carousel_plateau_rejected_until_every_generator_is_seen(carousel):
    t0 = time.perf_counter()
    cpds, prop = carousel
    assert engine.fcr_check(cpds).holds

    ring = approx.build_abstraction(cpds.threads[0])
    assert pair_names(ring.transitions) == {
        (("0", "1"), ("1", "2")),
        (("3", "2"), ("0", "1")),
    }
    belt = approx.build_abstraction(cpds.threads[1])
    assert pair_names(belt.transitions) == {
        (("0", "4"), ("0", EMPTY)),
        (("0", "4"), ("0", "6")),
        (("1", "4"), ("2", "5")),
        (("2", "5"), ("3", "4")),
    }

    generators = approx.enumerate_generators(cpds, approx.generator_spec(cpds))
    assert [format_visible(v) for v in generators] == \
        ["<0|1,eps>", "<0|1,6>", "<0|2,eps>", "<0|2,6>"]
    ginz = approx.reachable_generators_upper(cpds)
    assert visible_names(ginz) == ["<0|1,6>", "<0|1,eps>"]

    table = explicit.build_table(cpds, 6, 10 ** 6)
    assert [visible_names(d) for d in table.visible_deltas] == [
        ["<0|1,4>"],
        ["<0|1,eps>", "<1|2,4>"],
        ["<1|2,eps>", "<2|2,5>", "<3|2,4>"],
        [],
        ["<0|1,6>"],
        ["<1|2,6>"],
        [],
    ]
    # the visible sets plateau at bound 2..3, but one possibly reachable
    # generator is still missing, so the plateau must not be accepted
    seen3 = set(table.layers[3].visibles())
    assert not (ginz <= seen3)
    assert visible_names(ginz - seen3) == ["<0|1,6>"]
    # growth resumes at bound 4 and the accepted plateau starts at 5
    assert visible_names(table.visible_deltas[4]) == ["<0|1,6>"]
    assert engine.alg3(cpds, prop, "explicit") == SafeConverged(5, "alg3-explicit")
    assert time.perf_counter() - t0 < 5.0


def test_backends_agree_on_visible_sets_of_random_systems():
    t0 = time.perf_counter()
    rng = random.Random(31)
    completed = 0
    for _ in range(800):
        if completed >= 200:
            break
        cpds = random_cpds(rng)
        try:
            table = explicit.build_table(cpds, 4, 3000)
        except explicit.BudgetExhausted:
            continue
        if table.exhausted or len(table.layers) < 5:
            continue
        layer = symbolic.initial_symbolic_layer(cpds)
        assert frozenset(table.layers[0].visibles()) == layer.tops
        for k in range(1, 5):
            layer = symbolic.next_symbolic_layer(cpds, layer)
            assert frozenset(table.layers[k].visibles()) == layer.tops
        completed += 1
    assert completed >= 200
    assert time.perf_counter() - t0 < 120.0


def test_saturation_matches_concrete_search_on_random_threads():
    t0 = time.perf_counter()
    rng = random.Random(41)
    completed = 0
    for _ in range(400):
        if completed >= 100:
            break
        pds = random_pds(rng)
        word = tuple(rng.choice(pds.alphabet) for _ in range(rng.randint(0, 1)))
        start = (rng.choice(pds.shared), word)
        reach, truncated = pds_reach(pds, *start, stack_cap=8, state_cap=40000)
        if truncated:
            continue
        saturated, _ = post_star(pds, initial_psa(pds, start))
        for (q, w) in reach:
            if len(w) <= 5:
                assert accepts(saturated, q, w)
        for q in pds.shared:
            got = set(row_language(saturated, q).words(5))
            want = {w for (q2, w) in reach if q2 == q and len(w) <= 5}
            assert got == want
        completed += 1
    assert completed >= 100
    assert time.perf_counter() - t0 < 60.0


def test_visible_reachability_stays_inside_the_overapproximation(
        carousel, carousel_deadpop, flagrace, flagrace_safe, adders, inert):
    t0 = time.perf_counter()
    fixtures = (carousel, carousel_deadpop, flagrace, flagrace_safe, adders, inert)
    for cpds, _ in fixtures:
        z = approx.compute_Z(cpds)
        layer = symbolic.initial_symbolic_layer(cpds)
        assert layer.tops <= z
        for _ in range(6):
            layer = symbolic.next_symbolic_layer(cpds, layer)
            assert layer.tops <= z
        if engine.fcr_check(cpds).holds:
            table = explicit.build_table(cpds, 6, 10 ** 6)
            for reach_layer in table.layers:
                assert frozenset(reach_layer.visibles()) <= z
    assert time.perf_counter() - t0 < 30.0


def test_layers_never_shrink_and_plateaus_persist(
        carousel, carousel_deadpop, flagrace, adders, inert):
    for cpds, _ in (carousel, carousel_deadpop, adders, inert):
        table = explicit.build_table(cpds, 8, 10 ** 6)
        states = [layer.states for layer in table.layers]
        for k in range(len(states) - 1):
            assert states[k] <= states[k + 1]
        for k in range(len(states) - 1):
            if states[k] == states[k + 1] and k + 4 < len(states):
                assert states[k + 1] == states[k + 2] == states[k + 3] == states[k + 4]

    # the pumping fixture only admits the symbolic representation
    cpds, _ = flagrace
    layers = [symbolic.initial_symbolic_layer(cpds)]
    for _ in range(6):
        layers.append(symbolic.next_symbolic_layer(cpds, layers[-1]))
    for a, b in zip(layers, layers[1:]):
        assert a.tops <= b.tops
        for q in cpds.shared:
            assert language_includes(symbolic._aggregate(cpds, a, q),
                                     symbolic._aggregate(cpds, b, q))
    assert symbolic.layers_equal(cpds, layers[2], layers[3])
    for k in (3, 4, 5):
        assert symbolic.layers_equal(cpds, layers[k], layers[k + 1])


def test_toy_counter_verdicts_are_stable_across_configurations(
        adders, adders_safe_prop):
    cpds, prop = adders
    tight = DEFAULT_BUDGETS._replace(max_k=8, closure_budget=10 ** 3,
                                     layer_budget=10 ** 2)
    for budgets in (DEFAULT_BUDGETS, tight):
        for method in (engine.alg3, engine.scheme1):
            for backend in ("explicit", "symbolic"):
                verdict = method(cpds, prop, backend, budgets)
                assert isinstance(verdict, Unsafe) and verdict.k == 3
                assert format_visible(verdict.witness) == "<done|c,c,eps>"
        assert engine.cuba(cpds, prop, budgets) == engine.cuba(cpds, prop)

        for backend in ("explicit", "symbolic"):
            assert engine.alg3(cpds, adders_safe_prop, backend, budgets).k == 3
            assert engine.scheme1(cpds, adders_safe_prop, backend, budgets).k == 4
        assert engine.cuba(cpds, adders_safe_prop, budgets) == \
            SafeConverged(3, "alg3-explicit")
