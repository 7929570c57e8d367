"""Verdicts of the top-level analyses and the combined procedure."""

import pytest

from cpdsv import engine, explicit
from cpdsv.engine import (DEFAULT_BUDGETS, Inconclusive, SafeConverged,
                          Unsafe, fcr_check)
from cpdsv.model import contexts, format_visible, initial_state
from cpdsv.textfmt import PropertySpec, parse_cpds, serialize_cpds

from helpers import replay


def test_fcr_holds_for_loop_free_fixtures(carousel, carousel_deadpop, adders, inert):
    for cpds, _ in (carousel, carousel_deadpop, adders, inert):
        result = fcr_check(cpds)
        assert result.holds and bool(result)
        assert result.cycles == (None,) * len(cpds.threads)


def test_fcr_fails_with_cycle_witnesses_for_pumping_threads(flagrace):
    cpds, _ = flagrace
    result = fcr_check(cpds)
    assert not result.holds and not bool(result)
    # Both threads can grow their stack without bound inside one context.
    for cycle in result.cycles:
        assert cycle is not None
        assert len(cycle) >= 2 and cycle[0] == cycle[-1]


def test_convergence_analysis_proves_growing_stacks_safe(carousel):
    cpds, prop = carousel
    assert engine.alg3(cpds, prop, "explicit") == SafeConverged(5, "alg3-explicit")
    assert engine.alg3(cpds, prop, "symbolic") == SafeConverged(5, "alg3-symbolic")


def test_plain_plateau_scheme_never_fires_when_states_keep_growing(carousel):
    cpds, prop = carousel
    budgets = DEFAULT_BUDGETS._replace(max_k=8)
    assert engine.scheme1(cpds, prop, "explicit", budgets) == Inconclusive("max-k", 8)


def test_violation_found_by_every_method_and_backend(adders):
    cpds, prop = adders
    for method in (engine.alg3, engine.scheme1):
        for backend in ("explicit", "symbolic"):
            verdict = method(cpds, prop, backend)
            assert isinstance(verdict, Unsafe)
            assert verdict.k == 3
            assert format_visible(verdict.witness) == "<done|c,c,eps>"
            if backend == "explicit":
                final = replay(cpds, verdict.path)
                assert (final.q, tuple(w[0] if w else None for w in final.stacks)) == \
                    (verdict.witness.q, verdict.witness.tops)
                assert contexts(verdict.path) == 3
            else:
                assert verdict.path is None


def test_initial_violation_reported_at_bound_zero(adders):
    cpds, _ = adders
    text = serialize_cpds(cpds, PropertySpec(())).rstrip()
    text += "\nbad: (s0 | *, *, *) ;\n"
    cpds2, prop = parse_cpds(text)
    for method in (engine.alg3, engine.scheme1):
        for backend in ("explicit", "symbolic"):
            verdict = method(cpds2, prop, backend)
            assert isinstance(verdict, Unsafe) and verdict.k == 0
            assert format_visible(verdict.witness) == "<s0|z,z,g>"
            if backend == "explicit":
                assert verdict.path.steps == ()
    assert engine.cuba(cpds2, prop).k == 0


def test_convergence_beats_plain_plateau_by_one_round(adders, adders_safe_prop):
    cpds, _ = adders
    for backend in ("explicit", "symbolic"):
        assert engine.alg3(cpds, adders_safe_prop, backend).k == 3
        assert engine.scheme1(cpds, adders_safe_prop, backend).k == 4


def test_combined_procedure_races_explicit_workers(adders, adders_safe_prop, inert):
    cpds, _ = adders
    assert engine.cuba(cpds, adders_safe_prop) == SafeConverged(3, "alg3-explicit")
    inert_cpds, inert_prop = inert
    assert engine.cuba(inert_cpds, inert_prop) == SafeConverged(0, "alg3-explicit")


def test_combined_procedure_falls_back_to_symbolic(flagrace, flagrace_safe):
    cpds, prop = flagrace
    verdict = engine.cuba(cpds, prop)
    assert isinstance(verdict, Unsafe)
    assert verdict.k == 2 and verdict.path is None
    assert format_visible(verdict.witness) == "<1|4,9>"
    safe_cpds, safe_prop = flagrace_safe
    assert engine.cuba(safe_cpds, safe_prop) == SafeConverged(2, "alg3-symbolic")


def test_exhausted_closure_budget_is_inconclusive(flagrace):
    cpds, prop = flagrace
    budgets = DEFAULT_BUDGETS._replace(closure_budget=100)
    assert engine.alg3(cpds, prop, "explicit", budgets) == Inconclusive("budget", 0)
    assert engine.scheme1(cpds, prop, "explicit", budgets) == Inconclusive("budget", 0)


def test_exhausted_layer_budget_is_inconclusive(flagrace_safe):
    cpds, prop = flagrace_safe
    budgets = DEFAULT_BUDGETS._replace(layer_budget=4)
    assert engine.alg3(cpds, prop, "symbolic", budgets) == Inconclusive("budget", 0)
    assert engine.scheme1(cpds, prop, "symbolic", budgets) == Inconclusive("budget", 0)


def test_timeout_is_inconclusive(carousel):
    cpds, prop = carousel
    budgets = DEFAULT_BUDGETS._replace(timeout=0.0)
    assert engine.alg3(cpds, prop, "explicit", budgets) == Inconclusive("timeout", 0)
    assert engine.cuba(cpds, prop, budgets) == Inconclusive("timeout", 0)


def test_round_cap_is_inconclusive(carousel_deadpop):
    cpds, prop = carousel_deadpop
    budgets = DEFAULT_BUDGETS._replace(max_k=8)
    assert engine.alg3(cpds, prop, "explicit", budgets) == Inconclusive("max-k", 8)
    assert engine.cuba(cpds, prop, budgets) == Inconclusive("max-k", 8)


def test_arbitration_prefers_violations_then_smaller_bounds():
    unsafe5 = Unsafe(5, None, None)
    unsafe2 = Unsafe(2, None, None)
    safe3a = SafeConverged(3, "alg3-explicit")
    safe3b = SafeConverged(3, "scheme1-explicit")
    assert engine._pick([safe3a, unsafe5]) is unsafe5
    assert engine._pick([unsafe5, unsafe2]) is unsafe2
    assert engine._pick([SafeConverged(4, "x"), safe3a]) is safe3a
    # Equal bounds keep the first worker listed (the convergence algorithm).
    assert engine._pick([safe3a, safe3b]) is safe3a


def test_unknown_backend_is_rejected(adders):
    cpds, prop = adders
    with pytest.raises(ValueError):
        engine.alg3(cpds, prop, "concolic")
    with pytest.raises(ValueError):
        engine.scheme1(cpds, prop, "concolic")


def test_safety_verdicts_hold_past_the_convergence_point(
        carousel, adders, adders_safe_prop, inert):
    cases = [(carousel[0], carousel[1]), (adders[0], adders_safe_prop),
             (inert[0], inert[1])]
    for cpds, prop in cases:
        verdict = engine.cuba(cpds, prop)
        assert isinstance(verdict, SafeConverged)
        table = explicit.build_table(cpds, verdict.k + 3, 10 ** 6)
        for layer in table.layers:
            assert explicit.find_violation(layer, prop) is None


def test_verdicts_are_deterministic(carousel, adders):
    for cpds, prop in (carousel, adders):
        assert engine.cuba(cpds, prop) == engine.cuba(cpds, prop)


def test_verdicts_are_stable_under_budget_slack(carousel, adders):
    for cpds, prop in (carousel, adders):
        tight = DEFAULT_BUDGETS._replace(max_k=8, closure_budget=10 ** 3)
        assert engine.cuba(cpds, prop, tight) == engine.cuba(cpds, prop)
