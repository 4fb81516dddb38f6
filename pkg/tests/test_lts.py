import json
import random

import pytest

from lnpi.atoms import Atom, swap
from lnpi.gen import rand_config
from lnpi.lts import (
    BoundOutput,
    CheckError,
    Cofinite,
    Config,
    Derivation,
    ExtrusionClash,
    IllFormedConfig,
    Input,
    NoSuchTransition,
    NotFreshAtStart,
    Output,
    Tau,
    Trace,
    Transition,
    action_from_json,
    check,
    extr,
    extrusion_counterexample,
    normalize_transition,
    rename_trace,
    replay,
    step,
    weaken,
)
from lnpi.namesets import NameSet
from lnpi.permtypes import IndexedFamily, is_fresh
from lnpi.pisyntax import Bound, Free, Inp, Nil, Out, Par, Rep, Res, Sum, free_names

a = [Atom(i) for i in range(12)]


def F(i: int) -> Free:
    return Free(a[i])


def fin(*idx: int) -> NameSet:
    return NameSet.finite([a[i] for i in idx])


def only(result) -> tuple[Transition, Derivation]:
    assert len(result.results) == 1
    return result.results[0]


# ------------- actions -------------


def test_action_support_and_extrusion() -> None:
    assert Tau().support() == NameSet.empty()
    assert Output(a[0], a[1]).support() == fin(0, 1)
    assert extr(BoundOutput(a[0], a[1])) == fin(1)
    assert extr(Input(a[0], a[1])) == NameSet.empty()


def test_action_permutation_and_json() -> None:
    acts = [Tau(), Input(a[0], a[1]), Output(a[2], a[2]), BoundOutput(a[0], a[3])]
    p = swap(a[0], a[3])
    for act in acts:
        assert action_from_json(act.to_json()) == act
        assert action_from_json(act.perm_apply(p).to_json()) == act.perm_apply(p)
    assert BoundOutput(a[0], a[3]).perm_apply(p) == BoundOutput(a[3], a[0])
    with pytest.raises(ValueError):
        action_from_json({"tag": "zap"})


# ------------- configurations -------------


def test_config_support_joins_env_and_free_names() -> None:
    cfg = Config(fin(0), Out(F(1), F(1), Nil()))
    assert cfg.support() == fin(0, 1)


def test_step_rejects_infinite_environments() -> None:
    with pytest.raises(IllFormedConfig):
        step(Config(NameSet.cofinite([a[0]]), Nil()))


def test_step_rejects_open_processes() -> None:
    with pytest.raises(IllFormedConfig):
        step(Config(fin(0), Out(Bound(0), F(0), Nil())))


# ------------- single-rule enumeration -------------


def test_nil_has_no_transitions() -> None:
    r = step(Config(fin(0), Nil()))
    assert r.results == () and r.complete


def test_output_emits_and_extends_the_environment() -> None:
    t, d = only(step(Config(fin(0), Out(F(0), F(1), Nil()))))
    assert d.rule == "Out" and d.premises == ()
    assert t.action == Output(a[0], a[1])
    assert t.dst == Config(fin(0, 1), Nil())


def test_output_on_unknown_channel_is_silent_dead() -> None:
    # the observer cannot interact on a channel it does not know
    r = step(Config(NameSet.empty(), Out(F(0), F(1), Nil())))
    assert r.results == () and r.complete


def test_input_enumerates_known_names_plus_one_fresh() -> None:
    body = Out(Bound(0), F(0), Nil())  # x!c. 0
    r = step(Config(fin(0), Inp(F(0), body)))
    assert [t.action for t in r.transitions()] == [Input(a[0], a[0]), Input(a[0], a[1])]
    got_known, got_fresh = r.transitions()
    # the body opens with whichever name was received
    assert got_known.dst == Config(fin(0), Out(F(0), F(0), Nil()))
    assert got_fresh.dst == Config(fin(0, 1), Out(F(1), F(0), Nil()))


def test_sum_steps_a_chosen_entry_and_records_the_index() -> None:
    t = Sum(IndexedFamily((Out(F(0), F(0), Nil()),), Nil()))
    tr, d = only(step(Config(fin(0), t)))
    assert d.rule == "Sum" and d.side == 0
    assert d.premises[0].rule == "Out"
    assert tr.dst == Config(fin(0), Nil())


def test_sum_default_branch_can_fire() -> None:
    t = Sum(IndexedFamily((), Out(F(0), F(0), Nil())))
    tr, d = only(step(Config(fin(0), t)))
    assert d.rule == "Sum" and d.side == 0
    assert tr.action == Output(a[0], a[0])


def test_parallel_steps_each_side_independently() -> None:
    t = Par(Out(F(0), F(0), Nil()), Out(F(0), F(1), Nil()))
    r = step(Config(fin(0, 1), t))
    rules = sorted(d.rule for _, d in r.results)
    assert rules == ["Par-L", "Par-R"]
    for tr, d in r.results:
        if d.rule == "Par-L":
            assert tr.dst.proc == Par(Nil(), Out(F(0), F(1), Nil()))
        else:
            assert tr.dst.proc == Par(Out(F(0), F(0), Nil()), Nil())


def test_communication_needs_no_observer_knowledge() -> None:
    # neither prefix is observable (empty env), yet the two halves can talk:
    # each premise runs with the sibling's free names added
    t = Par(Out(F(0), F(1), Nil()), Inp(F(0), Out(Bound(0), Bound(0), Nil())))
    tr, d = only(step(Config(NameSet.empty(), t)))
    assert d.rule == "Comm-L"
    assert tr.action == Tau()
    assert tr.dst == Config(NameSet.empty(), Par(Nil(), Out(F(1), F(1), Nil())))
    # premises carry the extended environments
    assert d.premises[0].conclusion.src.env == fin(0)
    assert d.premises[1].conclusion.src.env == fin(0, 1)


def test_scope_closing_communication_rebinds_the_name() -> None:
    t = Par(Res(Out(F(0), Bound(0), Nil())), Inp(F(0), Nil()))
    tr, d = only(step(Config(NameSet.empty(), t)))
    assert d.rule == "Close-L"
    assert tr.action == Tau()
    # the extruded name ends up bound again over both components
    assert tr.dst == Config(NameSet.empty(), Res(Par(Nil(), Nil())))
    assert d.cofinite == Cofinite(fin(0), a[1])
    assert d.premises[0].conclusion.action == BoundOutput(a[0], a[1])
    assert d.premises[1].conclusion.action == Input(a[0], a[1])


def test_restriction_hides_its_name_from_the_action() -> None:
    t = Res(Inp(F(0), Nil()))  # new q. c?(x). 0, q unused
    r = step(Config(fin(0), t))
    assert [tr.action for tr in r.transitions()] == [Input(a[0], a[0]), Input(a[0], a[1])]
    for tr, d in r.results:
        assert d.rule == "Res"
        assert tr.dst.proc == Res(Nil())
        assert d.cofinite is not None and d.cofinite.avoid == fin(0)


def test_extrusion_opens_the_binder() -> None:
    t = Res(Out(F(0), Bound(0), Nil()))  # new c. n!c. 0
    tr, d = only(step(Config(fin(0), t)))
    assert d.rule == "Open"
    assert tr.action == BoundOutput(a[0], a[1])
    assert tr.dst == Config(fin(0, 1), Nil())
    assert d.side == a[1] and d.cofinite is None
    assert d.premises[0].conclusion.action == Output(a[0], a[1])


def test_restricted_output_on_its_own_channel_is_stuck() -> None:
    # new c. c!c. 0 cannot extrude: the channel itself is the secret
    t = Res(Out(Bound(0), Bound(0), Nil()))
    r = step(Config(fin(0), t))
    assert r.results == () and r.complete


def test_replication_unfolds_once_per_fuel_unit() -> None:
    t = Rep(Out(F(0), F(0), Nil()))
    r0 = step(Config(fin(0), t), fuel=0)
    assert r0.results == () and not r0.complete
    r1 = step(Config(fin(0), t), fuel=1)
    tr, d = only(r1)
    assert d.rule == "Rep" and d.premises[0].rule == "Par-L"
    assert tr.dst.proc == Par(Nil(), t)
    assert not r1.complete  # the inner copy was cut off at fuel 0


def test_fuel_exhaustion_is_reported_even_without_transitions() -> None:
    t = Rep(Out(F(1), F(1), Nil()))  # channel unknown, nothing fires
    r = step(Config(fin(0), t), fuel=8)
    assert r.results == () and not r.complete


def test_step_is_deterministic() -> None:
    rng = random.Random(53)
    for _ in range(40):
        cfg = rand_config(rng)
        r1, r2 = step(cfg, 2), step(cfg, 2)
        assert r1 == r2


# ------------- canonical fresh witnesses -------------


def test_fresh_witnesses_are_least_available_atoms() -> None:
    # the fresh input target skips the occupied atoms a0, a1 and lands on a2
    body = Inp(F(0), Nil())
    r = step(Config(fin(0, 1), body))
    assert [t.action.name for t in r.transitions()] == [a[0], a[1], a[2]]


def test_normalize_transition_renames_visible_fresh_atoms() -> None:
    src = Config(fin(0), Inp(F(0), Nil()))
    messy = Transition(src, Input(a[0], a[7]), Config(fin(0, 7), Nil()))
    tidy = normalize_transition(messy)
    assert tidy == Transition(src, Input(a[0], a[1]), Config(fin(0, 1), Nil()))
    # already-canonical transitions are untouched
    assert normalize_transition(tidy) == tidy


def test_canonicalization_keeps_derivations_valid() -> None:
    # the second input below uses the canonical fresh name a1, which forces
    # the internal restriction witness to move out of its way
    t = Res(Inp(F(0), Nil()))
    r = step(Config(fin(0), t))
    fresh_input = r.results[1]
    assert fresh_input[0].action == Input(a[0], a[1])
    assert fresh_input[1].cofinite.witness == a[2]
    for _, d in r.results:
        check(d, extra_witnesses=2)


# ------------- the checker: acceptance -------------


def test_enumerated_derivations_check_with_extra_witnesses() -> None:
    rng = random.Random(59)
    for _ in range(60):
        cfg = rand_config(rng)
        for _, d in step(cfg, 2).results:
            check(d, extra_witnesses=3)


# ------------- the checker: rejection -------------


def res_example() -> Derivation:
    # the known-name input under a restriction: one cofinitely-witnessed node
    results = step(Config(fin(0), Res(Inp(F(0), Nil())))).results
    return results[0][1]


def open_example() -> Derivation:
    return only(step(Config(fin(0), Res(Out(F(0), Bound(0), Nil())))))[1]


def test_checker_rejects_unknown_rules() -> None:
    d = open_example()
    bad = Derivation("Frob", d.conclusion, d.premises, d.cofinite, d.side)
    with pytest.raises(CheckError) as err:
        check(bad)
    assert err.value.reason == "RuleShape"
    assert "unknown rule" in str(err.value)


def test_checker_rejects_wrong_premise_count() -> None:
    t, d = only(step(Config(fin(0), Out(F(0), F(1), Nil()))))
    bad = Derivation("Out", t, (d,))
    with pytest.raises(CheckError) as err:
        check(bad)
    assert err.value.reason == "RuleShape"


def test_checker_rejects_witness_inside_the_avoid_set() -> None:
    d = res_example()
    w = d.cofinite.witness
    bad = Derivation(d.rule, d.conclusion, d.premises, Cofinite(d.cofinite.avoid.union(NameSet.finite([w])), w), d.side)
    with pytest.raises(CheckError) as err:
        check(bad)
    assert err.value.reason == "WitnessInL"


def test_checker_rejects_extruded_name_already_known() -> None:
    d = open_example()
    t = d.conclusion
    leaky = Transition(Config(t.src.env.union(fin(1)), t.src.proc), t.action, t.dst)
    bad = Derivation(d.rule, leaky, d.premises, d.cofinite, d.side)
    with pytest.raises(CheckError) as err:
        check(bad)
    assert err.value.reason == "FreshnessViolated"
    assert "already known" in err.value.message


def test_checker_rejects_missing_environment_extension() -> None:
    t, _ = only(step(Config(fin(0), Out(F(0), F(1), Nil()))))
    clipped = Transition(t.src, t.action, Config(fin(0), t.dst.proc))
    with pytest.raises(CheckError) as err:
        check(Derivation("Out", clipped))
    assert err.value.reason == "EnvMismatch"


def test_checker_rejects_bound_output_of_the_channel_itself() -> None:
    src = Config(fin(0), Res(Out(F(0), Bound(0), Nil())))
    t = Transition(src, BoundOutput(a[0], a[0]), Config(fin(0), Nil()))
    with pytest.raises(CheckError) as err:
        check(Derivation("Open", t, (), None, a[0]))
    assert err.value.reason == "RuleShape"


def test_checker_rejects_extrusion_captured_by_a_sibling() -> None:
    # Par-L whose bound output collides with a free name on the right:
    # hand-built, since the enumerator never produces it
    extruder = Res(Out(F(0), Bound(0), Nil()))
    inner_t, inner_d = only(step(Config(fin(0), extruder)))
    w = inner_t.action.name
    sibling = Out(F(0), Free(w), Nil())
    src = Config(fin(0), Par(extruder, sibling))
    t = Transition(src, inner_t.action, Config(inner_t.dst.env, Par(inner_t.dst.proc, sibling)))
    with pytest.raises(CheckError) as err:
        check(Derivation("Par-L", t, (inner_d,)))
    assert err.value.reason == "FreshnessViolated"
    assert "sibling" in err.value.message


def test_checker_reports_the_failing_premise_path() -> None:
    t, d = only(step(Config(fin(0, 1), Par(Out(F(0), F(1), Nil()), Nil()))))
    assert d.rule == "Par-L"
    inner = d.premises[0]
    bad = Derivation(d.rule, d.conclusion, (Derivation("Frob", inner.conclusion),), d.cofinite, d.side)
    with pytest.raises(CheckError) as err:
        check(bad)
    assert err.value.path == (0,)
    assert str(err.value) == "RuleShape at 0: unknown rule 'Frob'"


def test_checker_accepts_any_received_name_in_inputs() -> None:
    # the enumerator samples two input targets, but the rule allows any
    # name; a hand-built derivation for a third name must also check
    src = Config(fin(0), Inp(F(0), Nil()))
    n = a[9]
    t = Transition(src, Input(a[0], n), Config(fin(0, 9), Nil()))
    check(Derivation("Inp", t))


# ------------- weakening -------------


def test_weaken_extends_every_environment() -> None:
    t, d = only(step(Config(fin(0), Out(F(0), F(1), Nil()))))
    out = weaken(d, fin(5), extra_witnesses=2)
    assert out.conclusion.src.env == fin(0, 5)
    assert out.conclusion.dst.env == fin(0, 1, 5)
    assert out.conclusion.action == t.action
    check(out, extra_witnesses=3)


def test_weaken_reaches_the_premises() -> None:
    d = only(step(Config(NameSet.empty(), Par(Out(F(0), F(1), Nil()), Inp(F(0), Nil())))))[1]
    assert d.rule == "Comm-L"
    out = weaken(d, fin(7))
    assert out.premises[0].conclusion.src.env == fin(0, 7)
    assert out.premises[1].conclusion.src.env == fin(0, 1, 7)


def test_weaken_rejects_environments_containing_the_extrusion() -> None:
    d = open_example()
    extruded = d.conclusion.action.name
    with pytest.raises(ExtrusionClash):
        weaken(d, NameSet.finite([extruded]))


def test_weaken_renames_clashing_internal_witnesses() -> None:
    d = only(step(Config(NameSet.empty(), Par(Res(Out(F(0), Bound(0), Nil())), Inp(F(0), Nil())))))[1]
    assert d.rule == "Close-L" and d.cofinite.witness == a[1]
    # a1 is internal to the derivation, so weakening by {a1} must move it
    out = weaken(d, fin(1), extra_witnesses=2)
    assert out.cofinite.witness != a[1]
    assert out.conclusion.src.env == fin(1)
    check(out, extra_witnesses=2)


def test_weaken_requires_a_finite_environment() -> None:
    d = res_example()
    with pytest.raises(ValueError):
        weaken(d, NameSet.periodic(2, [1]))


def test_weaken_by_nothing_changes_only_nothing() -> None:
    d = res_example()
    out = weaken(d, NameSet.empty())
    assert out == d


# ------------- replay -------------


def test_replay_follows_exact_actions() -> None:
    start = Config(fin(0), Out(F(0), F(1), Out(F(1), F(0), Nil())))
    tr = replay(start, [Output(a[0], a[1]), Output(a[1], a[0])])
    assert tr.start == start
    assert [s.action for s in tr.steps] == [Output(a[0], a[1]), Output(a[1], a[0])]
    assert tr.steps[-1].config == Config(fin(0, 1), Nil())


def test_replay_with_no_actions_is_the_start() -> None:
    start = Config(fin(0), Nil())
    assert replay(start, []) == Trace(start, ())


def test_replay_repairs_fresh_names_by_renaming() -> None:
    # the enumerator offers c?x1; asking for c?x9 succeeds because both
    # names are fresh and the transitions differ only by a swap
    start = Config(fin(0), Inp(F(0), Out(Bound(0), Bound(0), Nil())))
    tr = replay(start, [Input(a[0], a[9])])
    s = tr.steps[0]
    assert s.action == Input(a[0], a[9])
    assert s.config == Config(fin(0, 9), Out(F(9), F(9), Nil()))
    check(s.deriv)


def test_replay_does_not_repair_known_names() -> None:
    # a8 known to the observer: the request must match exactly, and cannot
    start = Config(fin(0, 8), Res(Out(F(0), Bound(0), Nil())))
    with pytest.raises(NoSuchTransition) as err:
        replay(start, [BoundOutput(a[0], a[8])])
    assert err.value.index == 0


def test_replay_failure_reports_the_step_index() -> None:
    start = Config(fin(0), Out(F(0), F(1), Nil()))
    with pytest.raises(NoSuchTransition) as err:
        replay(start, [Output(a[0], a[1]), Output(a[0], a[1])])
    assert err.value.index == 1


def test_replay_prefers_the_smallest_destination() -> None:
    # both components can emit c!c; the tie on destination size breaks
    # toward the nil-headed result, deterministically
    t = Par(Out(F(0), F(0), Nil()), Out(F(0), F(0), Out(F(0), F(0), Nil())))
    tr = replay(Config(fin(0), t), [Output(a[0], a[0])])
    assert tr.steps[0].config.proc == Par(Nil(), Out(F(0), F(0), Out(F(0), F(0), Nil())))
    assert tr.steps[0].deriv.rule == "Par-L"


# ------------- trace renaming -------------


def trace_example() -> Trace:
    start = Config(fin(0), Inp(F(0), Out(Bound(0), Bound(0), Nil())))
    return replay(start, [Input(a[0], a[1]), Output(a[1], a[1])])


def test_rename_trace_swaps_fresh_names_throughout() -> None:
    tr = trace_example()
    out = rename_trace(tr, a[1], a[6], extra_witnesses=2)
    assert out.start == tr.start
    assert [s.action for s in out.steps] == [Input(a[0], a[6]), Output(a[6], a[6])]
    assert out.steps[0].config == Config(fin(0, 6), Out(F(6), F(6), Nil()))


def test_rename_trace_requires_both_atoms_fresh_at_start() -> None:
    tr = trace_example()
    with pytest.raises(NotFreshAtStart):
        rename_trace(tr, a[0], a[6])
    with pytest.raises(NotFreshAtStart):
        rename_trace(tr, a[6], a[0])


def test_rename_trace_identity_is_a_no_op() -> None:
    tr = trace_example()
    # even a non-fresh atom is fine when nothing actually changes
    assert rename_trace(tr, a[0], a[0]) == tr


# ------------- serialization -------------


def test_transition_json_round_trip() -> None:
    t, _ = only(step(Config(fin(0), Out(F(0), F(1), Nil()))))
    assert Transition.from_json(t.to_json()) == t


def test_derivation_json_round_trip_keeps_witness_records() -> None:
    for d in (res_example(), open_example()):
        data = d.to_json()
        assert Derivation.from_json(data) == d
        # byte-stable under dump/parse/dump
        once = json.dumps(data, sort_keys=True)
        assert json.dumps(json.loads(once), sort_keys=True) == once


def test_trace_json_round_trip() -> None:
    tr = trace_example()
    assert Trace.from_json(tr.to_json()) == tr


# ------------- the freshness counterexample -------------


def test_extrusion_turns_a_fresh_name_free() -> None:
    ce = extrusion_counterexample()
    assert is_fresh(ce.atom, ce.config.proc)
    assert isinstance(ce.transition.action, BoundOutput)
    assert ce.transition.action.name == ce.atom
    assert free_names(ce.transition.dst.proc).member(ce.atom)
    check(ce.derivation, extra_witnesses=2)
