import itertools
import random

import pytest

from tmkit.behavior import (
    Chronology,
    ChronologyDecl,
    ExclusiveGroup,
    ExclusivityViolation,
    MissingSuccessor,
    NotStarted,
    OrderViolation,
    Trace,
    UnknownEventOccurred,
    WindowViolation,
    build_chronology,
    canonical_order,
    enumerate_runs,
    evaluate_trace,
    run_set_valid,
    truth_of_event,
)
from tmkit.errors import BoundExceeded, CycleDetected, EdgeInsideExclusiveGroup, UnknownEvent
from tmkit.events import Event

from conftest import load
from genutil import random_chronology

AIRPORT_RUNS = [
    ("E2", "E6", "E7", "E8", "E9", "E13", "E14"),
    ("E1", "E3", "E4", "E5", "E8", "E9", "E13", "E14"),
    ("E2", "E6", "E7", "E8", "E10", "E11", "E12", "E13", "E14"),
    ("E1", "E3", "E4", "E5", "E8", "E10", "E11", "E12", "E13", "E14"),
]


def trace_of(*events, start=0):
    return Trace("t", tuple((e, start + i) for i, e in enumerate(events)))


def fixture_trace(doc, trace_id):
    return {t.id: t for t in doc.traces}[trace_id]


# -- construction -------------------------------------------------------------


def test_airport_chronology_builds(airport_chronology):
    b = airport_chronology
    assert b.starts == {"E1", "E2"}
    assert b.ends == {"E14"}
    assert len(b.events) == 14
    assert ("E8", "E9") in b.edges and ("E13", "E14") in b.edges


def test_cycle_is_detected_with_a_witness():
    events = [Event("E1", "s"), Event("E2", "s")]
    decl = ChronologyDecl("c", edges=(("E1", "E2"), ("E2", "E1")))
    with pytest.raises(CycleDetected) as err:
        build_chronology(events, decl)
    assert set(err.value.cycle) >= {"E1", "E2"}


def test_single_event_defaults_to_start_and_end():
    b = build_chronology([Event("E1", "s")], ChronologyDecl("c", event_ids=("E1",)))
    assert b.starts == b.ends == {"E1"}


def test_undeclared_event_rejected():
    with pytest.raises(UnknownEvent):
        build_chronology([Event("E1", "s")], ChronologyDecl("c", edges=(("E1", "ghost"),)))


def test_edge_between_alternatives_rejected():
    events = [Event("E1", "s"), Event("E2", "s")]
    decl = ChronologyDecl(
        "c", edges=(("E1", "E2"),), groups=(ExclusiveGroup("g", frozenset({"E1", "E2"})),)
    )
    with pytest.raises(EdgeInsideExclusiveGroup):
        build_chronology(events, decl)


# -- evaluation ---------------------------------------------------------------


def test_schengen_with_luggage_trace_is_true(airport, airport_chronology):
    v = evaluate_trace(airport_chronology, fixture_trace(airport, "schengen_luggage"))
    assert v.truth
    assert v.run == ("E1", "E3", "E4", "E5", "E8", "E9", "E13", "E14")
    assert v.summary() == "TRUE run=[E1,E3,E4,E5,E8,E9,E13,E14]"


def test_both_branches_violate_exclusivity(airport, airport_chronology):
    v = evaluate_trace(airport_chronology, fixture_trace(airport, "mixed_branch"))
    assert not v.truth
    assert isinstance(v.violation, ExclusivityViolation)
    assert v.violation.group.members == {"E9", "E10"}


def test_reversed_edge_is_an_order_violation(airport, airport_chronology):
    v = evaluate_trace(airport_chronology, fixture_trace(airport, "swapped"))
    assert v.violation == OrderViolation("E3", "E4")


def test_empty_trace_never_started(airport, airport_chronology):
    v = evaluate_trace(airport_chronology, fixture_trace(airport, "nothing"))
    assert v.violation == NotStarted()


def test_unknown_event_in_trace(airport_chronology):
    v = evaluate_trace(airport_chronology, trace_of("E1", "E99"))
    assert v.violation == UnknownEventOccurred("E99")


def test_prefix_trace_misses_a_successor(airport_chronology):
    v = evaluate_trace(airport_chronology, trace_of("E1", "E3", "E4"))
    assert v.violation == MissingSuccessor("E4")


def test_thread_that_never_started_is_rejected(airport_chronology):
    # E6 occurs although its only cause E2 is absent: no run contains it
    v = evaluate_trace(airport_chronology, trace_of("E1", "E3", "E4", "E5", "E6", "E7", "E8", "E9", "E13", "E14"))
    assert v.violation == NotStarted()


def test_equal_timestamps_on_ordered_pair_rejected(airport_chronology):
    t = Trace("t", (("E1", 0), ("E3", 0)))
    v = evaluate_trace(airport_chronology, t)
    assert v.violation == OrderViolation("E1", "E3")


def test_equal_timestamps_on_concurrent_pair_accepted():
    events = [Event(e, "s") for e in ("a", "b", "z")]
    decl = ChronologyDecl("c", edges=(("a", "z"), ("b", "z")))
    b = build_chronology(events, decl)
    v = evaluate_trace(b, Trace("t", (("a", 0), ("b", 0), ("z", 1))))
    assert v.truth


def test_malformed_trace_is_a_caller_error(airport_chronology):
    with pytest.raises(ValueError):
        evaluate_trace(airport_chronology, Trace("t", (("E1", 3), ("E3", 1))))


def test_window_violation():
    events = [Event("a", "s", window=(2, 4)), Event("z", "s")]
    b = build_chronology(events, ChronologyDecl("c", edges=(("a", "z"),)))
    assert evaluate_trace(b, Trace("t", (("a", 3), ("z", 9)))).truth
    v = evaluate_trace(b, Trace("t", (("a", 0), ("z", 9))))
    assert v.violation == WindowViolation("a")


def test_truth_of_event(airport):
    accepted = fixture_trace(airport, "schengen_luggage")
    assert truth_of_event(accepted, "E9")
    assert not truth_of_event(accepted, "E10")
    assert not truth_of_event(Trace("empty"), "E1")


def test_evaluation_is_deterministic(airport, airport_chronology):
    trace = fixture_trace(airport, "schengen_luggage")
    first = evaluate_trace(airport_chronology, trace)
    assert all(evaluate_trace(airport_chronology, trace) == first for _ in range(100))


def test_monotone_falsity_of_exclusivity(airport_chronology):
    rejected = trace_of("E1", "E3", "E4", "E5", "E8", "E9", "E10")
    assert isinstance(evaluate_trace(airport_chronology, rejected).violation, ExclusivityViolation)
    rng = random.Random(3)
    remaining = sorted(airport_chronology.events - set(rejected.events()))
    for _ in range(20):
        extra = rng.sample(remaining, rng.randint(1, len(remaining)))
        occurrences = rejected.occurrences + tuple((e, 10 + i) for i, e in enumerate(extra))
        assert not evaluate_trace(airport_chronology, Trace("t", occurrences)).truth


# -- run enumeration ----------------------------------------------------------


def test_airport_has_exactly_four_runs(airport_chronology):
    runs = enumerate_runs(airport_chronology)
    assert runs == sorted(AIRPORT_RUNS, key=lambda r: (len(r), r))


def test_each_airport_run_evaluates_true(airport_chronology):
    for run in enumerate_runs(airport_chronology):
        assert evaluate_trace(airport_chronology, trace_of(*run)).truth


def test_liar_has_the_single_three_event_run():
    doc = load("liar.tm")
    b = build_chronology(doc.events, doc.chronologies[0])
    assert enumerate_runs(b) == [("E1", "E2", "E3")]


def test_green_cheese_has_one_run():
    doc = load("green_cheese.tm")
    b = build_chronology(doc.events, doc.chronologies[0])
    assert enumerate_runs(b) == [("E1", "E2")]


def test_bound_exceeded():
    events = [Event(f"e{i}", "s") for i in range(6)]
    decl = ChronologyDecl("c", event_ids=tuple(e.id for e in events))
    # six isolated events: every non-empty subset is a run
    with pytest.raises(BoundExceeded):
        enumerate_runs(build_chronology(events, decl), bound=10)


def test_bound_below_event_count_rejected(airport_chronology):
    with pytest.raises(ValueError):
        enumerate_runs(airport_chronology, bound=3)


# -- oracle equivalence -------------------------------------------------------


def oracle_accepts(chron: Chronology, run_sets, seq) -> bool:
    """Trace acceptance spelled set-first: the occurred set must be an
    enumerated run and the sequence a linear extension of the edges on it."""
    s = frozenset(seq)
    if len(s) != len(seq) or s not in run_sets:
        return False
    pos = {e: i for i, e in enumerate(seq)}
    return all(pos[u] < pos[v] for u, v in chron.edges if u in pos and v in pos)


def test_evaluate_agrees_with_run_enumeration_on_small_dags():
    rng = random.Random(41)
    for round_no in range(50):
        n = rng.randint(2, 6)
        events, decl = random_chronology(rng, n)
        chron = build_chronology(events, decl)
        run_sets = {frozenset(r) for r in enumerate_runs(chron, bound=100000)}
        ids = sorted(chron.events)
        for size in range(0, n + 1):
            for subset in itertools.combinations(ids, size):
                for seq in itertools.permutations(subset):
                    got = evaluate_trace(chron, trace_of(*seq)).truth
                    want = oracle_accepts(chron, run_sets, seq)
                    assert got == want, (round_no, decl, seq)


def test_evaluate_agrees_with_run_enumeration_up_to_twelve_events():
    rng = random.Random(43)
    for _ in range(40):
        n = rng.randint(8, 12)
        events, decl = random_chronology(rng, n)
        chron = build_chronology(events, decl)
        run_sets = {frozenset(r) for r in enumerate_runs(chron, bound=1_000_000)}
        ids = sorted(chron.events)
        for run in sorted(run_sets, key=sorted)[:50]:
            assert evaluate_trace(chron, trace_of(*canonical_order(chron, run))).truth
        for _ in range(200):
            seq = rng.sample(ids, rng.randint(0, n))
            got = evaluate_trace(chron, trace_of(*seq)).truth
            want = oracle_accepts(chron, run_sets, tuple(seq))
            assert got == want, (decl, seq)


def test_run_sets_round_trip_canonical_order():
    rng = random.Random(17)
    for _ in range(50):
        n = rng.randint(2, 8)
        events, decl = random_chronology(rng, n)
        chron = build_chronology(events, decl)
        for run in enumerate_runs(chron, bound=100000):
            occurred = frozenset(run)
            assert run_set_valid(chron, occurred)
            assert tuple(canonical_order(chron, occurred)) == run
