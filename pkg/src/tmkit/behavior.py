"""Chronology-of-events models and trace truth evaluation.

A chronology is a DAG over events with exclusive-branch groups. A timestamped
trace makes the model true exactly when it realizes a complete run of the
chronology: it starts at declared start events, respects every edge, picks at
most one member per exclusive group, and follows each begun thread through to
an end event. Evaluation is a pure function of the finite trace, so repeated
evaluation can never regress or change its answer.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .errors import BoundExceeded, CycleDetected, EdgeInsideExclusiveGroup, UnknownEvent
from .events import Event

# Exact enumeration is exponential in the event count; chronologies are
# desk-scale by design.
MAX_ENUMERABLE_EVENTS = 22


@dataclass(frozen=True)
class ExclusiveGroup:
    """Pairwise alternatives: at most one member may occur in a run."""

    name: str
    members: frozenset[str]

    def __str__(self) -> str:
        return "{" + "|".join(sorted(self.members)) + "}"


@dataclass(frozen=True)
class ChronologyDecl:
    """A chronology as written: resolved and validated by build_chronology."""

    id: str
    event_ids: tuple[str, ...] = ()
    edges: tuple[tuple[str, str], ...] = ()
    groups: tuple[ExclusiveGroup, ...] = ()
    starts: Optional[tuple[str, ...]] = None
    ends: Optional[tuple[str, ...]] = None


@dataclass(frozen=True)
class Chronology:
    id: str
    events: frozenset[str]
    edges: frozenset[tuple[str, str]]
    groups: tuple[ExclusiveGroup, ...]
    starts: frozenset[str]
    ends: frozenset[str]
    # per-event time windows, carried over from the event declarations
    windows: tuple[tuple[str, tuple[int, int]], ...] = ()

    def successors(self, event_id: str) -> set[str]:
        return self._succ().get(event_id, set())

    def predecessors(self, event_id: str) -> set[str]:
        return self._pred().get(event_id, set())

    def window_of(self, event_id: str) -> Optional[tuple[int, int]]:
        return dict(self.windows).get(event_id)

    def _succ(self) -> dict[str, set[str]]:
        if "_succ_map" not in self.__dict__:
            m: dict[str, set[str]] = {}
            for u, v in self.edges:
                m.setdefault(u, set()).add(v)
            object.__setattr__(self, "_succ_map", m)
        return self.__dict__["_succ_map"]

    def _pred(self) -> dict[str, set[str]]:
        if "_pred_map" not in self.__dict__:
            m: dict[str, set[str]] = {}
            for u, v in self.edges:
                m.setdefault(v, set()).add(u)
            object.__setattr__(self, "_pred_map", m)
        return self.__dict__["_pred_map"]


@dataclass(frozen=True)
class Trace:
    """A single-pass record of event occurrences with integer timestamps."""

    id: str
    occurrences: tuple[tuple[str, int], ...] = ()

    def events(self) -> tuple[str, ...]:
        return tuple(e for e, _ in self.occurrences)


def check_trace_shape(trace: Trace) -> Optional[str]:
    """Trace invariants: non-decreasing timestamps, no repeated event."""
    last = None
    seen = set()
    for e, ts in trace.occurrences:
        if ts < 0:
            return f"negative timestamp for '{e}'"
        if last is not None and ts < last:
            return f"timestamps decrease at '{e}'"
        if e in seen:
            return f"event '{e}' occurs twice"
        seen.add(e)
        last = ts
    return None


# --- Verdicts ---------------------------------------------------------------


@dataclass(frozen=True)
class NotStarted:
    def __str__(self) -> str:
        return "NotStarted"


@dataclass(frozen=True)
class OrderViolation:
    before: str  # the edge the trace reversed: before must precede after
    after: str

    def __str__(self) -> str:
        return f"OrderViolation({self.before},{self.after})"


@dataclass(frozen=True)
class ExclusivityViolation:
    group: ExclusiveGroup

    def __str__(self) -> str:
        return f"ExclusivityViolation({self.group})"


@dataclass(frozen=True)
class MissingSuccessor:
    event: str

    def __str__(self) -> str:
        return f"MissingSuccessor({self.event})"


@dataclass(frozen=True)
class UnknownEventOccurred:
    event: str

    def __str__(self) -> str:
        return f"UnknownEvent({self.event})"


@dataclass(frozen=True)
class WindowViolation:
    event: str

    def __str__(self) -> str:
        return f"WindowViolation({self.event})"


Violation = Union[
    NotStarted, OrderViolation, ExclusivityViolation, MissingSuccessor, UnknownEventOccurred, WindowViolation
]


@dataclass(frozen=True)
class Verdict:
    """Truth assignment for one (chronology, trace) pair.

    Exactly one of ``run`` (when true) and ``violation`` (when false) is set.
    """

    truth: bool
    run: Optional[tuple[str, ...]] = None
    violation: Optional[Violation] = None

    def summary(self) -> str:
        if self.truth:
            return "TRUE run=[" + ",".join(self.run or ()) + "]"
        return f"FALSE reason={self.violation}"


# --- Construction -----------------------------------------------------------


def build_chronology(events: Iterable[Event], decl: ChronologyDecl) -> Chronology:
    """Validate a declaration into a usable chronology.

    Raises UnknownEvent for ids that resolve to no declared event,
    CycleDetected (carrying one witness cycle) when the edges are not a DAG,
    and EdgeInsideExclusiveGroup when an edge orders two alternatives.
    Omitted start/end sets default to the events with no incoming/outgoing
    edges.
    """
    known = {e.id for e in events}
    mentioned = set(decl.event_ids)
    for u, v in decl.edges:
        mentioned.update((u, v))
    for g in decl.groups:
        mentioned.update(g.members)
    mentioned.update(decl.starts or ())
    mentioned.update(decl.ends or ())

    for ev in sorted(mentioned):
        if ev not in known:
            raise UnknownEvent(f"chronology '{decl.id}' references undeclared event '{ev}'")

    succ: dict[str, list[str]] = {e: [] for e in mentioned}
    for u, v in decl.edges:
        succ[u].append(v)

    cycle = _find_cycle(succ)
    if cycle:
        raise CycleDetected(cycle)

    for g in decl.groups:
        for u, v in decl.edges:
            if u in g.members and v in g.members:
                raise EdgeInsideExclusiveGroup(
                    f"edge {u} -> {v} orders members of exclusive group '{g.name}'"
                )

    has_in = {v for _, v in decl.edges}
    has_out = {u for u, _ in decl.edges}
    starts = frozenset(decl.starts) if decl.starts is not None else frozenset(mentioned - has_in)
    ends = frozenset(decl.ends) if decl.ends is not None else frozenset(mentioned - has_out)
    windows = tuple(
        sorted((e.id, e.window) for e in events if e.id in mentioned and e.window is not None)
    )
    return Chronology(
        id=decl.id,
        events=frozenset(mentioned),
        edges=frozenset(decl.edges),
        groups=decl.groups,
        starts=starts,
        ends=ends,
        windows=windows,
    )


def _find_cycle(succ: dict[str, list[str]]) -> Optional[list[str]]:
    WHITE, GREY, BLACK = 0, 1, 2
    color = {n: WHITE for n in succ}
    parent: dict[str, str] = {}

    for root in sorted(succ):
        if color[root] != WHITE:
            continue
        stack = [(root, iter(sorted(succ[root])))]
        color[root] = GREY
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if color[nxt] == GREY:
                    # unwind the grey path into a printable cycle
                    cycle = [nxt, node]
                    cur = node
                    while cur != nxt:
                        cur = parent[cur]
                        cycle.append(cur)
                    cycle.reverse()
                    return cycle
                if color[nxt] == WHITE:
                    color[nxt] = GREY
                    parent[nxt] = node
                    stack.append((nxt, iter(sorted(succ[nxt]))))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                stack.pop()
    return None


# --- Evaluation -------------------------------------------------------------


def evaluate_trace(chronology: Chronology, trace: Trace) -> Verdict:
    """Assign a truth value: true iff the trace realizes a run.

    Checks, in order: every occurrence is a chronology event; timestamps
    strictly respect every edge between occurred events (equal stamps are
    legal only for unordered pairs); at most one member per exclusive group;
    the occurred set forms a run (each causal thread begins at a declared
    start and each begun, unfinished event is followed up, so the set reaches
    an end event); each occurrence falls inside its declared window.
    """
    shape = check_trace_shape(trace)
    if shape is not None:
        raise ValueError(f"malformed trace '{trace.id}': {shape}")

    stamp: dict[str, int] = {}
    for e, ts in trace.occurrences:
        if e not in chronology.events:
            return Verdict(False, violation=UnknownEventOccurred(e))
        stamp[e] = ts

    for v, _ in trace.occurrences:
        for u in sorted(chronology.predecessors(v)):
            if u in stamp and stamp[u] >= stamp[v]:
                return Verdict(False, violation=OrderViolation(u, v))

    occurred = set(stamp)
    for g in chronology.groups:
        if len(g.members & occurred) > 1:
            return Verdict(False, violation=ExclusivityViolation(g))

    if not occurred & chronology.starts:
        return Verdict(False, violation=NotStarted())
    for e, _ in trace.occurrences:
        if e not in chronology.starts and not (chronology.predecessors(e) & occurred):
            # a causal thread that begins mid-chronology never started
            return Verdict(False, violation=NotStarted())

    for e, _ in trace.occurrences:
        if e not in chronology.ends and not (chronology.successors(e) & occurred):
            return Verdict(False, violation=MissingSuccessor(e))

    for e, ts in trace.occurrences:
        w = chronology.window_of(e)
        if w is not None and not (w[0] <= ts <= w[1]):
            return Verdict(False, violation=WindowViolation(e))

    return Verdict(True, run=trace.events())


def truth_of_event(trace: Trace, event_id: str) -> bool:
    """An event is true exactly when it occurs in the trace."""
    return any(e == event_id for e, _ in trace.occurrences)


# --- Run enumeration (the brute-force oracle) -------------------------------


def run_set_valid(chronology: Chronology, occurred: frozenset[str]) -> bool:
    """Set-level run test, independent of any trace ordering.

    A non-empty set is a run when: every member with no in-set predecessor is
    a declared start; exclusive groups contribute at most one member; every
    non-end member has an in-set successor.
    """
    if not occurred:
        return False
    for g in chronology.groups:
        if len(g.members & occurred) > 1:
            return False
    for e in occurred:
        preds = chronology.predecessors(e) & occurred
        if not preds and e not in chronology.starts:
            return False
        if e not in chronology.ends and not (chronology.successors(e) & occurred):
            return False
    return True


def canonical_order(chronology: Chronology, occurred: frozenset[str]) -> tuple[str, ...]:
    """One deterministic topological order of a run set (id-sorted ties)."""
    pending = {e: len(chronology.predecessors(e) & occurred) for e in occurred}
    ready = sorted(e for e, n in pending.items() if n == 0)
    out: list[str] = []
    while ready:
        e = ready.pop(0)
        out.append(e)
        for s in sorted(chronology.successors(e) & occurred):
            pending[s] -= 1
            if pending[s] == 0:
                ready.append(s)
        ready.sort()
    return tuple(out)


def enumerate_runs(chronology: Chronology, bound: int = 10_000) -> list[tuple[str, ...]]:
    """All runs of the chronology, one canonical order per run set.

    Exhaustive over event subsets, so deliberately independent of
    evaluate_trace; the two are cross-checked in tests. Raises BoundExceeded
    when the run count passes ``bound`` or the chronology is too large to
    enumerate exactly.
    """
    events = sorted(chronology.events)
    if bound < len(events):
        raise ValueError(f"bound {bound} is smaller than the event count {len(events)}")
    if len(events) > MAX_ENUMERABLE_EVENTS:
        raise BoundExceeded(f"cannot enumerate runs over {len(events)} events (max {MAX_ENUMERABLE_EVENTS})")

    runs: list[tuple[str, ...]] = []
    for mask in range(1, 1 << len(events)):
        occurred = frozenset(events[i] for i in range(len(events)) if mask & (1 << i))
        if run_set_valid(chronology, occurred):
            runs.append(canonical_order(chronology, occurred))
            if len(runs) > bound:
                raise BoundExceeded(f"chronology '{chronology.id}' has more than {bound} runs")
    runs.sort(key=lambda r: (len(r), r))
    return runs
