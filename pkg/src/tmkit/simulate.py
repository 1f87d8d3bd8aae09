"""Token-level execution of a chronology over a static model.

Thing instances move through stages under the generic-action semantics:
create brings a thing into a machine, process transforms it in place, release
marks it ready to leave, transfer carries it across the machine boundary, and
receive (or arrive + accept) makes it a member of the next machine. Firing an
event applies its subdiagram's actions in flow order; triggers queue creations
that happen once the event completes.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

from .behavior import Chronology, Trace, run_set_valid
from .errors import Deadlock, IllegalAction, NotEnabled, PolicyError
from .events import Event, Subdiagram
from .model import Arc, ArcKind, StageKind, StageRef, StaticModel, Thimac

MEMBER_STAGES = frozenset({StageKind.CREATE, StageKind.PROCESS, StageKind.RECEIVE, StageKind.ACCEPT})


@dataclass(frozen=True)
class InTransit:
    arc: str

    def __str__(self) -> str:
        return f"in-transit({self.arc})"


class Retired:
    """The thing has left the system; it never acts again."""

    _instance: Optional["Retired"] = None

    def __new__(cls) -> "Retired":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __str__(self) -> str:
        return "retired"


RETIRED = Retired()

Location = Union[StageRef, InTransit, Retired]


@dataclass(frozen=True)
class ThingInstance:
    id: str
    label: str
    location: Location
    tags: tuple[str, ...] = ()
    ready: bool = False


@dataclass(frozen=True)
class BranchPolicy:
    pass


@dataclass(frozen=True)
class Seeded(BranchPolicy):
    seed: int


@dataclass(frozen=True)
class Scripted(BranchPolicy):
    """Maps exclusive-group names to the member that should fire."""

    choices: tuple[tuple[str, str], ...]

    def chosen(self, group_name: str) -> Optional[str]:
        return dict(self.choices).get(group_name)


@dataclass(frozen=True)
class SimContext:
    model: StaticModel
    subdiagrams: tuple[Subdiagram, ...]
    events: tuple[Event, ...]
    chronology: Chronology

    def subdiagram(self, sub_id: str) -> Subdiagram:
        return {s.id: s for s in self.subdiagrams}[sub_id]

    def event(self, event_id: str) -> Event:
        return {e.id: e for e in self.events}[event_id]


@dataclass(frozen=True)
class SimState:
    ctx: SimContext = field(compare=False)
    step: int = 0
    instances: tuple[ThingInstance, ...] = ()
    spawned: frozenset[str] = frozenset()  # labels created so far, one instance each
    log: tuple[tuple[str, int], ...] = ()
    pending_triggers: tuple[StageRef, ...] = ()

    def fired(self) -> frozenset[str]:
        return frozenset(e for e, _ in self.log)

    def instance(self, instance_id: str) -> Optional[ThingInstance]:
        for inst in self.instances:
            if inst.id == instance_id:
                return inst
        return None

    def at(self, ref: StageRef) -> list[ThingInstance]:
        return sorted((i for i in self.instances if i.location == ref), key=lambda i: i.id)

    def in_machine(self, thimac_id: str) -> list[ThingInstance]:
        return sorted(
            (
                i
                for i in self.instances
                if isinstance(i.location, StageRef)
                and i.location.thimac == thimac_id
                and i.location.kind in MEMBER_STAGES
            ),
            key=lambda i: i.id,
        )


def initial_state(model: StaticModel, subdiagrams: Sequence[Subdiagram], events: Sequence[Event], chronology: Chronology) -> SimState:
    return SimState(ctx=SimContext(model, tuple(subdiagrams), tuple(events), chronology))


def _put(state: SimState, inst: ThingInstance) -> SimState:
    rest = tuple(i for i in state.instances if i.id != inst.id)
    return replace(state, instances=tuple(sorted(rest + (inst,), key=lambda i: i.id)))


def _labels_of(t: Thimac) -> tuple[str, ...]:
    return t.things if t.things else (t.id,)


def _spawn(state: SimState, thimac_id: str) -> SimState:
    t = state.ctx.model.thimac(thimac_id)
    if t is None:
        raise IllegalAction(StageRef(thimac_id, StageKind.CREATE), "unknown machine")
    for label in _labels_of(t):
        if label in state.spawned:
            continue  # one instance per created label per run
        inst = ThingInstance(id=label, label=label, location=StageRef(thimac_id, StageKind.CREATE))
        state = replace(_put(state, inst), spawned=state.spawned | {label})
    return state


def _port_is_exit_only(model: StaticModel, port: StageRef) -> bool:
    """True when nothing flows from this transfer stage into another machine:
    a thing released to such a port leaves the system."""
    return not any(
        a.kind is ArcKind.FLOW and a.src == port and a.dst.thimac != port.thimac for a in model.arcs
    )


def action_step(state: SimState, ref: StageRef, instance_id: str) -> SimState:
    """Apply one generic action to one instance.

    The instance's location must be compatible with the action; the membership
    rule applies (a thing is no member until it reaches receive or is created
    there), and a released thing can only transfer.
    """
    model = state.ctx.model
    kind = ref.kind

    if kind is StageKind.CREATE:
        return _spawn(state, ref.thimac)

    inst = state.instance(instance_id)
    if inst is None:
        raise IllegalAction(ref, f"no instance '{instance_id}'")
    loc = inst.location
    if isinstance(loc, Retired):
        raise IllegalAction(ref, f"'{instance_id}' has left the system")

    if kind is StageKind.PROCESS:
        if not (isinstance(loc, StageRef) and loc.thimac == ref.thimac and loc.kind in MEMBER_STAGES):
            raise IllegalAction(ref, f"'{instance_id}' is not a member of '{ref.thimac}'")
        return _put(state, replace(inst, location=ref, tags=inst.tags + (f"processed@{ref.thimac}",)))

    if kind is StageKind.RELEASE:
        if not (isinstance(loc, StageRef) and loc.thimac == ref.thimac and loc.kind in MEMBER_STAGES):
            raise IllegalAction(ref, f"'{instance_id}' is not a member of '{ref.thimac}'")
        return _put(state, replace(inst, location=ref, ready=True))

    if kind is StageKind.TRANSFER:
        if not (isinstance(loc, StageRef) and loc.thimac == ref.thimac and (loc.kind is StageKind.RELEASE or loc.kind is StageKind.TRANSFER)):
            raise IllegalAction(ref, f"'{instance_id}' is not released at '{ref.thimac}'")
        outgoing = sorted(
            (a for a in model.arcs if a.kind is ArcKind.FLOW and a.src == ref and a.dst.kind is StageKind.TRANSFER),
            key=lambda a: a.id,
        )
        if not outgoing:
            return _put(state, replace(inst, location=RETIRED, ready=False))
        if len(outgoing) > 1:
            raise IllegalAction(ref, "several outgoing transfers; fire an event to pick a route")
        return _put(state, replace(inst, location=outgoing[0].dst, ready=False))

    if kind is StageKind.RECEIVE or kind is StageKind.ARRIVE:
        at_port = isinstance(loc, StageRef) and loc == StageRef(ref.thimac, StageKind.TRANSFER)
        if not (at_port or isinstance(loc, InTransit)):
            raise IllegalAction(ref, f"'{instance_id}' has not reached the boundary of '{ref.thimac}'")
        return _put(state, replace(inst, location=ref))

    if kind is StageKind.ACCEPT:
        if not (isinstance(loc, StageRef) and loc == StageRef(ref.thimac, StageKind.ARRIVE)):
            raise IllegalAction(ref, f"'{instance_id}' has not arrived at '{ref.thimac}'")
        return _put(state, replace(inst, location=ref))

    raise IllegalAction(ref, "unsupported action")


# ---------------------------------------------------------------------------
# Event firing


def _topo_stage_order(sub: Subdiagram, arcs: Sequence[Arc]) -> dict[StageRef, int]:
    order = {ref: i for i, ref in enumerate(sub.stages)}
    flows = [a for a in arcs if a.kind is ArcKind.FLOW]
    pending = {ref: 0 for ref in sub.stages}
    for a in flows:
        if a.dst in pending and a.src in pending:
            pending[a.dst] += 1
    ready = sorted((r for r, n in pending.items() if n == 0), key=lambda r: order[r])
    rank: dict[StageRef, int] = {}
    while ready:
        ref = ready.pop(0)
        rank[ref] = len(rank)
        for a in flows:
            if a.src == ref and a.dst in pending:
                pending[a.dst] -= 1
                if pending[a.dst] == 0:
                    ready.append(a.dst)
        ready.sort(key=lambda r: order[r])
    for ref in sub.stages:  # stages on a flow cycle keep declaration order
        rank.setdefault(ref, len(rank))
    return rank


def _move_along(state: SimState, arc: Arc, inst: ThingInstance) -> SimState:
    """Carry one instance over one flow arc and apply the target action."""
    src, dst = arc.src, arc.dst
    if isinstance(inst.location, StageRef) and inst.location.kind is StageKind.RELEASE and dst.kind is not StageKind.TRANSFER:
        raise IllegalAction(dst, f"'{inst.id}' is released; it can only transfer out")

    if dst.kind is StageKind.PROCESS:
        return _put(state, replace(inst, location=dst, tags=inst.tags + (f"processed@{dst.thimac}",)))
    if dst.kind is StageKind.RELEASE:
        return _put(state, replace(inst, location=dst, ready=True))
    if dst.kind is StageKind.TRANSFER:
        outbound = src.thimac == dst.thimac
        if outbound and _port_is_exit_only(state.ctx.model, dst):
            return _put(state, replace(inst, location=RETIRED, ready=False))
        return _put(state, replace(inst, location=dst, ready=False))
    if dst.kind in (StageKind.RECEIVE, StageKind.ARRIVE, StageKind.ACCEPT):
        return _put(state, replace(inst, location=dst))
    if dst.kind is StageKind.CREATE:
        # elided-notation flow into a creation: the moving thing is absorbed
        # into whatever the target machine brings into existence
        state = _put(state, replace(inst, location=RETIRED, ready=False))
        return _spawn(state, dst.thimac)
    raise IllegalAction(dst, "unsupported flow target")


def enabled_events(state: SimState) -> list[str]:
    """Events whose chronology predecessors have fired or can never fire."""
    chron = state.ctx.chronology
    fired = state.fired()

    def excluded(e: str) -> bool:
        return any(e in g.members and (g.members & fired) - {e} for g in chron.groups)

    dead: set[str] = set()
    changed = True
    while changed:
        changed = False
        for e in chron.events:
            if e in fired or e in dead:
                continue
            preds = chron.predecessors(e)
            if excluded(e) or (preds and all(p in dead for p in preds)):
                dead.add(e)
                changed = True

    out = []
    for e in sorted(chron.events - fired):
        if e in dead:
            continue
        if any(p not in fired and p not in dead for p in chron.predecessors(e)):
            continue
        w = chron.window_of(e)
        if w is not None and max(state.step, w[0]) > w[1]:
            continue  # the admissible window has closed
        out.append(e)
    return out


def fire_event(state: SimState, event_id: str) -> SimState:
    """Execute one enabled event: its subdiagram's actions in flow order.

    Every process stage of the subdiagram must transform something, either a
    thing carried in by the event's own flows or one already present in the
    machine; otherwise the event's story is inconsistent with the model state
    and IllegalAction names the starved stage.
    """
    ctx = state.ctx
    if event_id not in enabled_events(state):
        raise NotEnabled(f"event '{event_id}' is not enabled")
    event = ctx.event(event_id)
    sub = ctx.subdiagram(event.subdiagram)
    arcs = [a for aid in sub.arcs if (a := ctx.model.arc(aid)) is not None]
    rank = _topo_stage_order(sub, arcs)

    for ref in sorted((r for r in sub.stages if r.kind is StageKind.CREATE), key=lambda r: rank[r]):
        state = _spawn(state, ref.thimac)

    visited: set[StageRef] = set()
    moved_from: set[StageRef] = set()
    flows = sorted(
        (a for a in arcs if a.kind is ArcKind.FLOW),
        key=lambda a: (rank.get(a.src, len(rank)), rank.get(a.dst, len(rank)), a.id),
    )
    for arc in flows:
        movers = state.at(arc.src)
        for inst in movers:
            state = _move_along(state, arc, inst)
            visited.add(arc.dst)
            moved_from.add(arc.src)

    # Every process stage of the event must transform something: either the
    # event's own flows feed it, or it is the departure point of a move, or
    # it acts in place on things already in the machine.
    fed = {a.dst for a in flows}
    for ref in sorted((r for r in sub.stages if r.kind is StageKind.PROCESS), key=lambda r: rank[r]):
        if ref in fed:
            if ref not in visited:
                raise IllegalAction(ref, f"event '{event_id}' has nothing to process")
            continue
        if ref in moved_from:
            continue
        present = state.in_machine(ref.thimac)
        if not present:
            raise IllegalAction(ref, f"event '{event_id}' has nothing to process")
        for inst in present:
            state = _put(state, replace(inst, location=ref, tags=inst.tags + (f"processed@{ref.thimac}",)))

    queued = tuple(a.dst for a in sorted(arcs, key=lambda a: a.id) if a.kind is ArcKind.TRIGGER)
    state = replace(state, pending_triggers=state.pending_triggers + queued)

    window = ctx.chronology.window_of(event_id)
    step = state.step if window is None else max(state.step, window[0])
    state = replace(state, log=state.log + ((event_id, step),), step=step + 1)

    # triggers fire once the event has completed
    for ref in state.pending_triggers:
        if ref.kind is StageKind.CREATE:
            state = _spawn(state, ref.thimac)
    return replace(state, pending_triggers=())


# ---------------------------------------------------------------------------
# Whole-run simulation


def _choose(enabled: list[str], chron: Chronology, policy: BranchPolicy, rng: Optional[random.Random]) -> str:
    if isinstance(policy, Seeded):
        assert rng is not None
        return rng.choice(enabled)
    assert isinstance(policy, Scripted)
    group_of = {m: g for g in chron.groups for m in g.members}
    choosable = []
    for e in enabled:
        g = group_of.get(e)
        if g is None or policy.chosen(g.name) == e:
            choosable.append(e)
    if choosable:
        return choosable[0]
    uncovered = sorted({group_of[e].name for e in enabled if policy.chosen(group_of[e].name) is None})
    if uncovered:
        raise PolicyError(f"no scripted choice for exclusive group(s): {', '.join(uncovered)}")
    raise PolicyError("the scripted choices rule out every enabled event")


def simulate(
    model: StaticModel,
    subdiagrams: Sequence[Subdiagram],
    events: Sequence[Event],
    chronology: Chronology,
    policy: BranchPolicy,
    trace_id: str = "sim",
) -> Trace:
    """Run one complete scenario and return its trace.

    The result always satisfies evaluate_trace; with a Seeded policy it is a
    deterministic function of the seed. Raises Deadlock when no event is
    enabled before a run is complete (a chronology/model mismatch).
    """
    state = initial_state(model, subdiagrams, events, chronology)
    rng = random.Random(policy.seed) if isinstance(policy, Seeded) else None

    while not run_set_valid(chronology, state.fired()):
        enabled = enabled_events(state)
        if not enabled:
            raise Deadlock(
                f"no event is enabled after [{', '.join(e for e, _ in state.log)}]; no complete run is reachable"
            )
        state = fire_event(state, _choose(enabled, chronology, policy, rng))

    return Trace(trace_id, state.log)
