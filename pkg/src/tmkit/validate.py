"""Well-formedness checks for static models, and simplified-notation expansion.

Full notation restricts flow arcs to the stage-machine topology: things move
create/receive -> process -> release -> transfer, cross machines only
transfer-to-transfer, and enter membership through receive (or the
arrive/accept refinement). Simplified notation elides the
release/transfer/receive plumbing of a cross-machine move; ``desugar``
reinserts it.
"""
from __future__ import annotations

from dataclasses import replace

from . import diagnostics as dg
from .errors import NotSimplified
from .model import Arc, ArcKind, Notation, StageKind, StageRef, StaticModel, Thimac

C, P, R, T, V, A, X = (
    StageKind.CREATE,
    StageKind.PROCESS,
    StageKind.RELEASE,
    StageKind.TRANSFER,
    StageKind.RECEIVE,
    StageKind.ARRIVE,
    StageKind.ACCEPT,
)

# Legal intra-machine flow pairs in full notation. Creation takes no incoming
# flow (triggers only), and transfer-to-arrive mirrors transfer-to-receive for
# machines using the arrive/accept refinement.
INTRA_FLOWS: frozenset[tuple[StageKind, StageKind]] = frozenset(
    {
        (C, P),
        (C, R),
        (V, P),
        (V, R),
        (P, R),
        (R, T),
        (T, V),
        (T, A),
        (A, X),
        (X, P),
        (X, R),
    }
)

# Cross-machine flow in full notation: transfer feeding transfer, nothing else.
CROSS_FLOWS: frozenset[tuple[StageKind, StageKind]] = frozenset({(T, T)})

# A simplified cross-machine flow is legal precisely when desugaring can
# expand it: the source must be able to feed a release chain (anything but
# arrive) and the target must be reachable from the receiving side (anything
# but accept; create is reached by trigger).
SIMPLIFIED_CROSS_SRC = frozenset(StageKind) - {A}
SIMPLIFIED_CROSS_DST = frozenset(StageKind) - {X}


def flow_legal(src: StageRef, dst: StageRef, notation: Notation) -> bool:
    pair = (src.kind, dst.kind)
    if src.thimac == dst.thimac:
        return pair in INTRA_FLOWS
    if pair in CROSS_FLOWS:
        return True
    return (
        notation is Notation.SIMPLIFIED
        and src.kind in SIMPLIFIED_CROSS_SRC
        and dst.kind in SIMPLIFIED_CROSS_DST
    )


def validate_static(model: StaticModel) -> list[dg.Diagnostic]:
    """Empty iff the model is well-formed in its declared notation.

    Triggers are unconstrained apart from self-loops; only flows are checked
    against the legality tables. Stages with no incident arc are flagged as
    warnings since a bare single-stage thimac is meaningful.
    """
    diags: list[dg.Diagnostic] = []

    for t in model.walk():
        arrive_accept = {A, X} & t.stages
        if arrive_accept and (arrive_accept != {A, X} or V in t.stages):
            diags.append(
                dg.error(
                    dg.MODE,
                    f"thimac '{t.id}' must declare arrive and accept together, replacing receive",
                    (t.id,),
                )
            )

    touched: set[StageRef] = set()
    for arc in model.arcs:
        touched.update((arc.src, arc.dst))
        if arc.kind is ArcKind.TRIGGER:
            if arc.src == arc.dst:
                diags.append(dg.warning(dg.TRIGGER_SELF, f"trigger '{arc.id}' loops on {arc.src}", (arc.id,)))
            continue
        if arc.dst.kind is C and not (model.notation is Notation.SIMPLIFIED and arc.cross_machine):
            diags.append(
                dg.error(
                    dg.CREATE_INFLOW,
                    f"flow '{arc.id}' enters {arc.dst}; things are born there, creation is trigger-only",
                    (arc.id,),
                )
            )
            continue
        if not flow_legal(arc.src, arc.dst, model.notation):
            diags.append(
                dg.warning(
                    dg.FLOW_ILLEGAL,
                    f"flow '{arc.id}' {arc.src} -> {arc.dst} is not a legal move in {model.notation.value} notation",
                    (arc.id,),
                )
            )

    for t in model.walk():
        for kind in StageKind:
            if kind in t.stages and StageRef(t.id, kind) not in touched:
                diags.append(
                    dg.warning(dg.STAGE_DANGLING, f"stage {StageRef(t.id, kind)} has no arcs", (t.id,))
                )

    return dg.sort_diagnostics(diags)


# ---------------------------------------------------------------------------
# Desugaring


def desugar(model: StaticModel) -> StaticModel:
    """Expand a simplified model into full notation.

    Each elided cross-machine flow src -> dst becomes the chain
    src -> release -> transfer => transfer -> receive -> dst, inserting only
    the stages and arcs not already present. The hop into a create stage is
    emitted as a trigger, since creation admits no incoming flow. The result
    passes full-notation validation whenever the input passed simplified
    validation.
    """
    if model.notation is not Notation.SIMPLIFIED:
        raise NotSimplified(f"model '{model.name}' is already in full notation")

    needed: dict[str, set[StageKind]] = {}
    arcs: list[Arc] = []
    existing: set[tuple[ArcKind, StageRef, StageRef]] = set()

    def exit_chain(thimac_id: str, kind: StageKind) -> list[StageKind]:
        if kind is T:
            return [T]
        if kind is R:
            return [R, T]
        return [kind, R, T]

    def entry_chain(t: Thimac, kind: StageKind) -> tuple[list[StageKind], bool]:
        # Returns the receiving-side chain and whether the last hop triggers.
        gate = [A, X] if ({A, X} & t.stages) else [V]
        if kind is T:
            return [T], False
        if kind in gate and kind is not X:
            return [T] + gate[: gate.index(kind) + 1], False
        if kind is X:
            return [T, A, X], False
        if kind is C:
            return [T] + gate + [C], True
        return [T] + gate + [kind], False

    used_ids = {a.id for a in model.arcs}

    def add_arc(kind: ArcKind, src: StageRef, dst: StageRef, base: str, n: int) -> int:
        key = (kind, src, dst)
        if key in existing:
            return n
        existing.add(key)
        while f"{base}_x{n}" in used_ids:
            n += 1
        used_ids.add(f"{base}_x{n}")
        arcs.append(Arc(f"{base}_x{n}", kind, src, dst))
        return n + 1

    for arc in model.arcs:
        existing.add((arc.kind, arc.src, arc.dst))

    for arc in model.arcs:
        if arc.kind is ArcKind.TRIGGER or not arc.cross_machine or (arc.src.kind, arc.dst.kind) in CROSS_FLOWS:
            arcs.append(arc)
            continue

        dst_thimac = model.thimac(arc.dst.thimac)
        assert dst_thimac is not None
        out_side = exit_chain(arc.src.thimac, arc.src.kind)
        in_side, trigger_last = entry_chain(dst_thimac, arc.dst.kind)

        needed.setdefault(arc.src.thimac, set()).update(out_side)
        needed.setdefault(arc.dst.thimac, set()).update(in_side)

        path = [StageRef(arc.src.thimac, k) for k in out_side] + [StageRef(arc.dst.thimac, k) for k in in_side]
        n = 1
        for i, (u, v) in enumerate(zip(path, path[1:])):
            last = i == len(path) - 2
            n = add_arc(ArcKind.TRIGGER if (last and trigger_last) else ArcKind.FLOW, u, v, arc.id, n)

    def grow(t: Thimac) -> Thimac:
        extra = needed.get(t.id, set())
        return replace(
            t,
            stages=t.stages | frozenset(extra),
            children=tuple(grow(c) for c in t.children),
        )

    return StaticModel(
        name=model.name,
        roots=tuple(grow(t) for t in model.roots),
        arcs=tuple(arcs),
        notation=Notation.FULL,
    )
