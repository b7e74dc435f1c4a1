"""Candidate direct-fraction generation for hub-routed connections.

For a (branch, origin port) pair that routes part of its volume via a hub,
the approximated cost is piecewise linear in the direct share, with kinks
and jumps only where one of the three touched land arcs (branch-to-port,
branch-to-hub, hub-to-port) crosses a piece boundary of its cost curve.
The continuous optimum is therefore searched over the finite set of
fractions that place an arc volume exactly on such a boundary, plus the
extremes 0 and 1, plus the per-destination subset sums that alternating
per-destination methods can produce.
"""

from __future__ import annotations

from itertools import combinations

from .cost_model import ApproxLandCurve, approx_breakpoint_volumes

MAX_SUBSET_DESTINATIONS = 6


def subset_sums(volumes: list[float]) -> list[float]:
    """All non-empty, non-total subset sums of a small volume list."""
    if not 1 < len(volumes) <= MAX_SUBSET_DESTINATIONS:
        return []
    out = set()
    for k in range(1, len(volumes)):
        for combo in combinations(volumes, k):
            out.add(sum(combo))
    return sorted(out)


def pair_fraction_candidates(
    curve_direct: ApproxLandCurve,
    curve_feeder: ApproxLandCurve,
    curve_hub_port: ApproxLandCurve,
    volume: float,
    feeder_base: float = 0.0,
    port_base: float = 0.0,
    dest_volumes: list[float] | None = None,
) -> list[float]:
    """Sorted candidate direct fractions in [0, 1] for one routed pair.

    feeder_base and port_base are the volumes already riding the
    branch-to-hub and hub-to-port arcs from other connections; the routed
    remainder (1 - y) * volume stacks on top of them.
    """
    cands = {0.0, 1.0}
    if volume <= 0.0:
        return sorted(cands)
    for w in approx_breakpoint_volumes(curve_direct, 0.0, volume):
        cands.add(w / volume)
    for w in approx_breakpoint_volumes(curve_feeder, feeder_base, feeder_base + volume):
        cands.add(1.0 - (w - feeder_base) / volume)
    for w in approx_breakpoint_volumes(curve_hub_port, port_base, port_base + volume):
        cands.add(1.0 - (w - port_base) / volume)
    if dest_volumes:
        for ss in subset_sums(dest_volumes):
            if 0.0 < ss < volume:
                cands.add(ss / volume)
    out = sorted(min(1.0, max(0.0, y)) for y in cands)
    dedup = [out[0]]
    for y in out[1:]:
        if y - dedup[-1] > 1e-12:
            dedup.append(y)
    return dedup
