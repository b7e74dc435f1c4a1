"""Decision encoding, feasibility checking, and the six-term cost evaluator.

A solution fixes the origin port per (branch, destination) pair, the set
of hub branches, and per (branch, origin port) pair the share of volume
going direct plus the hub carrying the remainder.  Feasibility mirrors
the model constraints:

  C7   every positive-demand pair picks exactly one usable origin port
  C8   at most one hub per (branch, origin port) pair
  C9   a direct share below 1 requires a hub choice
  C10  chosen hubs must be open
  C11  open hubs ship their own volume direct (and carry no hub choice,
       matching the linearized model's no-relay rows)

The evaluator reproduces the six objective terms: hub set-up, hub
consolidation, port consolidation, branch-to-port land legs (which also
carry hub-to-port flow), branch-to-hub land legs, and sea transport.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .cost_model import land_breakpoints, land_cost_approx, land_cost_exact, sea_cost
from .errors import InfeasibleSolutionError, InstanceFormatError, UnknownNodeError
from .network_model import Instance

SOLUTION_SCHEMA = "hublocate-solution-1"


@dataclass(frozen=True)
class Solution:
    """One full set of decisions.

    port_choice maps positive-demand (branch, destination) pairs to the
    chosen origin port.  direct_fraction holds the direct share per
    (branch, origin port); missing entries default to 1 (all direct).
    hub_choice holds the consolidating hub per (branch, origin port);
    canonical solutions carry fraction entries exactly for the pairs with
    a hub choice.
    """

    port_choice: dict  # (b, t) -> s
    hubs: frozenset = frozenset()
    direct_fraction: dict = field(default_factory=dict)  # (b, s) -> y in [0, 1]
    hub_choice: dict = field(default_factory=dict)  # (b, s) -> h

    def fraction(self, b: str, s: str) -> float:
        return self.direct_fraction.get((b, s), 1.0)

    def approx_equal(self, other: "Solution", tol: float = 1e-9) -> bool:
        """Equality with float tolerance on the direct fractions."""
        if (
            self.port_choice != other.port_choice
            or self.hubs != other.hubs
            or set(self.hub_choice) != set(other.hub_choice)
            or any(self.hub_choice[k] != other.hub_choice[k] for k in self.hub_choice)
            or set(self.direct_fraction) != set(other.direct_fraction)
        ):
            return False
        return all(
            abs(v - other.direct_fraction[k]) <= tol for k, v in self.direct_fraction.items()
        )


def all_direct_solution(instance: Instance, port_choice: dict) -> Solution:
    """Solution with no hubs and every shipment going direct."""
    return Solution(port_choice=dict(port_choice))


@dataclass(frozen=True)
class ConstraintViolation:
    constraint: str  # C7 .. C11
    subject: tuple
    message: str


@dataclass(frozen=True)
class CostBreakdown:
    """The six objective terms plus their exact floating sum."""

    setup: float
    hub_consolidation: float
    port_consolidation: float
    land_branch_to_port: float
    land_branch_to_hub: float
    sea: float
    total: float

    TERMS = (
        "setup",
        "hub_consolidation",
        "port_consolidation",
        "land_branch_to_port",
        "land_branch_to_hub",
        "sea",
    )

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.TERMS}
        d["total"] = self.total
        return d


def _make_breakdown(setup, hub_consol, port_consol, land_port, land_hub, sea) -> CostBreakdown:
    terms = (setup, hub_consol, port_consol, land_port, land_hub, sea)
    return CostBreakdown(*terms, total=sum(terms))


def port_volumes(instance: Instance, port_choice: dict) -> dict:
    """(b, s) -> total demand routed from b via s, positive entries only."""
    out: dict = {}
    for (b, t), v in instance.demand.items():
        if v <= 0.0:
            continue
        s = port_choice.get((b, t))
        if s is not None:
            out[(b, s)] = out.get((b, s), 0.0) + v
    return out


def sea_volumes(instance: Instance, port_choice: dict) -> dict:
    """(s, t) -> total demand shipped on that sea relation."""
    out: dict = {}
    for (b, t), v in instance.demand.items():
        if v <= 0.0:
            continue
        s = port_choice.get((b, t))
        if s is not None:
            out[(s, t)] = out.get((s, t), 0.0) + v
    return out


def check_feasibility(instance: Instance, solution: Solution) -> list[ConstraintViolation]:
    """Every violated constraint with its indices; feasible iff empty.

    Unknown node references are structural errors (UnknownNodeError), not
    constraint violations.
    """
    branches = set(instance.nodes.branches)
    ports = set(instance.nodes.origin_ports)
    dests = set(instance.nodes.destination_ports)

    for (b, t), s in solution.port_choice.items():
        if b not in branches or t not in dests or s not in ports:
            raise UnknownNodeError(f"port choice ({b}, {t}) -> {s} references unknown nodes")
    for (b, s), y in solution.direct_fraction.items():
        if b not in branches or s not in ports:
            raise UnknownNodeError(f"direct fraction references unknown pair ({b}, {s})")
        if not 0.0 <= y <= 1.0:
            raise ValueError(f"direct fraction ({b}, {s}) = {y} outside [0, 1]")
    for (b, s), h in solution.hub_choice.items():
        if b not in branches or s not in ports or h not in branches:
            raise UnknownNodeError(f"hub choice ({b}, {s}) -> {h} references unknown nodes")
    for h in solution.hubs:
        if h not in branches:
            raise UnknownNodeError(f"hub {h} is not a branch")

    out: list[ConstraintViolation] = []
    for (b, t) in instance.positive_pairs():
        s = solution.port_choice.get((b, t))
        if s is None:
            out.append(ConstraintViolation(
                "C7", (b, t), f"no origin port chosen for shipment ({b}, {t})"
            ))
        elif (s, t) not in instance.sea_rates:
            out.append(ConstraintViolation(
                "C7", (b, t), f"origin port {s} has no sea rate toward {t}"
            ))

    for (b, s), y in sorted(solution.direct_fraction.items()):
        if y < 1.0 and (b, s) not in solution.hub_choice:
            out.append(ConstraintViolation(
                "C9", (b, s), f"direct share {y} < 1 but no hub chosen for ({b}, {s})"
            ))

    for (b, s), h in sorted(solution.hub_choice.items()):
        if h == b:
            out.append(ConstraintViolation(
                "C10", (b, s, h), f"branch {b} cannot use itself as hub"
            ))
        elif h not in solution.hubs:
            out.append(ConstraintViolation(
                "C10", (b, s, h), f"chosen hub {h} for ({b}, {s}) is not open"
            ))

    for h in sorted(solution.hubs):
        for s in instance.nodes.origin_ports:
            if solution.fraction(h, s) < 1.0:
                out.append(ConstraintViolation(
                    "C11", (h, s), f"hub {h} must ship direct to {s}"
                ))
            if (h, s) in solution.hub_choice:
                out.append(ConstraintViolation(
                    "C11", (h, s), f"hub {h} cannot route via another hub toward {s}"
                ))

    return sorted(out, key=lambda v: (v.constraint, v.subject))


def evaluate_cost(instance: Instance, solution: Solution, mode: str = "exact") -> CostBreakdown:
    """Compute the six cost terms for a feasible solution.

    mode="exact" prices land legs from the raw tariff table; mode="approx"
    uses the linearized curves and therefore matches the MILP objective at
    the encoded assignment.  Sea legs always use the exact sea cost.
    """
    if mode not in ("exact", "approx"):
        raise ValueError(f"mode must be 'exact' or 'approx', got {mode!r}")
    report = check_feasibility(instance, solution)
    if report:
        raise InfeasibleSolutionError(report)

    curves: dict = {}

    def land(a: str, r: str, v: float) -> float:
        if v <= 0.0:
            return 0.0
        dist = instance.distance[(a, r)]
        if mode == "exact":
            return land_cost_exact(instance.land_costs, dist, v)
        band = instance.land_costs.distance_band(dist)
        curve = curves.get(band)
        if curve is None:
            curve = curves[band] = land_breakpoints(instance.land_costs, dist)
        return land_cost_approx(curve, v)

    vols = port_volumes(instance, solution.port_choice)

    setup = sum(instance.setup_cost[h] for h in sorted(solution.hubs))
    port_consol = 0.0
    port_totals: dict = {}
    for (b, s), v in sorted(vols.items()):
        port_totals[s] = port_totals.get(s, 0.0) + v
    for s in sorted(port_totals):
        port_consol += instance.port_consol_cost[s] * port_totals[s]

    hub_consol = 0.0
    port_arc: dict = {}  # (b or hub, s) -> volume on the land leg into s
    hub_arc: dict = {}  # (b, h) -> volume on the feeder leg into the hub
    hub_inflow: dict = {}
    for (b, s), v in sorted(vols.items()):
        y = solution.fraction(b, s)
        direct = y * v
        if direct > 0.0:
            port_arc[(b, s)] = port_arc.get((b, s), 0.0) + direct
        routed = (1.0 - y) * v
        if routed > 0.0:
            h = solution.hub_choice[(b, s)]
            hub_arc[(b, h)] = hub_arc.get((b, h), 0.0) + routed
            port_arc[(h, s)] = port_arc.get((h, s), 0.0) + routed
            hub_inflow[h] = hub_inflow.get(h, 0.0) + routed
    for h in sorted(hub_inflow):
        hub_consol += instance.hub_consol_cost[h] * hub_inflow[h]

    land_port = sum(land(a, s, v) for (a, s), v in sorted(port_arc.items()))
    land_hub = sum(land(b, h, v) for (b, h), v in sorted(hub_arc.items()))

    sea = 0.0
    for (s, t), w in sorted(sea_volumes(instance, solution.port_choice).items()):
        cost, _, _ = sea_cost(
            instance.sea_rates[(s, t)], w, instance.sea_container_volume,
            instance.nvocc_cap, instance.nvocc_penalty,
        )
        sea += cost

    return _make_breakdown(setup, hub_consol, port_consol, land_port, land_hub, sea)


def hub_volume_share(instance: Instance, solution: Solution) -> float:
    """Share of total shipment volume that is routed via a hub, in [0, 1]."""
    total = instance.total_demand()
    if total <= 0.0:
        return 0.0
    routed = sum(
        (1.0 - solution.fraction(b, s)) * v
        for (b, s), v in port_volumes(instance, solution.port_choice).items()
    )
    return routed / total


# ---------------------------------------------------------------------------
# Solution file format (JSON, canonical ordering)


def solution_to_json(solution: Solution) -> str:
    doc = {
        "schema": SOLUTION_SCHEMA,
        "port_choice": [
            {"branch": b, "destination": t, "origin": s}
            for (b, t), s in sorted(solution.port_choice.items())
        ],
        "hubs": sorted(solution.hubs),
        "direct_fraction": [
            {"branch": b, "origin": s, "fraction": y}
            for (b, s), y in sorted(solution.direct_fraction.items())
        ],
        "hub_choice": [
            {"branch": b, "origin": s, "hub": h}
            for (b, s), h in sorted(solution.hub_choice.items())
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def save_solution(solution: Solution, path) -> None:
    Path(path).write_text(solution_to_json(solution), encoding="utf-8")


def load_solution(path) -> Solution:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"not valid JSON: {exc.msg}", code="PARSE", line=exc.lineno)
    if not isinstance(doc, dict) or doc.get("schema") != SOLUTION_SCHEMA:
        raise InstanceFormatError(
            f"unsupported solution schema {doc.get('schema')!r}", code="SCHEMA_VERSION"
        )
    return Solution(
        port_choice={
            (r["branch"], r["destination"]): r["origin"] for r in doc.get("port_choice", [])
        },
        hubs=frozenset(doc.get("hubs", [])),
        direct_fraction={
            (r["branch"], r["origin"]): float(r["fraction"])
            for r in doc.get("direct_fraction", [])
        },
        hub_choice={(r["branch"], r["origin"]): r["hub"] for r in doc.get("hub_choice", [])},
    )
