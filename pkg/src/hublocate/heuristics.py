"""Two-stage per-destination heuristic, no-hub baseline, and local search.

The two-stage method mirrors the alternating per-destination procedure:
for one destination it loops between an exhaustive search over hub sets
(up to the hub budget) and a per-branch best-port step, evaluating every
candidate with the exact cost model restricted to that destination's
shipments, until an iteration brings no strict improvement.  Shipments
are routed whole: each one goes fully direct or fully via one hub, chosen
by per-shipment best response under the joint cost (a standalone
comparison would never see consolidation gains).

Merging the per-destination results can assign different hubs to the same
(branch, origin port) pair; those conflicts are reported as C8 violations
and repaired by keeping the hub that carries the most volume.  Branches
that are themselves upgraded to hubs are forced to ship direct so the
merged solution always satisfies the hub constraints.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .cost_model import land_breakpoints, land_cost_exact, sea_cost
from .errors import (
    InfeasibleSolutionError,
    InvalidInstanceError,
    OracleLimitError,
    TimeBudgetError,
)
from .exact_oracle import OracleLimits, _Kernel
from .network_model import Instance, validate_instance
from .solution import (
    ConstraintViolation,
    CostBreakdown,
    Solution,
    check_feasibility,
    evaluate_cost,
    port_volumes,
)
from .splits import pair_fraction_candidates

DEFAULT_HUB_BUDGET = 2
MAX_ROUTE_SWEEPS = 10


@dataclass(frozen=True)
class DestinationPlan:
    """Result of the per-destination subproblem."""

    destination: str
    ports: dict  # branch -> origin port (branches with demand toward t)
    hubs: tuple  # hubs actually used, sorted
    routes: dict  # branch -> hub or None
    cost: float
    iterations: int


@dataclass
class TwoStageResult:
    per_destination: dict  # t -> DestinationPlan
    merged: Solution
    violations: list  # pre-repair C8 conflicts from the merge
    cost: CostBreakdown  # merged solution, exact mode

    @property
    def iterations(self) -> dict:
        return {t: plan.iterations for t, plan in self.per_destination.items()}


class _DestinationContext:
    """Exact-cost evaluator for one destination's shipments."""

    def __init__(self, instance: Instance, t: str):
        self.instance = instance
        self.t = t
        self.ship = {
            b: v for (b, tt), v in instance.demand.items() if tt == t and v > 0.0
        }
        self.branches = sorted(self.ship)
        self.ports = instance.usable_ports(t)

    def cost(self, ports: dict, routes: dict) -> float:
        inst = self.instance
        used = {h for h in routes.values() if h is not None}
        total = sum(inst.setup_cost[h] for h in sorted(used))
        port_arc: dict = {}
        port_vol: dict = {}
        for b in self.branches:
            v = self.ship[b]
            s = ports[b]
            h = routes[b]
            port_vol[s] = port_vol.get(s, 0.0) + v
            if h is None:
                port_arc[(b, s)] = port_arc.get((b, s), 0.0) + v
            else:
                total += inst.hub_consol_cost[h] * v
                total += land_cost_exact(inst.land_costs, inst.distance[(b, h)], v)
                port_arc[(h, s)] = port_arc.get((h, s), 0.0) + v
        for (a, s), v in sorted(port_arc.items()):
            total += land_cost_exact(inst.land_costs, inst.distance[(a, s)], v)
        for s, v in sorted(port_vol.items()):
            total += inst.port_consol_cost[s] * v
            total += sea_cost(
                inst.sea_rates[(s, self.t)], v, inst.sea_container_volume,
                inst.nvocc_cap, inst.nvocc_penalty,
            )[0]
        return total

    def initial_ports(self) -> dict:
        """Per-branch cheapest standalone direct cost, ties to the first port."""
        inst = self.instance
        out = {}
        for b in self.branches:
            v = self.ship[b]
            best = None
            for s in self.ports:
                c = (
                    land_cost_exact(inst.land_costs, inst.distance[(b, s)], v)
                    + inst.port_consol_cost[s] * v
                    + sea_cost(
                        inst.sea_rates[(s, self.t)], v, inst.sea_container_volume,
                        inst.nvocc_cap, inst.nvocc_penalty,
                    )[0]
                )
                if best is None or c < best[0]:
                    best = (c, s)
            out[b] = best[1]
        return out

    def route_shipments(self, ports: dict, hub_set: tuple) -> dict:
        """Best-response routing sweeps: direct or one hub per shipment.

        Branches inside the hub set always ship direct.  Ties prefer
        direct, then the lexicographically first hub.
        """
        routes = {b: None for b in self.branches}
        for _ in range(MAX_ROUTE_SWEEPS):
            changed = False
            for b in self.branches:
                if b in hub_set:
                    continue
                options = [None] + [h for h in hub_set if h != b]
                best = None
                for h in options:
                    trial = dict(routes)
                    trial[b] = h
                    c = self.cost(ports, trial)
                    if best is None or c < best[0]:
                        best = (c, h)
                if best[1] != routes[b]:
                    routes[b] = best[1]
                    changed = True
            if not changed:
                break
        return routes


def _hub_subsets(branches, budget):
    from itertools import combinations

    for k in range(0, min(budget, len(branches)) + 1):
        yield from combinations(branches, k)


def solve_single_destination(
    instance: Instance, t: str, hub_budget: int = DEFAULT_HUB_BUDGET
) -> DestinationPlan:
    """Alternating hub-set / port search for one destination."""
    ctx = _DestinationContext(instance, t)
    if not ctx.branches:
        return DestinationPlan(t, {}, (), {}, 0.0, 0)

    ports = ctx.initial_ports()
    routes = {b: None for b in ctx.branches}
    cost = ctx.cost(ports, routes)
    iterations = 0
    while True:
        iterations += 1
        before = cost

        # Step 1: ports fixed, exhaustive search over hub sets.
        for hub_set in _hub_subsets(instance.nodes.branches, hub_budget):
            trial_routes = ctx.route_shipments(ports, hub_set)
            c = ctx.cost(ports, trial_routes)
            if c < cost:
                cost, routes = c, trial_routes

        # Step 2: hubs fixed, per-branch best port under the same routing rule.
        used = tuple(sorted({h for h in routes.values() if h is not None}))
        for b in ctx.branches:
            for s in ctx.ports:
                if s == ports[b]:
                    continue
                trial_ports = dict(ports)
                trial_ports[b] = s
                options = [None] if b in used else [None] + [h for h in used if h != b]
                for h in options:
                    trial_routes = dict(routes)
                    trial_routes[b] = h
                    c = ctx.cost(trial_ports, trial_routes)
                    if c < cost:
                        cost, ports, routes = c, trial_ports, trial_routes

        if cost >= before:
            break

    used = tuple(sorted({h for h in routes.values() if h is not None}))
    return DestinationPlan(t, ports, used, routes, cost, iterations)


def solve_two_stage(
    instance: Instance,
    hub_budget: int = DEFAULT_HUB_BUDGET,
    threads: int = 1,
    deadline: float | None = None,
) -> TwoStageResult:
    """Per-destination solves, merge, conflict report, and repair."""
    violations_in = validate_instance(instance)
    if violations_in:
        raise InvalidInstanceError(violations_in)

    dests = list(instance.nodes.destination_ports)
    if threads > 1 and len(dests) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=min(threads, len(dests))) as pool:
            plans = list(pool.map(
                lambda t: solve_single_destination(instance, t, hub_budget), dests
            ))
    else:
        plans = []
        for t in dests:
            if deadline is not None and time.monotonic() > deadline:
                raise TimeBudgetError("two-stage solve exceeded its time budget")
            plans.append(solve_single_destination(instance, t, hub_budget))
    per_destination = {plan.destination: plan for plan in plans}

    hubs = frozenset(h for plan in plans for h in plan.hubs)
    port_choice = {}
    per_pair: dict = {}  # (b, s) -> list of (hub or None, volume, t)
    for plan in plans:
        for b, s in sorted(plan.ports.items()):
            port_choice[(b, plan.destination)] = s
            v = instance.demand[(b, plan.destination)]
            per_pair.setdefault((b, s), []).append((plan.routes[b], v, plan.destination))

    violations = []
    hub_choice = {}
    fractions = {}
    for (b, s), entries in sorted(per_pair.items()):
        chosen = sorted({h for h, _, _ in entries if h is not None})
        if len(chosen) > 1:
            violations.append(ConstraintViolation(
                "C8", (b, s),
                f"merge assigns hubs {', '.join(chosen)} to connection ({b}, {s})",
            ))
        if b in hubs or not chosen:
            continue  # hubs ship direct; pure-direct pairs need no entry
        by_hub: dict = {}
        for h, v, _ in entries:
            if h is not None:
                by_hub[h] = by_hub.get(h, 0.0) + v
        winner = max(sorted(by_hub), key=lambda h: by_hub[h])
        total = sum(v for _, v, _ in entries)
        direct = sum(v for h, v, _ in entries if h is None)
        hub_choice[(b, s)] = winner
        fractions[(b, s)] = direct / total if total > 0.0 else 1.0

    merged = Solution(
        port_choice=port_choice,
        hubs=hubs,
        direct_fraction=fractions,
        hub_choice=hub_choice,
    )
    return TwoStageResult(
        per_destination=per_destination,
        merged=merged,
        violations=violations,
        cost=evaluate_cost(instance, merged, "exact"),
    )


def solve_no_hubs(
    instance: Instance,
    limits: OracleLimits | None = None,
    deadline: float | None = None,
) -> Solution:
    """Optimal pure port assignment with direct transport everywhere.

    Solved exactly by enumerating port assignments against the
    approximated objective (the same restricted problem the linearized
    model solves when all hub variables are fixed to zero); refuses when
    the assignment space exceeds the evaluation budget.
    """
    violations = validate_instance(instance)
    if violations:
        raise InvalidInstanceError(violations)
    limits = limits or OracleLimits()

    kernel = _Kernel(instance)
    z_space = 1.0
    for opts in kernel.options:
        z_space *= max(1, len(opts))
    if z_space > limits.max_evaluations:
        raise OracleLimitError(
            f"{z_space:.3g} port assignments exceed the budget of "
            f"{limits.max_evaluations:.3g}; emit the restricted model instead",
            estimate=z_space,
        )

    from itertools import product

    best = None
    for i, zvec in enumerate(product(*kernel.options) if kernel.pairs else [()]):
        if deadline is not None and i % 256 == 0 and time.monotonic() > deadline:
            raise TimeBudgetError("no-hub solve exceeded its time budget")
        fixed, vols, _ = kernel.fixed_cost(zvec)
        total = fixed + kernel.routing_cost(vols, (), {}, {})
        if best is None or total < best[0]:
            best = (total, zvec)
    zvec = best[1] if best else ()
    return Solution(port_choice=dict(zip(kernel.pairs, zvec)))


ALL_MOVES = ("toggle_hub", "reassign_port", "reassign_hub", "adjust_fraction")


class _SearchState:
    """Mutable working copy of a solution for the local search."""

    def __init__(self, instance: Instance, solution: Solution):
        self.instance = instance
        self.ports = dict(solution.port_choice)
        self.hubs = set(solution.hubs)
        self.choices = dict(solution.hub_choice)
        self.fracs = {k: solution.fraction(*k) for k in self.choices}

    def as_solution(self) -> Solution:
        return Solution(
            port_choice=dict(self.ports),
            hubs=frozenset(self.hubs),
            direct_fraction=dict(self.fracs),
            hub_choice=dict(self.choices),
        )

    def cost(self) -> float:
        return evaluate_cost(self.instance, self.as_solution(), "approx").total

    def volumes(self) -> dict:
        return port_volumes(self.instance, self.ports)


def _try(state: _SearchState, mutate, current: float) -> float | None:
    """Apply mutate(); return the new cost if strictly better, else roll back."""
    saved = (dict(state.ports), set(state.hubs), dict(state.choices), dict(state.fracs))
    mutate()
    c = state.cost()
    if c < current - 1e-12 * max(1.0, abs(current)):
        return c
    state.ports, state.hubs, state.choices, state.fracs = saved
    return None


def _open_hub(state: _SearchState, h: str) -> None:
    state.hubs.add(h)
    for key in [k for k in state.choices if k[0] == h]:
        del state.choices[key]
        state.fracs.pop(key, None)
    vols = state.volumes()
    base = state.cost()
    for (b, s) in sorted(vols):
        if b in state.hubs or b == h or vols[(b, s)] <= 0.0:
            continue
        saved = (dict(state.choices), dict(state.fracs))
        state.choices[(b, s)] = h
        state.fracs[(b, s)] = 0.0
        c = state.cost()
        if c < base:
            base = c
        else:
            state.choices, state.fracs = saved


def _fraction_candidates(state: _SearchState, pair) -> list:
    """Piece-boundary fractions for one routed pair in the current state."""
    inst = state.instance
    b, s = pair
    h = state.choices[pair]
    vols = state.volumes()
    v = vols.get(pair, 0.0)
    feeder_base = 0.0
    port_base = vols.get((h, s), 0.0)
    for other, oh in state.choices.items():
        if other == pair:
            continue
        routed = (1.0 - state.fracs.get(other, 0.0)) * vols.get(other, 0.0)
        if oh == h and other[0] == b:
            feeder_base += routed
        if oh == h and other[1] == s:
            port_base += routed
    def curve(a, r):
        return land_breakpoints(inst.land_costs, inst.distance[(a, r)])

    dest_volumes = [
        inst.demand[(b, t)]
        for (bb, t), ss in sorted(state.ports.items())
        if bb == b and ss == s and inst.demand.get((bb, t), 0.0) > 0.0
    ]
    return pair_fraction_candidates(
        curve(b, s), curve(b, h), curve(h, s), v, feeder_base, port_base, dest_volumes
    )


def local_search_improve(
    instance: Instance,
    start: Solution,
    moves: tuple = ALL_MOVES,
    max_rounds: int = 50,
    deadline: float | None = None,
) -> Solution:
    """First-improvement local search over hub, port, and split moves.

    Never increases the approximated cost and keeps every intermediate
    solution feasible; stops after a full round without improvement or
    after max_rounds.
    """
    report = check_feasibility(instance, start)
    if report:
        raise InfeasibleSolutionError(report)

    state = _SearchState(instance, start)
    start_cost = current = state.cost()
    branches = list(instance.nodes.branches)

    for _ in range(max_rounds):
        if deadline is not None and time.monotonic() > deadline:
            raise TimeBudgetError("local search exceeded its time budget")
        improved = False

        if "toggle_hub" in moves:
            for h in branches:
                if h in state.hubs:
                    def close(h=h):
                        state.hubs.discard(h)
                        for key in [k for k, v in state.choices.items() if v == h]:
                            del state.choices[key]
                            state.fracs.pop(key, None)
                    c = _try(state, close, current)
                else:
                    c = _try(state, lambda h=h: _open_hub(state, h), current)
                if c is not None:
                    current, improved = c, True

        if "reassign_port" in moves:
            for (b, t) in instance.positive_pairs():
                for s2 in instance.usable_ports(t):
                    if s2 == state.ports[(b, t)]:
                        continue

                    def repoint(b=b, t=t, s2=s2):
                        old = state.ports[(b, t)]
                        state.ports[(b, t)] = s2
                        vols = state.volumes()
                        for key in ((b, old), (b, s2)):
                            if key in state.choices and vols.get(key, 0.0) <= 0.0:
                                del state.choices[key]
                                state.fracs.pop(key, None)

                    c = _try(state, repoint, current)
                    if c is not None:
                        current, improved = c, True

        if "reassign_hub" in moves:
            vols = state.volumes()
            for pair in sorted(vols):
                b, s = pair
                if b in state.hubs:
                    continue
                had = pair in state.choices
                targets = [h for h in sorted(state.hubs) if h != b]
                options = ([None] if had else []) + [
                    h for h in targets if h != state.choices.get(pair)
                ]
                for h2 in options:

                    def rechoose(pair=pair, h2=h2, had=had):
                        if h2 is None:
                            del state.choices[pair]
                            state.fracs.pop(pair, None)
                        else:
                            state.choices[pair] = h2
                            if not had:
                                state.fracs[pair] = 0.0

                    c = _try(state, rechoose, current)
                    if c is not None:
                        current, improved = c, True
                        break

        if "adjust_fraction" in moves:
            for pair in sorted(state.choices):
                if state.volumes().get(pair, 0.0) <= 0.0:
                    continue
                for y in _fraction_candidates(state, pair):
                    if abs(y - state.fracs.get(pair, 0.0)) <= 1e-15:
                        continue

                    def refrac(pair=pair, y=y):
                        state.fracs[pair] = y

                    c = _try(state, refrac, current)
                    if c is not None:
                        current, improved = c, True

        if not improved:
            break

    # No accepted move means the start is locally optimal; hand it back as is.
    return state.as_solution() if current < start_cost else start
