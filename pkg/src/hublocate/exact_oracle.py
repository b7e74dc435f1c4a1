"""Brute-force exact solver for desk-scale instances.

Enumerates every port assignment, every hub set within the size limit,
and every hub choice consistent with the constraints; hub sets with an
unused member are skipped because the same routing is already covered by
the smaller set.  For each discrete configuration the continuous direct
shares are optimized over the finite fractions that place an arc volume
exactly on a piece boundary of its approximated cost curve (plus 0, 1,
and the per-destination subset sums that merging heuristics produce):

  * shares whose three arcs are not shared with another routed pair are
    separable and minimized independently (exact);
  * two shares coupled through one common arc are solved by enumerating
    one share's own boundaries and exactly minimizing the other
    conditionally, in both orders (exact, since a pair can share at most
    one arc and optima sit on intersections of two boundaries);
  * larger coupled groups combine conditional coordinate descent with an
    exact pairwise polish over every coupled pair.

The objective is the approximated cost, the same one the linearized model
minimizes; the exact re-evaluation of the optimum is reported alongside.
Ties are broken toward the first configuration in enumeration order.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

from .cost_model import (
    approx_breakpoint_volumes,
    land_breakpoints,
    land_cost_approx,
    sea_cost,
)
from .errors import InvalidInstanceError, OracleLimitError, TimeBudgetError
from .network_model import Instance, validate_instance
from .solution import CostBreakdown, Solution, evaluate_cost
from .splits import subset_sums

DESCENT_ROUNDS = 25
POLISH_ROUNDS = 5


@dataclass(frozen=True)
class OracleLimits:
    max_branches: int = 6
    max_ports: int = 4
    max_destinations: int = 4
    max_hub_set_size: int = 2
    split_grid: tuple = ()  # extra candidate direct fractions, always tried
    max_evaluations: float = 1e8


@dataclass
class OracleResult:
    solution: Solution
    cost: CostBreakdown  # approximated objective, the enumeration target
    exact_cost: CostBreakdown
    evaluated: int  # discrete configurations evaluated


class _Kernel:
    """Pre-resolved instance data for fast repeated configuration costing."""

    def __init__(self, instance: Instance):
        self.instance = instance
        self.B = list(instance.nodes.branches)
        self.S = list(instance.nodes.origin_ports)
        self.e = instance.setup_cost
        self.f = instance.hub_consol_cost
        self.g = instance.port_consol_cost
        self.curves = {}
        bands = {}
        for b in self.B:
            for r in self.B + self.S:
                dist = instance.distance[(b, r)]
                band = instance.land_costs.distance_band(dist)
                if band not in bands:
                    bands[band] = land_breakpoints(instance.land_costs, dist)
                self.curves[(b, r)] = bands[band]
        self.pairs = instance.positive_pairs()
        self.options = [instance.usable_ports(t) for (_, t) in self.pairs]

    def fixed_cost(self, zvec) -> tuple[float, dict, dict]:
        """Port-assignment-only cost terms: port consolidation plus sea."""
        inst = self.instance
        vols: dict = {}
        seas: dict = {}
        total = 0.0
        for (b, t), s in zip(self.pairs, zvec):
            v = inst.demand[(b, t)]
            vols[(b, s)] = vols.get((b, s), 0.0) + v
            seas[(s, t)] = seas.get((s, t), 0.0) + v
            total += self.g[s] * v
        for (s, t), w in seas.items():
            total += sea_cost(
                inst.sea_rates[(s, t)], w, inst.sea_container_volume,
                inst.nvocc_cap, inst.nvocc_penalty,
            )[0]
        return total, vols, seas

    def routing_cost(self, vols: dict, hubs, assign: dict, fracs: dict) -> float:
        """Set-up, hub consolidation, and land cost of one routing."""
        total = sum(self.e[h] for h in hubs)
        port_arc: dict = {}
        feeder: dict = {}
        for (b, s), v in vols.items():
            h = assign.get((b, s))
            if h is None:
                port_arc[(b, s)] = port_arc.get((b, s), 0.0) + v
                continue
            y = fracs.get((b, s), 0.0)
            direct = y * v
            routed = v - direct
            if direct > 0.0:
                port_arc[(b, s)] = port_arc.get((b, s), 0.0) + direct
            if routed > 0.0:
                feeder[(b, h)] = feeder.get((b, h), 0.0) + routed
                port_arc[(h, s)] = port_arc.get((h, s), 0.0) + routed
                total += self.f[h] * routed
        for arc, v in port_arc.items():
            total += land_cost_approx(self.curves[arc], v)
        for arc, v in feeder.items():
            total += land_cost_approx(self.curves[arc], v)
        return total


class _SplitProblem:
    """Continuous share optimization for one discrete configuration.

    Variables are the routed pairs; the cost decomposes into a constant,
    a per-variable part (direct arc plus consolidation), and per-arc terms
    for feeder and hub-to-port arcs, each depending on the subset of
    variables riding that arc.
    """

    def __init__(self, kernel: _Kernel, vols, hubs, assign, dests_via, extra):
        self.kernel = kernel
        self.vols = vols
        self.extra = extra
        self.dests_via = dests_via
        self.vars = sorted(p for p, h in assign.items() if h is not None)
        self.hub_of = {p: assign[p] for p in self.vars}

        const = sum(kernel.e[h] for h in hubs)
        feeder_groups: dict = {}
        port_groups: dict = {}
        for p in self.vars:
            b, s = p
            h = self.hub_of[p]
            feeder_groups.setdefault((b, h), []).append(p)
            port_groups.setdefault((h, s), []).append(p)
        for (b, s), v in vols.items():
            if assign.get((b, s)) is None and (b, s) not in port_groups:
                const += land_cost_approx(kernel.curves[(b, s)], v)
        self.const = const
        # Hub-to-port arcs carry the hub's own direct volume as a base.
        self.port_base = {
            arc: (vols.get(arc, 0.0) if assign.get(arc) is None else 0.0)
            for arc in port_groups
        }
        self.feeder_groups = feeder_groups
        self.port_groups = port_groups

        # Coupled components: variables sharing a feeder or port arc.
        parent = {p: p for p in self.vars}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for group in list(feeder_groups.values()) + list(port_groups.values()):
            for other in group[1:]:
                parent[find(other)] = find(group[0])
        comps: dict = {}
        for p in self.vars:
            comps.setdefault(find(p), []).append(p)
        self.components = [sorted(c) for c in sorted(comps.values())]

    def component_cost(self, comp, fracs) -> float:
        """Cost of the terms touched by one component's variables."""
        kernel = self.kernel
        total = 0.0
        seen_arcs = set()
        for p in comp:
            b, s = p
            h = self.hub_of[p]
            v = self.vols[p]
            y = fracs[p]
            direct = y * v
            if direct > 0.0:
                total += land_cost_approx(kernel.curves[p], direct)
            total += kernel.f[h] * (v - direct)
            for arc, groups, base in (
                ((b, h), self.feeder_groups, 0.0),
                ((h, s), self.port_groups, self.port_base.get((h, s), 0.0)),
            ):
                if arc in seen_arcs:
                    continue
                seen_arcs.add(arc)
                load = base + sum(
                    (1.0 - fracs[q]) * self.vols[q] for q in groups[arc]
                )
                if load > 0.0:
                    total += land_cost_approx(kernel.curves[arc], load)
        return total

    def _crossings(self, p, arc, base) -> list:
        """Fractions putting `arc`'s load on a piece boundary, base fixed."""
        v = self.vols[p]
        curve = self.kernel.curves[arc]
        if arc == p:  # direct arc: load = y * v
            return [w / v for w in approx_breakpoint_volumes(curve, 0.0, v)]
        return [
            1.0 - (w - base) / v
            for w in approx_breakpoint_volumes(curve, base, base + v)
        ]

    def candidates(self, p, fracs=None, skip_arcs=()) -> list:
        """Candidate shares for p; other variables fixed at `fracs` (0 if None)."""
        b, s = p
        h = self.hub_of[p]
        out = {0.0, 1.0}
        out.update(self._crossings(p, p, 0.0))
        for arc, groups, base in (
            ((b, h), self.feeder_groups, 0.0),
            ((h, s), self.port_groups, self.port_base.get((h, s), 0.0)),
        ):
            if arc in skip_arcs:
                continue
            for q in groups[arc]:
                if q != p:
                    base += (1.0 - (fracs.get(q, 0.0) if fracs else 0.0)) * self.vols[q]
            out.update(self._crossings(p, arc, base))
        for ss in subset_sums(self.dests_via.get(p, [])):
            out.add(ss / self.vols[p])
        out.update(self.extra)
        vals = sorted(y for y in out if 0.0 <= y <= 1.0)
        dedup = [vals[0]]
        for y in vals[1:]:
            if y - dedup[-1] > 1e-12:
                dedup.append(y)
        return dedup

    def shared_arc(self, p, q):
        """The one arc two routed pairs can share, or None."""
        if self.hub_of[p] != self.hub_of[q]:
            return None
        if p[0] == q[0]:
            return (p[0], self.hub_of[p])
        if p[1] == q[1]:
            return (self.hub_of[p], p[1])
        return None

    def _minimize_one(self, comp, fracs, p) -> bool:
        """Exact conditional minimization of one share; True on improvement."""
        best = self.component_cost(comp, fracs)
        best_y = fracs[p]
        for y in self.candidates(p, fracs):
            if abs(y - fracs[p]) <= 1e-15:
                continue
            trial = dict(fracs)
            trial[p] = y
            c = self.component_cost(comp, trial)
            if c < best - 1e-12 * max(1.0, abs(best)):
                best, best_y = c, y
        if best_y != fracs[p]:
            fracs[p] = best_y
            return True
        return False

    def _solve_pair(self, pair, comp=None, context=None) -> dict:
        """Exact two-variable solve: a pair shares at most one arc, so every
        boundary intersection has one variable on its own boundary.

        With `comp`/`context` the pair is re-optimized inside a larger
        component whose other shares stay at their context values.
        """
        p, q = pair
        comp = comp if comp is not None else pair
        base_fr = dict(context) if context else {}
        arc = self.shared_arc(p, q)
        best = None
        for outer, inner in ((p, q), (q, p)):
            outer_cands = self.candidates(outer, base_fr or None,
                                          skip_arcs=(arc,) if arc else ())
            for y_out in outer_cands:
                probe = dict(base_fr)
                probe[outer] = y_out
                probe[inner] = 0.0
                for y_in in self.candidates(inner, probe):
                    full = dict(base_fr)
                    full[outer] = y_out
                    full[inner] = y_in
                    c = self.component_cost(comp, full)
                    if best is None or c < best[0] - 1e-12 * max(1.0, abs(best[0])):
                        best = (c, full)
        return best[1]

    def _solve_group(self, comp) -> dict:
        """Conditional descent plus pairwise polish for 3+ coupled shares.

        The descent handles each share exactly given the others; the
        polish re-solves every coupled pair exactly inside the group, so
        only optima needing three simultaneously off-boundary shares on
        three interlocking arcs could be missed.
        """
        fracs = {p: 0.0 for p in comp}
        for _ in range(DESCENT_ROUNDS):
            improved = False
            for p in comp:
                improved |= self._minimize_one(comp, fracs, p)
            if not improved:
                break
        for _ in range(POLISH_ROUNDS):
            improved = False
            for p, q in itertools.combinations(comp, 2):
                if self.shared_arc(p, q) is None:
                    continue
                trial = self._solve_pair((p, q), comp=comp, context=fracs)
                cur = self.component_cost(comp, fracs)
                c = self.component_cost(comp, trial)
                if c < cur - 1e-12 * max(1.0, abs(cur)):
                    fracs, improved = trial, True
            if not improved:
                break
        return fracs

    def _solve_component(self, comp) -> tuple[dict, float]:
        if len(comp) == 1:
            p = comp[0]
            sub = {p: 0.0}
            best = self.component_cost(comp, sub)
            for y in self.candidates(p):
                trial = {p: y}
                c = self.component_cost(comp, trial)
                if c < best - 1e-12 * max(1.0, abs(best)):
                    best, sub = c, trial
            return sub, best
        if len(comp) == 2:
            sub = self._solve_pair(comp)
        else:
            sub = self._solve_group(comp)
        return sub, self.component_cost(comp, sub)

    def solve(self, cache: dict | None = None) -> tuple[dict, float]:
        """Optimal shares and routing cost; component results are memoized
        per port assignment (they do not depend on the rest of the
        configuration)."""
        fracs = {}
        total = self.const
        for comp in self.components:
            if cache is None:
                sub, cost = self._solve_component(comp)
            else:
                key = tuple((p, self.hub_of[p]) for p in comp)
                hit = cache.get(key)
                if hit is None:
                    hit = cache[key] = self._solve_component(comp)
                sub, cost = hit
            fracs.update(sub)
            total += cost
        return fracs, total


def _valid_assignment_count(k: int, p: int) -> float:
    """Assignments of p pairs to 1 + k options using all k hubs."""
    return sum((-1) ** i * math.comb(k, i) * (1 + k - i) ** p for i in range(k + 1))


def estimate_configurations(instance: Instance, limits: OracleLimits) -> float:
    """Upper bound on the discrete configurations the oracle would visit."""
    z_space = 1.0
    for (_, t) in instance.positive_pairs():
        z_space *= max(1, len(instance.usable_ports(t)))
    n_b = len(instance.nodes.branches)
    active = {b for (b, _) in instance.positive_pairs()}
    p = min(len(active) * len(instance.nodes.origin_ports), len(instance.positive_pairs()))
    y_space = 0.0
    for k in range(0, min(limits.max_hub_set_size, n_b) + 1):
        y_space += math.comb(n_b, k) * max(0.0, _valid_assignment_count(k, p))
    return z_space * max(1.0, y_space)


def _check_limits(instance: Instance, limits: OracleLimits) -> None:
    n_b = len(instance.nodes.branches)
    n_s = len(instance.nodes.origin_ports)
    n_t = len(instance.nodes.destination_ports)
    if n_b > limits.max_branches or n_s > limits.max_ports or n_t > limits.max_destinations:
        raise OracleLimitError(
            f"instance size {n_b} branches / {n_s} ports / {n_t} destinations exceeds "
            f"oracle limits ({limits.max_branches}/{limits.max_ports}/{limits.max_destinations})"
        )
    est = estimate_configurations(instance, limits)
    if est > limits.max_evaluations:
        raise OracleLimitError(
            f"estimated {est:.3g} configurations exceed the budget of "
            f"{limits.max_evaluations:.3g}",
            estimate=est,
        )


def _hub_assignments(active, hubs):
    """Hub choices for the active pairs using every hub in `hubs`.

    Branches inside the hub set are forced direct.  Generated depth-first
    with a still-needed pruning rule so oversized hub sets die early.
    """
    n = len(active)
    options = []
    for (b, s) in active:
        if b in hubs:
            options.append((None,))
        else:
            options.append((None,) + tuple(h for h in hubs if h != b))
    reachable = [set() for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        reachable[i] = reachable[i + 1] | {h for h in options[i] if h is not None}
    needed = frozenset(hubs)
    assign: list = [None] * n

    def rec(i, used):
        missing = needed - used
        if len(missing) > n - i or not missing.issubset(reachable[i]):
            return
        if i == n:
            yield {active[k]: assign[k] for k in range(n) if assign[k] is not None}
            return
        for h in options[i]:
            assign[i] = h
            yield from rec(i + 1, used | {h} if h is not None else used)
        assign[i] = None

    yield from rec(0, frozenset())


def enumerate_optimal(
    instance: Instance,
    limits: OracleLimits | None = None,
    threads: int = 1,
    deadline: float | None = None,
) -> OracleResult:
    """Globally minimize the approximated cost by exhaustive enumeration.

    Refuses instances whose enumeration estimate exceeds the configured
    budget.  Deterministic for any thread count: chunk results are reduced
    by (cost, enumeration index).
    """
    violations = validate_instance(instance)
    if violations:
        raise InvalidInstanceError(violations)
    limits = limits or OracleLimits()
    _check_limits(instance, limits)

    kernel = _Kernel(instance)
    z_choices = list(itertools.product(*kernel.options)) if kernel.pairs else [()]
    hub_sets = []
    for k in range(0, min(limits.max_hub_set_size, len(kernel.B)) + 1):
        hub_sets.extend(itertools.combinations(kernel.B, k))
    setup_of = {hubs: sum(kernel.e[h] for h in hubs) for hubs in hub_sets}
    extra = tuple(limits.split_grid)

    # All-direct optimum over every port assignment.  Configurations whose
    # lower bound strictly exceeds it cannot be optimal; pruning against
    # this fixed threshold keeps results and counts chunking-independent.
    threshold = math.inf
    for zvec in z_choices:
        fixed, vols, _ = kernel.fixed_cost(zvec)
        threshold = min(threshold, fixed + kernel.routing_cost(vols, (), {}, {}))

    def run_chunk(z_slice, offset):
        best = None  # (cost, index, payload)
        count = 0
        for zi, zvec in enumerate(z_slice):
            if deadline is not None and time.monotonic() > deadline:
                raise TimeBudgetError("oracle exceeded its time budget")
            fixed, vols, _ = kernel.fixed_cost(zvec)
            if fixed > threshold:
                continue
            active = sorted(vols)
            dests_via: dict = {}
            for (b, t), s in zip(kernel.pairs, zvec):
                dests_via.setdefault((b, s), []).append(instance.demand[(b, t)])
            comp_cache: dict = {}
            for hubs in hub_sets:
                if fixed + setup_of[hubs] > threshold:
                    continue
                for assign in _hub_assignments(active, hubs):
                    count += 1
                    problem = _SplitProblem(kernel, vols, hubs, assign, dests_via, extra)
                    if fixed + problem.const > threshold:
                        continue
                    fracs, routing = problem.solve(comp_cache)
                    total = fixed + routing
                    if best is None or total < best[0]:
                        best = (total, (offset + zi, count), (zvec, hubs, assign, fracs))
        return best, count

    if threads <= 1 or len(z_choices) < 2:
        best, evaluated = run_chunk(z_choices, 0)
    else:
        from concurrent.futures import ThreadPoolExecutor

        n = min(threads, len(z_choices))
        step = (len(z_choices) + n - 1) // n
        chunks = [(z_choices[i:i + step], i) for i in range(0, len(z_choices), step)]
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(lambda c: run_chunk(*c), chunks))
        evaluated = sum(r[1] for r in results)
        best = min(
            (r[0] for r in results if r[0] is not None),
            key=lambda b: (b[0], b[1]),
            default=None,
        )

    if best is None:
        raise OracleLimitError("nothing to enumerate")

    _, _, (zvec, hubs, assign, fracs) = best
    port_choice = dict(zip(kernel.pairs, zvec))
    hub_choice = {p: h for p, h in assign.items() if h is not None}
    solution = Solution(
        port_choice=port_choice,
        hubs=frozenset(hubs),
        direct_fraction={p: fracs.get(p, 0.0) for p in hub_choice},
        hub_choice=hub_choice,
    )
    return OracleResult(
        solution=solution,
        cost=evaluate_cost(instance, solution, "approx"),
        exact_cost=evaluate_cost(instance, solution, "exact"),
        evaluated=evaluated,
    )
