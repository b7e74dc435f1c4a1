"""Seeded random instance generator.

Instances are planar: branches and ports get coordinates, distances are
Euclidean rounded to whole kilometers, and the land tariff matrix is
monotone in both axes by construction.  Three profiles shape the data:

  uniform                  generic mix of geography, rates, and costs
  consolidation_favorable  clustered branches far from the ports, flat
                           volume tariffs, and cheap hubs, so bundling
                           flows through a hub beats direct transport
  nvocc_only_mix           many relations offer only the NVOCC option,
                           exercising the penalty pricing path
"""

from __future__ import annotations

import math
import random

from .cost_model import LandCostTable, SeaRate
from .network_model import Instance, NodeSets

PROFILES = ("uniform", "consolidation_favorable", "nvocc_only_mix")

LAND_CONTAINER_VOLUME = 80.0
SEA_CONTAINER_VOLUME = 55.0
NVOCC_CAP = 40.0
DEFAULT_VOLUME_BANDS = 8


def _volume_breaks(rng: random.Random, n_bands: int, u_cont: float) -> tuple:
    """Ascending band edges ending exactly at the container volume."""
    p = rng.uniform(1.0, 1.4)
    breaks = [round(u_cont * (k / n_bands) ** p, 3) for k in range(1, n_bands)]
    breaks.append(u_cont)
    out = []
    for w in breaks:
        if not out or w > out[-1] + 1e-9:
            out.append(w)
    return tuple(out)


def _land_table(
    rng: random.Random, distances: dict, u_cont: float, n_bands: int, concavity: float
) -> LandCostTable:
    """Monotone tariff matrix: rate grows with distance, cost with volume.

    Low concavity exponents flatten the volume axis, which makes bundling
    shipments into fewer, fuller trucks attractive.
    """
    d_max = max(distances.values())
    n_dist = 5
    edges = tuple(float(math.ceil(d_max * k / n_dist) + 1) for k in range(1, n_dist + 1))
    vol_breaks = _volume_breaks(rng, n_bands, u_cont)
    base = rng.uniform(40.0, 80.0)
    per_km = rng.uniform(0.9, 1.3)
    rows = []
    prev = 0.0
    for k in range(n_dist):
        mid = (edges[k] + (edges[k - 1] if k else 0.0)) / 2.0
        rate = max(prev + 1.0, base + per_km * mid)
        prev = rate
        rows.append(tuple(round(rate * (w / u_cont) ** concavity, 2) for w in vol_breaks))
    return LandCostTable(distance_breaks=edges, volume_breaks=vol_breaks, cost=tuple(rows))


def _coordinates(rng: random.Random, n_branches: int, n_ports: int, profile: str):
    coords = {}
    if profile == "consolidation_favorable":
        # Tight inland cluster far from the coast; the center branch is a
        # natural consolidation point.
        cx, cy = rng.uniform(700.0, 900.0), rng.uniform(300.0, 700.0)
        for i in range(n_branches):
            if i == 0:
                coords[f"B{i + 1:02d}"] = (cx, cy)
            else:
                ang = rng.uniform(0.0, 2.0 * math.pi)
                rad = rng.uniform(15.0, 45.0)
                coords[f"B{i + 1:02d}"] = (cx + rad * math.cos(ang), cy + rad * math.sin(ang))
    else:
        for i in range(n_branches):
            coords[f"B{i + 1:02d}"] = (rng.uniform(150.0, 950.0), rng.uniform(0.0, 1000.0))
    for i in range(n_ports):
        coords[f"S{i + 1}"] = (rng.uniform(0.0, 120.0), rng.uniform(0.0, 1000.0))
    return coords


def generate(
    seed: int,
    n_branches: int,
    n_origin_ports: int,
    n_destinations: int,
    demand_density: float,
    profile: str = "uniform",
    n_volume_bands: int = DEFAULT_VOLUME_BANDS,
) -> Instance:
    """Deterministic instance for a seed; always passes validation."""
    if min(n_branches, n_origin_ports, n_destinations) < 1:
        raise ValueError("all node counts must be >= 1")
    if not 0.0 < demand_density <= 1.0:
        raise ValueError(f"demand density must be in (0, 1], got {demand_density}")
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}, pick one of {PROFILES}")

    rng = random.Random(seed)
    branches = [f"B{i + 1:02d}" for i in range(n_branches)]
    ports = [f"S{i + 1}" for i in range(n_origin_ports)]
    dests = [f"T{i + 1}" for i in range(n_destinations)]
    coords = _coordinates(rng, n_branches, n_origin_ports, profile)

    distance = {}
    for b in branches:
        for r in branches + ports:
            if b == r:
                distance[(b, r)] = 0.0
            else:
                (x1, y1), (x2, y2) = coords[b], coords[r]
                distance[(b, r)] = float(round(math.hypot(x2 - x1, y2 - y1)))

    concavity = 0.3 if profile == "consolidation_favorable" else rng.uniform(0.55, 0.75)
    table = _land_table(rng, distance, LAND_CONTAINER_VOLUME, n_volume_bands, concavity)

    if profile == "consolidation_favorable":
        vol_lo, vol_hi = 2.0, 12.0
        setup_range = (20.0, 60.0)
        hub_range = (0.2, 0.6)
    else:
        vol_lo, vol_hi = 0.1, 30.0
        setup_range = (100.0, 400.0)
        hub_range = (0.5, 2.0)

    demand = {}
    for b in branches:
        for t in dests:
            if rng.random() < demand_density:
                demand[(b, t)] = round(
                    math.exp(rng.uniform(math.log(vol_lo), math.log(vol_hi))), 3
                )
    if not demand:
        demand[(branches[0], dests[0])] = round(
            math.exp(rng.uniform(math.log(vol_lo), math.log(vol_hi))), 3
        )

    if profile == "nvocc_only_mix":
        mix = (("nvocc", 0.5), ("both", 0.9), ("fcl", 1.0))
    elif profile == "consolidation_favorable":
        mix = (("both", 1.0),)
    else:
        mix = (("both", 0.7), ("fcl", 0.9), ("nvocc", 1.0))

    sea_rates = {}
    for s in ports:
        for t in dests:
            fcl = round(rng.uniform(900.0, 2600.0), 2)
            ratio = rng.uniform(18.0, 48.0)
            nvocc = round(fcl / ratio, 3)
            roll = rng.random()
            kind = next(k for k, edge in mix if roll < edge)
            if kind == "both":
                sea_rates[(s, t)] = SeaRate(fcl_per_container=fcl, nvocc_per_m3=nvocc)
            elif kind == "fcl":
                sea_rates[(s, t)] = SeaRate(fcl_per_container=fcl)
            else:
                sea_rates[(s, t)] = SeaRate(nvocc_per_m3=nvocc)

    setup_cost = {b: round(rng.uniform(*setup_range), 2) for b in branches}
    hub_consol = {b: round(rng.uniform(*hub_range), 3) for b in branches}
    port_consol = {s: round(rng.uniform(0.5, 2.5), 3) for s in ports}

    return Instance(
        nodes=NodeSets(
            branches=tuple(branches),
            origin_ports=tuple(ports),
            destination_ports=tuple(dests),
        ),
        demand=demand,
        land_costs=table,
        sea_rates=sea_rates,
        setup_cost=setup_cost,
        hub_consol_cost=hub_consol,
        port_consol_cost=port_consol,
        distance=distance,
        land_container_volume=LAND_CONTAINER_VOLUME,
        sea_container_volume=SEA_CONTAINER_VOLUME,
        nvocc_cap=NVOCC_CAP,
        name=f"gen-{profile}-{seed}",
    )
