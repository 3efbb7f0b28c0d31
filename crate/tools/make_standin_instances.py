#!/usr/bin/env python3
"""Regenerate the synthetic stand-in instances under data/instances/.

A-n32-k5.vrp is the original benchmark file and is never rewritten here.
The remaining A-series files are deterministic stand-ins that reproduce the
published metadata of each instance (dimension, vehicle count, capacity and
total demand, hence tightness) with freshly drawn coordinates and a demand
split of the published total. Cost-level results on these files are NOT
comparable to published best-known values; size and tightness statistics are.
"""

import random

# name -> (customers, vehicles, total_demand)
# total demand is the published tightness times vehicles*capacity, rounded.
SPECS = {
    "A-n33-k5": (32, 5, 474),
    "A-n33-k6": (32, 6, 541),
    "A-n34-k5": (33, 5, 460),
    "A-n36-k5": (35, 5, 442),
    "A-n37-k5": (36, 5, 407),
    "A-n37-k6": (36, 6, 570),
    "A-n38-k5": (37, 5, 484),
    "A-n39-k5": (38, 5, 475),
    "A-n39-k6": (38, 6, 526),
    "A-n44-k6": (43, 6, 570),
    "A-n45-k6": (44, 6, 630),
    "A-n45-k7": (44, 7, 665),
    "A-n46-k7": (45, 7, 603),
    "A-n48-k7": (47, 7, 624),
    "A-n53-k7": (52, 7, 664),
    "A-n54-k7": (53, 7, 669),
    "A-n55-k9": (54, 9, 839),
    "A-n60-k9": (59, 9, 829),
    "A-n61-k9": (60, 9, 885),
    "A-n62-k8": (61, 8, 733),
    "A-n63-k9": (62, 9, 873),
    "A-n63-k10": (62, 10, 932),
    "A-n64-k9": (63, 9, 848),
    "A-n65-k9": (64, 9, 877),
    "A-n69-k9": (68, 9, 844),
    "A-n80-k10": (79, 10, 941),
}

CAPACITY = 100


def split_demand(rng, n, total):
    base, rem = divmod(total, n)
    demands = [base + (1 if i < rem else 0) for i in range(n)]
    rng.shuffle(demands)
    # jitter while keeping every demand in [1, min(35, capacity)]
    hi = min(35, CAPACITY)
    for _ in range(4 * n):
        i, j = rng.randrange(n), rng.randrange(n)
        if i != j and demands[i] > 1 and demands[j] < hi:
            demands[i] -= 1
            demands[j] += 1
    assert sum(demands) == total
    assert all(1 <= d <= CAPACITY for d in demands)
    return demands


def write_instance(name, customers, total_demand):
    rng = random.Random(name)
    dim = customers + 1
    coords = set()
    while len(coords) < dim:
        coords.add((rng.randint(2, 98), rng.randint(2, 98)))
    coords = sorted(coords)
    rng.shuffle(coords)
    demands = split_demand(rng, customers, total_demand)

    lines = [
        f"NAME : {name}",
        "COMMENT : (synthetic stand-in matching published size, fleet, capacity and total demand)",
        "TYPE : CVRP",
        f"DIMENSION : {dim}",
        "EDGE_WEIGHT_TYPE : EUC_2D",
        f"CAPACITY : {CAPACITY}",
        "NODE_COORD_SECTION",
    ]
    for i, (x, y) in enumerate(coords, start=1):
        lines.append(f" {i} {x} {y}")
    lines.append("DEMAND_SECTION")
    lines.append("1 0")
    for i, d in enumerate(demands, start=2):
        lines.append(f"{i} {d}")
    lines += ["DEPOT_SECTION", " 1", " -1", "EOF", ""]

    with open(f"data/instances/{name}.vrp", "w") as fh:
        fh.write("\n".join(lines))


def main():
    for name, (customers, _vehicles, total) in SPECS.items():
        write_instance(name, customers, total)
    print(f"wrote {len(SPECS)} stand-in instances")


if __name__ == "__main__":
    main()
