"""How objects are routed to partitions, and what replication costs.

Value-based routing sends each object to the partition owning its region
plus, when it falls within R of a boundary, flag-1 replicas to the
neighboring partitions.  That buffer zone is what lets every partition
decide outlierness locally and exactly.  Random routing replicates
everything everywhere.
"""

import numpy as np

from outstream import (GaussianMixtureSpec, build_grid, build_vp_partitioner,
                       generate_gaussian_values, grid_route, random_route,
                       vp_route)

rng_values = generate_gaussian_values(GaussianMixtureSpec(dims=1, seed=7), 10_000)
sample = rng_values[:2_000]
PARTITIONS, R = 4, 0.45

grid = build_grid(sample, PARTITIONS, R)
vp = build_vp_partitioner(sample, PARTITIONS, R, seed=0)

print(f"grid cuts: {[round(c, 3) for c in grid.cuts[0]]}")
print(f"vp-tree: level {vp.level}, {len(vp.node_partition)} regions "
      f"round-robin over {PARTITIONS} partitions")

for name, route in [("random", lambda v, i: random_route(i, PARTITIONS)),
                    ("grid", lambda v, i: grid_route(grid, v)),
                    ("vptree", lambda v, i: vp_route(vp, v))]:
    copies = [route(tuple(v), i).copies for i, v in enumerate(rng_values)]
    print(f"{name:7s} replication factor {np.mean(copies):.3f} "
          f"(max {max(copies)} copies)")

# a point near a grid cut is replicated across the boundary, an interior
# point is not
cut = grid.cuts[0][1]
near = grid_route(grid, (cut - 0.1,))
far = grid_route(grid, (cut - 5.0,))
print(f"point {cut - 0.1:.2f} near cut {cut:.2f}: owner {near.owner}, "
      f"replicas {sorted(near.replicas)}")
print(f"point {cut - 5.0:.2f} far from cuts:  owner {far.owner}, "
      f"replicas {sorted(far.replicas)}")

# completeness: any two objects within R share at least one partition
pts = rng_values[:400]
decisions = [grid_route(grid, tuple(v)) for v in pts]
sets = [{d.owner} | set(d.replicas) for d in decisions]
violations = 0
for i in range(len(pts)):
    for j in range(i + 1, len(pts)):
        if abs(float(pts[i][0]) - float(pts[j][0])) <= R:
            if decisions[i].owner not in sets[j] and decisions[j].owner not in sets[i]:
                violations += 1
print(f"completeness check on {len(pts)} points: {violations} violations")
