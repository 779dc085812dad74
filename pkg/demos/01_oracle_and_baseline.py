"""A first look: windowed distance-based outliers and the brute-force oracle.

An object is an outlier for a window when fewer than k other objects sit
within distance R of it.  We stream a tiny hand-made sequence through the
single-partition baseline detector and check every slide against the
O(n^2) oracle.
"""

import numpy as np

from outstream import (TopologyConfig, assign_artificial_timestamps,
                       brute_force_oracle, count_window_config,
                       oracle_report_sets, run_topology)

# 16 points: three drifting clusters plus two obvious strays
values = np.array([
    1.00, 1.05, 0.95, 9.00,        # slide 0: a cluster and a stray
    1.10, 0.90, 1.02, 1.08,        # slide 1: the cluster thickens
    5.00, 5.05, 4.95, 5.02,        # slide 2: a second cluster appears
    -6.0, 5.01, 4.99, 5.03,        # slide 3: another stray at -6
]).reshape(-1, 1)

W, S = 8, 4                        # window of 8 objects, slide of 4
src = assign_artificial_timestamps(values, W, S)
cfg = count_window_config(W, S, R=0.5, k=2, dims=1, partitions=1)

result = run_topology(src, TopologyConfig(window=cfg, algorithm="baseline"))

print(f"window={W} objects, slide={S}, R={cfg.R}, k={cfg.k}")
for report in result.reports:
    ids = sorted(report.outliers)
    vals = [float(values[i][0]) for i in ids]
    print(f"slide {report.interval.slide_index}: alive={report.alive:2d} "
          f"outliers={ids} values={vals}")

# the oracle recomputes every window from scratch and must agree exactly
expected = oracle_report_sets(src, cfg, len(result.reports))
assert [set(r.outliers) for r in result.reports] == expected
print("every slide matches the brute-force oracle")

# the oracle is also usable standalone on any point set
window = values[8:16]
print("standalone oracle on the last window:",
      sorted(brute_force_oracle(window, R=0.5, k=2, ids=range(8, 16))))
