import numpy as np
import pytest

from outstream import (TopologyConfig, assign_artificial_timestamps,
                       check_against_oracle, count_window_config, run_topology)


def clustered_values(seed, n, dims, spread=3.0, noise=0.5, scatter=0.1):
    """Three fuzzy clusters plus uniform scatter: forces cluster churn."""
    rng = np.random.default_rng(seed)
    centers = rng.normal(0, spread, size=(3, dims))
    comp = rng.integers(0, 3, n)
    vals = centers[comp] + rng.normal(0, noise, size=(n, dims))
    mask = rng.random(n) < scatter
    vals[mask] = rng.uniform(-2 * spread, 2 * spread, size=(int(mask.sum()), dims))
    return vals


def run_config(vals, W, S, R, k, algorithm, partitioner, partitions, **extra):
    src = assign_artificial_timestamps(vals, W, S)
    cfg = count_window_config(W, S, R=R, k=k, dims=vals.shape[1],
                              partitions=partitions)
    topo = TopologyConfig(window=cfg, algorithm=algorithm, partitioner=partitioner,
                          sample_size=min(len(vals), 500), validate=True, **extra)
    return src, cfg, run_topology(src, topo)


def run_exact(vals, W, S, R, k, algorithm, partitioner, partitions, **extra):
    """Run one configuration and assert oracle-exact reports."""
    src, cfg, res = run_config(vals, W, S, R, k, algorithm, partitioner,
                               partitions, **extra)
    problems = check_against_oracle(res.reports, src, cfg)
    assert not problems, f"{algorithm}/{partitioner}: {problems[:3]}"
    return res


@pytest.fixture
def small_stream():
    vals = clustered_values(11, 360, 1)
    return vals
