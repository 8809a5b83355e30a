"""Graph builders shared by several test modules."""

import numpy as np

from net_homophily import ColoredGraph


def graph_with_profile(edges, n, profile):
    """Graph on nodes 0..n-1 whose colours fill the profile in node order."""
    colors = np.repeat(np.arange(len(profile), dtype=np.int32), profile)
    assert len(colors) == n
    src = np.array([u for u, _ in edges], dtype=np.int64)
    dst = np.array([v for _, v in edges], dtype=np.int64)
    labels = [f"c{i}" for i in range(len(profile))]
    return ColoredGraph.from_edge_arrays(src, dst, colors, labels)


def random_graph(n, p, profile, seed):
    """Erdos-Renyi graph with colours filled in node order."""
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((n, n)) < p, k=1)
    src, dst = np.nonzero(upper)
    return graph_with_profile(list(zip(src.tolist(), dst.tolist())), n, profile)


def compositions(n, parts):
    """Every tuple of ``parts`` positive integers summing to n."""
    if parts == 1:
        yield (n,)
        return
    for first in range(1, n - parts + 2):
        for rest in compositions(n - first, parts - 1):
            yield (first,) + rest
