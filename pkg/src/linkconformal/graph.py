"""Undirected simple graphs: construction, I/O, splitting, and synthesis.

Node ids are integers in [0, num_nodes). Edges are unordered pairs stored
as (min, max) tuples; self-loops and duplicates are rejected or collapsed
at construction, so every Graph in the package satisfies
sum(degrees) == 2 * num_edges.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import CapacityError, EdgeListParseError
from .powerlaw import hurwitz_zeta
from .seeding import derive_rng

# Below this many node pairs, negative sampling enumerates all non-edges;
# above it, rejection sampling is used.
_ENUMERATION_LIMIT = 4_000_000


class LabeledEdge(NamedTuple):
    u: int
    v: int
    label: int  # 1 = positive link, 0 = non-existent link


@dataclass(frozen=True)
class Graph:
    """Immutable undirected simple graph with optional node features."""

    num_nodes: int
    edges: frozenset = field(default_factory=frozenset)
    features: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.num_nodes < 1:
            raise ValueError(f"num_nodes must be positive, got {self.num_nodes}")
        normalized = set()
        for edge in self.edges:
            u, v = int(edge[0]), int(edge[1])
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if u < 0 or v < 0:
                raise ValueError(f"negative node index in edge ({u}, {v})")
            if u >= self.num_nodes or v >= self.num_nodes:
                raise ValueError(
                    f"edge ({u}, {v}) references a node >= num_nodes={self.num_nodes}"
                )
            normalized.add((u, v) if u < v else (v, u))
        object.__setattr__(self, "edges", frozenset(normalized))
        if self.features is not None:
            feats = np.asarray(self.features, dtype=np.float64)
            if feats.ndim != 2 or feats.shape[0] != self.num_nodes:
                raise ValueError(
                    f"features must be ({self.num_nodes}, d), got {feats.shape}"
                )
            feats = feats.copy()
            feats.flags.writeable = False
            object.__setattr__(self, "features", feats)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def edge_array(self) -> np.ndarray:
        """Edges as an (E, 2) int64 array in lexicographic order."""
        if not self.edges:
            return np.empty((0, 2), dtype=np.int64)
        return np.array(sorted(self.edges), dtype=np.int64)

    def with_edges(self, edges) -> "Graph":
        return Graph(self.num_nodes, frozenset(edges), self.features)

    def with_features(self, features: np.ndarray) -> "Graph":
        return Graph(self.num_nodes, self.edges, features)


@dataclass(frozen=True)
class EdgeSplit:
    """Labeled edges partitioned into train/val/calib/test subsets."""

    train: tuple
    val: tuple
    calib: tuple
    test: tuple

    def __post_init__(self):
        seen = set()
        for name in ("train", "val", "calib", "test"):
            subset = tuple(LabeledEdge(int(e[0]), int(e[1]), int(e[2])) for e in getattr(self, name))
            for e in subset:
                if e.label not in (0, 1):
                    raise ValueError(f"label must be 0 or 1, got {e.label}")
                key = (min(e.u, e.v), max(e.u, e.v), e.label)
                if key in seen:
                    raise ValueError(f"duplicate labeled edge across subsets: {key}")
                seen.add(key)
            n_pos = sum(e.label for e in subset)
            if abs(2 * n_pos - len(subset)) > 1:
                raise ValueError(
                    f"{name} subset is class-imbalanced: "
                    f"{n_pos} positive vs {len(subset) - n_pos} negative"
                )
            object.__setattr__(self, name, subset)

    @property
    def subsets(self):
        return {"train": self.train, "val": self.val, "calib": self.calib, "test": self.test}


def load_edge_list(text: str, num_nodes_hint: Optional[int] = None) -> Graph:
    """Parse an edge-list document into a Graph.

    One edge per line as two whitespace-separated integer node ids; lines
    starting with '#' are comments. num_nodes is the larger of the hint and
    max index + 1. Reversed duplicates collapse to one undirected edge.
    """
    edges = set()
    max_index = -1
    saw_reversed = False
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListParseError(line_number, f"expected two tokens, got {len(tokens)}")
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListParseError(line_number, f"non-integer token in {tokens!r}") from None
        if u < 0 or v < 0:
            raise ValueError(f"line {line_number}: negative node index ({u}, {v})")
        if u == v:
            raise ValueError(f"line {line_number}: self-loop at node {u}")
        pair = (u, v) if u < v else (v, u)
        if pair in edges and (u, v) != pair:
            saw_reversed = True
        edges.add(pair)
        max_index = max(max_index, u, v)
    num_nodes = max(max_index + 1, num_nodes_hint or 0)
    if num_nodes < 1:
        raise ValueError("empty edge list and no num_nodes_hint given")
    if saw_reversed:
        warnings.warn("directed duplicates collapsed to undirected edges", stacklevel=2)
    return Graph(num_nodes, frozenset(edges))


def load_features(text: str, num_nodes: int) -> np.ndarray:
    """Parse a feature table: node id followed by d reals per line.

    Nodes absent from the file get all-zero rows.
    """
    rows = {}
    dim = None
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        try:
            node = int(tokens[0])
            values = [float(t) for t in tokens[1:]]
        except ValueError:
            raise EdgeListParseError(line_number, f"bad feature row {tokens!r}") from None
        if not values:
            raise EdgeListParseError(line_number, "feature row has no values")
        if node < 0 or node >= num_nodes:
            raise ValueError(f"line {line_number}: node id {node} out of range")
        if dim is None:
            dim = len(values)
        elif len(values) != dim:
            raise EdgeListParseError(line_number, f"expected {dim} values, got {len(values)}")
        rows[node] = values
    if dim is None:
        raise ValueError("feature document contains no rows")
    out = np.zeros((num_nodes, dim))
    for node, values in rows.items():
        out[node] = values
    return out


def ensure_features(graph: Graph, dim: int, seed: int) -> Graph:
    """Attach seeded standard-normal features when the graph has none."""
    if graph.features is not None:
        return graph
    rng = derive_rng(seed, "features")
    return graph.with_features(rng.standard_normal((graph.num_nodes, dim)))


def _pair_rank(u: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
    # Rank of pair (u, v), u < v, in the lexicographic enumeration of all
    # unordered pairs over n nodes.
    u = u.astype(np.int64)
    v = v.astype(np.int64)
    return u * n - u * (u + 1) // 2 + (v - u - 1)


def _pair_unrank(rank: np.ndarray, n: int):
    rank = rank.astype(np.float64)
    u = np.floor((2 * n - 1 - np.sqrt((2 * n - 1) ** 2 - 8 * rank)) / 2).astype(np.int64)
    base = u * n - u * (u + 1) // 2
    v = (rank - base).astype(np.int64) + u + 1
    return u, v


def negative_sample(graph: Graph, count: int, seed: int):
    """Sample ``count`` distinct non-edges uniformly, without replacement.

    Raises CapacityError when the graph has fewer than ``count`` non-edges.
    Deterministic given the seed.
    """
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    n = graph.num_nodes
    total = n * (n - 1) // 2
    capacity = total - graph.num_edges
    if count > capacity:
        raise CapacityError(
            f"requested {count} non-edges but only {capacity} exist"
        )
    if count == 0:
        return []
    rng = derive_rng(seed, "negative-sample")
    if total <= _ENUMERATION_LIMIT:
        ranks = np.arange(total, dtype=np.int64)
        edge_arr = graph.edge_array()
        if edge_arr.size:
            occupied = _pair_rank(edge_arr[:, 0], edge_arr[:, 1], n)
            mask = np.ones(total, dtype=bool)
            mask[occupied] = False
            ranks = ranks[mask]
        chosen = rng.choice(ranks, size=count, replace=False)
        u, v = _pair_unrank(np.sort(chosen), n)
        return [(int(a), int(b)) for a, b in zip(u, v)]
    # Rejection sampling for very large graphs; terminates because
    # count <= capacity and duplicates are filtered against a set.
    forbidden = set(graph.edges)
    result = set()
    while len(result) < count:
        batch = max(1024, 2 * (count - len(result)))
        us = rng.integers(0, n, size=batch)
        vs = rng.integers(0, n, size=batch)
        for a, b in zip(us, vs):
            if a == b:
                continue
            pair = (int(a), int(b)) if a < b else (int(b), int(a))
            if pair in forbidden or pair in result:
                continue
            result.add(pair)
            if len(result) == count:
                break
    return sorted(result)


def _quota_sizes(n: int, ratios) -> list:
    # Floor each quota, then hand leftovers to subsets in declaration order
    # (train first) so the partition is deterministic.
    floors = [int(np.floor(r * n)) for r in ratios]
    leftover = n - sum(floors)
    for i in range(leftover):
        floors[i % len(floors)] += 1
    return floors


def split_edges(positives, negatives, ratios, seed: int) -> EdgeSplit:
    """Shuffle and partition positive and negative pairs by ratio.

    Positives and negatives are shuffled and partitioned independently with
    the same quotas, so every subset is exactly class-balanced. Ratios are
    four non-negative reals summing to 1 (tolerance 1e-9), ordered
    (train, val, calib, test).
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 4:
        raise ValueError(f"expected 4 ratios, got {len(ratios)}")
    if any(r < 0 for r in ratios):
        raise ValueError(f"ratios must be non-negative, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got sum={sum(ratios)!r}")
    positives = [(min(int(u), int(v)), max(int(u), int(v))) for u, v in positives]
    negatives = [(min(int(u), int(v)), max(int(u), int(v))) for u, v in negatives]
    if len(positives) != len(negatives):
        raise ValueError(
            f"positive/negative counts differ: {len(positives)} vs {len(negatives)}"
        )
    rng = derive_rng(seed, "split")
    pos = [positives[i] for i in rng.permutation(len(positives))]
    neg = [negatives[i] for i in rng.permutation(len(negatives))]
    sizes = _quota_sizes(len(pos), ratios)
    subsets = []
    start = 0
    for size in sizes:
        chunk = [LabeledEdge(u, v, 1) for u, v in pos[start : start + size]]
        chunk += [LabeledEdge(u, v, 0) for u, v in neg[start : start + size]]
        subsets.append(tuple(chunk))
        start += size
    return EdgeSplit(*subsets)


def training_subgraph(graph: Graph, split: EdgeSplit) -> Graph:
    """Graph over the same nodes containing only train+val positive edges."""
    edges = {(e.u, e.v) for e in split.train + split.val if e.label == 1}
    if not edges:
        warnings.warn("training subgraph has no edges", stacklevel=2)
    return graph.with_edges(edges)


def degree_sequence(graph: Graph, drop_isolated: bool = False) -> np.ndarray:
    """Per-node degrees as an int64 array; optionally without zero entries."""
    degrees = np.zeros(graph.num_nodes, dtype=np.int64)
    edge_arr = graph.edge_array()
    if edge_arr.size:
        degrees = np.bincount(edge_arr.ravel(), minlength=graph.num_nodes).astype(np.int64)
    if drop_isolated:
        degrees = degrees[degrees > 0]
    return degrees


def inject_cliques(graph: Graph, m: int, n: int, seed: int) -> Graph:
    """Add n cliques of m uniformly chosen nodes each (deduplicated).

    Nodes are drawn without replacement within a clique and with
    replacement across cliques.
    """
    if m < 2:
        raise ValueError(f"clique size must be >= 2, got {m}")
    if m > graph.num_nodes:
        raise ValueError(f"clique size {m} exceeds num_nodes {graph.num_nodes}")
    if n < 0:
        raise ValueError(f"clique count must be >= 0, got {n}")
    if n == 0:
        return graph
    rng = derive_rng(seed, "cliques")
    iu, iv = np.triu_indices(m, k=1)
    edges = set(graph.edges)
    for _ in range(n):
        members = rng.choice(graph.num_nodes, size=m, replace=False)
        for a, b in zip(members[iu], members[iv]):
            edges.add((int(a), int(b)) if a < b else (int(b), int(a)))
    return graph.with_edges(edges)


def _powerlaw_degree_sample(num_nodes: int, beta: float, d_min: int, rng) -> np.ndarray:
    support = np.arange(d_min, num_nodes, dtype=np.float64)
    pmf = support ** (-beta) / hurwitz_zeta(beta, float(d_min))
    cdf = np.cumsum(pmf)
    u = rng.random(num_nodes)
    idx = np.searchsorted(cdf, u, side="left")
    return (d_min + np.minimum(idx, support.size - 1)).astype(np.int64)


def generate_powerlaw_graph(num_nodes: int, beta: float, d_min: int, seed: int) -> Graph:
    """Random graph whose degrees follow the discrete power law.

    Target degrees are drawn by inverse-CDF sampling from
    Pr(d) = d^-beta / zeta(beta, d_min), capped at num_nodes - 1 and
    parity-corrected, then wired by configuration-model stub pairing with
    self-loops and duplicate edges discarded.
    """
    if num_nodes < 10:
        raise ValueError(f"num_nodes must be >= 10, got {num_nodes}")
    if beta <= 1.0:
        raise ValueError(f"beta must exceed 1, got {beta}")
    if d_min < 1:
        raise ValueError(f"d_min must be >= 1, got {d_min}")
    rng = derive_rng(seed, "powerlaw-graph")
    degrees = _powerlaw_degree_sample(num_nodes, beta, d_min, rng)
    if degrees.sum() % 2 == 1:
        if degrees[0] < num_nodes - 1:
            degrees[0] += 1
        else:
            degrees[0] -= 1
    stubs = np.repeat(np.arange(num_nodes), degrees)
    rng.shuffle(stubs)
    half = stubs.size // 2
    us, vs = stubs[:half], stubs[half : 2 * half]
    keep = us != vs
    lo = np.minimum(us[keep], vs[keep])
    hi = np.maximum(us[keep], vs[keep])
    edges = {(int(a), int(b)) for a, b in zip(lo, hi)}
    return Graph(num_nodes, frozenset(edges))


def generate_latent_powerlaw_graph(
    num_nodes: int,
    beta: float,
    d_min: int,
    feature_dim: int,
    seed: int,
    homophily: float = 6.0,
) -> Graph:
    """Power-law graph whose edges also follow a latent feature geometry.

    Nodes get unit-norm Gaussian latent vectors (exposed as the graph's
    features). Pair (u, v) is wired with probability proportional to
    d_u * d_v * exp(homophily * <x_u, x_v>), where the d are power-law
    degree targets, scaled so the expected edge count matches the degree
    budget. Unlike the configuration model, held-out edges of this graph
    are predictable from the features, which makes it a stand-in for real
    attributed graphs; edges added later between random nodes (injected
    cliques) ignore the geometry and stay feature-independent.
    """
    if num_nodes < 10:
        raise ValueError(f"num_nodes must be >= 10, got {num_nodes}")
    if beta <= 1.0:
        raise ValueError(f"beta must exceed 1, got {beta}")
    if d_min < 1:
        raise ValueError(f"d_min must be >= 1, got {d_min}")
    if homophily < 0:
        raise ValueError(f"homophily must be >= 0, got {homophily}")
    rng = derive_rng(seed, "latent-powerlaw-graph")
    degrees = _powerlaw_degree_sample(num_nodes, beta, d_min, rng)
    latent = rng.standard_normal((num_nodes, feature_dim))
    unit = latent / np.maximum(np.linalg.norm(latent, axis=1, keepdims=True), 1e-12)
    iu, iv = np.triu_indices(num_nodes, k=1)
    affinity = np.exp(homophily * np.sum(unit[iu] * unit[iv], axis=1))
    weight = degrees[iu] * degrees[iv] * affinity
    target_edges = degrees.sum() / 2.0
    prob = np.minimum(weight * (target_edges / weight.sum()), 1.0)
    chosen = rng.random(prob.size) < prob
    edges = {(int(a), int(b)) for a, b in zip(iu[chosen], iv[chosen])}
    # Raw (unnormalized) latents as features: unit-variance entries train
    # faster through the propagation layers than row-normalized ones.
    return Graph(num_nodes, frozenset(edges), latent)
