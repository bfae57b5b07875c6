"""Ten-metric structural signature of a topic co-authorship network.

Clustering, path length, k-cores, targeting and centralization use unweighted
degree. Modularity and the two brokerage measures use edge weights.
"""
from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import networkx as nx
import numpy as np

from . import METRIC_NAMES
from .netbuild import TopicNetwork, largest_component_nodes

METRICS_COLUMNS = ("topic_id", "n_authors", "n_papers") + METRIC_NAMES


@dataclass
class MetricVector:
    topic_id: int
    n_authors: int
    n_papers: int
    values: dict[str, Optional[float]] = field(default_factory=dict)

    def valid(self, name: str) -> bool:
        v = self.values.get(name)
        return v is not None and not math.isnan(v)

    def __getitem__(self, name: str) -> Optional[float]:
        return self.values.get(name)


def seed_for(seed: int, topic_id: int) -> np.random.Generator:
    """Per-topic generator; independent of the order topics are processed in."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(topic_id) & 0xFFFFFFFF]))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


# -- collaboration dynamics ------------------------------------------------------

def collaboration_rate(net: TopicNetwork) -> Optional[float]:
    if net.n_papers == 0:
        return None
    return net.multi_author_papers / net.n_papers


def repeated_collab_rate(net: TopicNetwork) -> Optional[float]:
    m = net.graph.number_of_edges()
    if m == 0:
        return None
    return sum(1 for *_, w in net.graph.edges(data="weight", default=1) if w > 1) / m


# -- global topology -------------------------------------------------------------

def degree_centralization(g: nx.Graph) -> tuple[float, bool]:
    """Freeman centralization; graphs under 3 nodes return (0.0, False)."""
    n = g.number_of_nodes()
    if n < 3:
        return 0.0, False
    degs = [d for _, d in g.degree()]
    dmax = max(degs)
    return sum(dmax - d for d in degs) / ((n - 1) * (n - 2)), True


def degree_assortativity(g: nx.Graph) -> Optional[float]:
    """Pearson correlation of endpoint degrees, each edge counted both ways."""
    deg = dict(g.degree())
    xs, ys = [], []
    for u, v in g.edges():
        if u == v:
            continue
        xs += [deg[u], deg[v]]
        ys += [deg[v], deg[u]]
    if len(xs) < 2:
        return None
    x = np.asarray(xs, float)
    y = np.asarray(ys, float)
    sx, sy = x.std(), y.std()
    if sx == 0 or sy == 0:
        return None
    return float(((x - x.mean()) * (y - y.mean())).mean() / (sx * sy))


def bfs_lengths(adj: dict, source) -> dict:
    dist = {source: 0}
    q = deque([source])
    while q:
        u = q.popleft()
        du = dist[u] + 1
        for v in adj[u]:
            if v not in dist:
                dist[v] = du
                q.append(v)
    return dist


def average_path_length(g: nx.Graph, sample: int = 200, seed=None) -> float:
    """Mean shortest-path length on a connected graph.

    With more than `sample` nodes, distances are averaged from `sample` source
    nodes drawn without replacement.
    """
    nodes = sorted(g.nodes())
    n = len(nodes)
    adj = {u: list(g.adj[u]) for u in nodes}
    if n > sample:
        idx = _rng(seed).choice(n, size=sample, replace=False)
        sources = [nodes[i] for i in sorted(idx)]
    else:
        sources = nodes
    total = 0
    count = 0
    for s in sources:
        d = bfs_lengths(adj, s)
        total += sum(d.values())
        count += len(d) - 1
    return total / count


def average_clustering(g: nx.Graph) -> float:
    """Unweighted local clustering averaged over all nodes (degree < 2 counts as 0)."""
    if g.number_of_nodes() == 0:
        return 0.0
    nbrs = {u: set(g.adj[u]) - {u} for u in g}
    total = 0.0
    for u, nu in nbrs.items():
        k = len(nu)
        if k < 2:
            continue
        links = sum(len(nu & nbrs[v]) for v in nu) / 2
        total += 2 * links / (k * (k - 1))
    return total / len(nbrs)


def small_world_coefficient(net_or_graph, sample: int = 200, seed=None) -> Optional[float]:
    """(C / C_rand) / (L / L_rand) on the largest component, Erdos-Renyi null model.

    C_rand = 2E / (n (n - 1)) and L_rand = ln n / ln(2E / n) use the component's
    own node and edge counts.
    """
    g = net_or_graph.graph if isinstance(net_or_graph, TopicNetwork) else net_or_graph
    lcc = g.subgraph(largest_component_nodes(g))
    n = lcc.number_of_nodes()
    e = lcc.number_of_edges()
    if n < 3:
        return None
    mean_deg = 2 * e / n
    if mean_deg <= 1:
        return None
    c_rand = 2 * e / (n * (n - 1))
    l_rand = math.log(n) / math.log(mean_deg)
    c = average_clustering(lcc)
    path = average_path_length(lcc, sample, seed)
    if c_rand == 0 or path == 0:
        return None
    return (c / c_rand) / (path / l_rand)


def removal_count(fraction: float, n: int) -> int:
    # round before ceil so 0.1 * 30 does not become 4
    return math.ceil(round(fraction * n, 9))


def _lcc_size_without(adj: dict, removed: set) -> int:
    best = 0
    seen = set(removed)
    for s in adj:
        if s in seen:
            continue
        seen.add(s)
        size = 1
        q = [s]
        while q:
            u = q.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    size += 1
                    q.append(v)
        best = max(best, size)
    return best


def targeted_lcc(g: nx.Graph, fraction: float = 0.10) -> int:
    """LCC size after deleting the top-degree nodes (ties by node id)."""
    nodes = sorted(g.nodes(), key=lambda u: (-g.degree(u), u))
    k = removal_count(fraction, len(nodes))
    adj = {u: list(g.adj[u]) for u in g}
    return _lcc_size_without(adj, set(nodes[:k]))


def random_lcc(g: nx.Graph, fraction: float = 0.10, trials: int = 25, seed=None) -> float:
    nodes = sorted(g.nodes())
    k = removal_count(fraction, len(nodes))
    adj = {u: list(g.adj[u]) for u in g}
    rng = _rng(seed)
    sizes = []
    for _ in range(trials):
        idx = rng.choice(len(nodes), size=k, replace=False)
        sizes.append(_lcc_size_without(adj, {nodes[i] for i in idx}))
    return float(np.mean(sizes))


def robustness_ratio(net_or_graph, fraction: float = 0.10, trials: int = 25, seed=None) -> Optional[float]:
    g = net_or_graph.graph if isinstance(net_or_graph, TopicNetwork) else net_or_graph
    if g.number_of_nodes() < 3:
        return None
    s_rand = random_lcc(g, fraction, trials, seed)
    if s_rand == 0:
        return None
    return targeted_lcc(g, fraction) / s_rand


# -- mesoscopic structure ----------------------------------------------------------

def modularity(g: nx.Graph, communities, weight: str = "weight") -> float:
    """Weighted Newman modularity of a partition (resolution 1)."""
    total = g.size(weight=weight)
    if total == 0:
        return 0.0
    label = {}
    for i, c in enumerate(communities):
        for u in c:
            label[u] = i
    intra = [0.0] * len(communities)
    strength = [0.0] * len(communities)
    for u, v, w in g.edges(data=weight, default=1):
        if label[u] == label[v]:
            intra[label[u]] += w
        strength[label[u]] += w
        strength[label[v]] += w
    return sum(intra[c] / total - (strength[c] / (2 * total)) ** 2 for c in range(len(communities)))


def _one_level(adj: list[dict], loops: list[float], order: list[int], m2: float) -> tuple[list[int], bool]:
    """Greedy local moving; returns community labels and whether anything moved."""
    n = len(adj)
    comm = list(range(n))
    k = [sum(a.values()) + 2 * loops[i] for i, a in enumerate(adj)]
    tot = k[:]
    moved_any = False
    improved = True
    while improved:
        improved = False
        for i in order:
            ci = comm[i]
            links: dict[int, float] = {}
            for j, w in adj[i].items():
                links[comm[j]] = links.get(comm[j], 0.0) + w
            tot[ci] -= k[i]
            best_c = ci
            best_gain = links.get(ci, 0.0) - tot[ci] * k[i] / m2
            for c in sorted(links):
                gain = links[c] - tot[c] * k[i] / m2
                if gain > best_gain + 1e-12:
                    best_gain, best_c = gain, c
            tot[best_c] += k[i]
            if best_c != ci:
                comm[i] = best_c
                improved = moved_any = True
    return comm, moved_any


def louvain(g: nx.Graph, order_seed: Optional[int] = None, weight: str = "weight") -> list[set]:
    """Multi-level greedy modularity maximization.

    Nodes are visited in sorted order, or in a seeded shuffle when
    `order_seed` is given.
    """
    nodes = sorted(g.nodes())
    if not nodes:
        return []
    index = {u: i for i, u in enumerate(nodes)}
    adj: list[dict] = [dict() for _ in nodes]
    loops = [0.0] * len(nodes)
    for u, v, w in g.edges(data=weight, default=1):
        a, b = index[u], index[v]
        if a == b:
            loops[a] += w
        else:
            adj[a][b] = adj[a].get(b, 0.0) + w
            adj[b][a] = adj[b].get(a, 0.0) + w
    m2 = 2 * g.size(weight=weight)
    members = [[u] for u in nodes]
    if m2 == 0:
        return [{u} for u in nodes]
    rng = np.random.default_rng(order_seed) if order_seed is not None else None
    while True:
        order = list(range(len(adj)))
        if rng is not None:
            rng.shuffle(order)
        comm, moved = _one_level(adj, loops, order, m2)
        if not moved:
            break
        labels = sorted(set(comm))
        relabel = {c: i for i, c in enumerate(labels)}
        new_members = [[] for _ in labels]
        new_adj: list[dict] = [dict() for _ in labels]
        new_loops = [0.0] * len(labels)
        for i, c in enumerate(comm):
            ci = relabel[c]
            new_members[ci].extend(members[i])
            new_loops[ci] += loops[i]
            for j, w in adj[i].items():
                cj = relabel[comm[j]]
                if cj == ci:
                    new_loops[ci] += w / 2
                else:
                    new_adj[ci][cj] = new_adj[ci].get(cj, 0.0) + w
        adj, loops, members = new_adj, new_loops, new_members
    return [set(m) for m in members]


def modularity_partition(net_or_graph, restarts: int = 8, seed: int = 0) -> tuple[list[set], Optional[float]]:
    """Best of one sorted-order Louvain run and `restarts` seeded shuffled runs."""
    g = net_or_graph.graph if isinstance(net_or_graph, TopicNetwork) else net_or_graph
    if g.number_of_edges() == 0:
        return [{u} for u in sorted(g.nodes())], None
    best = louvain(g)
    best_q = modularity(g, best)
    for r in range(restarts):
        part = louvain(g, order_seed=seed * 1000 + r)
        q = modularity(g, part)
        if q > best_q + 1e-12:
            best, best_q = part, q
    best = sorted(best, key=lambda c: min(c))
    return best, best_q


def core_numbers(g: nx.Graph) -> dict:
    """k-core index of each node by repeated minimum-degree peeling."""
    deg = {u: len(set(g.adj[u]) - {u}) for u in g}
    buckets: dict[int, set] = {}
    for u, d in deg.items():
        buckets.setdefault(d, set()).add(u)
    core = {}
    k = 0
    remaining = len(deg)
    while remaining:
        d = min(b for b, s in buckets.items() if s)
        k = max(k, d)
        u = buckets[d].pop()
        core[u] = k
        remaining -= 1
        for v in g.adj[u]:
            if v == u or v in core:
                continue
            dv = deg[v]
            buckets[dv].discard(v)
            deg[v] = dv - 1
            buckets.setdefault(dv - 1, set()).add(v)
    return core


def coreness_ratio(net_or_graph) -> Optional[float]:
    """Share of nodes in the innermost non-empty k-core."""
    g = net_or_graph.graph if isinstance(net_or_graph, TopicNetwork) else net_or_graph
    n = g.number_of_nodes()
    if n == 0:
        return None
    core = core_numbers(g)
    kmax = max(core.values())
    return sum(1 for c in core.values() if c == kmax) / n


# -- brokerage -------------------------------------------------------------------------

def _proportions(g: nx.Graph, weight: str) -> dict:
    p = {}
    for u in g:
        nbrs = {v: d.get(weight, 1) for v, d in g.adj[u].items() if v != u}
        s = sum(nbrs.values())
        p[u] = {v: w / s for v, w in nbrs.items()} if s else {}
    return p


def node_constraints(g: nx.Graph, weight: str = "weight") -> dict:
    """Burt constraint for every non-isolated node."""
    p = _proportions(g, weight)
    out = {}
    for i, pi in p.items():
        if not pi:
            continue
        c = 0.0
        for j, pij in pi.items():
            indirect = sum(piq * p[q].get(j, 0.0) for q, piq in pi.items() if q != j)
            c += (pij + indirect) ** 2
        out[i] = c
    return out


def node_effective_sizes(g: nx.Graph, weight: str = "weight") -> dict:
    """Burt effective size with redundancy m_jq = w_jq / max_k w_jk."""
    p = _proportions(g, weight)
    wmax = {}
    for u in g:
        ws = [d.get(weight, 1) for v, d in g.adj[u].items() if v != u]
        wmax[u] = max(ws) if ws else 0
    out = {}
    for i, pi in p.items():
        if not pi:
            continue
        e = 0.0
        for j in pi:
            redundancy = 0.0
            for q, piq in pi.items():
                if q == j:
                    continue
                wjq = g.adj[j].get(q, {}).get(weight, 1) if g.has_edge(j, q) else 0
                if wjq:
                    redundancy += piq * wjq / wmax[j]
            e += 1.0 - redundancy
        out[i] = e
    return out


def burt_constraint_avg(net_or_graph) -> Optional[float]:
    g = net_or_graph.graph if isinstance(net_or_graph, TopicNetwork) else net_or_graph
    vals = node_constraints(g)
    return sum(vals.values()) / len(vals) if vals else None


def effective_size_avg(net_or_graph) -> Optional[float]:
    g = net_or_graph.graph if isinstance(net_or_graph, TopicNetwork) else net_or_graph
    vals = node_effective_sizes(g)
    return sum(vals.values()) / len(vals) if vals else None


# -- aggregate --------------------------------------------------------------------------

def compute_all(net: TopicNetwork, seed: int = 0, robust_trials: int = 25,
                sample_threshold: int = 200) -> MetricVector:
    """All ten metrics; undefined values are stored as None, never raised."""
    g = net.graph
    rng = seed_for(seed, net.topic_id)
    sw_seed, rob_seed = rng.integers(0, 2**32, size=2)
    vals: dict[str, Optional[float]] = {}
    vals["collaboration_rate"] = collaboration_rate(net)
    vals["repeated_collab_rate"] = repeated_collab_rate(net)
    cent, ok = degree_centralization(g)
    vals["degree_centralization"] = cent if ok else (0.0 if g.number_of_nodes() else None)
    vals["degree_assortativity"] = degree_assortativity(g)
    vals["modularity"] = modularity_partition(g)[1]
    vals["small_world"] = small_world_coefficient(g, sample_threshold, int(sw_seed))
    vals["coreness_ratio"] = coreness_ratio(g)
    vals["robustness_ratio"] = robustness_ratio(g, 0.10, robust_trials, int(rob_seed))
    vals["avg_constraint"] = burt_constraint_avg(g)
    vals["avg_effective_size"] = effective_size_avg(g)
    return MetricVector(net.topic_id, net.n_authors, net.n_papers, vals)


def _fmt(v: Optional[float]) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return repr(float(v))


def write_metrics(vectors, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METRICS_COLUMNS)
        for mv in sorted(vectors, key=lambda m: m.topic_id):
            w.writerow([mv.topic_id, mv.n_authors, mv.n_papers] + [_fmt(mv.values.get(k)) for k in METRIC_NAMES])


def read_metrics(path) -> list[MetricVector]:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(METRICS_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            vals = {k: (float(row[k]) if row[k] != "" else None) for k in METRIC_NAMES}
            out.append(MetricVector(int(row["topic_id"]), int(row["n_authors"]), int(row["n_papers"]), vals))
    return out
