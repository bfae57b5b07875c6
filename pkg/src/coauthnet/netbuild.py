"""Per-topic weighted co-authorship networks by clique expansion."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Optional

import networkx as nx

from .disambig.names import UnparseableName, normalize_name

logger = logging.getLogger(__name__)


@dataclass
class TopicNetwork:
    """Undirected co-authorship graph for one topic.

    Nodes carry `paper_count`; edges carry an integer `weight` equal to the
    number of joint papers. Solo papers add to node counts but not to edges.
    """

    topic_id: int
    graph: nx.Graph
    single_author_papers: int = 0
    multi_author_papers: int = 0

    @property
    def n_papers(self) -> int:
        return self.single_author_papers + self.multi_author_papers

    @property
    def n_authors(self) -> int:
        return self.graph.number_of_nodes()


def canonical_ids(authors: Iterable[str], mapping: Mapping) -> list[str]:
    """Distinct canonical ids for a paper's author list, in first-seen order."""
    out = []
    seen = set()
    for raw in authors:
        prof = mapping.get(raw)
        if prof is not None:
            cid = prof.canonical_id if hasattr(prof, "canonical_id") else str(prof)
        else:
            try:
                cid = normalize_name(raw).normalized
            except UnparseableName:
                logger.warning("dropping unparseable author %r", raw)
                continue
            logger.debug("unmapped author %r falls back to %r", raw, cid)
        if cid not in seen:
            seen.add(cid)
            out.append(cid)
    return out


def build_topic_network(papers, mapping: Mapping, topic_id: Optional[int] = None) -> TopicNetwork:
    papers = list(papers)
    topics = {p.topic_id for p in papers}
    if topic_id is None:
        if len(topics) > 1:
            raise ValueError(f"papers span several topics: {sorted(topics)}")
        topic_id = topics.pop() if topics else -1
    elif topics - {topic_id}:
        raise ValueError(f"papers outside topic {topic_id}: {sorted(topics - {topic_id})}")
    g = nx.Graph()
    single = multi = 0
    for paper in sorted(papers, key=lambda p: p.paper_id):
        ids = canonical_ids(paper.authors, mapping)
        if not ids:
            continue
        for cid in ids:
            if cid in g:
                g.nodes[cid]["paper_count"] += 1
            else:
                g.add_node(cid, paper_count=1)
        if len(ids) < 2:
            single += 1
            continue
        multi += 1
        for a, b in combinations(sorted(ids), 2):
            if g.has_edge(a, b):
                g[a][b]["weight"] += 1
            else:
                g.add_edge(a, b, weight=1)
    return TopicNetwork(topic_id, _canonical_order(g), single, multi)


def _canonical_order(g: nx.Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(sorted(g.nodes(data=True)))
    h.add_edges_from(sorted((min(a, b), max(a, b), d) for a, b, d in g.edges(data=True)))
    return h


def build_all(records, mapping: Mapping) -> dict[int, TopicNetwork]:
    groups: dict[int, list] = {}
    for r in records:
        if r.topic_id is not None:
            groups.setdefault(r.topic_id, []).append(r)
    return {t: build_topic_network(groups[t], mapping, t) for t in sorted(groups)}


def largest_component_nodes(g: nx.Graph) -> list:
    """Largest component; ties go to the component whose sorted members compare smallest."""
    if g.number_of_nodes() == 0:
        return []
    comps = [sorted(c) for c in nx.connected_components(g)]
    return min(comps, key=lambda c: (-len(c), c))


def largest_connected_component(net: TopicNetwork) -> TopicNetwork:
    nodes = largest_component_nodes(net.graph)
    sub = _canonical_order(net.graph.subgraph(nodes))
    return TopicNetwork(net.topic_id, sub, net.single_author_papers, net.multi_author_papers)


# -- export / import -------------------------------------------------------------

def write_network(net: TopicNetwork, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / f"topic_{net.topic_id}_edges.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["canonical_a", "canonical_b", "weight"])
        for a, b, d in sorted((min(a, b), max(a, b), d) for a, b, d in net.graph.edges(data=True)):
            w.writerow([a, b, d["weight"]])
    with open(out / f"topic_{net.topic_id}_nodes.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["canonical_id", "paper_count"])
        for n, d in sorted(net.graph.nodes(data=True)):
            w.writerow([n, d["paper_count"]])


def write_networks(nets: Mapping[int, TopicNetwork], out_dir, graphml: bool = False) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "topics.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["topic_id", "n_papers", "single_author_papers", "multi_author_papers", "n_authors"])
        for t in sorted(nets):
            n = nets[t]
            w.writerow([t, n.n_papers, n.single_author_papers, n.multi_author_papers, n.n_authors])
    for t in sorted(nets):
        write_network(nets[t], out)
        if graphml:
            nx.write_graphml(nets[t].graph, out / f"topic_{t}.graphml")


def read_networks(in_dir) -> dict[int, TopicNetwork]:
    base = Path(in_dir)
    nets = {}
    with open(base / "topics.csv", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            t = int(row["topic_id"])
            g = nx.Graph()
            with open(base / f"topic_{t}_nodes.csv", encoding="utf-8", newline="") as nf:
                for nrow in csv.DictReader(nf):
                    g.add_node(nrow["canonical_id"], paper_count=int(nrow["paper_count"]))
            with open(base / f"topic_{t}_edges.csv", encoding="utf-8", newline="") as ef:
                for erow in csv.DictReader(ef):
                    g.add_edge(erow["canonical_a"], erow["canonical_b"], weight=int(erow["weight"]))
            nets[t] = TopicNetwork(t, g, int(row["single_author_papers"]), int(row["multi_author_papers"]))
    return nets
