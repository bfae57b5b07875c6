"""Three-stage conservative author name disambiguation.

Stage 1 links names inside last-name blocks, Stage 2 accepts or partitions the
resulting clusters by first-name compatibility, Stage 3 merges remaining
profiles whose co-author and paper sets overlap strongly. Every decision is
appended to an audit log.
"""
from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Optional

from .names import (
    NormalizedName,
    UnparseableName,
    _key,
    completeness_key,
    default_pinyin,
    default_variants,
    first_names_compatible,
    is_initial_expansion,
    normalize_name,
    string_similarity,
    tokens_compatible,
)

logger = logging.getLogger(__name__)

INITIAL_EXPANSION = "initial-expansion"
HIGH_SIMILARITY = "high-similarity"


@dataclass(frozen=True)
class DisambigConfig:
    sim: float = 0.95
    pinyin_sim: float = 0.92
    western_sim: float = 0.87
    jaccard: float = 0.5
    coauthor_weight: float = 0.6
    max_cluster: int = 50
    min_papers: int = 2

    def validate(self) -> None:
        for name in ("sim", "pinyin_sim", "western_sim", "jaccard", "coauthor_weight"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.max_cluster < 1:
            raise ValueError("max_cluster must be >= 1")
        if self.min_papers < 1:
            raise ValueError("min_papers must be >= 1")


class UnionFind:
    def __init__(self, items: Iterable = ()):
        self.parent = {x: x for x in items}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        # smaller key wins so roots do not depend on insertion order
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True

    def groups(self) -> list[list]:
        out = defaultdict(list)
        for x in self.parent:
            out[self.find(x)].append(x)
        return sorted((sorted(g) for g in out.values()), key=lambda g: g[0])


@dataclass
class SimilarityGraph:
    nodes: dict[str, NormalizedName] = field(default_factory=dict)
    edges: dict[tuple[str, str], str] = field(default_factory=dict)

    def components(self) -> list[list[str]]:
        uf = UnionFind(self.nodes)
        for a, b in self.edges:
            uf.union(a, b)
        return uf.groups()


@dataclass(frozen=True)
class CanonicalAuthor:
    canonical_id: str
    representative: str
    variants: frozenset[str]
    paper_ids: frozenset[str] = frozenset()


@dataclass
class DisambigResult:
    mapping: dict[str, CanonicalAuthor]
    audit: list[dict]
    unparseable: list[str]

    @property
    def profiles(self) -> list[CanonicalAuthor]:
        seen = {}
        for prof in self.mapping.values():
            seen[prof.canonical_id] = prof
        return [seen[k] for k in sorted(seen)]


def normalize_all(raw_names: Iterable[str]) -> tuple[dict[str, NormalizedName], list[str]]:
    """Map raw -> NormalizedName; unparseable strings are returned separately."""
    out, bad = {}, []
    for raw in sorted(set(raw_names)):
        try:
            out[raw] = normalize_name(raw)
        except UnparseableName:
            logger.warning("unparseable author name %r excluded", raw)
            bad.append(raw)
    return out, bad


# -- Stage 1 -------------------------------------------------------------------

def build_similarity_graph(names: Iterable[NormalizedName], config: DisambigConfig = DisambigConfig(),
                           variants=None) -> SimilarityGraph:
    """Edges inside each last-name block for initial expansions or near-identical strings."""
    if variants is None:
        variants = default_variants()
    graph = SimilarityGraph()
    for n in names:
        graph.nodes.setdefault(n.normalized, n)
    blocks: dict[str, list[NormalizedName]] = defaultdict(list)
    for n in graph.nodes.values():
        blocks[n.last].append(n)
    for last in sorted(blocks):
        block = sorted(blocks[last], key=lambda n: n.normalized)
        if len(block) > 1:
            _link_block(block, graph, config, variants)
    return graph


def _link_block(block, graph, config, variants) -> None:
    by_initial: dict[str, list[NormalizedName]] = defaultdict(list)
    for n in block:
        by_initial[_key(n.first)[:1]].append(n)
    seen = set()
    for n in block:
        first = _key(n.first)
        keys = {first[:1]}
        keys.update(v[:1] for v in variants.get(first, ()))
        for k in sorted(keys):
            for m in by_initial.get(k, ()):
                if m.normalized <= n.normalized:
                    continue
                pair = (n.normalized, m.normalized)
                if pair in seen:
                    continue
                seen.add(pair)
                if is_initial_expansion(n, m, variants):
                    graph.edges[pair] = INITIAL_EXPANSION
    # Any pair above the similarity threshold needs few edits relative to length,
    # which bounds the length difference; only those pairs are scored.
    slack = 1.0 - config.sim
    ordered = sorted(block, key=lambda n: (len(n.normalized), n.normalized))
    for i, n in enumerate(ordered):
        ln = len(n.normalized)
        for m in ordered[i + 1:]:
            lm = len(m.normalized)
            if lm - ln > slack * lm:
                break
            if slack * lm < 1.0:
                # fewer than one edit allowed: only identical strings qualify
                continue
            pair = tuple(sorted((n.normalized, m.normalized)))
            if pair in graph.edges:
                continue
            if string_similarity(n.normalized, m.normalized) > config.sim:
                graph.edges[pair] = HIGH_SIMILARITY


# -- Stage 2 -------------------------------------------------------------------

class _Compat:
    """Cached pairwise name compatibility under Stage-2 rules."""

    def __init__(self, config: DisambigConfig, variants, pinyin):
        self.config = config
        self.variants = variants
        self.pinyin = pinyin
        self._first: dict[tuple[str, str], bool] = {}

    def first(self, a: str, b: str) -> bool:
        if len(_key(a)) == 1 or len(_key(b)) == 1:
            return tokens_compatible(a, b)
        key = (a, b) if a <= b else (b, a)
        hit = self._first.get(key)
        if hit is None:
            hit = first_names_compatible(a, b, self.variants, self.pinyin,
                                         self.config.pinyin_sim, self.config.western_sim)
            self._first[key] = hit
        return hit

    def __call__(self, a: NormalizedName, b: NormalizedName) -> bool:
        ga, gb = a.given, b.given
        if not ga or not gb:
            return ga == gb
        if not self.first(ga[0], gb[0]):
            return False
        for s, t in zip(ga[1:], gb[1:]):
            if not tokens_compatible(s, t, self.variants):
                return False
        if len(ga) != len(gb):
            short, long_ = (ga, gb) if len(ga) < len(gb) else (gb, ga)
            for s, t in zip(short, long_):
                if len(_key(t)) == 1 and len(_key(s)) > 1:
                    return False
        return True


def merge_clusters(graph: SimilarityGraph, config: DisambigConfig = DisambigConfig(),
                   variants=None, pinyin=None, audit: Optional[list] = None) -> list[list[str]]:
    """Split each connected component into clusters of names that are safe to merge.

    A component whose names are all pairwise compatible (and which is not
    oversized) merges whole. Otherwise it is partitioned: any name compatible
    with two mutually incompatible names is ambiguous and stays alone, and the
    remaining names form compatible cliques merged one by one.
    """
    if variants is None:
        variants = default_variants()
    if pinyin is None:
        pinyin = default_pinyin()
    compat = _Compat(config, variants, pinyin)
    clusters: list[list[str]] = []
    for comp in graph.components():
        if len(comp) == 1:
            clusters.append(comp)
            continue
        names = [graph.nodes[c] for c in comp]
        adj: dict[str, set[str]] = {c: set() for c in comp}
        all_ok = True
        for a, b in combinations(names, 2):
            if compat(a, b):
                adj[a.normalized].add(b.normalized)
                adj[b.normalized].add(a.normalized)
            else:
                all_ok = False
        oversized = len(comp) > config.max_cluster
        if all_ok and not oversized:
            clusters.append(comp)
            _log(audit, 2, comp, "merge", 1.0)
            continue
        parts, ambiguous = _partition(comp, adj, graph.nodes)
        for part in parts:
            clusters.append(part)
            if len(part) > 1:
                _log(audit, 2, part, "merge-subgroup", 1.0)
        if ambiguous:
            _log(audit, 2, sorted(ambiguous), "ambiguous-unmerged", 0.0)
        if oversized:
            _log(audit, 2, comp, "oversized-partitioned", float(len(comp)))
    return sorted(clusters, key=lambda g: g[0])


def _unambiguous_cliques(members: list[str], adj: dict[str, set[str]]) -> tuple[list[list[str]], set[str]]:
    """Names compatible with two mutually incompatible names stay alone; the rest
    fall into cliques of the compatibility relation."""
    pool = set(members)
    ambiguous = set()
    for v in members:
        nbrs = adj[v] & pool
        for u in nbrs:
            if not (nbrs - {u}) <= adj[u]:
                ambiguous.add(v)
                break
    uf = UnionFind(members)
    for v in members:
        if v in ambiguous:
            continue
        for u in adj[v] & pool:
            if u not in ambiguous:
                uf.union(u, v)
    return uf.groups(), ambiguous


def _partition(comp: list[str], adj: dict[str, set[str]], nodes) -> tuple[list[list[str]], set[str]]:
    """Cluster names with a spelled-out first name, then attach abbreviated names.

    An abbreviated name joins a cluster only when that cluster is the single one
    holding a compatible name and it is compatible with every member so far.
    Leftover abbreviated names are grouped among themselves by the same rule.
    """
    spelled = [c for c in comp if len(_key(nodes[c].first)) > 1]
    abbrev = [c for c in comp if len(_key(nodes[c].first)) <= 1]
    groups, ambiguous = _unambiguous_cliques(spelled, adj)
    cluster_of = {}
    for i, g in enumerate(groups):
        for c in g:
            cluster_of[c] = i
    leftovers = []
    ordered = sorted(abbrev, key=lambda c: completeness_key(nodes[c]))
    for a in ordered:
        targets = {cluster_of[u] for u in adj[a] if u in cluster_of}
        if len(targets) == 1:
            t = targets.pop()
            if all(m in adj[a] for m in groups[t]):
                groups[t].append(a)
                continue
        if targets:
            ambiguous.add(a)
            groups.append([a])
        else:
            leftovers.append(a)
    rest, rest_amb = _unambiguous_cliques(leftovers, adj)
    ambiguous |= rest_amb
    parts = [sorted(g) for g in groups] + rest
    return sorted(parts, key=lambda g: g[0]), ambiguous


def _log(audit, stage, members, decision, score) -> None:
    if audit is not None:
        audit.append({"stage": stage, "members": list(members), "decision": decision, "score": score})


# -- Stage 3 -------------------------------------------------------------------

def jaccard(a: set, b: set) -> float:
    """|a & b| / |a | b|, with two empty sets scoring 0."""
    if not a and not b:
        return 0.0
    return len(a & b) / len(a | b)


def cooccurrence_score(c1: set, c2: set, p1: set, p2: set, w: float = 0.6) -> float:
    return w * jaccard(c1, c2) + (1.0 - w) * jaccard(p1, p2)


def cooccurrence_merge(
    profiles: Mapping[str, NormalizedName],
    coauthors: Mapping[str, set],
    papers: Mapping[str, set],
    config: DisambigConfig = DisambigConfig(),
    audit: Optional[list] = None,
) -> list[tuple[str, str, float]]:
    """Accepted (a, b, score) pairs among profiles sharing last name and first initial.

    `profiles` maps profile id -> representative name; `coauthors` and `papers`
    map profile id -> sets. Only pairs with some overlap are scored, since a
    pair with no shared co-author and no shared paper scores zero.
    """
    blocks: dict[tuple[str, str], list[str]] = defaultdict(list)
    for pid, name in profiles.items():
        if len(papers.get(pid, ())) >= config.min_papers and name.first:
            blocks[(name.last, _key(name.first)[:1])].append(pid)
    accepted = []
    for key in sorted(blocks):
        members = sorted(blocks[key])
        if len(members) < 2:
            continue
        member_set = set(members)
        index: dict[object, set[str]] = defaultdict(set)
        for pid in members:
            for c in coauthors.get(pid, ()):
                index[("c", c)].add(pid)
            for p in papers.get(pid, ()):
                index[("p", p)].add(pid)
        candidates = set()
        for group in index.values():
            if len(group) > 1:
                for a, b in combinations(sorted(group & member_set), 2):
                    candidates.add((a, b))
        for a, b in sorted(candidates):
            s = cooccurrence_score(set(coauthors.get(a, ())) - {b}, set(coauthors.get(b, ())) - {a},
                                   set(papers.get(a, ())), set(papers.get(b, ())), config.coauthor_weight)
            if s > config.jaccard:
                accepted.append((a, b, s))
                _log(audit, 3, [a, b], "merge", s)
    return accepted


# -- Resolution ------------------------------------------------------------------

def resolve_canonical(
    clusters: Iterable[Iterable[str]],
    merges: Iterable[tuple[str, str]],
    names: Mapping[str, NormalizedName],
    raw_by_norm: Mapping[str, Iterable[str]],
    papers_by_raw: Optional[Mapping[str, set]] = None,
    raw_counts: Optional[Mapping[str, int]] = None,
) -> dict[str, CanonicalAuthor]:
    """Transitively close clusters plus merge pairs into raw -> CanonicalAuthor.

    The canonical id is the normalized form of the most complete variant, so it
    is unique and stable across runs.
    """
    uf = UnionFind(names)
    for cl in clusters:
        cl = list(cl)
        for other in cl[1:]:
            uf.union(cl[0], other)
    for a, b in merges:
        uf.union(a, b)
    mapping: dict[str, CanonicalAuthor] = {}
    for group in uf.groups():
        rep = min((names[g] for g in group), key=completeness_key)
        raws = sorted(r for g in group for r in raw_by_norm.get(g, ()))
        rep_raws = sorted(raw_by_norm.get(rep.normalized, ()) or [rep.normalized])
        if raw_counts:
            display = min(rep_raws, key=lambda r: (-raw_counts.get(r, 0), r))
        else:
            display = rep_raws[0]
        pids = frozenset(p for r in raws for p in (papers_by_raw or {}).get(r, ()))
        prof = CanonicalAuthor(rep.normalized, display, frozenset(raws), pids)
        for r in raws:
            assert r not in mapping, f"raw name {r!r} resolved twice"
            mapping[r] = prof
    return mapping


def disambiguate(records, config: DisambigConfig = DisambigConfig(), variants=None, pinyin=None) -> DisambigResult:
    """Run normalization and all three stages over the authors of `records`."""
    config.validate()
    if variants is None:
        variants = default_variants()
    if pinyin is None:
        pinyin = default_pinyin()
    papers_by_raw: dict[str, set] = defaultdict(set)
    raw_counts: Counter = Counter()
    for rec in records:
        for a in rec.authors:
            papers_by_raw[a].add(rec.paper_id)
            raw_counts[a] += 1
    normalized, bad = normalize_all(papers_by_raw)
    raw_by_norm: dict[str, list[str]] = defaultdict(list)
    names: dict[str, NormalizedName] = {}
    for raw, n in normalized.items():
        raw_by_norm[n.normalized].append(raw)
        names.setdefault(n.normalized, n)
    audit: list[dict] = []

    graph = build_similarity_graph(names.values(), config, variants)
    logger.info("stage 1: %d names, %d edges", len(graph.nodes), len(graph.edges))
    clusters = merge_clusters(graph, config, variants, pinyin, audit)
    logger.info("stage 2: %d clusters", len(clusters))

    cluster_of = {}
    profile_name = {}
    for cl in clusters:
        pid = min((names[n] for n in cl), key=completeness_key).normalized
        profile_name[pid] = names[pid]
        for n in cl:
            cluster_of[n] = pid
    prof_papers: dict[str, set] = defaultdict(set)
    for norm, raws in raw_by_norm.items():
        for r in raws:
            prof_papers[cluster_of[norm]].update(papers_by_raw[r])
    prof_coauthors: dict[str, set] = defaultdict(set)
    for rec in records:
        pids = set()
        for a in rec.authors:
            n = normalized.get(a)
            if n is not None:
                pids.add(cluster_of[n.normalized])
        for p in pids:
            prof_coauthors[p].update(pids - {p})
    accepted = cooccurrence_merge(profile_name, prof_coauthors, prof_papers, config, audit)
    logger.info("stage 3: %d co-occurrence merges", len(accepted))

    mapping = resolve_canonical(clusters, [(a, b) for a, b, _ in accepted], names, raw_by_norm,
                                papers_by_raw, raw_counts)
    return DisambigResult(mapping, audit, bad)
