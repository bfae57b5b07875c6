"""Seeded synthetic corpora with known ground truth.

Three generators: planted-modular topics (dense groups joined by a few bridge
papers), core-periphery topics (one dense core with a tree-like fringe), and a
name corpus whose authors appear under several spellings. Ground truth is
returned separately and never consumed by the pipeline stages.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Optional

import numpy as np

from .ingest import PaperRecord, write_records
from .stats import TopicSummary

MODES = ("planted-modular", "core-periphery", "dichotomy", "name-corpus")


@dataclass
class SyntheticSpec:
    mode: str = "dichotomy"
    n_topics: int = 100
    min_authors: int = 30
    max_authors: int = 80
    communities: int = 6
    bridge_papers: int = 2
    core_fraction: float = 0.35
    n_identities: int = 1000
    trap_pairs: int = 50
    seed: int = 0

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.min_authors < 6 or self.max_authors < self.min_authors:
            raise ValueError("author range must satisfy 6 <= min_authors <= max_authors")
        if self.communities < 2 or self.communities * 3 > self.min_authors:
            raise ValueError("need at least 3 authors per community and 2 communities")
        if not 0 < self.core_fraction < 1:
            raise ValueError("core_fraction must be in (0, 1)")
        if self.bridge_papers < 0 or self.n_topics < 1 or self.n_identities < 1:
            raise ValueError("counts must be non-negative")


def _author(topic: int, i: int) -> str:
    # unique surnames keep every synthetic author in its own disambiguation block
    return f"Syn T{topic}a{i}"


def _records(topic: int, author_lists, rng, start: date = date(2020, 1, 1)) -> list[PaperRecord]:
    out = []
    for j, authors in enumerate(author_lists):
        d = start + timedelta(days=int(rng.integers(0, 5 * 365)))
        out.append(PaperRecord(f"t{topic}p{j}", f"topic {topic} paper {j}", "", tuple(authors),
                               ("math.CO",), d, topic))
    return out


def planted_modular_topic(topic: int, n_authors: int, communities: int, bridges: int, rng) -> list[PaperRecord]:
    """Disjoint groups of uneven size, each bound by one all-member paper plus
    repeat pair papers; `bridges` two-author papers join random groups."""
    weights = rng.uniform(0.5, 1.5, size=communities)
    sizes = np.maximum(3, np.floor(weights / weights.sum() * n_authors)).astype(int)
    while sizes.sum() > n_authors:
        sizes[np.argmax(sizes)] -= 1
    sizes[np.argmax(sizes)] += n_authors - sizes.sum()
    groups = []
    start = 0
    for s in sizes:
        groups.append(list(range(start, start + s)))
        start += s
    lists = []
    for g in groups:
        lists.append([_author(topic, a) for a in g])
        for _ in range(len(g)):
            a, b = rng.choice(g, size=2, replace=False)
            lists.append([_author(topic, a), _author(topic, b)])
    for _ in range(bridges):
        g1, g2 = rng.choice(len(groups), size=2, replace=False)
        lists.append([_author(topic, rng.choice(groups[g1])), _author(topic, rng.choice(groups[g2]))])
    for _ in range(n_authors // 4):
        lists.append([_author(topic, rng.integers(n_authors))])
    return _records(topic, lists, rng)


def core_periphery_topic(topic: int, n_authors: int, core_fraction: float, rng) -> list[PaperRecord]:
    """One paper binds the whole core; every peripheral author writes a single
    paper with one core member, occasionally joined by a second newcomer."""
    core_n = max(3, int(round(core_fraction * n_authors)))
    core = list(range(core_n))
    lists = [[_author(topic, a) for a in core]]
    periphery = list(range(core_n, n_authors))
    i = 0
    while i < len(periphery):
        hub = int(rng.choice(core))
        if i + 1 < len(periphery) and rng.random() < 0.3:
            lists.append([_author(topic, hub), _author(topic, periphery[i]), _author(topic, periphery[i + 1])])
            i += 2
        else:
            lists.append([_author(topic, hub), _author(topic, periphery[i])])
            i += 1
    for _ in range(max(1, n_authors // 10)):
        lists.append([_author(topic, rng.integers(core_n))])
    return _records(topic, lists, rng)


def dichotomy_corpus(spec: SyntheticSpec) -> tuple[list[PaperRecord], dict]:
    """`n_topics` modular topics and as many core-periphery topics with matched author counts.

    Modular topics carry more papers per author, so they rank as popular.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    records = []
    truth = {}
    sizes = rng.integers(spec.min_authors, spec.max_authors + 1, size=spec.n_topics)
    for i, n in enumerate(sizes):
        t_mod, t_cp = 2 * i, 2 * i + 1
        records += planted_modular_topic(t_mod, int(n), spec.communities, spec.bridge_papers, rng)
        records += core_periphery_topic(t_cp, int(n), spec.core_fraction, rng)
        truth[t_mod] = {"structure": "planted-modular", "n_authors": int(n)}
        truth[t_cp] = {"structure": "core-periphery", "n_authors": int(n)}
    return records, truth


# -- names ----------------------------------------------------------------------

WESTERN_SURNAMES = (
    "smith johnson williams brown jones miller davis wilson anderson taylor thomas moore martin jackson "
    "thompson white harris clark lewis robinson walker young allen king wright scott green baker adams "
    "nelson hill campbell mitchell roberts carter phillips evans turner torres parker collins edwards "
    "stewart morris murphy cook rogers morgan peterson cooper reed bailey bell kelly howard ward cox "
    "richardson wood watson brooks bennett gray james hughes price sanders myers long ross foster "
    "mueller schmidt schneider fischer weber meyer wagner becker schulz hoffmann koch richter klein wolf "
    "dubois moreau laurent simon michel lefebvre leroy roux david bertrand morel fournier girard bonnet "
    "rossi russo ferrari esposito bianchi romano colombo ricci marino greco bruno gallo conti costa "
    "garcia fernandez lopez martinez sanchez perez gomez diaz alvarez romero navarro ruiz ramirez "
    "ivanov petrov sidorov smirnov kuznetsov popov sokolov lebedev kozlov novikov morozov volkov"
).split()
PARTICLE_SURNAMES = ("van der Berg", "van Dijk", "de Vries", "von Neumann", "de la Cruz", "van den Bosch")
CHINESE_SURNAMES = (
    "wang li zhang liu chen yang huang zhao wu zhou xu sun ma zhu hu guo he gao lin luo zheng liang xie "
    "song tang han feng deng cao peng zeng xiao tian dong pan yuan cai jiang yu du ye cheng wei su lu "
    "ding ren shen yao jin qian tan fan"
).split()
WESTERN_GIVEN = (
    "robert william christopher michael james john thomas richard joseph daniel matthew andrew anthony "
    "david steven kenneth edward samuel benjamin nicholas alexander timothy jonathan patrick gregory "
    "peter philip frederick lawrence vincent douglas jeffrey mary patricia jennifer linda elizabeth "
    "barbara susan jessica sarah karen nancy lisa margaret sandra ashley emily donna michelle carol "
    "amanda melissa deborah stephanie rebecca laura sharon cynthia kathleen helen anna olga natalia "
    "sergei dmitri igor yuri pavel hans klaus dieter wolfgang marco giulia luca paolo carlos miguel "
    "pablo javier lucia elena sofia ingrid lars anders henrik"
).split()
ACCENTED_GIVEN = {
    "francois": "François", "jose": "José", "jurgen": "Jürgen", "rene": "René", "andre": "André",
    "zoe": "Zoë", "bjorn": "Björn", "soren": "Søren", "celine": "Céline", "helene": "Hélène",
    "jerome": "Jérôme", "agnes": "Agnès", "ines": "Inés", "joao": "João", "ramon": "Ramón",
}
PINYIN_GIVEN_SYLLABLES = (
    "wei ming xiao hua jun jie hong li ling yan fang ping qiang lei bin hao yu yi jing xin chen "
    "tao feng gang yong zhi hui kai rui shan bo dong lin xiang yun qing hai peng cheng xu jian zhen"
).split()
TRAPS = (
    ("Pengcheng", "Pengxu", "Xie"), ("Wei", "Weimin", "Zhang"), ("Xiaoming", "Xiaoping", "Li"),
    ("Jun", "Jin", "Wang"), ("Hongwei", "Hongyu", "Liu"), ("Daniel", "Danielle", "Brown"),
    ("Christian", "Christina", "Meyer"), ("Johan", "John", "Larsen"), ("Yanling", "Yanming", "Chen"),
    ("Zhiqiang", "Zhiyong", "Zhou"),
)


def _cap(token: str) -> str:
    return "-".join(p[:1].upper() + p[1:] for p in token.split("-"))


@dataclass
class Identity:
    ident: str
    given: str
    middle: str
    surname: str
    kind: str
    variants: list[str] = field(default_factory=list)

    @property
    def full(self) -> str:
        bits = [self.given] + ([self.middle] if self.middle else []) + [self.surname]
        return " ".join(bits)


def _variants_for(idn: Identity, rng, diminutives: dict) -> list[str]:
    g, s = idn.given, idn.surname
    out = [idn.full]
    if idn.kind == "pinyin":
        if "-" not in g and len(g) > 3:
            # split at a syllable boundary: "Xiao-Ming", "XiaoMing"
            for cut in range(2, len(g) - 1):
                head, tail = g[:cut].lower(), g[cut:].lower()
                if head in PINYIN_GIVEN_SYLLABLES and tail in PINYIN_GIVEN_SYLLABLES:
                    out.append(f"{_cap(head)}-{tail.capitalize()} {s}")
                    out.append(f"{_cap(head)}{tail.capitalize()} {s}")
                    break
        out.append(f"{g[0]}. {s}")
        out.append(f"{g} {s.upper()}")
    else:
        low = g.lower()
        mid = f" {idn.middle}" if idn.middle else ""
        if low in ACCENTED_GIVEN:
            out.append(f"{ACCENTED_GIVEN[low]}{mid} {s}")
        if low in diminutives:
            dim = sorted(diminutives[low])
            out.append(f"{dim[int(rng.integers(len(dim)))].capitalize()}{mid} {s}")
        if idn.middle:
            out.append(f"{g} {idn.middle[0]}. {s}")
            out.append(f"{g[0]}. {idn.middle[0]}. {s}")
        out.append(f"{g[0]}. {s}")
    seen, uniq = set(), []
    for v in out:
        if v not in seen:
            seen.add(v)
            uniq.append(v)
    return uniq


def name_corpus(n_identities: int, seed: int = 0, trap_pairs: Optional[int] = None, papers_per_identity: float = 3.0,
                topic_count: int = 20) -> tuple[list[PaperRecord], dict[str, str], list[tuple[str, str]]]:
    """Papers, gold raw -> identity map, and the identity pairs planted as traps.

    Each identity publishes with a stable circle of collaborators, choosing one
    of its spellings per paper. Identities never share a surname together with
    a first name or its diminutive, and an initial-only spelling is produced
    only when it fits a single identity, so every gold merge is recoverable
    from names in principle.
    """
    from .disambig.names import default_variants, is_initial_expansion, normalize_name

    rng = np.random.default_rng(seed)
    variants_map = default_variants()
    diminutives = {k: {v for v in vs if len(v) < len(k)} for k, vs in variants_map.items()}
    diminutives = {k: v for k, v in diminutives.items() if v}
    identities: list[Identity] = []
    taken: set[tuple[str, str]] = set()

    def add(given, middle, surname, kind):
        # distinct identities never share a surname and a first-name family
        g = given.lower()
        keys = {(surname.lower(), f) for f in {g} | set(variants_map.get(g, ()))}
        if keys & taken:
            return None
        taken.update(keys)
        idn = Identity(f"id{len(identities):06d}", given, middle, surname, kind)
        identities.append(idn)
        return idn

    traps: list[tuple[str, str]] = []
    n_traps = len(TRAPS) if trap_pairs is None else trap_pairs
    for i in range(n_traps):
        g1, g2, s = TRAPS[i % len(TRAPS)]
        pinyin = s.lower() in CHINESE_SURNAMES
        if i >= len(TRAPS):
            pool = CHINESE_SURNAMES if pinyin else WESTERN_SURNAMES
            s = pool[(i // len(TRAPS) * 7 + i) % len(pool)].capitalize()
        a = add(g1, "", s, "pinyin" if pinyin else "western")
        b = add(g2, "", s, "pinyin" if pinyin else "western") if a else None
        if a and b:
            traps.append((a.ident, b.ident))

    zipf_w = 1.0 / np.arange(1, len(WESTERN_SURNAMES) + 1) ** 0.8
    zipf_c = 1.0 / np.arange(1, len(CHINESE_SURNAMES) + 1) ** 0.8
    accented = sorted(ACCENTED_GIVEN)
    while len(identities) < n_identities:
        if rng.random() < 0.35:
            s = CHINESE_SURNAMES[rng.choice(len(CHINESE_SURNAMES), p=zipf_c / zipf_c.sum())]
            k = 1 if rng.random() < 0.3 else 2
            g = "".join(rng.choice(PINYIN_GIVEN_SYLLABLES, size=k))
            add(g.capitalize(), "", s.capitalize(), "pinyin")
        else:
            if rng.random() < 0.03:
                s = PARTICLE_SURNAMES[rng.integers(len(PARTICLE_SURNAMES))]
            else:
                s = WESTERN_SURNAMES[rng.choice(len(WESTERN_SURNAMES), p=zipf_w / zipf_w.sum())].capitalize()
            pool = accented if rng.random() < 0.08 else WESTERN_GIVEN
            g = pool[rng.integers(len(pool))]
            middle = WESTERN_GIVEN[rng.integers(len(WESTERN_GIVEN))].capitalize() if rng.random() < 0.25 else ""
            add(g.capitalize(), middle, s, "western")

    by_last: dict[str, list[tuple[str, object]]] = {}
    for idn in identities:
        n = normalize_name(idn.full)
        by_last.setdefault(n.last, []).append((idn.ident, n))
    gold: dict[str, str] = {}
    for idn in identities:
        for v in _variants_for(idn, rng, diminutives):
            n = normalize_name(v)
            if n.is_initialized:
                # an abbreviated spelling is kept only if it fits exactly one identity
                owners = {i for i, full in by_last[n.last] if is_initial_expansion(n, full)}
                if owners != {idn.ident}:
                    continue
            if v not in gold:
                gold[v] = idn.ident
                idn.variants.append(v)

    n = len(identities)
    circles = [rng.choice(n, size=int(rng.integers(3, 7)), replace=False) for _ in range(n)]
    records = []
    counter = 0
    for i, idn in enumerate(identities):
        n_papers = max(len(idn.variants), int(rng.poisson(papers_per_identity)))
        for j in range(n_papers):
            # cycle through spellings so every variant is observed
            own = idn.variants[j % len(idn.variants)]
            k = int(rng.integers(1, 4))
            others = [int(c) for c in rng.choice(circles[i], size=min(k, len(circles[i])), replace=False) if c != i]
            authors = [own]
            for o in others:
                vs = identities[o].variants
                authors.append(vs[int(rng.integers(len(vs)))])
            topic = int(rng.integers(topic_count))
            d = date(2020, 1, 1) + timedelta(days=int(rng.integers(0, 5 * 365)))
            records.append(PaperRecord(f"n{counter:07d}", "", "", tuple(dict.fromkeys(authors)),
                                       ("math.GM",), d, topic))
            counter += 1
    return records, gold, traps


def evaluate_disambiguation(mapping, gold: dict[str, str], traps=()) -> dict:
    """Pairwise precision/recall of a raw -> canonical mapping against the gold identities."""
    from collections import defaultdict

    by_identity = defaultdict(list)
    for raw, ident in gold.items():
        if raw in mapping:
            by_identity[ident].append(raw)
    true_pairs = merged_true = 0
    for raws in by_identity.values():
        for a_i in range(len(raws)):
            for b_i in range(a_i + 1, len(raws)):
                true_pairs += 1
                if mapping[raws[a_i]].canonical_id == mapping[raws[b_i]].canonical_id:
                    merged_true += 1
    by_canon = defaultdict(set)
    for raw, prof in mapping.items():
        if raw in gold:
            by_canon[prof.canonical_id].add(gold[raw])
    false_merges = sum(len(ids) - 1 for ids in by_canon.values() if len(ids) > 1)
    canon_of_ident = defaultdict(set)
    for raw, ident in gold.items():
        if raw in mapping:
            canon_of_ident[ident].add(mapping[raw].canonical_id)
    trap_false = 0
    for a, b in traps:
        if canon_of_ident[a] & canon_of_ident[b]:
            trap_false += 1
    n_raw = len(mapping)
    n_canon = len({p.canonical_id for p in mapping.values()})
    return {
        "true_pairs": true_pairs,
        "merged_true_pairs": merged_true,
        "recall": merged_true / true_pairs if true_pairs else 1.0,
        "false_merged_identities": false_merges,
        "trap_false_merges": trap_false,
        "n_raw": n_raw,
        "n_canonical": n_canon,
        "reduction": (n_raw - n_canon) / n_raw if n_raw else 0.0,
    }


# -- regression simulations ------------------------------------------------------------

def suppression_summaries(n_topics: int = 500, seed: int = 0, size_shift: float = 1.0, size_effect: float = 1.0,
                          direct_effect: Optional[float] = None, noise: float = 0.5,
                          metric: str = "collaboration_rate") -> list[TopicSummary]:
    """Topics where popularity raises size, size raises the metric, and popularity
    lowers it directly. By default the direct effect cancels the indirect one, so
    the marginal popularity difference is zero.

    Half the topics are popular; classes are pre-assigned.
    """
    rng = np.random.default_rng(seed)
    if direct_effect is None:
        direct_effect = -size_effect * size_shift
    pop = np.zeros(n_topics)
    pop[: n_topics // 2] = 1.0
    log_size = 3.0 + size_shift * pop + rng.normal(0, 1.0, n_topics)
    value = size_effect * log_size + direct_effect * pop + rng.normal(0, noise, n_topics)
    out = []
    for i in range(n_topics):
        n_auth = max(1, int(round(math.exp(log_size[i]))))
        cls = "popular" if pop[i] else "niche"
        out.append(TopicSummary(i, 100 if pop[i] else 10, n_auth, {metric: float(value[i])}, cls))
    return out


# -- writers ------------------------------------------------------------------------------

def write_corpus(records, out_dir, truth: Optional[dict] = None) -> dict[str, Path]:
    """metadata.jsonl + topics.csv for the pipeline; ground truth kept apart in truth.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = out / "metadata.jsonl"
    with open(meta, "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            obj = r.to_json()
            obj.pop("topic_id")
            fh.write(json.dumps(obj, sort_keys=True, ensure_ascii=False) + "\n")
    topics = out / "topics.csv"
    with open(topics, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["paper_id", "topic_id", "probability"])
        for r in records:
            if r.topic_id is not None:
                w.writerow([r.paper_id, r.topic_id, "1.0"])
    paths = {"metadata": meta, "topics": topics}
    if truth is not None:
        tp = out / "truth.json"
        with open(tp, "w", encoding="utf-8") as fh:
            json.dump(truth, fh, sort_keys=True, indent=1)
        paths["truth"] = tp
    return paths


def generate_synthetic(spec: SyntheticSpec, out_dir) -> dict[str, Path]:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    if spec.mode == "dichotomy":
        records, truth = dichotomy_corpus(spec)
    elif spec.mode in ("planted-modular", "core-periphery"):
        records, truth = [], {}
        sizes = rng.integers(spec.min_authors, spec.max_authors + 1, size=spec.n_topics)
        for t, n in enumerate(sizes):
            if spec.mode == "planted-modular":
                records += planted_modular_topic(t, int(n), spec.communities, spec.bridge_papers, rng)
            else:
                records += core_periphery_topic(t, int(n), spec.core_fraction, rng)
            truth[t] = {"structure": spec.mode, "n_authors": int(n)}
    else:
        records, gold, traps = name_corpus(spec.n_identities, spec.seed, spec.trap_pairs)
        truth = {"gold": gold, "traps": traps}
    return write_corpus(records, out_dir, truth)
