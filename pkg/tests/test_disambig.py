import re
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from coauthnet.disambig import (
    DisambigConfig, UnparseableName, build_similarity_graph, cooccurrence_merge, cooccurrence_score,
    disambiguate, first_names_compatible, is_initial_expansion, jaccard, merge_clusters, normalize_name,
    read_mapping, resolve_canonical, string_similarity, write_mapping, load_variants, load_pinyin,
)
from coauthnet.disambig.names import default_pinyin, default_variants, is_pinyin_like, completeness_key
from coauthnet.disambig.stages import HIGH_SIMILARITY, INITIAL_EXPANSION
from coauthnet.synth import evaluate_disambiguation, name_corpus

from conftest import rec

N = normalize_name
V = default_variants()
P = default_pinyin()


def levenshtein(a, b):
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


# -- normalization ---------------------------------------------------------------

def test_normalize_examples():
    assert N("François Dupont").normalized == "francois dupont"
    assert N("john doe").normalized == "john doe"
    n = N("Robert van der Berg")
    assert (n.last, n.first) == ("vanderberg", "robert")


def test_normalize_punctuation_and_comma_form():
    assert N("J.-P. O'Neil").last == "o'neil"
    n = N("Doe, John B.")
    assert (n.last, n.first, n.middle) == ("doe", "john", ("b",))
    assert N("John Smith Jr.").normalized == "john smith"


@pytest.mark.parametrize("raw", ["", "   ", "...", "\u2014", "-- .,"])
def test_unparseable(raw):
    with pytest.raises(UnparseableName):
        N(raw)


@given(st.text(min_size=1, max_size=30))
def test_normalized_alphabet(raw):
    try:
        n = N(raw)
    except UnparseableName:
        return
    assert re.fullmatch(r"[a-z0-9 '\-]+", n.normalized)
    assert n.last
    for tok in n.normalized.split():
        assert tok[0] not in "-'" and tok[-1] not in "-'"
    assert N(n.normalized).normalized == n.normalized


def test_is_initialized_flag():
    assert N("J. Doe").is_initialized and not N("John Doe").is_initialized


# -- Stage 1 ------------------------------------------------------------------------

@pytest.mark.parametrize("a,b,expected", [
    ("j doe", "john doe", True),
    ("john doe", "john doe", True),
    ("j r doe", "jane doe", False),
    ("j r doe", "john robert doe", True),
    ("john r doe", "jane robert doe", False),
])
def test_initial_expansion(a, b, expected):
    assert is_initial_expansion(N(a), N(b)) is expected
    assert is_initial_expansion(N(b), N(a)) is expected


@pytest.mark.parametrize("a,b,s", [("abc", "abc", 1.0), ("abc", "abd", 2 / 3), ("a", "b", 0.0)])
def test_string_similarity_examples(a, b, s):
    assert string_similarity(a, b) == pytest.approx(s, abs=1e-12)


@given(st.text("abcde xyz", min_size=1, max_size=12), st.text("abcde xyz", min_size=1, max_size=12))
def test_string_similarity_matches_oracle(a, b):
    expected = 1 - levenshtein(a, b) / max(len(a), len(b))
    assert string_similarity(a, b) == pytest.approx(expected, abs=1e-12)
    assert string_similarity(a, b) == string_similarity(b, a)
    assert (string_similarity(a, b) == 1.0) == (a == b)


def test_graph_examples():
    g = build_similarity_graph([N("j doe"), N("john doe"), N("jane smith")])
    assert g.edges == {("j doe", "john doe"): INITIAL_EXPANSION}
    assert build_similarity_graph([N("solo name")]).edges == {}
    assert build_similarity_graph([]).edges == {}


def test_pengcheng_pengxu_not_linked():
    assert string_similarity("pengcheng xie", "pengxu xie") == pytest.approx(1 - 5 / 13)
    g = build_similarity_graph([N("Pengcheng Xie"), N("Pengxu Xie")])
    assert g.edges == {}


def test_high_similarity_edge():
    g = build_similarity_graph([N("Alexandria Konstantinou"), N("Alexandrea Konstantinou")])
    assert list(g.edges.values()) == [HIGH_SIMILARITY]


names_st = st.lists(
    st.tuples(st.sampled_from(["j", "john", "jon", "jane", "jo", "m", "mary", "maria", "wei", "weimin", "r", "rob", "robert"]),
              st.sampled_from(["", "b", "paul"]),
              st.sampled_from(["doe", "smith", "zhang", "van der berg"])),
    min_size=1, max_size=12,
)


@settings(max_examples=60, deadline=None)
@given(names_st)
def test_graph_blocking_and_reason_tags(parts):
    names = {}
    for f, m, l in parts:
        n = N(" ".join(x for x in (f, m, l) if x))
        names[n.normalized] = n
    g = build_similarity_graph(names.values())
    for (a, b), why in g.edges.items():
        assert names[a].last == names[b].last
        if why == HIGH_SIMILARITY:
            assert string_similarity(a, b) > 0.95
    for a, b in combinations(sorted(names), 2):
        na, nb = names[a], names[b]
        if na.last == nb.last and (is_initial_expansion(na, nb) or string_similarity(a, b) > 0.95):
            assert (a, b) in g.edges


# -- Stage 2 ------------------------------------------------------------------------

def test_first_name_examples():
    assert first_names_compatible("rob", "robert", V, P)
    assert first_names_compatible("bill", "william", V, P)
    assert first_names_compatible("x", "x", V, P)
    assert not first_names_compatible("wei", "weimin", V, P)
    assert is_pinyin_like("weimin", P) and is_pinyin_like("pengcheng", P)
    assert not is_pinyin_like("robert", P)


def test_western_threshold_lower_than_pinyin():
    # similarity 0.875 sits between the two thresholds
    assert string_similarity("johannes", "johannas") == pytest.approx(0.875)
    assert first_names_compatible("johannes", "johannas", V, P)
    assert not first_names_compatible("johannes", "johannas", V, P, western_sim=0.9)


def _clusters(raws):
    names = [N(r) for r in raws]
    g = build_similarity_graph(names)
    audit = []
    return sorted(sorted(c) for c in merge_clusters(g, audit=audit)), audit


def test_merge_examples():
    assert _clusters(["j doe", "john doe"])[0] == [["j doe", "john doe"]]
    assert _clusters(["solo person"])[0] == [["solo person"]]
    clusters, audit = _clusters(["john doe", "jane doe", "j doe"])
    assert clusters == [["j doe"], ["jane doe"], ["john doe"]]
    assert any(a["decision"] == "ambiguous-unmerged" and a["members"] == ["j doe"] for a in audit)


def test_oversized_component_is_partitioned():
    # "j doe" is an initialism of every fuller name, so all 61 share one component
    firsts = ["john", "jane", "jack", "james", "julia", "jonas"]
    raws = [f"{f} {chr(97 + k)} doe" for f in firsts for k in range(10)] + ["j doe"]
    clusters, audit = _clusters(raws)
    assert max(len(c) for c in clusters) <= 50
    assert any(a["decision"] == "oversized-partitioned" for a in audit)


# -- Stage 3 ------------------------------------------------------------------------

def test_score_examples():
    s = {"a", "b"}
    assert cooccurrence_score(s, s, {"p"}, {"p"}) == 1.0
    assert cooccurrence_score({"a"}, {"b"}, {"p"}, {"q"}) == 0.0
    # J(C) = 0.5, J(P) = 0.25
    s = cooccurrence_score({"a", "b"}, {"a", "b", "c", "d"}, {"p"}, {"p", "q", "r", "s"})
    assert s == pytest.approx(0.4)
    assert jaccard(set(), set()) == 0.0


def _stage3(coauth_a, coauth_b, papers_a, papers_b, **cfg):
    profiles = {"a": N("Jian Li"), "b": N("Jun Li")}
    return cooccurrence_merge(profiles, {"a": coauth_a, "b": coauth_b}, {"a": papers_a, "b": papers_b},
                              DisambigConfig(**cfg))


def test_stage3_merge_and_thresholds():
    same = {"x", "y"}
    assert [(a, b) for a, b, _ in _stage3(same, same, {"1", "2"}, {"1", "2"})] == [("a", "b")]
    assert _stage3(same, same, {"1"}, {"1"}) == []  # each needs two papers
    assert _stage3({"x"}, {"y"}, {"1", "2"}, {"3", "4"}) == []


def test_stage3_requires_same_initial():
    profiles = {"a": N("Jian Li"), "b": N("Kun Li")}
    same = {"x"}
    assert cooccurrence_merge(profiles, {"a": same, "b": same}, {"a": {"1", "2"}, "b": {"1", "2"}}) == []


# -- resolution -------------------------------------------------------------------

def _resolve(clusters, merges, raws):
    names = {N(r).normalized: N(r) for r in raws}
    return resolve_canonical(clusters, merges, names, {k: [k] for k in names})


def test_resolve_chain_and_representative():
    m = _resolve([["j doe"], ["john doe"], ["john b doe"]], [("j doe", "john doe"), ("john doe", "john b doe")],
                 ["j doe", "john doe", "john b doe"])
    assert {p.canonical_id for p in m.values()} == {"john b doe"}
    assert m["j doe"].representative == "john b doe"


def test_resolve_identity_without_merges():
    raws = ["a smith", "b jones"]
    m = _resolve([[r] for r in raws], [], raws)
    assert {r: p.canonical_id for r, p in m.items()} == {r: r for r in raws}


def test_completeness_prefers_components_then_fewer_initials():
    order = sorted([N("j doe"), N("john b doe"), N("john doe"), N("j b doe")], key=completeness_key)
    assert [n.normalized for n in order] == ["john b doe", "j b doe", "john doe", "j doe"]


# -- end to end ------------------------------------------------------------------

def _corpus():
    recs, gold, traps = name_corpus(300, seed=5, trap_pairs=10)
    return recs, gold, traps


def test_end_to_end_no_false_merges():
    recs, gold, traps = _corpus()
    res = disambiguate(recs)
    ev = evaluate_disambiguation(res.mapping, gold, traps)
    assert ev["false_merged_identities"] == 0 and ev["trap_false_merges"] == 0
    assert ev["n_canonical"] < ev["n_raw"]
    for raw, prof in res.mapping.items():
        assert all(N(v).last == N(raw).last for v in prof.variants)
    # variant sets are disjoint across profiles
    owners = {}
    for prof in res.profiles:
        for v in prof.variants:
            assert owners.setdefault(v, prof.canonical_id) == prof.canonical_id


def test_idempotent_and_deterministic(tmp_path):
    recs, _, _ = _corpus()
    r1, r2 = disambiguate(recs), disambiguate(list(recs))
    write_mapping(r1.mapping, tmp_path / "a.csv")
    write_mapping(r2.mapping, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    back = read_mapping(tmp_path / "a.csv")
    assert {k: v.canonical_id for k, v in back.items()} == {k: v.canonical_id for k, v in r1.mapping.items()}
    # mapping a profile's own representative lands back on that profile
    for prof in r1.profiles:
        assert r1.mapping[prof.representative] == prof


@pytest.mark.parametrize("field,values", [
    ("sim", [0.9, 0.95, 0.99]),
    ("western_sim", [0.8, 0.87, 0.95]),
    ("pinyin_sim", [0.85, 0.92, 0.99]),
    ("jaccard", [0.3, 0.5, 0.8]),
])
def test_raising_thresholds_never_adds_merges_on_gold_corpus(field, values):
    recs, _, _ = _corpus()
    merges = []
    for v in values:
        res = disambiguate(recs, DisambigConfig(**{field: v}))
        merges.append(len(res.mapping) - len(res.profiles))
    assert merges == sorted(merges, reverse=True)


def test_diacritic_only_corpus_recovers_gold():
    people = [("Søren", "Kierkegaard"), ("José", "Muñoz"), ("Zoë", "Brontë"), ("Åsa", "Öberg"), ("Łukasz", "Wróbel")]
    recs, gold = [], {}
    for i, (f, l) in enumerate(people):
        accented = f"{f} {l}"
        plain = N(accented).normalized.title()
        gold[accented] = gold[plain] = i
        recs += [rec(f"a{i}", [accented]), rec(f"b{i}", [plain])]
    res = disambiguate(recs)
    ev = evaluate_disambiguation(res.mapping, gold)
    assert ev["recall"] == 1.0 and ev["false_merged_identities"] == 0


def test_unparseable_names_reported():
    res = disambiguate([rec("p", ["Alice Smith", "..."])])
    assert res.unparseable == ["..."] and "..." not in res.mapping


def test_custom_variant_and_pinyin_files(tmp_path):
    vf = tmp_path / "v.txt"
    vf.write_text("# custom\nzebulon,zeb\n")
    pf = tmp_path / "p.txt"
    pf.write_text("wei min\n")
    v, p = load_variants(vf), load_pinyin(pf)
    assert v == {"zebulon": frozenset({"zeb"}), "zeb": frozenset({"zebulon"})}
    assert p == frozenset({"wei", "min"})
    res = disambiguate([rec("1", ["Zeb Quill"]), rec("2", ["Zebulon Quill"])], variants=v, pinyin=p)
    assert res.mapping["Zeb Quill"].canonical_id == res.mapping["Zebulon Quill"].canonical_id
    res = disambiguate([rec("1", ["Zeb Quill"]), rec("2", ["Zebulon Quill"])], variants={}, pinyin=p)
    assert res.mapping["Zeb Quill"].canonical_id != res.mapping["Zebulon Quill"].canonical_id
