"""Name normalization and the pairwise name predicates used for merging."""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Mapping, Optional

from rapidfuzz.distance import Levenshtein

PARTICLES = frozenset(
    "van der den de del della dela di da du dos das von vom zu la le ter ten st bin ibn".split()
)
SUFFIXES = frozenset("jr sr ii iii iv".split())

_KEEP = re.compile(r"[^a-z0-9\s'\-]")
_EDGE_PUNCT = re.compile(r"(?<![a-z0-9])['\-]+|['\-]+(?![a-z0-9])")


class UnparseableName(ValueError):
    pass


@dataclass(frozen=True)
class NormalizedName:
    raw: str
    normalized: str
    last: str
    first: str
    middle: tuple[str, ...]

    @property
    def is_initialized(self) -> bool:
        return len(self.first) == 1

    @property
    def given(self) -> tuple[str, ...]:
        return ((self.first,) if self.first else ()) + self.middle

    @property
    def n_initials(self) -> int:
        return sum(len(t) == 1 for t in self.given)


# letters that carry no combining mark under NFD
_FOLD = str.maketrans({"ø": "o", "Ø": "O", "ł": "l", "Ł": "L", "đ": "d", "Đ": "D",
                       "ß": "ss", "æ": "ae", "Æ": "AE", "œ": "oe", "Œ": "OE", "ı": "i"})


def strip_diacritics(text: str) -> str:
    return unicodedata.normalize("NFD", text.translate(_FOLD)).encode("ascii", "ignore").decode("ascii")


def normalize_name(raw: str) -> NormalizedName:
    """Lowercase, strip diacritics and punctuation, fuse particles, split tokens.

    A single comma is read as "Last, First". Periods separate initials, so
    "J.R. Doe" yields first "j" and middle ("r",).
    """
    if raw is None or not raw.strip():
        raise UnparseableName(f"empty name {raw!r}")
    text = strip_diacritics(raw).lower()
    if text.count(",") == 1:
        last, first = text.split(",")
        text = f"{first} {last}"
    text = text.replace(".", " ").replace(",", " ")
    text = _KEEP.sub("", text)
    text = _EDGE_PUNCT.sub(" ", text)
    tokens = text.split()
    while len(tokens) > 2 and tokens[-1] in SUFFIXES:
        tokens.pop()
    fused: list[str] = []
    carry = ""
    for i, tok in enumerate(tokens):
        if i > 0 and i < len(tokens) - 1 and tok in PARTICLES:
            carry += tok
            continue
        fused.append(carry + tok)
        carry = ""
    if not fused:
        raise UnparseableName(f"nothing left of {raw!r} after normalization")
    last = fused[-1]
    first = fused[0] if len(fused) > 1 else ""
    return NormalizedName(raw, " ".join(fused), last, first, tuple(fused[1:-1]))


def string_similarity(a: str, b: str) -> float:
    """1 - levenshtein(a, b) / max(len(a), len(b))."""
    if not a or not b:
        raise ValueError("similarity needs non-empty strings")
    return Levenshtein.normalized_similarity(a, b)


def _key(token: str) -> str:
    return token.replace("-", "").replace("'", "")


def parse_variant_pairs(text: str) -> dict[str, frozenset[str]]:
    """`canonical,variant` lines; blank lines and `#` comments ignored."""
    pairs = []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        bits = [b.strip().lower() for b in line.split(",")]
        if len(bits) != 2 or not all(bits):
            raise ValueError(f"variant file line {n}: expected 'name,variant', got {line!r}")
        pairs.append(tuple(bits))
    return build_variant_map(pairs)


def build_variant_map(pairs) -> dict[str, frozenset[str]]:
    out: dict[str, set[str]] = {}
    for a, b in pairs:
        out.setdefault(a, set()).add(b)
        out.setdefault(b, set()).add(a)
    return {k: frozenset(v) for k, v in out.items()}


@lru_cache(maxsize=1)
def default_variants() -> dict[str, frozenset[str]]:
    return parse_variant_pairs(resources.files("coauthnet.disambig").joinpath("data/diminutives.txt").read_text())


@lru_cache(maxsize=1)
def default_pinyin() -> frozenset[str]:
    return parse_syllables(resources.files("coauthnet.disambig").joinpath("data/pinyin.txt").read_text())


def parse_syllables(text: str) -> frozenset[str]:
    out = set()
    for line in text.splitlines():
        out.update(line.split("#", 1)[0].lower().split())
    return frozenset(out)


def load_variants(path=None) -> dict[str, frozenset[str]]:
    if not path:
        return default_variants()
    with open(path, encoding="utf-8") as fh:
        return parse_variant_pairs(fh.read())


def load_pinyin(path=None) -> frozenset[str]:
    if not path:
        return default_pinyin()
    with open(path, encoding="utf-8") as fh:
        return parse_syllables(fh.read())


def is_pinyin_like(token: str, syllables: frozenset[str]) -> bool:
    """True when the token splits entirely into syllables from the list."""
    word = _key(token)
    if not word:
        return False
    return _segments(word, syllables)


@lru_cache(maxsize=65536)
def _segments(word: str, syllables: frozenset[str]) -> bool:
    n = len(word)
    ok = [False] * (n + 1)
    ok[0] = True
    for i in range(1, n + 1):
        for j in range(max(0, i - 6), i):
            if ok[j] and word[j:i] in syllables:
                ok[i] = True
                break
    return ok[n]


def tokens_compatible(a: str, b: str, variants: Optional[Mapping[str, frozenset[str]]] = None) -> bool:
    """Equal up to internal punctuation, an initial of the other, or a listed diminutive."""
    ka, kb = _key(a), _key(b)
    if ka == kb:
        return True
    if len(ka) == 1 and kb.startswith(ka) or len(kb) == 1 and ka.startswith(kb):
        return True
    if variants is not None and kb in variants.get(ka, ()):
        return True
    return False


def is_initial_expansion(a: NormalizedName, b: NormalizedName, variants=None) -> bool:
    """One name is an abbreviated form of the other (same last name assumed).

    Given-name tokens are aligned by position. Extra trailing tokens are allowed
    only on the fuller name: the name carrying more tokens must not use an
    initial where the other spells the token out.
    """
    ga, gb = a.given, b.given
    if not ga or not gb:
        return ga == gb
    if variants is None:
        variants = default_variants()
    short, long_ = (ga, gb) if len(ga) <= len(gb) else (gb, ga)
    for s, t in zip(short, long_):
        if not tokens_compatible(s, t, variants):
            return False
    if len(long_) > len(short):
        for s, t in zip(short, long_):
            if len(_key(t)) == 1 and len(_key(s)) > 1:
                return False
    return True


def first_names_compatible(
    a: str,
    b: str,
    variants: Optional[Mapping[str, frozenset[str]]] = None,
    pinyin: Optional[frozenset[str]] = None,
    pinyin_sim: float = 0.92,
    western_sim: float = 0.87,
) -> bool:
    """Compatibility of two full first names.

    Listed diminutives are compatible outright; otherwise the similarity must
    exceed the stricter threshold if either name reads as pinyin.
    """
    if variants is None:
        variants = default_variants()
    if pinyin is None:
        pinyin = default_pinyin()
    ka, kb = _key(a), _key(b)
    if ka == kb:
        return True
    if kb in variants.get(ka, ()):
        return True
    threshold = pinyin_sim if (is_pinyin_like(ka, pinyin) or is_pinyin_like(kb, pinyin)) else western_sim
    return string_similarity(ka, kb) > threshold


def completeness_key(name: NormalizedName):
    """Sort key: more components, then fewer initials, then longer, then lexicographic."""
    n_tokens = len(name.given) + 1
    return (-n_tokens, name.n_initials, -len(name.normalized), name.normalized)
