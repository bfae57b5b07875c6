"""Pipeline configuration stored as a sectioned INI file."""
from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, fields, replace
from datetime import date
from typing import Optional

from .disambig.stages import DisambigConfig


class ConfigError(ValueError):
    """Raised for out-of-range or malformed settings."""


# section -> ordered field names; defines the canonical layout
SECTIONS = {
    "paths": ("metadata", "topics", "output"),
    "ingest": ("date_from", "date_to"),
    "disambiguation": ("sim", "pinyin_sim", "western_sim", "jaccard", "coauthor_weight", "max_cluster", "min_papers",
                       "variants_file", "pinyin_file"),
    "metrics": ("robust_trials", "sample_threshold"),
    "analysis": ("cutoff", "alpha", "bootstrap", "cutoffs"),
    "run": ("seed", "threads"),
}


@dataclass(frozen=True)
class PipelineConfig:
    metadata: str = ""
    topics: str = ""
    output: str = "out"
    date_from: Optional[date] = None
    date_to: Optional[date] = None
    sim: float = 0.95
    pinyin_sim: float = 0.92
    western_sim: float = 0.87
    jaccard: float = 0.5
    coauthor_weight: float = 0.6
    max_cluster: int = 50
    min_papers: int = 2
    variants_file: str = ""
    pinyin_file: str = ""
    robust_trials: int = 25
    sample_threshold: int = 200
    cutoff: float = 0.20
    alpha: float = 0.005
    bootstrap: int = 10000
    cutoffs: tuple = (0.15, 0.20, 0.25, 0.30)
    seed: int = 0
    threads: int = 1

    def disambig(self) -> DisambigConfig:
        return DisambigConfig(self.sim, self.pinyin_sim, self.western_sim, self.jaccard,
                              self.coauthor_weight, self.max_cluster, self.min_papers)

    def validate(self) -> "PipelineConfig":
        try:
            self.disambig().validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not 0 < self.cutoff <= 0.5:
            raise ConfigError(f"cutoff must be in (0, 0.5], got {self.cutoff}")
        for c in self.cutoffs:
            if not 0 < c <= 0.5:
                raise ConfigError(f"cutoffs entries must be in (0, 0.5], got {c}")
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.bootstrap < 0:
            raise ConfigError("bootstrap must be >= 0")
        if self.robust_trials < 1 or self.sample_threshold < 1:
            raise ConfigError("robust_trials and sample_threshold must be positive")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.date_from and self.date_to and self.date_from > self.date_to:
            raise ConfigError(f"date_from {self.date_from} is after date_to {self.date_to}")
        return self

    def with_overrides(self, **kw) -> "PipelineConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    # -- serialization ---------------------------------------------------------

    def to_ini(self, include_paths: bool = True) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        for section, names in SECTIONS.items():
            if section == "paths" and not include_paths:
                continue
            cp[section] = {n: _format(getattr(self, n)) for n in names}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    def digest(self) -> str:
        """Hash of every setting except file locations."""
        return hashlib.sha256(self.to_ini(include_paths=False).encode()).hexdigest()

    @classmethod
    def from_ini(cls, text: str) -> "PipelineConfig":
        cp = configparser.ConfigParser(interpolation=None)
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"unreadable config: {exc}") from exc
        types = {f.name: f.type for f in fields(cls)}
        kw = {}
        for section in cp.sections():
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}]")
            for key, raw in cp[section].items():
                if key not in SECTIONS[section]:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                try:
                    kw[key] = _parse(types[key], raw)
                except ValueError as exc:
                    raise ConfigError(f"[{section}] {key}: {exc}") from exc
        return cls(**kw).validate()

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_ini(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_ini())


def _format(v) -> str:
    if v is None:
        return ""
    if isinstance(v, tuple):
        return ",".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(kind: str, raw: str):
    raw = raw.strip()
    if kind == "float":
        return float(raw)
    if kind == "int":
        return int(raw)
    if kind == "tuple":
        return tuple(float(x) for x in raw.split(",") if x.strip())
    if kind == "Optional[date]":
        return date.fromisoformat(raw) if raw else None
    return raw


def parse_cutoffs(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"bad cutoff list {text!r}") from exc
