"""End-to-end orchestration with a digest manifest for resumable, reproducible runs."""
from __future__ import annotations

import hashlib
import json
import logging
import math
import time
import shutil
from dataclasses import asdict
from datetime import date
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__
from .config import PipelineConfig
from .disambig import disambiguate, load_pinyin, load_variants, read_mapping, write_audit, write_mapping
from .ingest import IngestError, filter_by_date, load_corpus, read_records, write_records
from .metrics import compute_all, read_metrics, write_metrics
from .netbuild import build_all, read_networks, write_networks
from .report import render_report
from .stats import analyze

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"
TIMINGS = "timings.json"


class DataError(Exception):
    """Bad or unusable input data."""


class StageError(Exception):
    def __init__(self, stage: str, message: str, context: Optional[str] = None, data: bool = False):
        self.stage = stage
        self.context = context
        self.data = data
        text = f"stage {stage!r} failed: {message}"
        if context:
            text += f" [{context}]"
        super().__init__(text)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def digest_outputs(out: Path, rel_paths) -> dict[str, str]:
    """Digests for files, expanding directories into their sorted contents."""
    result = {}
    for rel in rel_paths:
        p = out / rel
        if p.is_dir():
            for f in sorted(p.rglob("*")):
                if f.is_file():
                    result[f.relative_to(out).as_posix()] = sha256_file(f)
        elif p.exists():
            result[rel] = sha256_file(p)
    return result


def jsonable(obj):
    """Plain JSON types; NaN and infinities become null."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, date):
        return obj.isoformat()
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(jsonable(obj), fh, sort_keys=True, indent=1, ensure_ascii=False)
        fh.write("\n")


def _load_manifest(out: Path) -> dict:
    try:
        with open(out / MANIFEST, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, ValueError):
        return {}


class _Runner:
    def __init__(self, config: PipelineConfig, resume: bool):
        self.config = config
        self.out = Path(config.output)
        self.out.mkdir(parents=True, exist_ok=True)
        old = _load_manifest(self.out) if resume else {}
        self.previous = {s["name"]: s for s in old.get("stages", [])}
        self.stages: list[dict] = []
        self.timings: dict[str, float] = {}
        self.upstream = ""

    def stage(self, name: str, params: dict, outputs: list[str], fn: Callable[[], None]) -> bool:
        """Run `fn` unless a previous run with the same key left intact outputs."""
        key = hashlib.sha256(
            json.dumps({"params": jsonable(params), "upstream": self.upstream}, sort_keys=True).encode()
        ).hexdigest()
        prev = self.previous.get(name)
        reused = False
        if prev and prev.get("key") == key and prev.get("outputs") == digest_outputs(self.out, outputs):
            logger.info("%s: outputs up to date, skipping", name)
            reused = True
        else:
            start = time.perf_counter()
            try:
                fn()
            except StageError:
                raise
            except (IngestError, DataError, FileNotFoundError) as exc:
                raise StageError(name, str(exc), data=True) from exc
            except ValueError as exc:
                raise StageError(name, str(exc), data=True) from exc
            except Exception as exc:
                raise StageError(name, f"{type(exc).__name__}: {exc}") from exc
            self.timings[name] = round(time.perf_counter() - start, 6)
        digests = digest_outputs(self.out, outputs)
        self.stages.append({"name": name, "key": key, "outputs": digests})
        self.upstream = hashlib.sha256(json.dumps(digests, sort_keys=True).encode()).hexdigest()
        return reused

    def finish(self, inputs: dict) -> None:
        manifest = {
            "version": __version__,
            "seed": self.config.seed,
            "config_digest": self.config.digest(),
            "inputs": inputs,
            "stages": self.stages,
        }
        write_json(manifest, self.out / MANIFEST)
        write_json(self.timings, self.out / TIMINGS)


def run_pipeline(config: PipelineConfig, resume: bool = True) -> dict:
    """Run every stage, writing intermediates under `config.output`; returns the report."""
    config.validate()
    for role in ("metadata", "topics"):
        path = getattr(config, role)
        if not path:
            raise DataError(f"no {role} path configured")
        if not Path(path).is_file():
            raise DataError(f"{role} file not found: {path}")
    inputs = {"metadata": sha256_file(config.metadata), "topics": sha256_file(config.topics)}
    run = _Runner(config, resume)
    out = run.out
    run.upstream = hashlib.sha256(json.dumps(inputs, sort_keys=True).encode()).hexdigest()

    def do_ingest():
        parsed = load_corpus(config.metadata, config.topics)
        for lineno, reason in parsed.skipped:
            logger.warning("metadata line %d skipped: %s", lineno, reason)
        for w in parsed.warnings:
            logger.warning("%s", w)
        records = parsed.records
        if config.date_from or config.date_to:
            lo = config.date_from or min(r.date for r in records)
            hi = config.date_to or max(r.date for r in records)
            records = filter_by_date(records, lo, hi)
        records = [r for r in records if r.topic_id is not None]
        if not records:
            raise DataError("no topic-assigned records after parsing and filtering")
        write_records(records, out / "records.jsonl")

    run.stage("ingest", {"date_from": config.date_from, "date_to": config.date_to},
              ["records.jsonl"], do_ingest)

    def do_disambig():
        records = read_records(out / "records.jsonl")
        res = disambiguate(records, config.disambig(), load_variants(config.variants_file),
                           load_pinyin(config.pinyin_file))
        write_mapping(res.mapping, out / "author_map.csv")
        write_audit(res.audit, out / "merge_audit.jsonl")

    dparams = asdict(config.disambig())
    for key in ("variants_file", "pinyin_file"):
        path = getattr(config, key)
        dparams[key] = sha256_file(path) if path else "builtin"
    run.stage("disambiguate", dparams,
              ["author_map.csv", "merge_audit.jsonl"], do_disambig)

    def do_build():
        nets = build_all(read_records(out / "records.jsonl"), read_mapping(out / "author_map.csv"))
        shutil.rmtree(out / "networks", ignore_errors=True)
        write_networks(nets, out / "networks")

    run.stage("build-networks", {}, ["networks"], do_build)

    def do_metrics():
        nets = read_networks(out / "networks")
        vecs = []
        for t in sorted(nets):
            try:
                vecs.append(compute_all(nets[t], config.seed, config.robust_trials, config.sample_threshold))
            except Exception as exc:
                raise StageError("metrics", f"{type(exc).__name__}: {exc}", context=f"topic_id={t}") from exc
        write_metrics(vecs, out / "metrics.csv")

    run.stage("metrics", {"seed": config.seed, "robust_trials": config.robust_trials,
                          "sample_threshold": config.sample_threshold}, ["metrics.csv"], do_metrics)

    def do_analyze():
        vecs = read_metrics(out / "metrics.csv")
        report = analyze(vecs, config.cutoff, config.alpha, config.bootstrap, config.seed, config.cutoffs)
        write_json(report, out / "report.json")
        with open(out / "report.txt", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render_report(jsonable(report)))

    run.stage("analyze", {"cutoff": config.cutoff, "alpha": config.alpha, "bootstrap": config.bootstrap,
                          "seed": config.seed, "cutoffs": config.cutoffs},
              ["report.json", "report.txt"], do_analyze)
    run.finish(inputs)
    with open(out / "report.json", encoding="utf-8") as fh:
        return json.load(fh)
