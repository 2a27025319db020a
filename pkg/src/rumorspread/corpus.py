"""Loading, validating and labeling the rumor corpus.

A corpus is described by a JSON manifest::

    {"schema_version": 1,
     "rumor_file": "rumors.jsonl",
     "series_directory": "series",
     "sentiment_file": "sentiment.csv",
     "allowlist_file": null}

Relative paths resolve against the manifest's directory.  The series
directory holds one ``date,frequency`` CSV per entity, named by the
percent-encoded entity name.
"""
from __future__ import annotations

import csv
import datetime as dt
import json
import logging
import warnings
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from os import PathLike
from pathlib import Path
from typing import Iterable, Mapping, Sequence
from urllib.parse import quote, unquote

import jsonschema

from . import schemas
from ._io import atomic_path
from .errors import (DuplicateId, FitError, MissingSeries, NoDecayWarning,
                     ParseError, WindowOutOfRange)
from .features import RumorRecord, SentimentSeries, read_sentiment_csv
from .influence import FitResult, SearchSeries, extract_window, fit_exponential, read_series_csv

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def series_filename(entity: str) -> str:
    return quote(entity, safe="") + ".csv"


def entity_from_filename(name: str) -> str:
    return unquote(name[:-4] if name.endswith(".csv") else name)


@dataclass(frozen=True)
class CorpusManifest:
    rumor_file: Path
    series_directory: Path
    sentiment_file: Path
    schema_version: int = SCHEMA_VERSION
    allowlist_file: Path | None = None

    @classmethod
    def load(cls, path: str | PathLike[str]) -> CorpusManifest:
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, path=str(path), line=exc.lineno) from None
        schemas.validate(raw, schemas.MANIFEST, f"manifest {path}")
        base = path.parent

        def resolve(p: str | None) -> Path | None:
            return None if p is None else (base / p)

        return cls(resolve(raw["rumor_file"]), resolve(raw["series_directory"]),
                   resolve(raw["sentiment_file"]), raw["schema_version"],
                   resolve(raw.get("allowlist_file")))

    def to_dict(self, relative_to: Path | None = None) -> dict:
        def rel(p: Path | None) -> str | None:
            if p is None:
                return None
            if relative_to is not None:
                try:
                    return str(Path(p).relative_to(relative_to))
                except ValueError:
                    pass
            return str(p)

        return {"schema_version": self.schema_version,
                "rumor_file": rel(self.rumor_file),
                "series_directory": rel(self.series_directory),
                "sentiment_file": rel(self.sentiment_file),
                "allowlist_file": rel(self.allowlist_file)}


def canonical_line(record: RumorRecord) -> str:
    return json.dumps(record.to_dict(), sort_keys=True, ensure_ascii=False,
                      separators=(",", ":"))


def read_records(path: str | PathLike[str]) -> list[RumorRecord]:
    """Parse a JSON-lines rumor file, rejecting malformed rows and duplicate ids."""
    records: list[RumorRecord] = []
    seen: dict[str, int] = {}
    validator = jsonschema.Draft202012Validator(schemas.RUMOR_RECORD)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", path=str(path), line=lineno) from None
            err = next(iter(sorted(validator.iter_errors(raw), key=lambda e: list(e.path))), None)
            if err is not None:
                fld = ".".join(str(p) for p in err.absolute_path) or None
                if fld is None and err.validator == "required":
                    fld = err.message.split("'")[1]
                raise ParseError(err.message, path=str(path), line=lineno, field=fld)
            try:
                dt.date.fromisoformat(raw["outbreak_date"])
            except ValueError as exc:
                raise ParseError(f"bad date: {exc}", path=str(path), line=lineno,
                                 field="outbreak_date") from None
            try:
                rec = RumorRecord.from_dict(raw)
            except ValueError as exc:
                raise ParseError(str(exc), path=str(path), line=lineno) from None
            if rec.id in seen:
                raise DuplicateId(
                    f"{path}:{lineno}: id {rec.id!r} already defined on line {seen[rec.id]}")
            seen[rec.id] = lineno
            records.append(rec)
    return records


def write_records(records: Iterable[RumorRecord], path: str | PathLike[str]) -> None:
    with atomic_path(path) as tmp:
        with open(tmp, "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(canonical_line(rec) + "\n")


def read_allowlist(path: str | PathLike[str] | None) -> frozenset[str]:
    if path is None or not Path(path).exists():
        return frozenset()
    ids = (ln.split("#", 1)[0].strip() for ln in Path(path).read_text().splitlines())
    return frozenset(i for i in ids if i)


@dataclass
class Corpus:
    manifest: CorpusManifest
    records: list[RumorRecord]
    series: dict[str, SearchSeries]
    sentiment: SentimentSeries
    allowlist: frozenset[str] = frozenset()


def load_corpus(manifest: CorpusManifest | str | PathLike[str],
                records_path: str | PathLike[str] | None = None) -> Corpus:
    """Load records, their entity series and the sentiment series.

    ``records_path`` overrides the manifest's rumor file (used to load a
    labeled copy of the corpus).
    """
    if not isinstance(manifest, CorpusManifest):
        manifest = CorpusManifest.load(manifest)
    for p in (manifest.rumor_file, manifest.series_directory, manifest.sentiment_file):
        if not Path(p).exists():
            raise FileNotFoundError(f"manifest references missing path {p}")
    records = read_records(records_path or manifest.rumor_file)
    series: dict[str, SearchSeries] = {}
    for rec in records:
        for entity in rec.entities:
            if entity in series:
                continue
            f = Path(manifest.series_directory) / series_filename(entity)
            if not f.exists():
                raise MissingSeries(entity, rec.id)
            series[entity] = read_series_csv(f, entity)
    sentiment = read_sentiment_csv(manifest.sentiment_file)
    return Corpus(manifest, records, series, sentiment, read_allowlist(manifest.allowlist_file))


@dataclass(frozen=True)
class FitConfig:
    window: int = 7
    rmse_ceiling: float = 0.35
    peak_tolerance: float = 0.5
    allowlist: frozenset[str] = frozenset()

    def to_dict(self) -> dict:
        return {"window": self.window, "rmse_ceiling": self.rmse_ceiling,
                "peak_tolerance": self.peak_tolerance, "allowlist": sorted(self.allowlist)}


@dataclass
class FilterReport:
    total: int = 0
    accepted: int = 0
    rejections: dict[str, str] = field(default_factory=dict)
    fits: dict[str, FitResult] = field(default_factory=dict)

    @property
    def rejected(self) -> int:
        return len(self.rejections)

    def to_dict(self, config: FitConfig | None = None) -> dict:
        d = {"total": self.total, "accepted": self.accepted,
             "rejections": dict(sorted(self.rejections.items())),
             "fits": {k: v.to_dict() for k, v in sorted(self.fits.items())}}
        if config is not None:
            d["config"] = config.to_dict()
        return d


def _judge(rec: RumorRecord, series: SearchSeries | None,
           config: FitConfig) -> tuple[str, FitResult | None, str | None]:
    """Return ``(rumor id, fit or None, rejection reason or None)``."""
    if series is None:
        return rec.id, None, "missing_series"
    try:
        window = extract_window(series, rec.outbreak_date, config.window)
    except WindowOutOfRange:
        return rec.id, None, "window_out_of_range"
    if window.frequencies.max() <= 0:
        return rec.id, None, "zero_traffic"
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NoDecayWarning)
            fit = fit_exponential(window)
    except FitError as exc:
        return rec.id, None, exc.reason if exc.reason in schemas.REASON_CODES else "degenerate"
    if rec.id in config.allowlist:
        return rec.id, fit, None
    if fit.status == "no_decay":
        return rec.id, fit, "no_decay"
    y0 = float(window.frequencies[fit.day0_shift])
    if fit.rmse > config.rmse_ceiling or abs(fit.peak - y0) > config.peak_tolerance * y0:
        return rec.id, fit, "poor_fit"
    return rec.id, fit, None


def filter_and_label(records: Sequence[RumorRecord], series_index: Mapping[str, SearchSeries],
                     config: FitConfig | None = None, jobs: int = 1
                     ) -> tuple[list[RumorRecord], FilterReport]:
    """Fit every rumor's fundamental-entity window and keep the usable ones.

    Accepted records come back with ``labels = {a, b, c}``; every rejected
    rumor gets exactly one reason code in the report.  Allowlisted ids are
    accepted whenever a fit could be computed at all.
    """
    config = config or FitConfig()
    tasks = [(rec, series_index.get(rec.fundamental_entity), config) for rec in records]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_judge, *zip(*tasks)))
    else:
        outcomes = [_judge(*t) for t in tasks]

    report = FilterReport(total=len(records))
    labeled = []
    for rec, (rid, fit, reason) in zip(records, outcomes):
        if fit is not None:
            report.fits[rid] = fit
        if reason is not None:
            report.rejections[rid] = reason
            continue
        labeled.append(rec.with_labels(fit.a, fit.b, fit.c))
    report.accepted = len(labeled)
    return labeled, report


def keyword_counts(records: Iterable[RumorRecord]) -> Counter:
    """Occurrences of each rumor's two most common entities (keyword cloud data)."""
    counts: Counter = Counter()
    for rec in records:
        counts[rec.top1_entity] += 1
        counts[rec.top2_entity] += 1
    return counts


def write_keyword_csv(counts: Counter, path: str | PathLike[str]) -> None:
    with atomic_path(path) as tmp:
        with open(tmp, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["keyword", "count"])
            for kw, n in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
                w.writerow([kw, n])
