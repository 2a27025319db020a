"""Numeric rumor features built from annotations and auxiliary series."""
from __future__ import annotations

import csv
import datetime as dt
import math
import warnings
from dataclasses import dataclass, field, replace
from os import PathLike
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (ClampWarning, DateNotCovered, EmptyWindow, FeatureError,
                     ParseError, TooFewRows, WindowOutOfRange, ZeroTraffic)
from .influence import SearchSeries

NER_TAGS = ("PER", "ORG", "LOC", "NZ", "N", "V")
BASELINE_WINDOW = (dt.date(2019, 11, 1), dt.date(2019, 12, 31))
SFR_DAYS = 7
SFR_NAMES = tuple(f"SFR-{k}" for k in range(SFR_DAYS, 0, -1))  # oldest first
SEMANTIC_NAMES = ("Neure-1", "Neure-2", "Neure-3")

SCALAR_NAMES = ("LOC", "PER", "ORG", "NZ", "N", "V", "Top-1", "Top-2", "ANE", "PE", "RA")
ALL_FEATURES = SCALAR_NAMES[:8] + SFR_NAMES + SCALAR_NAMES[8:]

# Feature set used by the models by default (NZ/N/V, Top-2 and the older
# precursor days are kept in the matrix but not fed to the models).
DEFAULT_MODEL_FEATURES = ("PER", "ORG", "LOC", "Top-1", "SFR-1", "PE", "ANE", "RA")
EXTRA_NER_FEATURES = ("NZ", "N", "V")
CORRELATION_FEATURES = ("LOC", "Top-1", "SFR-1", "PE", "ANE", "RA")


def model_features(*, include_extra_ner: bool = False, semantic: bool = False) -> tuple[str, ...]:
    names = DEFAULT_MODEL_FEATURES
    if include_extra_ner:
        names = names + EXTRA_NER_FEATURES
    if semantic:
        names = names + SEMANTIC_NAMES
    return names


@dataclass(frozen=True)
class RumorRecord:
    id: str
    text: str
    fundamental_entity: str
    top1_entity: str
    top2_entity: str
    outbreak_date: dt.date
    ner_flags: Mapping[str, bool]
    resulting_amount: int
    semantic: tuple[float, float, float] | None = None
    labels: Mapping[str, float] | None = None

    def __post_init__(self):
        if not self.fundamental_entity:
            raise ValueError(f"rumor {self.id!r}: fundamental_entity is empty")
        if self.resulting_amount < 0:
            raise ValueError(f"rumor {self.id!r}: resulting_amount must be ≥ 0")
        missing = set(NER_TAGS) - set(self.ner_flags)
        if missing:
            raise ValueError(f"rumor {self.id!r}: missing NER flags {sorted(missing)}")
        if self.semantic is not None and len(self.semantic) != 3:
            raise ValueError(f"rumor {self.id!r}: semantic must have exactly 3 values")

    @property
    def entities(self) -> tuple[str, str, str]:
        return (self.fundamental_entity, self.top1_entity, self.top2_entity)

    def with_labels(self, a: float, b: float, c: float) -> RumorRecord:
        return replace(self, labels={"a": a, "b": b, "c": c})

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "text": self.text,
            "fundamental_entity": self.fundamental_entity,
            "top1_entity": self.top1_entity,
            "top2_entity": self.top2_entity,
            "outbreak_date": self.outbreak_date.isoformat(),
            "ner_flags": {tag: bool(self.ner_flags[tag]) for tag in NER_TAGS},
            "resulting_amount": int(self.resulting_amount),
        }
        if self.semantic is not None:
            d["semantic"] = [float(v) for v in self.semantic]
        if self.labels is not None:
            d["labels"] = {k: float(self.labels[k]) for k in ("a", "b", "c")}
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> RumorRecord:
        semantic = d.get("semantic")
        labels = d.get("labels")
        return cls(
            id=str(d["id"]),
            text=d["text"],
            fundamental_entity=d["fundamental_entity"],
            top1_entity=d["top1_entity"],
            top2_entity=d["top2_entity"],
            outbreak_date=dt.date.fromisoformat(d["outbreak_date"]),
            ner_flags={tag: bool(d["ner_flags"][tag]) for tag in NER_TAGS},
            resulting_amount=int(d["resulting_amount"]),
            semantic=tuple(float(v) for v in semantic) if semantic is not None else None,
            labels={k: float(labels[k]) for k in ("a", "b", "c")} if labels is not None else None,
        )


@dataclass(frozen=True)
class SentimentSeries:
    dates: tuple[dt.date, ...]
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if len(v) != len(self.dates):
            raise ValueError("dates and values differ in length")
        if not np.all(np.isfinite(v)):
            raise ValueError("sentiment values must be finite")
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur <= prev:
                raise ValueError(f"sentiment dates must increase ({prev} -> {cur})")
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "_index", {d: k for k, d in enumerate(self.dates)})

    def __len__(self) -> int:
        return len(self.dates)


def read_sentiment_csv(path: str | PathLike[str]) -> SentimentSeries:
    dates, values = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["date", "value"]:
            raise ParseError(f"expected header 'date,value', got {header}",
                             path=str(path), line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                dates.append(dt.date.fromisoformat(row[0].strip()))
            except (ValueError, IndexError):
                raise ParseError("bad date", path=str(path), line=lineno, field="date") from None
            try:
                values.append(float(row[1]))
            except (ValueError, IndexError):
                raise ParseError("bad value", path=str(path), line=lineno, field="value") from None
    try:
        return SentimentSeries(tuple(dates), np.array(values))
    except ValueError as exc:
        raise ParseError(str(exc), path=str(path)) from None


def write_sentiment_csv(sent: SentimentSeries, path: str | PathLike[str]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "value"])
        for d, v in zip(sent.dates, sent.values):
            w.writerow([d.isoformat(), repr(float(v))])


def historical_awareness(series: SearchSeries,
                         window: tuple[dt.date, dt.date] = BASELINE_WINDOW) -> float:
    """ln of the mean daily frequency over ``window`` (inclusive)."""
    first, last = window
    if last < first:
        raise EmptyWindow(f"empty window {first}..{last}")
    if last < series.start or first > series.end:
        raise EmptyWindow(f"{series.entity}: no data in {first}..{last}")
    if not series.covers(first, last):
        raise WindowOutOfRange(
            f"{series.entity}: series {series.start}..{series.end} does not cover {first}..{last}")
    mean = float(series.slice(first, last).frequencies.mean())
    if mean <= 0:
        raise ZeroTraffic(f"{series.entity}: no searches in {first}..{last}")
    return math.log(mean)


def sfr_sequence(series: SearchSeries, outbreak_date: dt.date,
                 days: int = SFR_DAYS) -> np.ndarray:
    """ln daily frequency for the ``days`` days before the outbreak, oldest first.

    Zero-count days are read as 1 (ln -> 0); callers detect them with
    :func:`sfr_has_zero`.
    """
    first = outbreak_date - dt.timedelta(days=days)
    last = outbreak_date - dt.timedelta(days=1)
    f = series.slice(first, last).frequencies
    return np.log(np.where(f <= 0, 1.0, f))


def sfr_has_zero(series: SearchSeries, outbreak_date: dt.date, days: int = SFR_DAYS) -> bool:
    first = outbreak_date - dt.timedelta(days=days)
    last = outbreak_date - dt.timedelta(days=1)
    return bool(np.any(series.slice(first, last).frequencies <= 0))


def locate_sentiment(sent: SentimentSeries, date: dt.date) -> float:
    if not sent.dates or date < sent.dates[0] or date > sent.dates[-1]:
        raise DateNotCovered(f"{date} outside sentiment range")
    k = sent._index.get(date)
    if k is None:
        raise DateNotCovered(f"no sentiment value for {date}")
    return float(sent.values[k])


@dataclass(frozen=True)
class FeatureVector:
    id: str
    loc: int
    per: int
    org: int
    nz: int
    n_flag: int
    v_flag: int
    top1: float
    top2: float
    key_awareness: float
    sfr: tuple[float, ...]
    pe: float
    ra: float
    semantic: tuple[float, float, float] | None = None
    labels: Mapping[str, float] | None = None
    zero_traffic: bool = False

    def as_dict(self) -> dict[str, float]:
        """Feature name -> value, in canonical column order."""
        d: dict[str, float] = {
            "LOC": self.loc, "PER": self.per, "ORG": self.org,
            "NZ": self.nz, "N": self.n_flag, "V": self.v_flag,
            "Top-1": self.top1, "Top-2": self.top2,
        }
        d.update(zip(SFR_NAMES, self.sfr))
        d["ANE"] = self.key_awareness
        d["PE"] = self.pe
        d["RA"] = self.ra
        if self.semantic is not None:
            d.update(zip(SEMANTIC_NAMES, self.semantic))
        return d


def build_features(record: RumorRecord, key_series: SearchSeries | None,
                   top1_series: SearchSeries | None, top2_series: SearchSeries | None,
                   sent: SentimentSeries,
                   baseline: tuple[dt.date, dt.date] = BASELINE_WINDOW) -> FeatureVector:
    """Assemble the unnormalized feature vector for one rumor.

    Any failure is re-raised as :class:`FeatureError` naming the rumor.
    """
    try:
        for role, s in (("fundamental", key_series), ("top1", top1_series),
                        ("top2", top2_series)):
            if s is None:
                raise LookupError(f"missing {role} entity series")
        flags = {tag: int(bool(record.ner_flags[tag])) for tag in NER_TAGS}
        sfr = sfr_sequence(key_series, record.outbreak_date)
        zero = sfr_has_zero(key_series, record.outbreak_date)
        return FeatureVector(
            id=record.id,
            loc=flags["LOC"], per=flags["PER"], org=flags["ORG"],
            nz=flags["NZ"], n_flag=flags["N"], v_flag=flags["V"],
            top1=historical_awareness(top1_series, baseline),
            top2=historical_awareness(top2_series, baseline),
            key_awareness=historical_awareness(key_series, baseline),
            sfr=tuple(float(v) for v in sfr),
            pe=locate_sentiment(sent, record.outbreak_date),
            ra=math.log(record.resulting_amount) if record.resulting_amount > 0 else 0.0,
            semantic=record.semantic,
            labels=dict(record.labels) if record.labels is not None else None,
            zero_traffic=zero,
        )
    except FeatureError:
        raise
    except Exception as exc:
        raise FeatureError(record.id, exc) from exc


def feature_matrix(vectors: Sequence[FeatureVector],
                   names: Sequence[str] | None = None) -> tuple[np.ndarray, list[str]]:
    if not vectors:
        return np.empty((0, len(names or ()))), list(names or ())
    rows = [v.as_dict() for v in vectors]
    if names is None:
        names = list(rows[0])
    missing = [n for n in names if any(n not in r for r in rows)]
    if missing:
        raise KeyError(f"features missing from some rows: {missing}")
    return np.array([[r[n] for n in names] for r in rows], dtype=float), list(names)


@dataclass(frozen=True)
class NormRanges:
    mins: np.ndarray
    maxs: np.ndarray
    constant: np.ndarray = field(default=None)  # bool per column

    def __post_init__(self):
        mins = np.asarray(self.mins, dtype=float)
        maxs = np.asarray(self.maxs, dtype=float)
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)
        object.__setattr__(self, "constant", maxs == mins)

    def to_dict(self) -> dict:
        return {"min": self.mins.tolist(), "max": self.maxs.tolist()}

    @classmethod
    def from_dict(cls, d: Mapping) -> NormRanges:
        return cls(np.array(d["min"], dtype=float), np.array(d["max"], dtype=float))

    def apply(self, X: np.ndarray, *, warn: bool = True, clamp: bool = True) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        span = np.where(self.constant, 1.0, self.maxs - self.mins)
        Z = np.where(self.constant, 0.0, (X - self.mins) / span)
        if not clamp:
            return Z
        outside = (Z < 0) | (Z > 1)
        if np.any(outside):
            if warn:
                warnings.warn(f"{int(outside.sum())} value(s) outside the fitted range "
                              "were clamped to [0, 1]", ClampWarning, stacklevel=2)
            Z = np.clip(Z, 0.0, 1.0)
        return Z


def minmax_normalize(X: np.ndarray, ranges: NormRanges | None = None) -> tuple[np.ndarray, NormRanges]:
    """Scale each column to [0, 1].

    With ``ranges=None`` the ranges are fitted on ``X`` (needs ≥ 2 rows);
    otherwise the given ranges are applied and out-of-range values clamp.
    Constant columns map to 0 and are flagged in ``ranges.constant``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("expected a 2-D feature matrix")
    if ranges is None:
        if X.shape[0] < 2:
            raise TooFewRows(f"need at least 2 rows to fit ranges, got {X.shape[0]}")
        ranges = NormRanges(X.min(axis=0), X.max(axis=0))
    return ranges.apply(X), ranges


LABEL_COLUMNS = ("label_a", "label_b", "label_c")


def write_feature_csv(vectors: Sequence[FeatureVector], path: str | PathLike[str]) -> None:
    """One ``id`` column, the feature columns, then labels when every row has them."""
    X, names = feature_matrix(vectors) if vectors else (np.empty((0, 0)), list(ALL_FEATURES))
    with_labels = bool(vectors) and all(v.labels is not None for v in vectors)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", *names, *(LABEL_COLUMNS if with_labels else ())])
        for v, row in zip(vectors, X):
            out = [v.id, *(repr(float(x)) for x in row)]
            if with_labels:
                out += [repr(float(v.labels[k])) for k in ("a", "b", "c")]
            w.writerow(out)


@dataclass(frozen=True)
class FeatureTable:
    """A feature-matrix CSV read back into memory."""

    ids: list[str]
    names: list[str]
    X: np.ndarray
    labels: np.ndarray | None  # (n, 3) for a, b, c

    def columns(self, names: Iterable[str]) -> np.ndarray:
        idx = [self.names.index(n) for n in names]
        return self.X[:, idx]

    def target(self, which: str) -> np.ndarray:
        if self.labels is None:
            raise KeyError("feature table has no label columns")
        return self.labels[:, "abc".index(which)]


def read_feature_csv(path: str | PathLike[str]) -> FeatureTable:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "id":
            raise ParseError("feature CSV must start with an 'id' column", path=str(path), line=1)
        has_labels = tuple(header[-3:]) == LABEL_COLUMNS
        names = header[1:-3] if has_labels else header[1:]
        ids, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} columns, got {len(row)}",
                                 path=str(path), line=lineno)
            ids.append(row[0])
            try:
                rows.append([float(x) for x in row[1:]])
            except ValueError as exc:
                raise ParseError(str(exc), path=str(path), line=lineno) from None
    data = np.array(rows, dtype=float).reshape(len(rows), len(header) - 1)
    if has_labels:
        return FeatureTable(ids, list(names), data[:, :-3], data[:, -3:])
    return FeatureTable(ids, list(names), data, None)
