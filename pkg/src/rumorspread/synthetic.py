"""Synthetic corpora and datasets with planted structure.

Real rumor corpora are not redistributable, so tests, the acceptance suite
and the README walkthrough run on data generated here.  Everything is a pure
function of the seed.
"""
from __future__ import annotations

import datetime as dt
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import series_filename, write_records
from .features import DEFAULT_MODEL_FEATURES, NER_TAGS, RumorRecord, SentimentSeries, write_sentiment_csv
from .influence import SearchSeries, write_series_csv
from .regression import Dataset

SERIES_START = dt.date(2019, 11, 1)
SENTIMENT_START = dt.date(2020, 1, 1)
SENTIMENT_DAYS = 120
TOP1_POOL = {"Wuhan": 2_200_000, "mask": 650_000, "vaccine": 310_000, "hospital": 120_000}
TOP2_POOL = {"donated": 800, "cure": 5_400, "closed": 2_900, "shortage": 1_700}


def exponential_window(a: float, b: float, c: float, days: int = 7) -> np.ndarray:
    t = np.arange(days, dtype=float)
    return np.exp(a * t + b) + c


@dataclass(frozen=True)
class PlantedRumor:
    record: RumorRecord
    a: float
    b: float
    c: float


def _flat_series(entity: str, level: float, end: dt.date, rng: np.random.Generator) -> SearchSeries:
    n = (end - SERIES_START).days + 1
    f = np.round(level * np.exp(rng.normal(0.0, 0.02, n)))
    return SearchSeries(entity, SERIES_START, np.maximum(f, 1.0))


def make_corpus(root: str | Path, n_rumors: int = 30, seed: int = 0,
                semantic: bool = True, flat: tuple[int, ...] = ()) -> list[PlantedRumor]:
    """Write a manifest-described corpus under ``root`` and return the truth.

    Labels depend on the features: ``b`` rises with the precursor (SFR-1) and
    the result count, ``a`` with LOC/PER and falls with ORG.  Rumor indices in
    ``flat`` get a constant fundamental-entity series (no rumor signal).
    """
    root = Path(root)
    series_dir = root / "series"
    series_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    last_day = dt.date(2020, 1, 20) + dt.timedelta(days=60)
    for pool in (TOP1_POOL, TOP2_POOL):
        for entity, level in pool.items():
            write_series_csv(_flat_series(entity, level, last_day, rng),
                             series_dir / series_filename(entity))

    planted: list[PlantedRumor] = []
    for k in range(n_rumors):
        flags = {tag: bool(rng.integers(0, 2)) for tag in NER_TAGS}
        level = math.exp(rng.uniform(7.0, 9.5))
        precursor = rng.uniform(0.0, 1.0)
        ra = int(math.exp(rng.uniform(8.0, 13.0)))
        ra_z = (math.log(ra) - 10.5) / 2.5
        outbreak = dt.date(2020, 1, 20) + dt.timedelta(days=int(rng.integers(0, 40)))
        a = (-0.7 + 0.15 * flags["LOC"] + 0.08 * flags["PER"] - 0.12 * flags["ORG"]
             + 0.05 * ra_z + rng.normal(0, 0.03))
        a = float(np.clip(a, -1.0, -0.3))
        b = float(math.log(level) + 2.5 + 1.5 * precursor + 0.4 * ra_z + rng.normal(0, 0.1))
        entity = f"entity-{k:03d}"

        n = (last_day - SERIES_START).days + 1
        f = level * np.exp(rng.normal(0.0, 0.02, n))
        i0 = (outbreak - SERIES_START).days
        f[i0 - 1] = level * math.exp(precursor)
        post = np.arange(n - i0, dtype=float)
        f[i0:] = np.exp(a * post + b) + level
        if k in flat:
            f[:] = level
        write_series_csv(SearchSeries(entity, SERIES_START, np.round(f)),
                         series_dir / series_filename(entity))

        rec = RumorRecord(
            id=f"r{k:03d}",
            text=f"synthetic rumor {k} about {entity}",
            fundamental_entity=entity,
            top1_entity=list(TOP1_POOL)[int(rng.integers(0, len(TOP1_POOL)))],
            top2_entity=list(TOP2_POOL)[int(rng.integers(0, len(TOP2_POOL)))],
            outbreak_date=outbreak,
            ner_flags=flags,
            resulting_amount=ra,
            semantic=tuple(float(v) for v in rng.normal(0, 1, 3)) if semantic else None,
        )
        planted.append(PlantedRumor(rec, a, b, level))

    write_records([p.record for p in planted], root / "rumors.jsonl")
    dates = tuple(SENTIMENT_START + dt.timedelta(days=d) for d in range(SENTIMENT_DAYS))
    sent = SentimentSeries(dates, np.round(rng.normal(0.0, 0.004, SENTIMENT_DAYS), 6))
    write_sentiment_csv(sent, root / "sentiment.csv")
    manifest = {"schema_version": 1, "rumor_file": "rumors.jsonl",
                "series_directory": "series", "sentiment_file": "sentiment.csv",
                "allowlist_file": None}
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return planted


def regression_dataset(target: str, n: int = 120, seed: int = 0) -> Dataset:
    """Raw (unnormalized) 8-feature dataset with a planted response.

    ``target="a"``: linear in the features, noise sd 0.35 (linear MSE near
    0.14).  ``target="b"``: two thresholds (SFR-1 and RA), noise sd 1.2.
    """
    rng = np.random.default_rng(seed)
    names = DEFAULT_MODEL_FEATURES
    X = np.empty((n, len(names)))
    for j, name in enumerate(names):
        if name in ("PER", "ORG", "LOC"):
            X[:, j] = rng.integers(0, 2, n)
        elif name == "PE":
            X[:, j] = rng.normal(0.0, 0.004, n)
        elif name == "RA":
            X[:, j] = rng.uniform(8.0, 13.0, n)
        else:
            X[:, j] = rng.uniform(6.0, 12.0, n)
    Z = (X - X.min(axis=0)) / np.ptp(X, axis=0)
    col = {name: Z[:, j] for j, name in enumerate(names)}
    if target == "a":
        w = {"PER": 0.35, "ORG": -0.35, "LOC": 0.45, "Top-1": -0.35, "SFR-1": -0.25,
             "PE": -0.2, "ANE": 0.4, "RA": 0.3}
        y = -0.8 + sum(w[k] * col[k] for k in names) + rng.normal(0.0, 0.35, n)
    elif target == "b":
        y = (8.0 + 5.0 * (col["SFR-1"] > 0.5) + 2.5 * (col["RA"] > 0.6)
             + rng.normal(0.0, 1.2, n))
    else:
        raise ValueError(f"target must be 'a' or 'b', got {target!r}")
    return Dataset(names, X, y)
