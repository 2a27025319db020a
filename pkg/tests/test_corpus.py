import json

import numpy as np
import pytest

from rumorspread import schemas
from rumorspread.corpus import (CorpusManifest, FitConfig, entity_from_filename, filter_and_label,
                                keyword_counts, load_corpus, read_allowlist, read_records,
                                series_filename, write_keyword_csv, write_records)
from rumorspread.errors import DuplicateId, MissingSeries, ParseError, SchemaViolation
from rumorspread.influence import SearchSeries
from rumorspread.synthetic import make_corpus


def test_filename_encoding_round_trip():
    for name in ("Louis Koo", "a/b", "武汉", "100%"):
        fn = series_filename(name)
        assert "/" not in fn and entity_from_filename(fn) == name


def test_load(corpus_dir):
    corpus = load_corpus(corpus_dir / "manifest.json")
    assert len(corpus.records) == 30
    assert all(e in corpus.series for r in corpus.records for e in r.entities)
    assert corpus.allowlist == frozenset()


def test_manifest_schema_violation(tmp_path):
    (tmp_path / "m.json").write_text(json.dumps({"schema_version": 2}))
    with pytest.raises(SchemaViolation):
        CorpusManifest.load(tmp_path / "m.json")


def test_missing_series_names_entity(corpus_dir):
    (corpus_dir / "series" / series_filename("Wuhan")).unlink()
    with pytest.raises(MissingSeries, match="Wuhan"):
        load_corpus(corpus_dir / "manifest.json")


def test_missing_file(corpus_dir):
    (corpus_dir / "sentiment.csv").unlink()
    with pytest.raises(FileNotFoundError):
        load_corpus(corpus_dir / "manifest.json")


class TestRecords:
    def lines(self, corpus_dir):
        return (corpus_dir / "rumors.jsonl").read_text().splitlines()

    def test_parse_error_line_and_field(self, corpus_dir, tmp_path):
        lines = self.lines(corpus_dir)
        bad = json.loads(lines[4])
        del bad["outbreak_date"]
        lines[4] = json.dumps(bad)
        (tmp_path / "r.jsonl").write_text("\n".join(lines) + "\n")
        with pytest.raises(ParseError) as info:
            read_records(tmp_path / "r.jsonl")
        assert info.value.line == 5 and info.value.field == "outbreak_date"

    def test_bad_json_line(self, corpus_dir, tmp_path):
        lines = self.lines(corpus_dir)
        lines[1] = "{not json"
        (tmp_path / "r.jsonl").write_text("\n".join(lines) + "\n")
        with pytest.raises(ParseError) as info:
            read_records(tmp_path / "r.jsonl")
        assert info.value.line == 2

    def test_impossible_date(self, corpus_dir, tmp_path):
        lines = self.lines(corpus_dir)
        rec = json.loads(lines[0])
        rec["outbreak_date"] = "2020-02-30"
        lines[0] = json.dumps(rec)
        (tmp_path / "r.jsonl").write_text("\n".join(lines) + "\n")
        with pytest.raises(ParseError):
            read_records(tmp_path / "r.jsonl")

    def test_duplicate_id(self, corpus_dir, tmp_path):
        lines = self.lines(corpus_dir)
        (tmp_path / "r.jsonl").write_text("\n".join(lines + [lines[2]]) + "\n")
        with pytest.raises(DuplicateId, match="r002"):
            read_records(tmp_path / "r.jsonl")

    def test_round_trip_byte_equal(self, corpus_dir, tmp_path):
        src = corpus_dir / "rumors.jsonl"
        write_records(read_records(src), tmp_path / "again.jsonl")
        assert (tmp_path / "again.jsonl").read_bytes() == src.read_bytes()

    def test_labels_round_trip(self, corpus_dir, tmp_path):
        recs = [r.with_labels(-0.5, 9.0, 100.0) for r in read_records(corpus_dir / "rumors.jsonl")]
        write_records(recs, tmp_path / "l.jsonl")
        assert read_records(tmp_path / "l.jsonl") == recs

    def test_empty_file(self, tmp_path):
        (tmp_path / "e.jsonl").write_text("")
        assert read_records(tmp_path / "e.jsonl") == []


class TestFilter:
    def test_flat_series_is_degenerate(self, corpus_dir):
        corpus = load_corpus(corpus_dir / "manifest.json")
        labeled, report = filter_and_label(corpus.records, corpus.series)
        assert report.rejections.get("r003") == "degenerate"
        assert report.total == 30
        assert report.accepted + report.rejected == report.total
        assert all(r.labels is not None for r in labeled)
        schemas.validate(report.to_dict(FitConfig()), schemas.FILTER_REPORT)

    def test_recovers_planted_parameters(self, tmp_path):
        planted = make_corpus(tmp_path, n_rumors=12, seed=5)
        corpus = load_corpus(tmp_path / "manifest.json")
        labeled, _ = filter_and_label(corpus.records, corpus.series)
        truth = {p.record.id: p for p in planted}
        assert len(labeled) >= 10
        for rec in labeled:
            # Daily counts are rounded to integers, so recovery is approximate.
            assert abs(rec.labels["a"] - truth[rec.id].a) < 0.1

    def test_missing_series_reason(self, corpus_dir):
        corpus = load_corpus(corpus_dir / "manifest.json")
        series = dict(corpus.series)
        del series[corpus.records[0].fundamental_entity]
        _, report = filter_and_label(corpus.records, series)
        assert report.rejections[corpus.records[0].id] == "missing_series"

    def test_window_out_of_range(self, corpus_dir):
        corpus = load_corpus(corpus_dir / "manifest.json")
        rec = corpus.records[0]
        short = corpus.series[rec.fundamental_entity]
        cut = SearchSeries(short.entity, short.start,
                           short.frequencies[:short.index_of(rec.outbreak_date) + 3])
        _, report = filter_and_label([rec], {rec.fundamental_entity: cut})
        assert report.rejections[rec.id] == "window_out_of_range"

    def test_zero_traffic(self, corpus_dir):
        corpus = load_corpus(corpus_dir / "manifest.json")
        rec = corpus.records[0]
        s = corpus.series[rec.fundamental_entity]
        zero = SearchSeries(s.entity, s.start, np.zeros(len(s)))
        _, report = filter_and_label([rec], {rec.fundamental_entity: zero})
        assert report.rejections[rec.id] == "zero_traffic"

    def test_allowlist_overrides_quality_gate(self, corpus_dir):
        corpus = load_corpus(corpus_dir / "manifest.json")
        strict = FitConfig(rmse_ceiling=0.0)
        _, report = filter_and_label(corpus.records, corpus.series, strict)
        assert "poor_fit" in report.rejections.values()
        ids = frozenset(report.rejections)
        labeled, report2 = filter_and_label(corpus.records, corpus.series,
                                            FitConfig(rmse_ceiling=0.0, allowlist=ids))
        # Only rumors without any fit (the flat one) stay rejected.
        assert set(report2.rejections) == {"r003"}

    def test_empty_corpus(self):
        labeled, report = filter_and_label([], {})
        assert labeled == [] and report.total == 0 and report.accepted == 0

    def test_idempotent_and_parallel_equal(self, corpus_dir):
        corpus = load_corpus(corpus_dir / "manifest.json")
        one = filter_and_label(corpus.records, corpus.series)
        two = filter_and_label(one[0], corpus.series)
        assert [r.labels for r in two[0]] == [r.labels for r in one[0]]
        par = filter_and_label(corpus.records, corpus.series, jobs=2)
        assert par[1].to_dict() == one[1].to_dict()

    def test_reason_codes_known(self, corpus_dir):
        corpus = load_corpus(corpus_dir / "manifest.json")
        _, report = filter_and_label(corpus.records, corpus.series, FitConfig(rmse_ceiling=0.01))
        assert set(report.rejections.values()) <= set(schemas.REASON_CODES)


def test_allowlist_file(tmp_path):
    (tmp_path / "allow.txt").write_text("r001\n# comment\n r002  # trailing\n\n")
    assert read_allowlist(tmp_path / "allow.txt") == {"r001", "r002"}
    assert read_allowlist(None) == frozenset()


def test_keyword_counts(corpus_dir, tmp_path):
    records = read_records(corpus_dir / "rumors.jsonl")
    counts = keyword_counts(records)
    assert sum(counts.values()) == 2 * len(records)
    write_keyword_csv(counts, tmp_path / "k.csv")
    rows = (tmp_path / "k.csv").read_text().splitlines()
    assert rows[0] == "keyword,count"
    assert [int(r.split(",")[1]) for r in rows[1:]] == sorted(counts.values(), reverse=True)
