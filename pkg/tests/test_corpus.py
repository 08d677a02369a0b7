import pytest

from bonmt.corpus import (
    Dataset,
    LangPair,
    Segment,
    filter_pair,
    load_dataset,
    save_dataset,
)
from bonmt.errors import ValidationError


def seg(i, pair, **kw):
    defaults = dict(id=f"s{i}", pair=pair, domain="news", src=f"text {i}", refs=(f"ref {i}",))
    defaults.update(kw)
    return Segment(**defaults)


class TestLangPair:
    def test_parse_roundtrip(self):
        p = LangPair.parse("en-ja")
        assert (p.src, p.tgt) == ("en", "ja")
        assert str(p) == "en-ja"

    @pytest.mark.parametrize("bad", ["en", "en-en", "EN-ja", "e!-ja", "en-japanese", "-ja"])
    def test_rejects_malformed(self, bad):
        with pytest.raises(ValidationError):
            LangPair.parse(bad)


class TestSegment:
    def test_rejects_empty_src(self):
        with pytest.raises(ValidationError):
            Segment(id="x", pair=LangPair("en", "de"), domain="news", src="", refs=())

    def test_rejects_empty_ref(self):
        with pytest.raises(ValidationError):
            Segment(id="x", pair=LangPair("en", "de"), domain="news", src="a", refs=("",))

    def test_refs_optional(self):
        s = Segment(id="x", pair=LangPair("en", "de"), domain="news", src="a")
        assert s.refs == ()


class TestDataset:
    def test_duplicate_ids_rejected(self):
        pair = LangPair("en", "de")
        with pytest.raises(ValidationError, match="duplicate"):
            Dataset(name="d", segments=(seg(0, pair), seg(0, pair)))

    def test_get_unknown(self):
        ds = Dataset(name="d", segments=(seg(0, LangPair("en", "de")),))
        with pytest.raises(ValidationError):
            ds.get("nope")

    def test_filter_pair_preserves_order(self):
        ende = LangPair("en", "de")
        enja = LangPair("en", "ja")
        ds = Dataset(
            name="d",
            segments=(seg(0, ende), seg(1, enja), seg(2, ende)),
        )
        out = filter_pair(ds, ende)
        assert [s.id for s in out.segments] == ["s0", "s2"]
        assert len(filter_pair(ds, LangPair("en", "ru"))) == 0


class TestIO:
    def test_roundtrip(self, tmp_path, small_dataset):
        path = str(tmp_path / "segments.jsonl")
        save_dataset(small_dataset, path)
        back = load_dataset(path, name=small_dataset.name)
        assert back.segments == small_dataset.segments

    def test_error_carries_line_number(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        good = '{"id": "a", "src_lang": "en", "tgt_lang": "de", "domain": "news", "src": "x", "refs": ["y"]}'
        path.write_text(good + "\n" + '{"id": "b"}\n', encoding="utf-8")
        with pytest.raises(ValidationError, match=":2"):
            load_dataset(str(path))

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("", encoding="utf-8")
        with pytest.raises(ValidationError):
            load_dataset(str(path))
