import pytest

from bonmt.corpus import Dataset, LangPair, Segment


@pytest.fixture
def pair_enzh() -> LangPair:
    return LangPair(src="en", tgt="zh")


@pytest.fixture
def small_dataset() -> Dataset:
    pair = LangPair(src="en", tgt="de")
    segs = [
        Segment(
            id=f"doc1:{i}",
            pair=pair,
            domain="news",
            src=f"Source sentence number {i} for testing.",
            refs=(f"Referenzsatz Nummer {i} zum Testen.",),
        )
        for i in range(4)
    ]
    return Dataset(name="tiny", segments=tuple(segs))
