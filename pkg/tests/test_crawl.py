import pytest

from speechmill.crawl import (
    SOURCE_CHANNEL,
    SOURCE_KEYWORD,
    CrawlFrontier,
    FrontierConfigError,
    default_keywords,
)
from speechmill.model import VideoRecord


def stub(video_id, channel_id="ch"):
    return VideoRecord(video_id=video_id, channel_id=channel_id, title="", duration_s=1.0)


class TestKeywords:
    def test_round_robin_with_wraparound(self):
        f = CrawlFrontier(["the", "but", "have"])
        assert [f.next_keyword() for _ in range(4)] == ["the", "but", "have", "the"]

    def test_single_keyword(self):
        f = CrawlFrontier(["only"])
        assert [f.next_keyword() for _ in range(3)] == ["only"] * 3

    def test_empty_list_is_a_configuration_error(self):
        with pytest.raises(FrontierConfigError):
            CrawlFrontier([])

    def test_packaged_list(self):
        words = default_keywords()
        assert len(words) == 100
        assert len(set(words)) == 100
        for example in ("the", "but", "have", "not", "and"):
            assert example in words


class TestEnqueue:
    def test_dedup_against_seen(self):
        f = CrawlFrontier(["the"])
        assert f.enqueue_results(SOURCE_KEYWORD, [stub("a"), stub("b")]) == 2
        assert f.enqueue_results(SOURCE_KEYWORD, [stub("b"), stub("c")]) == 1
        assert f.pending_count() == 3

    def test_empty_list_adds_nothing(self):
        f = CrawlFrontier(["the"])
        assert f.enqueue_results(SOURCE_KEYWORD, []) == 0

    def test_channel_sourced_outranks_keyword_sourced(self):
        f = CrawlFrontier(["the"])
        f.enqueue_results(SOURCE_KEYWORD, [stub("kw-vid")])
        f.enqueue_results(SOURCE_CHANNEL, [stub("ch-vid")])
        assert f.next_video().video_id == "ch-vid"
        assert f.next_video().video_id == "kw-vid"
        assert f.next_video() is None

    def test_unknown_source_rejected(self):
        with pytest.raises(ValueError):
            CrawlFrontier(["the"]).enqueue_results("magic", [stub("a")])

    def test_no_video_emitted_twice(self):
        f = CrawlFrontier(["the"])
        f.enqueue_results(SOURCE_KEYWORD, [stub("a")])
        assert f.next_video().video_id == "a"
        f.enqueue_results(SOURCE_KEYWORD, [stub("a")])
        f.enqueue_results(SOURCE_CHANNEL, [stub("a")])
        assert f.next_video() is None

    def test_seen_covers_everything_emitted(self):
        f = CrawlFrontier(["the"])
        f.enqueue_results(SOURCE_KEYWORD, [stub(f"v{i}") for i in range(5)])
        emitted = []
        while (v := f.next_video()) is not None:
            emitted.append(v.video_id)
        assert set(emitted) <= f.seen_videos


class TestChannelMemory:
    def test_first_acceptance_memorizes(self):
        f = CrawlFrontier(["the"])
        assert f.record_acceptance(stub("a", "chanX")) is True
        assert f.record_acceptance(stub("b", "chanX")) is False
        assert f.channel_memory == {"chanX"}

    def test_memory_only_grows(self):
        f = CrawlFrontier(["the"])
        sizes = []
        for i in range(10):
            f.record_acceptance(stub(f"v{i}", f"chan{i % 3}"))
            sizes.append(len(f.channel_memory))
        assert sizes == sorted(sizes)


class TestDeterminismAndPersistence:
    def build(self):
        f = CrawlFrontier(["the", "but"])
        f.next_keyword()
        f.enqueue_results(SOURCE_KEYWORD, [stub("k1"), stub("k2")])
        f.enqueue_results(SOURCE_CHANNEL, [stub("c1", "chanZ")])
        f.record_acceptance(stub("old", "chanZ"))
        return f

    def test_emission_sequence_reproducible(self):
        a, b = self.build(), self.build()
        seq = lambda f: [v.video_id for v in iter(f.next_video, None)]
        assert seq(a) == seq(b) == ["c1", "k1", "k2"]

    def test_snapshot_round_trip(self, tmp_path):
        f = self.build()
        path = tmp_path / "frontier.json"
        f.save(path)
        g = CrawlFrontier.load(path)
        assert g.keywords == f.keywords
        assert g.next_keyword() == "but"  # position preserved
        assert g.channel_memory == {"chanZ"}
        assert g.seen_videos == f.seen_videos
        assert [v.video_id for v in iter(g.next_video, None)] == ["c1", "k1", "k2"]

    def test_restore_keeps_dedup(self, tmp_path):
        f = self.build()
        path = tmp_path / "frontier.json"
        f.save(path)
        g = CrawlFrontier.load(path)
        assert g.enqueue_results(SOURCE_KEYWORD, [stub("k1")]) == 0
