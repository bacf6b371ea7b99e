import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_force_overlaps
from speechmill.captions import (
    CaptionFormat,
    CaptionParseError,
    CaptionTrack,
    WARN_MISSING_INDEX,
    WARN_NEGATIVE_DURATION,
    WARN_OUT_OF_ORDER,
    cues_overlap,
    find_overlaps,
    parse_track,
    serialize_track,
)
from speechmill.model import CaptionCue


def cue(i, start, end):
    return CaptionCue(index=i, start_s=start, end_s=end, raw_text="x")


class TestParseSrt:
    def test_single_cue(self):
        track = parse_track("1\n00:00:01,000 --> 00:00:02,500\nhello there\n")
        assert track.format is CaptionFormat.SRT
        assert len(track.cues) == 1
        c = track.cues[0]
        assert (c.start_s, c.end_s, c.raw_text) == (1.0, 2.5, "hello there")

    def test_multi_line_text_joined_with_space(self):
        track = parse_track("1\n00:00:01,000 --> 00:00:03,000\nline one\nline two\n")
        assert track.cues[0].raw_text == "line one line two"

    def test_multiple_cues_and_indexes(self):
        data = (
            "1\n00:00:00,000 --> 00:00:01,000\na\n\n"
            "2\n00:00:02,000 --> 00:00:03,000\nb\n\n"
            "3\n00:00:04,000 --> 00:00:05,000\nc\n"
        )
        track = parse_track(data)
        assert [c.index for c in track.cues] == [0, 1, 2]
        assert [c.raw_text for c in track.cues] == ["a", "b", "c"]

    def test_bom_tolerated(self):
        track = parse_track(b"\xef\xbb\xbf1\n00:00:01,000 --> 00:00:02,000\nhi\n")
        assert track.cues[0].raw_text == "hi"

    def test_dot_separator_accepted(self):
        track = parse_track("1\n00:00:01.250 --> 00:00:02.750\nhi\n")
        assert (track.cues[0].start_s, track.cues[0].end_s) == (1.25, 2.75)

    def test_missing_index_recovered_with_warning(self):
        track = parse_track("00:00:01,000 --> 00:00:02,000\nhi\n")
        assert len(track.cues) == 1
        assert any(w.kind == WARN_MISSING_INDEX for w in track.warnings)

    def test_negative_duration_cue_dropped_with_warning(self):
        data = (
            "1\n00:00:05,000 --> 00:00:04,000\nbackwards\n\n"
            "2\n00:00:06,000 --> 00:00:07,000\nfine\n"
        )
        track = parse_track(data)
        assert [c.raw_text for c in track.cues] == ["fine"]
        assert any(w.kind == WARN_NEGATIVE_DURATION for w in track.warnings)

    def test_out_of_order_sorted_with_warning(self):
        data = (
            "1\n00:00:05,000 --> 00:00:06,000\nsecond\n\n"
            "2\n00:00:01,000 --> 00:00:02,000\nfirst\n"
        )
        track = parse_track(data)
        assert [c.raw_text for c in track.cues] == ["first", "second"]
        assert [c.index for c in track.cues] == [0, 1]
        assert any(w.kind == WARN_OUT_OF_ORDER for w in track.warnings)

    def test_unparseable_raises(self):
        with pytest.raises(CaptionParseError):
            parse_track("just some prose\nwith no cues at all\n")

    def test_non_utf8_bytes_raise_parse_error(self):
        with pytest.raises(CaptionParseError):
            parse_track(b"1\n00:00:01,000 --> 00:00:02,000\n\xff\xfe broken\n")

    def test_hours_field(self):
        track = parse_track("1\n01:02:03,004 --> 01:02:04,005\nhi\n")
        assert track.cues[0].start_s == 3723.004


class TestParseWebvtt:
    def test_voice_tag_stripped(self):
        track = parse_track("WEBVTT\n\n00:00.000 --> 00:01.000\n<v Tom>hi</v>\n")
        assert track.format is CaptionFormat.WEBVTT
        c = track.cues[0]
        assert (c.start_s, c.end_s, c.raw_text) == (0.0, 1.0, "hi")

    def test_styling_and_karaoke_tags_stripped(self):
        data = "WEBVTT\n\n00:01.000 --> 00:02.000\n<c.yellow>he<00:00:01.500>llo</c>\n"
        assert parse_track(data).cues[0].raw_text == "hello"

    def test_hours_optional(self):
        track = parse_track("WEBVTT\n\n01:00:00.000 --> 01:00:01.000\nhi\n")
        assert track.cues[0].start_s == 3600.0
        track = parse_track("WEBVTT\n\n02:03.000 --> 02:04.000\nhi\n")
        assert track.cues[0].start_s == 123.0

    def test_cue_settings_ignored(self):
        data = "WEBVTT\n\n00:01.000 --> 00:02.000 align:start position:10%\nhi\n"
        track = parse_track(data)
        assert (track.cues[0].start_s, track.cues[0].end_s) == (1.0, 2.0)
        assert track.cues[0].raw_text == "hi"

    def test_cue_identifier_lines_skipped(self):
        data = "WEBVTT\n\nintro cue\n00:01.000 --> 00:02.000\nhi\n"
        assert parse_track(data).cues[0].raw_text == "hi"

    def test_note_and_style_blocks_skipped(self):
        data = (
            "WEBVTT\n\nNOTE this is a comment\n\nSTYLE\n::cue { color: red }\n\n"
            "00:01.000 --> 00:02.000\nhi\n"
        )
        track = parse_track(data)
        assert len(track.cues) == 1

    def test_html_entities_unescaped(self):
        data = "WEBVTT\n\n00:01.000 --> 00:02.000\nfish &amp; chips\n"
        assert parse_track(data).cues[0].raw_text == "fish & chips"

    def test_format_hint_overrides_sniffing(self):
        data = "1\n00:00:01.000 --> 00:00:02.000\nhi\n"
        track = parse_track(data, CaptionFormat.WEBVTT)
        assert track.format is CaptionFormat.WEBVTT


class TestRoundTrip:
    @staticmethod
    def _random_track(rng: random.Random, fmt: CaptionFormat) -> CaptionTrack:
        cues = []
        t = 0
        for i in range(rng.randint(1, 12)):
            t += rng.randint(0, 3000)
            dur = rng.randint(1, 9000)
            text = " ".join(
                rng.choice(["hello", "there", "we", "go", "now"])
                for _ in range(rng.randint(1, 5))
            )
            cues.append(CaptionCue(i, t / 1000.0, (t + dur) / 1000.0, text))
            t += dur
        return CaptionTrack(format=fmt, cues=tuple(cues))

    def test_parse_serialize_parse_is_fixed_point(self):
        from speechmill.model import to_ms

        def triples(t):
            return [(to_ms(c.start_s), to_ms(c.end_s), c.raw_text) for c in t.cues]

        rng = random.Random(7)
        for fmt in (CaptionFormat.SRT, CaptionFormat.WEBVTT):
            for _ in range(25):
                source = serialize_track(self._random_track(rng, fmt))
                once = parse_track(source, fmt)
                twice = parse_track(serialize_track(once), fmt)
                assert triples(once) == triples(twice)
                # and exactly, not just at ms precision:
                assert [(c.start_s, c.end_s, c.raw_text) for c in once.cues] == [
                    (c.start_s, c.end_s, c.raw_text) for c in twice.cues
                ]


class TestOverlaps:
    def test_touching_is_not_overlap(self):
        track = CaptionTrack(CaptionFormat.SRT, (cue(0, 0, 2), cue(1, 2, 4)))
        assert find_overlaps(track) == set()

    def test_open_interval_intersection(self):
        track = CaptionTrack(CaptionFormat.SRT, (cue(0, 0, 2), cue(1, 1.5, 3)))
        assert find_overlaps(track) == {(0, 1)}

    def test_sub_millisecond_overlap_is_touching(self):
        assert not cues_overlap(cue(0, 0, 2.0004), cue(1, 2.0, 3.0))
        assert cues_overlap(cue(0, 0, 2.0011), cue(1, 2.0, 3.0))

    def test_containment_counts(self):
        track = CaptionTrack(CaptionFormat.SRT, (cue(0, 0, 10), cue(1, 2, 3)))
        assert find_overlaps(track) == {(0, 1)}

    def test_matches_brute_force_on_random_tracks(self):
        rng = random.Random(42)
        for _ in range(30):
            cues = []
            for i in range(100):
                start = rng.randint(0, 60_000) / 1000.0
                cues.append(cue(i, start, start + rng.randint(1, 5000) / 1000.0))
            track = CaptionTrack(CaptionFormat.SRT, tuple(cues))
            assert find_overlaps(track) == brute_force_overlaps(cues)

    @given(
        st.lists(
            st.tuples(st.integers(0, 20_000), st.integers(1, 5_000)),
            min_size=2,
            max_size=25,
        )
    )
    def test_properties(self, spans):
        cues = [
            cue(i, start / 1000.0, (start + dur) / 1000.0)
            for i, (start, dur) in enumerate(spans)
        ]
        pairs = find_overlaps(CaptionTrack(CaptionFormat.SRT, tuple(cues)))
        assert all(i < j for i, j in pairs)  # irreflexive, canonical order
        shuffled = list(cues)
        random.Random(0).shuffle(shuffled)
        assert find_overlaps(CaptionTrack(CaptionFormat.SRT, tuple(shuffled))) == pairs
        assert pairs == brute_force_overlaps(cues)
