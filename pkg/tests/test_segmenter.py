import random
import wave

import pytest
from hypothesis import given
from hypothesis import strategies as st

from corpus import write_tone_wav
from speechmill.clients import DirectoryMedia, FailingAligner, MarginAligner, MediaNotFound
from speechmill.model import Utterance, UtteranceStatus, VideoRecord, advance_status, to_ms
from speechmill.segmenter import (
    EXTENSION_CAP_S,
    cut_audio,
    merge_adjacent,
    refine_boundaries,
)


def cand(start, end, text="hello", video="v", index=0):
    return Utterance(
        source_video=video,
        start_s=start,
        end_s=end,
        transcript=text,
        cue_indices=(index,),
    )


def cands(spans):
    return [cand(s, e, text=f"t{i}", index=i) for i, (s, e) in enumerate(spans)]


class TestMergeAdjacent:
    def test_small_gap_merges(self):
        out = merge_adjacent(cands([(0, 4), (4.8, 7)]))
        assert len(out) == 1
        u = out[0]
        assert (u.start_s, u.end_s) == (0, 7)
        assert u.transcript == "t0 t1"
        assert u.cue_indices == (0, 1)
        assert u.status is UtteranceStatus.MERGED

    def test_large_gap_splits(self):
        out = merge_adjacent(cands([(0, 4), (5.2, 7)]))
        assert [(u.start_s, u.end_s) for u in out] == [(0, 4), (5.2, 7)]

    def test_span_cap_splits(self):
        out = merge_adjacent(cands([(0, 6), (6.5, 11)]))
        assert [(u.start_s, u.end_s) for u in out] == [(0, 6), (6.5, 11)]

    def test_gap_exactly_one_second_splits(self):
        out = merge_adjacent(cands([(0, 4), (5.0, 7)]))
        assert len(out) == 2

    def test_span_exactly_ten_seconds_merges(self):
        out = merge_adjacent(cands([(0, 6), (6.5, 10.0)]))
        assert len(out) == 1
        assert out[0].end_s == 10.0

    def test_gap_measured_from_group_end(self):
        # Third cue is 0.9 s after the second but 5.4 s after the first.
        out = merge_adjacent(cands([(0, 2), (2.5, 4.5), (5.4, 7)]))
        assert len(out) == 1

    def test_empty_input(self):
        assert merge_adjacent([]) == []

    def test_singleton(self):
        out = merge_adjacent(cands([(1, 3)]))
        assert len(out) == 1 and out[0].status is UtteranceStatus.MERGED

    def test_requires_candidates(self):
        merged = advance_status(cand(0, 1), "merge")
        with pytest.raises(ValueError):
            merge_adjacent([merged])

    @given(
        st.lists(
            st.tuples(st.integers(0, 2000), st.integers(1000, 10_000)),
            max_size=30,
        )
    )
    def test_grouping_invariants(self, deltas):
        spans = []
        t = 0
        for gap_ms, dur_ms in deltas:
            start = t + gap_ms
            spans.append((start / 1000.0, (start + dur_ms) / 1000.0))
            t = start + dur_ms
        candidates = cands(spans)
        out = merge_adjacent(candidates)
        # no drops, dups or reordering
        assert [i for u in out for i in u.cue_indices] == list(range(len(spans)))
        for u in out:
            assert to_ms(u.end_s) - to_ms(u.start_s) <= 10_000
            members = [candidates[i] for i in u.cue_indices]
            assert u.start_s == members[0].start_s
            assert u.end_s == members[-1].end_s
            for a, b in zip(members, members[1:]):
                assert to_ms(b.start_s) - to_ms(a.end_s) < 1000
            assert u.transcript == " ".join(m.transcript for m in members)


def merged(start, end, text="a b c", video="v"):
    return advance_status(cand(start, end, text=text, video=video), "merge")


VIDEO = VideoRecord(video_id="v", channel_id="c", title="", duration_s=60.0, audio_ref="v.wav")


class TestRefineBoundaries:
    def test_fully_aligned_is_a_noop(self):
        u = merged(10.0, 11.5)
        out = refine_boundaries(u, MarginAligner(0, 0), VIDEO)
        assert not out.aligner_failed
        assert out.utterance.status is UtteranceStatus.ALIGNED
        assert (out.utterance.start_s, out.utterance.end_s) == (10.0, 11.5)

    def test_left_margin_widens_start_to_first_working_probe(self):
        u = merged(10.0, 11.5)
        out = refine_boundaries(u, MarginAligner(left_margin_s=0.3), VIDEO)
        assert out.utterance.start_s == pytest.approx(9.7, abs=1e-3)
        assert out.utterance.end_s == 11.5

    def test_margin_beyond_cap_keeps_boundaries(self):
        u = merged(10.0, 11.5)
        out = refine_boundaries(u, MarginAligner(left_margin_s=0.6), VIDEO)
        assert (out.utterance.start_s, out.utterance.end_s) == (10.0, 11.5)
        assert not out.aligner_failed

    def test_right_margin_widens_end(self):
        u = merged(10.0, 11.5)
        out = refine_boundaries(u, MarginAligner(right_margin_s=0.3), VIDEO)
        assert out.utterance.start_s == 10.0
        assert out.utterance.end_s == pytest.approx(11.8, abs=1e-3)

    def test_never_aligning_last_word_keeps_end(self):
        u = merged(10.0, 11.5)
        out = refine_boundaries(u, MarginAligner(right_margin_s=5.0), VIDEO)
        assert out.utterance.end_s == 11.5

    def test_start_clamped_at_zero(self):
        u = merged(0.2, 1.7)
        out = refine_boundaries(u, MarginAligner(left_margin_s=0.35), VIDEO)
        # Probes 0.1/0.0: at start 0 the span is 1.9 s and the first word
        # sits 0.3167 s in, still under the margin: boundary stays.
        assert out.utterance.start_s == 0.2

    def test_end_clamped_at_video_duration(self):
        video = VideoRecord(video_id="v", channel_id="c", title="", duration_s=11.6, audio_ref="v.wav")
        u = merged(10.0, 11.5)
        out = refine_boundaries(u, MarginAligner(right_margin_s=0.3), video)
        assert out.utterance.end_s <= 11.6

    def test_unknown_video_duration_never_pulls_end_inward(self):
        # Metadata with duration 0 (unknown) must not shrink the span.
        video = VideoRecord(video_id="v", channel_id="c", title="", duration_s=0.0, audio_ref="v.wav")
        u = merged(10.0, 11.5)
        out = refine_boundaries(u, MarginAligner(right_margin_s=0.3), video)
        assert (out.utterance.start_s, out.utterance.end_s) == (10.0, 11.5)

    def test_utterance_starting_at_zero_has_no_left_probes(self):
        u = merged(0.0, 1.5)
        out = refine_boundaries(u, MarginAligner(left_margin_s=0.3), VIDEO)
        assert out.utterance.start_s == 0.0

    def test_aligner_unavailable_keeps_sample(self):
        u = merged(10.0, 11.5)
        out = refine_boundaries(u, FailingAligner(), VIDEO)
        assert out.aligner_failed
        assert out.utterance.status is UtteranceStatus.ALIGNED
        assert (out.utterance.start_s, out.utterance.end_s) == (10.0, 11.5)

    def test_requires_merged_status(self):
        with pytest.raises(ValueError):
            refine_boundaries(cand(0, 1), MarginAligner(), VIDEO)

    def test_moves_outward_only_and_at_most_half_a_second(self):
        for lm in (0.0, 0.26, 0.28, 0.3, 0.6):
            for rm in (0.0, 0.26, 0.3, 0.6):
                u = merged(10.0, 11.5)
                out = refine_boundaries(u, MarginAligner(lm, rm), VIDEO)
                assert u.start_s - EXTENSION_CAP_S - 1e-9 <= out.utterance.start_s <= u.start_s
                assert u.end_s <= out.utterance.end_s <= u.end_s + EXTENSION_CAP_S + 1e-9

    def test_widening_monotone_in_margin(self):
        # All three margins are reachable within the cap; a laxer aligner
        # must never produce a wider final span than a stricter one.
        spans = []
        for lm in (0.26, 0.28, 0.30):
            out = refine_boundaries(merged(10.0, 11.5), MarginAligner(lm, 0), VIDEO)
            spans.append(out.utterance.end_s - out.utterance.start_s)
        assert spans == sorted(spans)
        assert len(set(spans)) == 3


class TestCutAudio:
    def test_cut_produces_expected_frames_and_accepted_status(self, tmp_path):
        write_tone_wav(tmp_path / "v.wav", 20.0)
        media = DirectoryMedia(tmp_path)
        aligned = advance_status(merged(1.0, 3.5), "align_ok")
        video = VideoRecord(
            video_id="v", channel_id="c", title="", duration_s=20.0,
            audio_ref=str(tmp_path / "v.wav"),
        )
        path, accepted = cut_audio(aligned, video, media, tmp_path / "out" / "s.wav")
        assert accepted.status is UtteranceStatus.ACCEPTED
        with wave.open(str(path), "rb") as w:
            assert w.getnframes() == 40_000

    def test_fetches_when_no_audio_ref(self, tmp_path):
        write_tone_wav(tmp_path / "v.wav", 10.0)
        media = DirectoryMedia(tmp_path)
        aligned = advance_status(merged(0.0, 2.0), "align_ok")
        video = VideoRecord(video_id="v", channel_id="c", title="", duration_s=10.0)
        path, _ = cut_audio(aligned, video, media, tmp_path / "s.wav")
        assert path.exists()

    def test_media_error_propagates(self, tmp_path):
        media = DirectoryMedia(tmp_path)  # empty dir
        aligned = advance_status(merged(0.0, 2.0), "align_ok")
        video = VideoRecord(video_id="v", channel_id="c", title="", duration_s=10.0)
        with pytest.raises(MediaNotFound):
            cut_audio(aligned, video, media, tmp_path / "s.wav")

    def test_requires_aligned_status(self, tmp_path):
        with pytest.raises(ValueError):
            cut_audio(merged(0, 1), VIDEO, DirectoryMedia(tmp_path), tmp_path / "s.wav")
