"""core timeline: conversions and the append/trim speech buffer."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simulstream.errors import ConfigurationError
from simulstream.timeline import (
    AdapterSpec,
    AudioChunk,
    PolicyConfig,
    SpeechHistory,
    frames_to_samples,
)

from .conftest import chunk_of


class TestAdapterSpec:
    def test_defaults_consistent(self):
        spec = AdapterSpec()
        assert (spec.sample_rate, spec.frame_rate, spec.unit_rate, spec.reduction_rate) == (
            16000, 50, 50, 320,
        )

    def test_unit_waveform_consistency_enforced(self):
        with pytest.raises(ConfigurationError):
            AdapterSpec(sample_rate=16000, unit_rate=50, reduction_rate=100)

    @pytest.mark.parametrize("field", ["sample_rate", "frame_rate", "unit_rate", "reduction_rate"])
    def test_positive_fields(self, field):
        kwargs = {field: 0}
        with pytest.raises(ConfigurationError):
            AdapterSpec(**kwargs)


class TestPolicyConfig:
    def test_default_knobs(self):
        cfg = PolicyConfig()
        assert (cfg.cutoff_frames, cfg.word_history, cfg.segment_size) == (4, 10, 0.5)

    def test_zero_word_history_rejected(self):
        with pytest.raises(ConfigurationError):
            PolicyConfig(word_history=0)

    def test_zero_cutoff_allowed(self):
        assert PolicyConfig(cutoff_frames=0).cutoff_frames == 0

    def test_bad_segment(self):
        with pytest.raises(ConfigurationError):
            PolicyConfig(segment_size=0.0)


class TestFramesToSamples:
    def test_zero(self, spec):
        assert frames_to_samples(0, spec) == 0

    def test_one_second_of_frames(self, spec):
        assert frames_to_samples(50, spec) == 16000

    def test_three_frames(self, spec):
        assert frames_to_samples(3, spec) == 960

    def test_negative_rejected(self, spec):
        with pytest.raises(ValueError):
            frames_to_samples(-1, spec)

    @given(a=st.integers(0, 10_000), b=st.integers(0, 10_000))
    def test_additive_when_rates_divide(self, a, b):
        spec = AdapterSpec()
        assert frames_to_samples(a + b, spec) == frames_to_samples(a, spec) + frames_to_samples(b, spec)

    @given(st.lists(st.integers(0, 5_000), min_size=2, max_size=2).map(sorted))
    def test_monotone(self, pair):
        spec = AdapterSpec(sample_rate=22050, frame_rate=60, unit_rate=63, reduction_rate=350)
        lo, hi = pair
        assert frames_to_samples(lo, spec) <= frames_to_samples(hi, spec)


class TestSpeechHistory:
    def test_append_to_empty(self, spec):
        h = SpeechHistory(spec=spec)
        h.append_chunk(chunk_of(0.5))
        assert len(h.samples) == 8000

    def test_append_additivity(self, spec):
        h = SpeechHistory(spec=spec)
        h.append_chunk(chunk_of(0.5))
        h.append_chunk(chunk_of(0.5))
        assert len(h.samples) == 16000
        assert h.frames_in_buffer == 50

    def test_append_after_trim_keeps_absolute_end(self, spec):
        h = SpeechHistory(spec=spec)
        h.append_chunk(chunk_of(0.5))
        h.trim_front(10)  # 3200 samples off the front
        assert h.discarded_samples == 3200
        h.append_chunk(chunk_of(0.5))
        assert h.discarded_samples + len(h.samples) == 16000

    def test_trim_noop_at_current_offset(self, spec):
        h = SpeechHistory(spec=spec)
        h.append_chunk(chunk_of(1.0))
        h.trim_front(0)
        assert len(h.samples) == 16000 and h.discarded_frames == 0

    def test_trim_mid_buffer(self, spec):
        h = SpeechHistory(spec=spec)
        h.append_chunk(chunk_of(2.0))  # 100 frames
        h.trim_front(40)
        assert h.discarded_frames == 40
        assert h.frames_in_buffer == 60
        assert h.total_frames == 100

    def test_trim_past_end_rejected(self, spec):
        h = SpeechHistory(spec=spec)
        h.append_chunk(chunk_of(1.0))
        with pytest.raises(ValueError):
            h.trim_front(51)

    def test_trim_before_offset_rejected(self, spec):
        h = SpeechHistory(spec=spec)
        h.append_chunk(chunk_of(1.0))
        h.trim_front(20)
        with pytest.raises(ValueError):
            h.trim_front(10)

    def test_trim_idempotent(self, spec):
        h = SpeechHistory(spec=spec)
        h.append_chunk(chunk_of(1.0))
        h.trim_front(20)
        before = (len(h.samples), h.discarded_frames, h.discarded_samples)
        h.trim_front(20)
        assert (len(h.samples), h.discarded_frames, h.discarded_samples) == before

    def test_chunk_length_validated(self, spec):
        bad = AudioChunk(samples=np.zeros(100, dtype=np.float32), duration=0.5)
        h = SpeechHistory(spec=spec)
        with pytest.raises(ValueError):
            h.append_chunk(bad)

    def test_nonfinite_rejected(self, spec):
        samples = np.zeros(8000, dtype=np.float32)
        samples[7] = np.nan
        h = SpeechHistory(spec=spec)
        with pytest.raises(ValueError):
            h.append_chunk(AudioChunk(samples=samples, duration=0.5))

    @settings(max_examples=60)
    @given(
        ops=st.lists(
            st.one_of(
                st.tuples(st.just("append"), st.sampled_from([0.1, 0.5, 1.0])),
                st.tuples(st.just("trim"), st.floats(0.0, 1.0)),
            ),
            max_size=25,
        )
    )
    def test_conservation_over_interleavings(self, ops):
        spec = AdapterSpec()
        h = SpeechHistory(spec=spec)
        appended = 0
        for kind, arg in ops:
            if kind == "append":
                c = chunk_of(arg)
                appended += len(c.samples)
                h.append_chunk(c)
            else:
                lo, hi = h.discarded_frames, h.total_frames
                cut = lo + int(round(arg * (hi - lo)))
                h.trim_front(cut)
            assert h.discarded_samples == frames_to_samples(h.discarded_frames, spec)
            assert h.total_samples == appended
