"""Scenario file grammar, generator properties, and source audio."""

import numpy as np
import pytest

from simulstream.adapters.oracle import default_unit_count
from simulstream.scenario import (
    Scenario,
    ScenarioError,
    load_scenario,
    random_scenario,
    save_scenario,
    scenario_audio,
)
from simulstream.wavio import read_wav, write_wav

SAMPLE = """\
# toy stream
duration_s = 4.0
sharpness = 8.0
noise_seed = 3
noise_amp = 0.0
delays_s = 0.0 0.05
reference = gut en tag
word = 10_frames 60_frames gut+en 2+3
word = 70_frames 120_frames tag
"""


class TestParsing:
    def test_sample_file(self, tmp_path):
        p = tmp_path / "s.scn"
        p.write_text(SAMPLE)
        s = load_scenario(p)
        assert s.duration_s == 4.0
        assert s.noise_seed == 3
        assert s.delays_s == [0.0, 0.05]
        assert s.reference == ["gut", "en", "tag"]
        assert len(s.words) == 2
        assert s.words[0].tokens == ("gut", "en")
        assert s.words[0].units_per_token == (2, 3)
        # unit counts default from the stable token hash when omitted
        assert s.words[1].units_per_token == (default_unit_count("tag"),)

    def test_missing_duration_rejected(self, tmp_path):
        p = tmp_path / "s.scn"
        p.write_text("word = 0_frames 10_frames a\n")
        with pytest.raises(ScenarioError):
            load_scenario(p)

    def test_frames_suffix_required(self, tmp_path):
        p = tmp_path / "s.scn"
        p.write_text("duration_s = 2.0\nword = 0 10_frames a\n")
        with pytest.raises(ScenarioError, match="_frames"):
            load_scenario(p)

    def test_span_past_duration_rejected(self, tmp_path):
        p = tmp_path / "s.scn"
        p.write_text("duration_s = 1.0\nword = 0_frames 100_frames a\n")
        with pytest.raises(ScenarioError):
            load_scenario(p)

    def test_save_load_round_trip(self, tmp_path):
        s = random_scenario(seed=42, min_duration_s=10, max_duration_s=14, noise_amp=0.01)
        p = tmp_path / "rt.scn"
        save_scenario(s, p)
        back = load_scenario(p)
        assert back.words == s.words
        assert back.duration_s == s.duration_s
        assert back.sharpness == s.sharpness
        assert back.noise_seed == s.noise_seed
        assert back.noise_amp == s.noise_amp


class TestRandomScenario:
    @pytest.mark.parametrize("seed", range(8))
    def test_well_formed(self, seed):
        s = random_scenario(seed, min_duration_s=10, max_duration_s=30)
        s.script()  # validates spans ordered, counts positive
        assert s.words
        last = 0
        for w in s.words:
            assert w.start_frame >= last
            assert w.end_frame - w.start_frame >= 25  # at least one 0.5 s chunk
            last = w.end_frame
        assert s.words[-1].end_frame <= round(s.duration_s * 50)
        # duration is whole chunks
        assert (s.duration_s / 0.5) == int(s.duration_s / 0.5)

    def test_deterministic_per_seed(self):
        assert random_scenario(7).words == random_scenario(7).words


class TestScenarioAudio:
    def test_tones_over_word_spans(self):
        s = random_scenario(3, min_duration_s=10, max_duration_s=12)
        audio = scenario_audio(s)
        assert len(audio) == round(s.duration_s * 16000)
        w = s.words[0]
        span = audio[w.start_frame * 320:w.end_frame * 320]
        assert np.abs(span).max() > 0.1
        if w.start_frame > 0:
            assert np.all(audio[: w.start_frame * 320] == 0.0)

    def test_wav_round_trip_is_exact(self, tmp_path):
        s = random_scenario(9, min_duration_s=10, max_duration_s=12)
        audio = scenario_audio(s)
        path = tmp_path / "s.wav"
        write_wav(path, audio, 16000)
        back, rate = read_wav(path)
        assert rate == 16000
        assert back.tobytes() == audio.tobytes()


class TestWavIO:
    def test_rejects_stereo(self, tmp_path):
        import wave

        p = tmp_path / "stereo.wav"
        with wave.open(str(p), "wb") as fh:
            fh.setnchannels(2)
            fh.setsampwidth(2)
            fh.setframerate(16000)
            fh.writeframes(b"\x00\x00" * 32)
        with pytest.raises(ValueError, match="mono"):
            read_wav(p)

    def test_rejects_8bit(self, tmp_path):
        import wave

        p = tmp_path / "8bit.wav"
        with wave.open(str(p), "wb") as fh:
            fh.setnchannels(1)
            fh.setsampwidth(1)
            fh.setframerate(16000)
            fh.writeframes(b"\x00" * 32)
        with pytest.raises(ValueError, match="16-bit"):
            read_wav(p)
