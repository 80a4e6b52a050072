"""Six-step streaming loop: session lifecycle, stability, trims, emissions."""

import numpy as np
import pytest

from simulstream.adapters.base import SynthesisOutput, TranscribeResult
from simulstream.adapters.oracle import OracleAdapter
from simulstream.errors import ConfigurationError, ContractViolation, StateError
from simulstream.policy import TextHistory, new_session
from simulstream.timeline import PolicyConfig

from .conftest import StubAdapter, chunk_of, script_of, spike_attention, word


def oracle_session(script, **cfg):
    adapter = OracleAdapter(script)
    config = PolicyConfig(**cfg)
    return new_session(config, adapter), adapter


class TestNewSession:
    def test_default_config_empty_session(self):
        session, _ = oracle_session(script_of(word(0, 25, "a")))
        assert session.text.tokens == []
        assert session.source_consumed == 0.0
        assert session.speech.discarded_frames == 0
        assert not session.finished

    def test_zero_word_history_is_config_error(self):
        with pytest.raises(ConfigurationError):
            PolicyConfig(word_history=0)

    def test_zero_cutoff_accepted(self):
        session, _ = oracle_session(script_of(word(0, 25, "a")), cutoff_frames=0)
        assert session.config.cutoff_frames == 0

    def test_config_type_checked(self):
        with pytest.raises(ConfigurationError):
            new_session("not a config", StubAdapter())


class TestPushAudio:
    def test_single_chunk(self):
        session, _ = oracle_session(script_of(word(0, 25, "a")))
        session.push_audio(chunk_of(0.5))
        assert session.source_consumed == 0.5

    def test_three_chunks(self):
        session, _ = oracle_session(script_of(word(0, 25, "a")))
        for _ in range(3):
            session.push_audio(chunk_of(0.5))
        assert session.source_consumed == 1.5

    def test_push_after_finish_rejected(self):
        session, _ = oracle_session(script_of(word(0, 25, "a")))
        session.push_audio(chunk_of(0.5))
        session.finish()
        with pytest.raises(StateError):
            session.push_audio(chunk_of(0.5))


class TestStep:
    def test_step_before_audio_rejected(self):
        session, _ = oracle_session(script_of(word(0, 25, "a")))
        with pytest.raises(StateError):
            session.step()

    def test_fully_unstable_hypothesis_reads_more(self):
        # word ends flush with the buffer; its center falls in the trailing
        # cutoff frames, so nothing is committable yet
        session, _ = oracle_session(script_of(word(18, 25, "a")), cutoff_frames=4)
        session.push_audio(chunk_of(0.5))
        assert session.step() is None
        assert session.text.tokens == []
        assert session.speech.discarded_frames == 0

    def test_two_step_scripted_scenario_unit_selection(self):
        # words: [tok_a tok_b] with 2+4 units, then [tok_c] with 2 units
        script = script_of(
            word(0, 50, ("tok_a", "tok_b"), (2, 4)),
            word(50, 100, "tok_c", 2),
        )
        session, _ = oracle_session(script, cutoff_frames=4, segment_size=1.0)

        session.push_audio(chunk_of(1.0))
        first = session.step()
        assert first is not None
        assert first.new_tokens == ["tok_a", "tok_b"]
        assert len(first.waveform) == 6 * 320  # nothing to discard yet

        session.push_audio(chunk_of(1.0))
        second = session.step()
        assert second is not None
        assert second.new_tokens == ["tok_c"]
        # synthesis covers all 8 units; 6 history units are cut: 1920 samples
        assert len(second.waveform) == 2 * 320 == 640
        assert 8 * 320 - len(second.waveform) == 1920
        assert session.emitted_units_total == 8

    def test_attention_shape_mismatch_is_contract_violation(self):
        stub = StubAdapter(
            transcribes=[
                TranscribeResult(["a"], [True], spike_attention(10, [2, 3]))  # 2 rows, 1 token
            ]
        )
        session = new_session(PolicyConfig(), stub)
        session.push_audio(chunk_of(0.5))
        with pytest.raises(ContractViolation):
            session.step()

    def test_attention_cols_must_match_buffer(self):
        stub = StubAdapter(
            transcribes=[TranscribeResult(["a"], [True], spike_attention(10, [2]))]
        )
        session = new_session(PolicyConfig(), stub)
        session.push_audio(chunk_of(0.5))  # 25 frames, matrix has 10 cols
        with pytest.raises(ContractViolation):
            session.step()

    def test_bad_waveform_length_is_contract_violation(self):
        stub = StubAdapter(
            transcribes=[TranscribeResult(["a"], [True], spike_attention(25, [3]))],
            syntheses=[
                SynthesisOutput(
                    units=[1, 2],
                    attention=spike_attention(1, [0, 0]),
                    waveform=np.zeros(100, dtype=np.float32),
                )
            ],
        )
        session = new_session(PolicyConfig(), stub)
        session.push_audio(chunk_of(0.5))
        with pytest.raises(ContractViolation):
            session.step()

    def test_adapter_error_propagates(self):
        class Exploding(StubAdapter):
            def transcribe(self, speech, prefix):
                raise RuntimeError("model died")

        session = new_session(PolicyConfig(), Exploding())
        session.push_audio(chunk_of(0.5))
        with pytest.raises(RuntimeError, match="model died"):
            session.step()


class TestTrim:
    def _session_with_words(self, n_words, word_history):
        session = new_session(
            PolicyConfig(word_history=word_history), StubAdapter()
        )
        for _ in range(24):
            session.push_audio(chunk_of(0.5))  # 600 frames buffered
        tokens = [f"w{i}" for i in range(n_words)]
        aligns = [10 + 40 * i for i in range(n_words)]
        session.text.extend(tokens, [True] * n_words, aligns)
        return session

    def test_twelve_words_wh_ten(self):
        session = self._session_with_words(12, 10)
        session.trim()
        assert session.text.word_count == 10
        assert session.text.tokens[0] == "w2"
        assert session.text.discarded_tokens == 2
        # cut = min(1 + max(10, 50), min(90, 130, ...)) = 51
        assert session.speech.discarded_frames == 51

    def test_at_bound_is_noop(self):
        session = self._session_with_words(10, 10)
        session.trim()
        assert session.text.word_count == 10
        assert session.speech.discarded_frames == 0

    def test_default_word_history_is_ten(self):
        assert PolicyConfig().word_history == 10

    def test_cut_clamped_by_retained_token(self):
        session = self._session_with_words(12, 10)
        # make a retained token point at an early frame: the cut must clamp
        session.text.token_frame_align[2] = 30
        session.trim()
        assert session.speech.discarded_frames == 30

    def test_multi_token_words_dropped_whole(self):
        session = new_session(PolicyConfig(word_history=2), StubAdapter())
        for _ in range(24):
            session.push_audio(chunk_of(0.5))
        session.text.extend(
            ["a", "a2", "b", "c", "c2"],
            [True, False, True, True, False],
            [10, 20, 60, 100, 110],
        )
        session.trim()  # 3 words -> keep 2: drop "a a2" (2 tokens)
        assert session.text.tokens == ["b", "c", "c2"]
        assert session.text.discarded_tokens == 2
        assert session.speech.discarded_frames == min(21, 60)


class TestFinish:
    def test_tail_emitted_and_conserved(self):
        # "b" is centered inside the trailing cutoff frames: committed only at flush
        script = script_of(word(0, 30, "a", 2), word(38, 49, "b", 3))
        session, adapter = oracle_session(script, cutoff_frames=8)
        session.push_audio(chunk_of(1.0))
        emissions = []
        e = session.step()
        assert e is not None and e.new_tokens == ["a"]
        emissions.append(e)
        flushed = session.finish()
        assert [t for em in flushed for t in em.new_tokens] == ["b"]
        emissions.extend(flushed)
        committed = [t for e in emissions for t in e.new_tokens]
        assert committed == ["a", "b"]
        concat = np.concatenate([e.waveform for e in emissions])
        offline = adapter.synthesize_tokens(committed).waveform
        assert concat.tobytes() == offline.tobytes()
        assert session.finished

    def test_finish_on_empty_session(self):
        session, _ = oracle_session(script_of(word(0, 25, "a")))
        assert session.finish() == []
        assert session.finished

    def test_double_finish_rejected(self):
        session, _ = oracle_session(script_of(word(0, 25, "a")))
        session.finish()
        with pytest.raises(StateError):
            session.finish()


class TestSessionInvariants:
    def test_no_retraction_and_reduction_multiples(self):
        script = script_of(
            word(2, 30, ("ein", "s")),
            word(30, 75, "zwei"),
            word(80, 120, ("dr", "ei"), (1, 3)),
            word(125, 160, "vier"),
        )
        session, _ = oracle_session(script, cutoff_frames=4, word_history=3)
        committed: list[str] = []
        for _ in range(8):
            session.push_audio(chunk_of(0.5))
            e = session.step()
            if e:
                assert len(e.waveform) % 320 == 0
                assert e.new_tokens  # emissions always carry the tokens they voice
                committed.extend(e.new_tokens)
        for e in session.finish():
            committed.extend(e.new_tokens)
        stream = [t for w in script.words for t in w.tokens]
        assert committed == stream  # append-only, in script order

    def test_noop_step_leaves_session_unchanged(self):
        session, _ = oracle_session(script_of(word(40, 70, "later")))
        session.push_audio(chunk_of(0.5))
        before = (list(session.text.tokens), session.speech.discarded_frames,
                  session.emitted_units_total)
        assert session.step() is None
        after = (list(session.text.tokens), session.speech.discarded_frames,
                 session.emitted_units_total)
        assert before == after

    def test_emitted_units_total_matches_samples(self):
        script = script_of(word(0, 40, "a", 3), word(40, 90, "b", 2))
        session, _ = oracle_session(script)
        total = 0
        for _ in range(4):
            session.push_audio(chunk_of(0.5))
            e = session.step()
            if e:
                total += len(e.waveform)
        for e in session.finish():
            total += len(e.waveform)
        assert total == session.emitted_units_total * 320


class TestTextHistory:
    def test_extend_and_drop_track_absolute_offset(self):
        t = TextHistory()
        t.extend(["a", "b", "c"], [True, True, True], [1, 2, 3])
        t.drop_front(2)
        assert t.tokens == ["c"]
        assert t.discarded_tokens == 2
        assert t.total_committed == 3

    def test_mismatched_lengths_rejected(self):
        t = TextHistory()
        with pytest.raises(ValueError):
            t.extend(["a"], [True, False], [1])
