"""Wraps a captured-attention model as a simulstream adapter.

The aggregation choice collapses the model's per-layer, per-head attention
stacks into the single row-normalized matrix the engine consumes. It is
explicit configuration (stamped into the trace header), never defaulted:
which layer reflects alignment best is an empirical property of the model.

Grammar: ``layer<i>.heads_mean`` | ``layer<i>.heads_max`` | ``layer<i>.head<j>``
"""

from __future__ import annotations

import re

import numpy as np

from simulstream.adapters.base import SynthesisOutput, TranscribeResult
from simulstream.timeline import AdapterSpec

from .errors import AttentionHookError

_AGG_RE = re.compile(r"^layer(\d+)\.(heads_mean|heads_max|head(\d+))$")


def parse_aggregation(text: str) -> tuple[int, str, int | None]:
    m = _AGG_RE.match(text)
    if not m:
        raise AttentionHookError(
            f"bad aggregation {text!r}; expected layer<i>.heads_mean, "
            "layer<i>.heads_max or layer<i>.head<j>"
        )
    layer = int(m.group(1))
    if m.group(3) is not None:
        return layer, "head", int(m.group(3))
    return layer, m.group(2), None


class ModelAdapter:
    """simulstream adapter over a ToyS2ST-like model."""

    def __init__(self, model, aggregation: str):
        self.model = model
        self.aggregation = aggregation
        layer, mode, head = parse_aggregation(aggregation)
        if layer >= model.n_layers:
            raise AttentionHookError(
                f"layer {layer} out of range (model has {model.n_layers} layers)"
            )
        if head is not None and head >= model.n_heads:
            raise AttentionHookError(
                f"head {head} out of range (model has {model.n_heads} heads)"
            )
        self._layer, self._mode, self._head = layer, mode, head

    def spec(self) -> AdapterSpec:
        m = self.model
        return AdapterSpec(
            sample_rate=m.sample_rate,
            frame_rate=m.sample_rate // m.frame_hop,
            unit_rate=m.unit_rate,
            reduction_rate=m.reduction_rate,
        )

    def _collapse(self, captured) -> np.ndarray:
        stack = captured[self._layer]  # (heads, rows, cols)
        if stack is None:
            raise AttentionHookError("selected layer captured no cross-attention")
        if self._mode == "heads_mean":
            matrix = stack.mean(axis=0)
        elif self._mode == "heads_max":
            matrix = stack.max(axis=0)
        else:
            matrix = stack[self._head]
        sums = matrix.sum(axis=1, keepdims=True)
        return matrix / np.where(sums == 0.0, 1.0, sums)

    def transcribe(self, speech, prefix) -> TranscribeResult:
        budget = min(
            self.model.max_new_per_call,
            int(speech.total_frames / self.spec().frame_rate * self.model.tokens_per_second)
            - prefix.total_committed,
        )
        prefix_ids = [self.model.piece_id(t) for t in prefix.tokens]
        cols = speech.frames_in_buffer
        if budget <= 0:
            return TranscribeResult([], [], np.zeros((0, cols)))
        new_ids, captured = self.model.transcribe_ids(
            np.asarray(speech.samples, dtype=np.float64), prefix_ids, budget
        )
        matrix = self._collapse(captured)
        rows = matrix[1 + len(prefix_ids):]  # new-token rows only
        tokens = [self.model.piece(i) for i in new_ids]
        return TranscribeResult(
            new_tokens=tokens,
            word_start_flags=[self.model.is_word_start(t) for t in tokens],
            attention=rows,
        )

    def synthesize(self, text) -> SynthesisOutput:
        token_ids = [self.model.piece_id(t) for t in text.tokens]
        units, captured, waveform = self.model.synthesize_ids(token_ids)
        matrix = self._collapse(captured)
        return SynthesisOutput(
            units=units,
            attention=matrix[1:],  # drop the start-symbol row
            waveform=np.asarray(waveform, dtype=np.float32),
        )
