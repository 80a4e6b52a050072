"""A small but genuine attention-based S2ST model, in numpy.

Architecture: a speech encoder (framed waveform -> features -> transformer
self-attention stack), an autoregressive text decoder with multi-head
cross-attention over encoder states, an autoregressive unit decoder with
cross-attention over the text sequence, and a codebook vocoder (one fixed
320-sample waveform per unit id).

Weights are drawn once from a seeded generator at load time, so inference
is fully deterministic: the point of this model is to exercise the export
path with real transformer attention, not to translate well. Decoding is
greedy with a fixed emission-rate budget (about one text token per 0.2 s
of source audio, two units per text token).

Every cross-attention forward pass captures the per-layer, per-head weight
tensors so the exporter can aggregate them into a single matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ModelLoadError

BOS_ID = 0
PAD_ID = 1
FIRST_PIECE_ID = 2
UNIT_BOS = 100  # unit vocab is 0..99 plus a start symbol


def _layer_norm(x: np.ndarray) -> np.ndarray:
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mean) / np.sqrt(var + 1e-6)


def _softmax(x: np.ndarray) -> np.ndarray:
    x = x - x.max(axis=-1, keepdims=True)
    e = np.exp(x)
    return e / e.sum(axis=-1, keepdims=True)


def _sin_positions(length: int, dim: int) -> np.ndarray:
    pos = np.arange(length)[:, None]
    i = np.arange(dim)[None, :]
    angles = pos / np.power(10000.0, (2 * (i // 2)) / dim)
    enc = np.zeros((length, dim))
    enc[:, 0::2] = np.sin(angles[:, 0::2])
    enc[:, 1::2] = np.cos(angles[:, 1::2])
    return enc


@dataclass
class _AttentionBlock:
    """One multi-head attention block's projection weights."""

    wq: np.ndarray
    wk: np.ndarray
    wv: np.ndarray
    wo: np.ndarray
    n_heads: int

    def __call__(self, queries, keys_values, causal=False):
        tq, d = queries.shape
        tk = keys_values.shape[0]
        dh = d // self.n_heads
        q = (queries @ self.wq).reshape(tq, self.n_heads, dh).transpose(1, 0, 2)
        k = (keys_values @ self.wk).reshape(tk, self.n_heads, dh).transpose(1, 0, 2)
        v = (keys_values @ self.wv).reshape(tk, self.n_heads, dh).transpose(1, 0, 2)
        scores = q @ k.transpose(0, 2, 1) / np.sqrt(dh)
        if causal:
            mask = np.triu(np.full((tq, tk), -1e9), k=1)
            scores = scores + mask
        weights = _softmax(scores)  # (heads, tq, tk)
        out = (weights @ v).transpose(1, 0, 2).reshape(tq, d) @ self.wo
        return out, weights


@dataclass
class _Layer:
    self_attn: _AttentionBlock
    cross_attn: _AttentionBlock | None
    w1: np.ndarray
    w2: np.ndarray

    def forward(self, x, memory=None, causal=False):
        attn_out, _ = self.self_attn(x, x, causal=causal)
        x = _layer_norm(x + attn_out)
        cross_weights = None
        if self.cross_attn is not None:
            cross_out, cross_weights = self.cross_attn(x, memory)
            x = _layer_norm(x + cross_out)
        x = _layer_norm(x + np.maximum(x @ self.w1, 0.0) @ self.w2)
        return x, cross_weights


class ToyS2ST:
    """Deterministic transformer S2ST stand-in with attention capture."""

    sample_rate = 16000
    frame_hop = 320          # -> 50 Hz encoder frames
    unit_rate = 50
    reduction_rate = 320
    d_model = 32
    n_heads = 4
    n_layers = 2
    text_vocab = 64          # ids 0/1 reserved; 2..33 word-initial pieces
    unit_vocab = 100
    tokens_per_second = 5.0  # decode budget: one token per 0.2 s of audio
    units_per_token = 2
    max_new_per_call = 4

    def __init__(self, seed: int = 12061):
        rng = np.random.default_rng(seed)
        scale = 1.0 / np.sqrt(self.d_model)

        def mat(rows, cols):
            return rng.normal(0.0, scale, size=(rows, cols))

        def attn_block():
            d = self.d_model
            return _AttentionBlock(mat(d, d), mat(d, d), mat(d, d), mat(d, d),
                                   self.n_heads)

        def layer(cross: bool):
            return _Layer(
                self_attn=attn_block(),
                cross_attn=attn_block() if cross else None,
                w1=mat(self.d_model, 2 * self.d_model),
                w2=mat(2 * self.d_model, self.d_model),
            )

        self.frame_proj = mat(self.frame_hop, self.d_model)
        self.encoder = [layer(cross=False) for _ in range(self.n_layers)]
        self.text_emb = mat(self.text_vocab, self.d_model)
        self.text_decoder = [layer(cross=True) for _ in range(self.n_layers)]
        self.unit_emb = mat(self.unit_vocab + 1, self.d_model)  # + start symbol
        self.unit_decoder = [layer(cross=True) for _ in range(self.n_layers)]
        # vocoder codebook: one fixed waveform per unit id
        self.codebook = rng.uniform(-0.3, 0.3,
                                    size=(self.unit_vocab, self.reduction_rate)).astype(np.float32)

        self.piece_strings = [
            "<bos>", "<pad>",
            *(f"_w{i}" for i in range(FIRST_PIECE_ID, 34)),
            *(f"c{i}" for i in range(34, self.text_vocab)),
        ]
        self.piece_ids = {s: i for i, s in enumerate(self.piece_strings)}

    # -- encoder -----------------------------------------------------------

    def encode(self, audio: np.ndarray) -> np.ndarray:
        n_frames = len(audio) // self.frame_hop
        if n_frames == 0:
            raise ValueError("audio shorter than one encoder frame")
        frames = np.asarray(audio[: n_frames * self.frame_hop], dtype=np.float64)
        x = frames.reshape(n_frames, self.frame_hop) @ self.frame_proj
        x = x + _sin_positions(n_frames, self.d_model)
        for layer in self.encoder:
            x, _ = layer.forward(x, causal=False)
        return x

    # -- text side -----------------------------------------------------------

    def _text_forward(self, ids: list[int], memory: np.ndarray):
        x = self.text_emb[np.asarray(ids)] + _sin_positions(len(ids), self.d_model)
        captured = []
        for layer in self.text_decoder:
            x, cross = layer.forward(x, memory=memory, causal=True)
            captured.append(cross)
        logits = x @ self.text_emb.T
        return logits, captured

    def transcribe_ids(self, audio: np.ndarray, prefix_ids: list[int], max_new: int):
        """Greedy continuation of the prefix over the given audio.

        Returns (new_ids, cross) where cross is the final forward pass's
        per-layer (heads, positions, frames) attention stack; position rows
        cover BOS + prefix + new tokens.
        """
        memory = self.encode(audio)
        ids = [BOS_ID] + list(prefix_ids)
        for _ in range(max_new):
            logits, _ = self._text_forward(ids, memory)
            next_id = int(np.argmax(logits[-1, FIRST_PIECE_ID:])) + FIRST_PIECE_ID
            ids.append(next_id)
        _, captured = self._text_forward(ids, memory)
        return ids[1 + len(prefix_ids):], captured

    def piece(self, token_id: int) -> str:
        return self.piece_strings[token_id]

    def piece_id(self, token: str) -> int:
        try:
            return self.piece_ids[token]
        except KeyError as exc:
            raise ValueError(f"token {token!r} is not in the model vocabulary") from exc

    def is_word_start(self, token: str) -> bool:
        return token.startswith("_")

    # -- unit side --------------------------------------------------------------

    def _unit_forward(self, unit_ids: list[int], memory: np.ndarray):
        x = self.unit_emb[np.asarray(unit_ids)] + _sin_positions(len(unit_ids), self.d_model)
        captured = []
        for layer in self.unit_decoder:
            x, cross = layer.forward(x, memory=memory, causal=True)
            captured.append(cross)
        logits = x @ self.unit_emb[: self.unit_vocab].T
        return logits, captured

    def synthesize_ids(self, token_ids: list[int]):
        """Greedy unit generation for a text sequence, two units per token.

        Returns (units, cross, waveform); cross rows cover the start symbol
        plus the generated units, columns the text tokens.
        """
        if not token_ids:
            raise ValueError("empty text history")
        memory = self.text_emb[np.asarray(token_ids)] + _sin_positions(
            len(token_ids), self.d_model
        )
        units: list[int] = []
        ids = [UNIT_BOS]
        for _ in range(self.units_per_token * len(token_ids)):
            logits, _ = self._unit_forward(ids, memory)
            next_unit = int(np.argmax(logits[-1]))
            units.append(next_unit)
            ids.append(next_unit)
        _, captured = self._unit_forward(ids, memory)
        waveform = self.codebook[np.asarray(units)].reshape(-1)
        return units, captured, waveform


_REGISTRY = {
    "toy-s2st-v1": lambda: ToyS2ST(seed=12061),
}


def load_model(identifier: str):
    """Resolve a model identifier; unknown ids raise ModelLoadError."""
    try:
        builder = _REGISTRY[identifier]
    except KeyError:
        raise ModelLoadError(
            f"unknown model {identifier!r}; available: {sorted(_REGISTRY)}"
        ) from None
    try:
        return builder()
    except Exception as exc:  # construction failure is still a load failure
        raise ModelLoadError(f"could not build {identifier!r}: {exc}") from exc
