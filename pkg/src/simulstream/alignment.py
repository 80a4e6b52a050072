"""Pure attention-matrix math behind every read/write decision.

An attention matrix maps generated symbols (rows: text tokens or speech
units) to source positions (cols: encoder frames or history tokens). Rows
are expected to be normalized to sum 1; all decisions below only consume
the per-row argmax, so they are invariant under positive row rescaling.

Argmax ties break to the lowest source index: deterministic, and biased
toward earlier frames, which is the conservative low-latency-risk choice.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractViolation

ROW_SUM_TOL = 1e-6


def validate_attention(matrix: np.ndarray, tol: float = ROW_SUM_TOL) -> np.ndarray:
    """Check attention-matrix invariants; returns the matrix as float64.

    Accepts an empty (0, C) matrix. Raises ContractViolation on wrong rank,
    empty rows, non-finite or negative entries, or row sums off 1 by > tol.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise ContractViolation(f"attention must be 2-D, got shape {m.shape}")
    if m.shape[0] == 0:
        return m
    if m.shape[1] == 0:
        raise ContractViolation("attention rows must have at least one column")
    if not np.all(np.isfinite(m)):
        raise ContractViolation("attention contains non-finite entries")
    if np.any(m < 0):
        raise ContractViolation("attention contains negative entries")
    sums = m.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
    if bad.size:
        raise ContractViolation(
            f"attention row {bad[0]} sums to {sums[bad[0]]!r}, expected 1 +- {tol}"
        )
    return m


def row_argmax(matrix: np.ndarray) -> np.ndarray:
    """Per-row index of the maximum score, lowest index on ties.

    An empty matrix yields an empty alignment vector.
    """
    m = np.asarray(matrix)
    if m.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return np.argmax(m, axis=1).astype(np.int64)


def stable_prefix_len(align: np.ndarray, total_frames: int, f: int) -> int:
    """Length of the hypothesis prefix aligned only to stable frames.

    The trailing ``f`` frames of the ``total_frames``-frame source are
    unstable; emission stops at the first token whose argmax falls there.
    f == 0 keeps the full hypothesis; f >= total_frames keeps nothing.
    """
    a = np.asarray(align)
    if a.size == 0:
        return 0
    unstable = a >= total_frames - f
    if not unstable.any():
        return int(a.size)
    return int(np.argmax(unstable))


def history_cut_frame(align: np.ndarray, discard_count: int) -> int:
    """Cut frame for the speech history after discarding old text.

    Returns the frame just past the last frame aligned to any discarded
    token, clamped so that no frame aligned to a retained token is lost:

        cut = min(1 + max(align[:discard_count]), min(align[discard_count:]))

    discard_count == 0 cuts nothing (returns 0).
    """
    a = np.asarray(align)
    if discard_count < 0 or discard_count > a.size:
        raise ValueError("discard_count out of range")
    if discard_count == 0:
        return 0
    cut = int(a[:discard_count].max()) + 1
    if discard_count < a.size:
        cut = min(cut, int(a[discard_count:].min()))
    return cut


def unit_history_boundary(unit_align: np.ndarray, first_new_token: int) -> int:
    """Count of leading units belonging to the already-emitted text history.

    ``unit_align`` maps each synthesized unit to a token index of the full
    text history; units aligned to tokens before ``first_new_token`` are
    history. The boundary is placed just after the *last* history-aligned
    unit, so no history audio is ever re-emitted even when the alignment
    is non-monotone.
    """
    a = np.asarray(unit_align)
    if first_new_token < 0:
        raise ValueError("first_new_token must be >= 0")
    if a.size == 0 or first_new_token == 0:
        return 0
    history = np.flatnonzero(a < first_new_token)
    if history.size == 0:
        return 0
    return int(history[-1]) + 1
