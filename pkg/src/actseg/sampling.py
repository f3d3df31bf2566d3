"""Clip index generation: dense inference windows, surround training
sampling, and offline center sampling.

Clip convention: a clip is T frame indices at stride tau ending at the
trigger frame t0. The prediction targets the middle frame, which trails the
trigger by floor(T/2)*tau frames (32 frames for T=8, tau=8), so a streaming
deployment needs that many future frames before the middle frame's label is
computable.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ClipSpec:
    """T frame indices at stride tau plus the index receiving the prediction.

    Indices clamped at a sequence boundary repeat the boundary frame, so
    consecutive differences equal tau only away from the edges.
    """

    t: int
    tau: int
    frames: tuple
    middle: int


def _middle_pos(t: int) -> int:
    # position of the middle frame within the clip; the trigger sits at t-1
    return t - 1 - t // 2


def middle_offset(t: int, tau: int) -> int:
    """Frames from clip start to the middle frame."""
    return _middle_pos(t) * tau


def prediction_lag(t: int, tau: int) -> int:
    """Frames from the middle frame to the trigger: floor(T/2)*tau."""
    return (t // 2) * tau


def _validate(t, tau):
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    if tau < 1:
        raise ValueError(f"tau must be >= 1, got {tau}")


def _build(raw_frames, t, tau, seq_len=None):
    lo = [max(0, f) for f in raw_frames]
    if seq_len is not None:
        lo = [min(seq_len - 1, f) for f in lo]
    return ClipSpec(t, tau, tuple(lo), lo[_middle_pos(t)])


def inference_clip(t0: int, t: int, tau: int, seq_len: int) -> ClipSpec:
    """Clip ending at the newest frame t0, reaching back (T-1)*tau frames.

    Indices below 0 clamp to 0 (the first frame repeats).
    """
    _validate(t, tau)
    if not 0 <= t0 < seq_len:
        raise ValueError(f"t0 must be in [0, {seq_len}), got {t0}")
    return _build([t0 - (t - 1 - i) * tau for i in range(t)], t, tau)


def middle_clip(middle: int, t: int, tau: int, seq_len: int) -> ClipSpec:
    """Clip whose prediction target is `middle`, clamped to [0, seq_len).

    Near the sequence end forward indices clamp to seq_len-1 so trailing
    frames still receive predictions.
    """
    _validate(t, tau)
    if not 0 <= middle < seq_len:
        raise ValueError(f"middle must be in [0, {seq_len}), got {middle}")
    pos = _middle_pos(t)
    return _build([middle + (i - pos) * tau for i in range(t)], t, tau, seq_len)


def training_clip(start: int, t: int, tau: int, seq_len=None) -> ClipSpec:
    """Clip growing forward from a sampled start frame."""
    _validate(t, tau)
    return _build([start + i * tau for i in range(t)], t, tau, seq_len)


def surround_sample_start(n_s: int, n_e: int, t: int, tau: int, rng: np.random.Generator) -> int:
    """Uniform training-clip start such that the clip middle lands in [n_s, n_e].

    Frames outside the labelled segment may enter the clip as context; the
    predicted middle frame never leaves it, and every position in [n_s, n_e]
    is reachable.
    """
    _validate(t, tau)
    if n_s > n_e:
        raise ValueError(f"segment start {n_s} exceeds end {n_e}")
    d = middle_offset(t, tau)
    return int(rng.integers(n_s - d, n_e - d + 1))


def center_sample_start(n_s: int, n_e: int, t: int, tau: int) -> int:
    """Deterministic start placing the clip middle at the segment midpoint."""
    _validate(t, tau)
    if n_s > n_e:
        raise ValueError(f"segment start {n_s} exceeds end {n_e}")
    return n_s + (n_e - n_s) // 2 - middle_offset(t, tau)


def clip_span_seconds(t: int, tau: int, fps: float) -> float:
    """Temporal coverage in seconds, counting one stride interval per sampled frame."""
    _validate(t, tau)
    if fps <= 0:
        raise ValueError(f"fps must be > 0, got {fps}")
    return t * tau / fps
