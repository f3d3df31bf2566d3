"""Per-class length statistics and temporally aware label cleaning.

A predicted run is "statistically too short" when its length is strictly
below floor(mean - kappa*std) for its class; such runs are absorbed into the
previous confirmed action. kappa is calibrated by sweeping [1.0, 2.0] in 0.1
steps against background-omitted F1@0.5.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import metrics
from .timeline import BACKGROUND_ID, NUM_CLASSES, as_timeline

SWEEP_KAPPAS = tuple(round(1.0 + 0.1 * i, 1) for i in range(11))


@dataclass(frozen=True)
class ClassStats:
    """Population mean/std of one class's segment lengths, in frames."""

    class_id: int
    count: int
    mean_frames: float
    std_frames: float
    name: str = ""

    def __post_init__(self):
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")
        if self.mean_frames <= 0:
            raise ValueError(f"mean_frames must be > 0, got {self.mean_frames}")
        if self.std_frames < 0:
            raise ValueError(f"std_frames must be >= 0, got {self.std_frames}")


def compute_class_stats(segments):
    """Per-class mean and population standard deviation of segment lengths."""
    lengths = {}
    for s in segments:
        lengths.setdefault(s.class_id, []).append(s.length)
    stats = {}
    for cid, ls in sorted(lengths.items()):
        arr = np.asarray(ls, dtype=np.float64)
        stats[cid] = ClassStats(cid, arr.size, float(arr.mean()), float(arr.std()))
    return stats


def threshold(stats: ClassStats, kappa: float) -> int:
    """Minimum accepted run length: max(1, floor(mean - kappa*std))."""
    return max(1, math.floor(stats.mean_frames - kappa * stats.std_frames))


@dataclass(frozen=True)
class CleanerConfig:
    kappa: float = 1.4
    stats: dict = field(default_factory=dict)
    fps: float = 15.0
    background_id: int = BACKGROUND_ID
    num_classes: int = NUM_CLASSES

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        if self.fps <= 0:
            raise ValueError(f"fps must be > 0, got {self.fps}")

    def threshold_for(self, class_id: int) -> int:
        # classes unseen in training clean at threshold 1 (never too short)
        st = self.stats.get(class_id)
        return threshold(st, self.kappa) if st is not None else 1

    def max_threshold(self) -> int:
        if not self.stats:
            return 1
        return max(self.threshold_for(c) for c in self.stats)


class StreamCleaner:
    """Streaming run-length filter; emits (frame, label) pairs as they finalize.

    Frames buffer until their run either reaches its class threshold
    (confirmed: the run survives, later same-label frames pass straight
    through) or ends early (too short: the buffered frames are relabeled with
    the previous confirmed action and merge into it). The previous action
    starts as background, so a too-short leading run becomes background. A
    frame therefore waits at most max-threshold pushes before finalizing.
    """

    def __init__(self, cfg: CleanerConfig):
        self.cfg = cfg
        self._prev = cfg.background_id
        self._label = None
        self._buf = []
        self._len = 0
        self._confirmed = False
        self._last_frame = None
        self._closed = False

    def _start_run(self, frame, label, out):
        self._label = label
        self._len = 1
        if 1 >= self.cfg.threshold_for(label):
            self._confirmed = True
            self._prev = label
            self._buf = []
            out.append((frame, label))
        else:
            self._confirmed = False
            self._buf = [frame]

    def push(self, frame_index: int, raw_label: int):
        """Feed one raw prediction; returns the labels finalized by it, in frame order."""
        if self._closed:
            raise RuntimeError("cleaner already flushed")
        if self._last_frame is not None and frame_index <= self._last_frame:
            raise ValueError(f"out-of-order push: frame {frame_index} after {self._last_frame}")
        label = int(raw_label)
        if not 0 <= label < self.cfg.num_classes:
            raise ValueError(f"label {label} outside [0, {self.cfg.num_classes})")
        self._last_frame = frame_index

        out = []
        if self._label is None:
            self._start_run(frame_index, label, out)
        elif label == self._label:
            self._len += 1
            if self._confirmed:
                out.append((frame_index, label))
            else:
                self._buf.append(frame_index)
                if self._len >= self.cfg.threshold_for(label):
                    self._confirmed = True
                    self._prev = label
                    out.extend((f, label) for f in self._buf)
                    self._buf = []
        elif self._confirmed:
            self._start_run(frame_index, label, out)
        else:
            # too-short run: relabel it with the previous action and merge
            out.extend((f, self._prev) for f in self._buf)
            self._buf = []
            if label == self._prev:
                # incoming frame continues the merged (already confirmed) run
                self._label = self._prev
                self._confirmed = True
                self._len += 1
                out.append((frame_index, label))
            else:
                self._start_run(frame_index, label, out)
        return out

    def flush(self):
        """Finalize a pending run; a still-unconfirmed tail merges into the previous action."""
        if self._closed:
            raise RuntimeError("cleaner already flushed")
        self._closed = True
        if self._confirmed or self._label is None:
            return []
        out = [(f, self._prev) for f in self._buf]
        self._buf = []
        return out


def clean_stream(cfg: CleanerConfig) -> StreamCleaner:
    return StreamCleaner(cfg)


def clean_timeline(labels, cfg: CleanerConfig) -> np.ndarray:
    """Offline cleaning: stream the whole timeline through a cleaner and flush."""
    arr = as_timeline(labels)
    cleaner = StreamCleaner(cfg)
    out = np.empty_like(arr)
    seen = 0
    for i, lab in enumerate(arr):
        for f, cl in cleaner.push(i, int(lab)):
            out[f] = cl
            seen += 1
    for f, cl in cleaner.flush():
        out[f] = cl
        seen += 1
    assert seen == arr.size  # every frame finalized exactly once
    return out


def kappa_scores(timelines_raw, timelines_gt, cfg_base: CleanerConfig):
    """Mean background-omitted F1@0.5 after cleaning, per sweep kappa."""
    raws = [as_timeline(t) for t in timelines_raw]
    gts = [as_timeline(t) for t in timelines_gt]
    if not raws or len(raws) != len(gts):
        raise ValueError(f"need matching raw/gt timelines, got {len(raws)} vs {len(gts)}")
    eval_cfg = metrics.EvalConfig(ignore_background=True, background_id=cfg_base.background_id)
    scores = {}
    for kappa in SWEEP_KAPPAS:
        cfg = CleanerConfig(kappa, cfg_base.stats, cfg_base.fps,
                            cfg_base.background_id, cfg_base.num_classes)
        vals = [metrics.f1_at_iou(clean_timeline(r, cfg), g, 0.5, eval_cfg)
                for r, g in zip(raws, gts)]
        scores[kappa] = float(np.mean(vals))
    return scores


def sweep_kappa(timelines_raw, timelines_gt, cfg_base: CleanerConfig) -> float:
    """kappa in {1.0 .. 2.0} maximizing mean F1@0.5 after cleaning; ties pick the smaller."""
    scores = kappa_scores(timelines_raw, timelines_gt, cfg_base)
    return max(SWEEP_KAPPAS, key=lambda k: (scores[k], -k))


def read_class_stats(path):
    """JSON array of {class_id, name, count, mean_frames, std_frames} -> dict by class id."""
    try:
        records = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(records, list) or not records:
        raise ValueError(f"{path}: expected a nonempty JSON array of class stats")
    stats = {}
    for i, rec in enumerate(records):
        try:
            cid = int(rec["class_id"])
            stats[cid] = ClassStats(cid, int(rec["count"]), float(rec["mean_frames"]),
                                    float(rec["std_frames"]), str(rec.get("name", "")))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{path}: record {i}: {exc}") from None
    return stats


def write_class_stats(stats, path) -> None:
    records = [
        {"class_id": s.class_id, "name": s.name, "count": s.count,
         "mean_frames": s.mean_frames, "std_frames": s.std_frames}
        for s in (stats[c] for c in sorted(stats))
    ]
    Path(path).write_text(json.dumps(records, indent=2) + "\n")
