"""Frame accuracy, segmental edit score, segmental F1 at IoU thresholds, and
segment-level (pre-cropped clip) F1."""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .timeline import BACKGROUND_ID, Segment, as_timeline, segments_from_timeline  # noqa: F401


@dataclass(frozen=True)
class EvalConfig:
    iou_thresholds: tuple = (0.1, 0.25, 0.5)
    ignore_background: bool = True
    background_id: int = BACKGROUND_ID

    def __post_init__(self):
        for thr in self.iou_thresholds:
            if not 0 < thr <= 1:
                raise ValueError(f"IoU threshold must be in (0, 1], got {thr}")


DEFAULT_EVAL = EvalConfig()


def _scored_segments(labels, cfg):
    segs = segments_from_timeline(labels)
    if cfg.ignore_background:
        segs = [s for s in segs if s.class_id != cfg.background_id]
    return segs


def frame_accuracy(pred, gt, cfg: EvalConfig = DEFAULT_EVAL) -> float:
    """Percent of frames labelled correctly; background ground truth is skipped when ignored."""
    p, g = as_timeline(pred), as_timeline(gt)
    if p.size != g.size:
        raise ValueError(f"length mismatch: {p.size} vs {g.size}")
    if cfg.ignore_background:
        mask = g != cfg.background_id
        if not mask.any():
            return 100.0
        p, g = p[mask], g[mask]
    return 100.0 * float(np.mean(p == g))


def edit_score(pred, gt, cfg: EvalConfig = DEFAULT_EVAL) -> float:
    """100 * (1 - levenshtein(pred segment labels, gt segment labels) / max length)."""
    p, g = as_timeline(pred), as_timeline(gt)
    if p.size != g.size:
        raise ValueError(f"length mismatch: {p.size} vs {g.size}")
    pl = np.array([s.class_id for s in _scored_segments(p, cfg)], dtype=np.int64)
    gl = np.array([s.class_id for s in _scored_segments(g, cfg)], dtype=np.int64)
    longest = max(pl.size, gl.size)
    if longest == 0:
        return 100.0
    dist = _kernels.levenshtein(pl, gl)
    return 100.0 * (1.0 - dist / longest)


def _match_counts(pred_segs, gt_segs, threshold):
    """Greedy matching: predictions in temporal order claim the unconsumed
    same-class ground-truth segment of maximal IoU (ties to the earliest);
    a claim below the threshold is a false positive and consumes nothing."""
    if gt_segs:
        g_start = np.array([s.start for s in gt_segs], dtype=np.float64)
        g_end = np.array([s.end for s in gt_segs], dtype=np.float64)
        g_cls = np.array([s.class_id for s in gt_segs], dtype=np.int64)
    used = np.zeros(len(gt_segs), dtype=bool)
    tp = fp = 0
    for p in pred_segs:
        if not gt_segs:
            fp += 1
            continue
        inter = np.minimum(g_end, p.end) - np.maximum(g_start, p.start)
        union = np.maximum(g_end, p.end) - np.minimum(g_start, p.start)
        iou = np.maximum(inter, 0.0) / union
        iou[(g_cls != p.class_id) | used] = -1.0
        best = int(np.argmax(iou))
        if iou[best] >= threshold:
            tp += 1
            used[best] = True
        else:
            fp += 1
    fn = int(len(gt_segs) - used.sum())
    return tp, fp, fn


def _f1_pct(tp, fp, fn) -> float:
    denom = 2 * tp + fp + fn
    if denom == 0:
        return 100.0
    return 100.0 * 2 * tp / denom


def f1_at_iou(pred, gt, threshold: float, cfg: EvalConfig = DEFAULT_EVAL) -> float:
    """Segmental F1 (percent) at one IoU threshold."""
    p, g = as_timeline(pred), as_timeline(gt)
    if p.size != g.size:
        raise ValueError(f"length mismatch: {p.size} vs {g.size}")
    tp, fp, fn = _match_counts(_scored_segments(p, cfg), _scored_segments(g, cfg), threshold)
    return _f1_pct(tp, fp, fn)


def per_class_f1(pred, gt, threshold: float, cfg: EvalConfig = DEFAULT_EVAL):
    """Per-class tp/fp/fn/F1 of the segmental matching at one threshold.

    Matching never crosses classes, so the global greedy pass decomposes into
    independent per-class passes over classes present on either side.
    """
    p, g = as_timeline(pred), as_timeline(gt)
    pred_segs = _scored_segments(p, cfg)
    gt_segs = _scored_segments(g, cfg)
    classes = sorted({s.class_id for s in pred_segs} | {s.class_id for s in gt_segs})
    rows = []
    for cid in classes:
        tp, fp, fn = _match_counts([s for s in pred_segs if s.class_id == cid],
                                   [s for s in gt_segs if s.class_id == cid], threshold)
        rows.append({"class_id": cid, "tp": tp, "fp": fp, "fn": fn, "f1": _f1_pct(tp, fp, fn)})
    return rows


def segment_level_f1(pred_labels, gt_labels, micro: bool = False) -> float:
    """Multiclass F1 over pre-cropped clip predictions.

    Macro (default) averages per-class F1 over the classes present in the
    ground truth; micro pools tp/fp/fn globally.
    """
    p = np.asarray(pred_labels, dtype=np.int64)
    g = np.asarray(gt_labels, dtype=np.int64)
    if p.shape != g.shape or p.ndim != 1:
        raise ValueError(f"aligned 1-d label lists required, got {p.shape} vs {g.shape}")
    if p.size == 0:
        raise ValueError("empty label lists")
    classes = np.unique(g)
    tps = np.array([np.sum((p == c) & (g == c)) for c in classes], dtype=np.float64)
    fps = np.array([np.sum((p == c) & (g != c)) for c in classes], dtype=np.float64)
    fns = np.array([np.sum((p != c) & (g == c)) for c in classes], dtype=np.float64)
    if micro:
        return _f1_pct(tps.sum(), fps.sum(), fns.sum())
    return float(np.mean(200.0 * tps / (2 * tps + fps + fns)))


def evaluate(pred, gt, cfg: EvalConfig = DEFAULT_EVAL, class_names=None) -> dict:
    """Full report: accuracy, edit score, F1 at each threshold, per-class detail."""
    report = {
        "acc": frame_accuracy(pred, gt, cfg),
        "edit": edit_score(pred, gt, cfg),
        "f1": {f"{thr:g}": f1_at_iou(pred, gt, thr, cfg) for thr in cfg.iou_thresholds},
    }
    detail_thr = max(cfg.iou_thresholds)
    rows = per_class_f1(pred, gt, detail_thr, cfg)
    if class_names:
        for row in rows:
            name = class_names.get(row["class_id"])
            if name:
                row["name"] = name
    report["per_class"] = rows
    report["per_class_iou"] = detail_thr
    return report
