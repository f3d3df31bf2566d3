"""Hand-localizer output decoding, the masked regression loss with its
analytic gradient, and the distance-thresholded F1 metric."""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class HandObservation:
    """Predicted presence probability and normalized position, all in [0, 1]."""

    p: float
    x: float
    y: float

    def __post_init__(self):
        for name in ("p", "x", "y"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


@dataclass(frozen=True)
class HandTarget:
    """Ground truth: presence flag in {0, 1} and normalized position (arbitrary when absent)."""

    present: int
    x: float
    y: float

    def __post_init__(self):
        if self.present not in (0, 1):
            raise ValueError(f"present must be 0 or 1, got {self.present}")


@dataclass(frozen=True)
class HandLossConfig:
    """lam weights the presence term against the masked position term."""

    lam: float = 0.1

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")


def decode(v):
    """Split a [p1, x1, y1, p2, x2, y2] vector into two observations."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (6,):
        raise ValueError(f"expected a 6-vector, got shape {v.shape}")
    return HandObservation(v[0], v[1], v[2]), HandObservation(v[3], v[4], v[5])


def hand_loss(pred, gt, cfg: HandLossConfig = HandLossConfig()) -> float:
    """lam * sum_i (P_i - p_i)^2 + sum_i P_i * ((x_i - x_i')^2 + (y_i - y_i')^2).

    Position residuals of absent hands are masked out entirely, so the model
    is free to place hands it does not predict.
    """
    obs = decode(pred)
    loss = 0.0
    for o, t in zip(obs, gt):
        loss += cfg.lam * (t.present - o.p) ** 2
        loss += t.present * ((t.x - o.x) ** 2 + (t.y - o.y) ** 2)
    return loss


def hand_loss_grad(pred, gt, cfg: HandLossConfig = HandLossConfig()) -> np.ndarray:
    """Analytic gradient of hand_loss with respect to the 6 predicted values."""
    obs = decode(pred)
    g = np.empty(6, dtype=np.float64)
    for i, (o, t) in enumerate(zip(obs, gt)):
        g[3 * i] = -2.0 * cfg.lam * (t.present - o.p)
        g[3 * i + 1] = -2.0 * t.present * (t.x - o.x)
        g[3 * i + 2] = -2.0 * t.present * (t.y - o.y)
    return g


def f1_at_threshold(preds, gts, t_l: float) -> float:
    """F1 (percent) over aligned hand slots at localization threshold t_l.

    A slot is TP when the hand is present, predicted (p > 0.5, strictly) and
    within t_l of the target (strictly). A present-but-mislocated prediction
    counts as both FP and FN: the detection is wrong and the true hand went
    unfound. Returns 100 when no slot has anything to find or flag.
    """
    if len(preds) != len(gts):
        raise ValueError(f"length mismatch: {len(preds)} predictions vs {len(gts)} targets")
    tp = fp = fn = 0
    for o, t in zip(preds, gts):
        predicted = o.p > 0.5
        if t.present:
            hit = predicted and np.hypot(o.x - t.x, o.y - t.y) < t_l
            if hit:
                tp += 1
            else:
                fn += 1
                if predicted:
                    fp += 1
        elif predicted:
            fp += 1
    denom = 2 * tp + fp + fn
    if denom == 0:
        return 100.0
    return 100.0 * 2 * tp / denom


def _read_rows(path):
    rows = []
    with open(path, newline="") as fh:
        for ln, row in enumerate(csv.reader(fh), 1):
            if not row or (ln == 1 and not row[0].strip().lstrip("-").isdigit()):
                continue  # header or blank
            if len(row) != 7:
                raise ValueError(f"{path}:{ln}: expected 7 columns, got {len(row)}")
            try:
                rows.append((int(row[0]), *(float(x) for x in row[1:])))
            except ValueError as exc:
                raise ValueError(f"{path}:{ln}: {exc}") from None
    return rows


def read_hand_predictions(path):
    """CSV `frame,p1,x1,y1,p2,x2,y2` -> list of (frame, left, right) observations."""
    out = []
    for frame, p1, x1, y1, p2, x2, y2 in _read_rows(path):
        out.append((frame, HandObservation(p1, x1, y1), HandObservation(p2, x2, y2)))
    return out


def read_hand_targets(path):
    """Same CSV shape with p in {0, 1} -> list of (frame, left, right) targets."""
    out = []
    for frame, p1, x1, y1, p2, x2, y2 in _read_rows(path):
        out.append((frame, HandTarget(int(p1), x1, y1), HandTarget(int(p2), x2, y2)))
    return out


def write_hand_csv(path, rows) -> None:
    """rows: iterable of (frame, (p1, x1, y1), (p2, x2, y2))."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["frame", "p1", "x1", "y1", "p2", "x2", "y2"])
        for frame, left, right in rows:
            wr.writerow([frame, *left, *right])


def flatten_slots(pairs):
    """Interleave per-frame (left, right) records into one slot-aligned list."""
    out = []
    for _, left, right in pairs:
        out.append(left)
        out.append(right)
    return out
