"""Map high-resolution hand crops into backbone feature-map coordinates and
run the enhancement forward pass.

Coordinate chain: the raw frame (full_w x full_h) is downscaled so its
shorter side becomes scale_short, a crop_size square is cut from the scaled
image at (crop_off_x, crop_off_y) and fed to the backbone; the hand stream
sees a (hand_w x hand_h) window cut from the raw frame. Normalized size and
offset express the hand window in crop-relative units so its features can be
placed into the backbone feature map.
"""

import math
from dataclasses import dataclass
from pathlib import Path

from .grid import FeatureMap, MixerWeights, concat_channels, mix_1x1, residual_norm, resize_nearest, zero_pad_place


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class CropGeometry:
    """All pixel-space quantities needed to align one hand window with the backbone crop.

    hand_x/hand_y are the top-left corner of the hand window in raw-frame pixels.
    """

    full_w: int
    full_h: int
    scale_short: int
    crop_size: int
    crop_off_x: int
    crop_off_y: int
    hand_w: int
    hand_h: int
    hand_x: int
    hand_y: int

    def __post_init__(self):
        for name in ("full_w", "full_h", "scale_short", "crop_size", "hand_w", "hand_h"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.crop_off_x < 0 or self.crop_off_y < 0:
            raise ValueError("crop offsets must be >= 0")
        if self.crop_off_x + self.crop_size > self.scaled_w or \
                self.crop_off_y + self.crop_size > self.scaled_h:
            raise ValueError(
                f"crop window ({self.crop_off_x}, {self.crop_off_y}, size {self.crop_size}) "
                f"exceeds scaled image {self.scaled_w}x{self.scaled_h}"
            )
        if not (0 <= self.hand_x <= self.full_w - self.hand_w):
            raise ValueError(f"hand window x {self.hand_x} outside frame of width {self.full_w}")
        if not (0 <= self.hand_y <= self.full_h - self.hand_h):
            raise ValueError(f"hand window y {self.hand_y} outside frame of height {self.full_h}")

    @property
    def h_short(self) -> int:
        return min(self.full_w, self.full_h)

    @property
    def scale_factor(self) -> float:
        return self.scale_short / self.h_short

    @property
    def scaled_w(self) -> int:
        return _round_half_up(self.full_w * self.scale_factor)

    @property
    def scaled_h(self) -> int:
        return _round_half_up(self.full_h * self.scale_factor)

    @classmethod
    def from_center(cls, full_w, full_h, scale_short, crop_size, crop_off_x, crop_off_y,
                    hand_w, hand_h, center_x_norm, center_y_norm):
        """Build geometry from a detector-style normalized hand center in [0, 1].

        The center is converted to a top-left corner and clamped so the hand
        window stays fully inside the raw frame, preserving its size.
        """
        hx = _round_half_up(center_x_norm * full_w - hand_w / 2)
        hy = _round_half_up(center_y_norm * full_h - hand_h / 2)
        hx = min(max(hx, 0), full_w - hand_w)
        hy = min(max(hy, 0), full_h - hand_h)
        return cls(full_w, full_h, scale_short, crop_size, crop_off_x, crop_off_y,
                   hand_w, hand_h, hx, hy)


@dataclass(frozen=True)
class AlignmentResult:
    """Hand window expressed in crop-relative units.

    norm_w/norm_h are the window size as a fraction of the crop; norm_x/norm_y
    locate its top-left corner and may be negative or exceed 1 when the hand
    lies partially outside the crop.
    """

    norm_w: float
    norm_h: float
    norm_x: float
    norm_y: float


def normalized_size(g: CropGeometry):
    """Hand window size in crop units: (w / h_short) * (scale_short / crop_size)."""
    k = g.scale_factor / g.crop_size
    return g.hand_w * k, g.hand_h * k


def normalized_offset(g: CropGeometry):
    """Hand top-left corner in crop units: scale to the downscaled image, subtract the crop origin."""
    x_scaled = g.hand_x * g.scale_factor
    y_scaled = g.hand_y * g.scale_factor
    return (x_scaled - g.crop_off_x) / g.crop_size, (y_scaled - g.crop_off_y) / g.crop_size


def alignment(g: CropGeometry) -> AlignmentResult:
    nw, nh = normalized_size(g)
    nx, ny = normalized_offset(g)
    return AlignmentResult(nw, nh, nx, ny)


def footprint(g: CropGeometry, backbone_h: int, backbone_w: int):
    """Placement rectangle of the hand map inside a (backbone_h, backbone_w) grid.

    Returns (rows, cols, off_y, off_x); rows/cols clamp up to 1, offsets may
    be negative (placement truncates).
    """
    a = alignment(g)
    rows = max(1, _round_half_up(backbone_h * a.norm_h))
    cols = max(1, _round_half_up(backbone_w * a.norm_w))
    off_y = _round_half_up(backbone_h * a.norm_y)
    off_x = _round_half_up(backbone_w * a.norm_x)
    return rows, cols, off_y, off_x


def place_hand_features(fh: FeatureMap, g: CropGeometry, backbone_h: int, backbone_w: int) -> FeatureMap:
    """Resize the hand map to its computed footprint and zero-pad-place it into backbone coordinates."""
    rows, cols, off_y, off_x = footprint(g, backbone_h, backbone_w)
    resized = resize_nearest(fh, rows, cols)
    return zero_pad_place(resized, backbone_h, backbone_w, off_y, off_x)


def enhance(f: FeatureMap, f_left: FeatureMap, f_right: FeatureMap,
            g_left: CropGeometry, g_right: CropGeometry, w: MixerWeights) -> FeatureMap:
    """Full enhancement pass: place both hand maps, concat, 1x1 mix, residual add + bn.

    Output dims always equal f's, for any geometry including fully
    out-of-crop hands.
    """
    if f_left.t != f.t or f_right.t != f.t:
        raise ValueError(
            f"frame counts differ: backbone {f.t}, left {f_left.t}, right {f_right.t}"
        )
    placed_l = place_hand_features(f_left, g_left, f.h, f.w)
    placed_r = place_hand_features(f_right, g_right, f.h, f.w)
    mixed = mix_1x1(concat_channels([f, placed_l, placed_r]), w)
    return residual_norm(f, mixed, w)


def fallback_geometry(full_w, full_h, scale_short, crop_size, crop_off_x, crop_off_y,
                      hand_w, hand_h) -> CropGeometry:
    """Geometry for a missing hand: the central (hand_w, hand_h) window of the raw frame."""
    hx = _round_half_up((full_w - hand_w) / 2)
    hy = _round_half_up((full_h - hand_h) / 2)
    return CropGeometry(full_w, full_h, scale_short, crop_size, crop_off_x, crop_off_y,
                        hand_w, hand_h, hx, hy)


_GEOMETRY_KEYS = ("full_w", "full_h", "scale_short", "crop_size", "crop_off_x",
                  "crop_off_y", "hand_w", "hand_h", "hand_cx", "hand_cy")


def load_geometry(path) -> CropGeometry:
    """Read the key=value geometry fixture; hand_cx/hand_cy are the normalized hand center."""
    vals = {}
    for ln, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{ln}: expected key=value, got {line!r}")
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in _GEOMETRY_KEYS:
            raise ValueError(f"{path}:{ln}: unknown geometry key {key!r}")
        vals[key] = float(raw.strip())
    missing = [k for k in _GEOMETRY_KEYS if k not in vals]
    if missing:
        raise ValueError(f"{path}: missing geometry keys: {', '.join(missing)}")
    return CropGeometry.from_center(
        int(vals["full_w"]), int(vals["full_h"]), int(vals["scale_short"]),
        int(vals["crop_size"]), int(vals["crop_off_x"]), int(vals["crop_off_y"]),
        int(vals["hand_w"]), int(vals["hand_h"]), vals["hand_cx"], vals["hand_cy"],
    )
