"""Compound-figure panel segmentation.

Default segmenter is a deterministic projection-profile heuristic: pixels
with grayscale value >= BACKGROUND_LEVEL count as background; a gutter is a
full-width (or full-height) background band at least ``min_gutter`` pixels
thick; regions are cut recursively on alternating axes and trimmed to their
content bounding box. Segmentation is a pure function of the pixel data.
"""
from __future__ import annotations

import io
from typing import Protocol

import numpy as np
from PIL import Image

from ..errors import DegenerateImage, ImageDecodeError
from .boxes import PanelBox, order_panels

BACKGROUND_LEVEL = 250  # grayscale 0..255; >= counts as background
DEFAULT_MIN_PANEL = 64
DEFAULT_MIN_GUTTER = 5

_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


class PanelSegmenter(Protocol):
    """Anything that maps a decoded grayscale array to panel boxes."""

    def segment(self, gray: np.ndarray, min_panel: int, min_gutter: int) -> list[PanelBox]: ...


def decode_image(data: bytes) -> np.ndarray:
    """Decode PNG/JPEG bytes to a grayscale uint8 array (rows x cols)."""
    try:
        with Image.open(io.BytesIO(data)) as img:
            return np.asarray(img.convert("L"), dtype=np.uint8)
    except Exception as exc:
        raise ImageDecodeError(f"cannot decode image: {exc}") from exc


def split_panels(
    image: bytes | np.ndarray,
    min_panel: int = DEFAULT_MIN_PANEL,
    min_gutter: int = DEFAULT_MIN_GUTTER,
) -> list[PanelBox]:
    """Segment a compound figure into row-major-ordered panel boxes.

    Accepts raw PNG/JPEG bytes or an already-decoded grayscale array. Returns
    at least one box; the boxes jointly cover every non-background pixel.
    """
    gray = decode_image(image) if isinstance(image, (bytes, bytearray)) else np.asarray(image)
    h, w = gray.shape
    if w < min_panel or h < min_panel:
        raise DegenerateImage(f"image {w}x{h} smaller than min panel {min_panel}px")

    background = gray >= BACKGROUND_LEVEL
    regions: list[tuple[int, int, int, int]] = []
    _segment(background, 0, 0, w, h, "x", min_panel, min_gutter, regions, tried_other=False)
    if not regions:
        regions = [(0, 0, w, h)]

    boxes = [PanelBox(panel_id="tmp", x=x, y=y, width=rw, height=rh) for x, y, rw, rh in regions]
    # panel ids follow the final row-major order, not discovery order
    return [
        PanelBox(panel_id=_panel_name(i), x=b.x, y=b.y, width=b.width, height=b.height)
        for i, b in enumerate(order_panels(boxes))
    ]


def _panel_name(index: int) -> str:
    if index < len(_LETTERS):
        return _LETTERS[index]
    return f"{_LETTERS[index % 26]}{index // 26}"


def _trim(background: np.ndarray, x: int, y: int, w: int, h: int) -> tuple[int, int, int, int] | None:
    """Shrink a region to the bounding box of its non-background pixels."""
    sub = background[y:y + h, x:x + w]
    content = ~sub
    if not content.any():
        return None
    rows = np.flatnonzero(content.any(axis=1))
    cols = np.flatnonzero(content.any(axis=0))
    return (
        x + int(cols[0]),
        y + int(rows[0]),
        int(cols[-1] - cols[0] + 1),
        int(rows[-1] - rows[0] + 1),
    )


def _gutter_cuts(profile: np.ndarray, min_gutter: int) -> list[tuple[int, int]]:
    """Interior runs of all-background profile positions, >= min_gutter long."""
    runs = []
    start = None
    for i, is_bg in enumerate(profile):
        if is_bg and start is None:
            start = i
        elif not is_bg and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(profile)))
    # interior only: trimmed regions never start or end with background
    return [(s, e) for s, e in runs if s > 0 and e < len(profile) and e - s >= min_gutter]


def _segment(
    background: np.ndarray,
    x: int, y: int, w: int, h: int,
    axis: str,
    min_panel: int,
    min_gutter: int,
    out: list[tuple[int, int, int, int]],
    tried_other: bool,
) -> None:
    trimmed = _trim(background, x, y, w, h)
    if trimmed is None:
        return
    x, y, w, h = trimmed

    if w < min_panel or h < min_panel:
        out.append((x, y, w, h))
        return

    sub = background[y:y + h, x:x + w]
    if axis == "x":
        profile = sub.all(axis=0)  # column is gutter iff fully background
    else:
        profile = sub.all(axis=1)
    cuts = _gutter_cuts(profile, min_gutter)

    if not cuts:
        if tried_other:
            out.append((x, y, w, h))
            return
        _segment(background, x, y, w, h, "y" if axis == "x" else "x",
                 min_panel, min_gutter, out, tried_other=True)
        return

    ends = [s for s, _ in cuts] + [len(profile)]
    starts = [0] + [e for _, e in cuts]
    for s, e in zip(starts, ends):
        if e <= s:
            continue
        if axis == "x":
            _segment(background, x + s, y, e - s, h, "y", min_panel, min_gutter, out, tried_other=False)
        else:
            _segment(background, x, y + s, w, e - s, "x", min_panel, min_gutter, out, tried_other=False)
