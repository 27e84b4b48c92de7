"""Panel geometry: boxes, ordering, and pairwise spatial relations."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

ROW_QUANTUM = 10  # px; top-left y values within a 10px band share a row


class SpatialRelation(enum.Enum):
    LEFT_OF = "left_of"
    RIGHT_OF = "right_of"
    ABOVE = "above"
    BELOW = "below"
    ABOVE_LEFT = "above_left"
    ABOVE_RIGHT = "above_right"
    BELOW_LEFT = "below_left"
    BELOW_RIGHT = "below_right"
    COINCIDENT = "coincident"

    def mirror(self) -> "SpatialRelation":
        return _MIRROR[self]


_MIRROR = {
    SpatialRelation.LEFT_OF: SpatialRelation.RIGHT_OF,
    SpatialRelation.RIGHT_OF: SpatialRelation.LEFT_OF,
    SpatialRelation.ABOVE: SpatialRelation.BELOW,
    SpatialRelation.BELOW: SpatialRelation.ABOVE,
    SpatialRelation.ABOVE_LEFT: SpatialRelation.BELOW_RIGHT,
    SpatialRelation.BELOW_RIGHT: SpatialRelation.ABOVE_LEFT,
    SpatialRelation.ABOVE_RIGHT: SpatialRelation.BELOW_LEFT,
    SpatialRelation.BELOW_LEFT: SpatialRelation.ABOVE_RIGHT,
    SpatialRelation.COINCIDENT: SpatialRelation.COINCIDENT,
}

_PHRASES = {
    SpatialRelation.LEFT_OF: "to the left of",
    SpatialRelation.RIGHT_OF: "to the right of",
    SpatialRelation.ABOVE: "above",
    SpatialRelation.BELOW: "below",
    SpatialRelation.ABOVE_LEFT: "above and to the left of",
    SpatialRelation.ABOVE_RIGHT: "above and to the right of",
    SpatialRelation.BELOW_LEFT: "below and to the left of",
    SpatialRelation.BELOW_RIGHT: "below and to the right of",
    SpatialRelation.COINCIDENT: "at the same position as",
}


def relation_phrase(relation: SpatialRelation) -> str:
    """English phrase used by the spatial question/answer templates."""
    return _PHRASES[relation]


@dataclass(frozen=True)
class PanelBox:
    panel_id: str
    x: int
    y: int
    width: int
    height: int
    label: str | None = None

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"panel {self.panel_id!r}: degenerate box {self.width}x{self.height}")

    @property
    def area(self) -> int:
        return self.width * self.height

    def center(self) -> tuple[float, float]:
        return (self.x + self.width / 2.0, self.y + self.height / 2.0)

    def within(self, image_w: int, image_h: int) -> bool:
        return self.x >= 0 and self.y >= 0 and self.x + self.width <= image_w and self.y + self.height <= image_h

    def overlap_area(self, other: "PanelBox") -> int:
        ox = max(0, min(self.x + self.width, other.x + other.width) - max(self.x, other.x))
        oy = max(0, min(self.y + self.height, other.y + other.height) - max(self.y, other.y))
        return ox * oy

    def to_json(self) -> dict:
        return {"panel_id": self.panel_id, "label": self.label,
                "x": self.x, "y": self.y, "w": self.width, "h": self.height}

    @classmethod
    def from_json(cls, data: dict) -> "PanelBox":
        return cls(data["panel_id"], data["x"], data["y"], data["w"], data["h"], data.get("label"))


def order_panels(boxes: list[PanelBox]) -> list[PanelBox]:
    """Row-major order: top-to-bottom in 10px row bands, then left-to-right."""
    return sorted(boxes, key=lambda b: (b.y // ROW_QUANTUM, b.x, b.y))


@dataclass
class CompoundFigureRecord:
    figure_id: str
    image_width: int
    image_height: int
    panels: list[PanelBox]
    caption: str
    sub_captions: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.panels = order_panels(self.panels)
        ids = [p.panel_id for p in self.panels]
        if len(ids) != len(set(ids)):
            raise ValueError(f"figure {self.figure_id!r}: duplicate panel ids")
        for p in self.panels:
            if not p.within(self.image_width, self.image_height):
                raise ValueError(f"figure {self.figure_id!r}: panel {p.panel_id!r} exceeds image bounds")
        for i, a in enumerate(self.panels):
            for b in self.panels[i + 1:]:
                smaller = min(a.area, b.area)
                if a.overlap_area(b) > 0.05 * smaller:
                    raise ValueError(
                        f"figure {self.figure_id!r}: panels {a.panel_id!r}/{b.panel_id!r} "
                        f"overlap more than 5% of the smaller panel"
                    )

    def panel(self, panel_id: str) -> PanelBox:
        for p in self.panels:
            if p.panel_id == panel_id:
                return p
        raise KeyError(panel_id)


def derive_spatial_relation(
    a: PanelBox,
    b: PanelBox,
    image_w: int,
    image_h: int,
    tau: float = 0.05,
) -> SpatialRelation:
    """Relation of panel ``a`` to panel ``b`` from a's perspective.

    Center offsets smaller than ``tau`` times the corresponding image
    dimension are treated as aligned on that axis; dx > 0 means a is left of
    b. Both axes aligned yields COINCIDENT.
    """
    if not a.within(image_w, image_h) or not b.within(image_w, image_h):
        raise ValueError("boxes must lie within the image bounds")
    ax, ay = a.center()
    bx, by = b.center()
    dx = bx - ax
    dy = by - ay
    horizontal = ""
    vertical = ""
    if abs(dx) > tau * image_w:
        horizontal = "left" if dx > 0 else "right"
    if abs(dy) > tau * image_h:
        vertical = "above" if dy > 0 else "below"
    if not horizontal and not vertical:
        return SpatialRelation.COINCIDENT
    if not vertical:
        return SpatialRelation.LEFT_OF if horizontal == "left" else SpatialRelation.RIGHT_OF
    if not horizontal:
        return SpatialRelation.ABOVE if vertical == "above" else SpatialRelation.BELOW
    return SpatialRelation[f"{vertical}_{horizontal}".upper()]
