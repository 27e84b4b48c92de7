import { describe, expect, it } from "vitest";

import { computeOverlayRects } from "../src/overlay.js";
import type { PanelBox } from "../src/types.js";

const panels: PanelBox[] = [
  { panel_id: "A", label: "A", x: 10, y: 10, w: 90, h: 90 },
  { panel_id: "B", label: null, x: 110, y: 10, w: 90, h: 90 },
];

describe("computeOverlayRects", () => {
  it("scales boxes into display space", () => {
    const rects = computeOverlayRects(panels, 200, 100, 100, 50);
    expect(rects).toHaveLength(2);
    expect(rects[0]).toMatchObject({ left: 5, top: 5, width: 45, height: 45 });
    expect(rects[1]!.left).toBe(55);
  });

  it("identity scale preserves coordinates", () => {
    const rects = computeOverlayRects(panels, 200, 100, 200, 100);
    expect(rects[0]).toMatchObject({ left: 10, top: 10, width: 90, height: 90 });
  });

  it("clamps rects inside the display bounds", () => {
    const wild: PanelBox[] = [{ panel_id: "X", label: "X", x: 180, y: 80, w: 100, h: 100 }];
    const [rect] = computeOverlayRects(wild, 200, 100, 200, 100);
    expect(rect!.left + rect!.width).toBeLessThanOrEqual(200);
    expect(rect!.top + rect!.height).toBeLessThanOrEqual(100);
  });

  it("falls back to panel_id when label is missing", () => {
    const rects = computeOverlayRects(panels, 200, 100, 200, 100);
    expect(rects[1]!.label).toBe("B");
  });

  it("returns nothing for degenerate dimensions", () => {
    expect(computeOverlayRects(panels, 0, 100, 200, 100)).toEqual([]);
    expect(computeOverlayRects(panels, 200, 100, 0, 0)).toEqual([]);
  });
});
