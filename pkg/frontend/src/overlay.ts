/** Panel-box overlay geometry: scale serialized boxes into display space. */
import type { PanelBox } from "./types.js";

export interface OverlayRect {
  panelId: string;
  label: string;
  left: number;
  top: number;
  width: number;
  height: number;
}

/**
 * Scale panel boxes from natural image coordinates into the displayed
 * element's coordinate space, clamping every rect inside the display bounds
 * so overlays never spill outside the rendered image.
 */
export function computeOverlayRects(
  panels: PanelBox[],
  naturalWidth: number,
  naturalHeight: number,
  displayWidth: number,
  displayHeight: number,
): OverlayRect[] {
  if (naturalWidth <= 0 || naturalHeight <= 0 || displayWidth <= 0 || displayHeight <= 0) {
    return [];
  }
  const scaleX = displayWidth / naturalWidth;
  const scaleY = displayHeight / naturalHeight;
  return panels.map((panel) => {
    const left = clamp(panel.x * scaleX, 0, displayWidth);
    const top = clamp(panel.y * scaleY, 0, displayHeight);
    const width = clamp(panel.w * scaleX, 0, displayWidth - left);
    const height = clamp(panel.h * scaleY, 0, displayHeight - top);
    return {
      panelId: panel.panel_id,
      label: panel.label ?? panel.panel_id,
      left,
      top,
      width,
      height,
    };
  });
}

function clamp(value: number, lo: number, hi: number): number {
  return Math.min(Math.max(value, lo), hi);
}
