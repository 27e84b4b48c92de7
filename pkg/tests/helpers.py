"""Shared fixture builders: synthetic images, article packages, corpora."""
from __future__ import annotations

import io
import json
from pathlib import Path

from PIL import Image, ImageDraw


def png_bytes(width: int, height: int, rects: list[tuple[int, int, int, int]],
              bg: int = 255, fg: int = 40) -> bytes:
    """White canvas with dark filled rectangles (x, y, w, h)."""
    img = Image.new("L", (width, height), bg)
    draw = ImageDraw.Draw(img)
    for x, y, w, h in rects:
        draw.rectangle([x, y, x + w - 1, y + h - 1], fill=fg)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def grid_png(cols: int, rows: int, panel: int = 90, gutter: int = 10, margin: int = 10) -> bytes:
    """Regular grid of dark panels with white gutters; panels row-major."""
    width = margin * 2 + cols * panel + (cols - 1) * gutter
    height = margin * 2 + rows * panel + (rows - 1) * gutter
    rects = []
    for r in range(rows):
        for c in range(cols):
            rects.append((margin + c * (panel + gutter), margin + r * (panel + gutter), panel, panel))
    return png_bytes(width, height, rects)


def words(n: int, prefix: str = "word") -> str:
    return " ".join(f"{prefix}{i}" for i in range(n))


def long_caption(n_words: int = 60, lead: str = "") -> str:
    lead_words = lead.split()
    return " ".join(lead_words + [f"finding{i}" for i in range(n_words - len(lead_words))])


def write_package(
    root: Path,
    article_id: str = "PMC0001",
    license: str = "CC BY",
    title: str = "A synthetic case report",
    paragraphs: list[dict] | None = None,
    figures: list[dict] | None = None,
    fmt: str = "json",
) -> Path:
    """Create an article package directory.

    ``figures`` entries: {figure_id, caption, sub_captions?, image? (bytes)}.
    ``paragraphs`` entries: {para_id, text, fig_refs}.
    """
    root.mkdir(parents=True, exist_ok=True)
    (root / "figures").mkdir(exist_ok=True)
    figures = figures if figures is not None else [{"figure_id": "F1", "caption": long_caption()}]
    paragraphs = paragraphs if paragraphs is not None else [
        {"para_id": "p0001", "text": "Shown in the compound figure.", "fig_refs": [f["figure_id"] for f in figures]},
    ]

    fig_manifest = []
    for fig in figures:
        graphic = fig.get("graphic", f"figures/{fig['figure_id'].lower()}.png")
        image = fig.get("image", grid_png(2, 2))
        if image is not None:
            (root / graphic).parent.mkdir(parents=True, exist_ok=True)
            (root / graphic).write_bytes(image)
        fig_manifest.append({
            "figure_id": fig["figure_id"],
            "graphic": graphic,
            "caption": fig["caption"],
            "sub_captions": dict(fig.get("sub_captions") or {}),
        })

    if fmt == "json":
        manifest = {
            "article_id": article_id,
            "license": license,
            "title": title,
            "paragraphs": [
                {"para_id": p["para_id"], "text": p["text"], "fig_refs": sorted(p["fig_refs"])}
                for p in paragraphs
            ],
            "figures": fig_manifest,
        }
        (root / "article.json").write_text(json.dumps(manifest, indent=2, ensure_ascii=False), encoding="utf-8")
    elif fmt == "xml":
        (root / "article.xml").write_text(
            _xml_source(article_id, license, title, paragraphs, fig_manifest), encoding="utf-8"
        )
    else:
        raise ValueError(fmt)
    return root


def _xml_source(article_id, license, title, paragraphs, figures) -> str:
    def esc(s: str) -> str:
        return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")

    ps = []
    for p in paragraphs:
        refs = "".join(f'<xref ref-type="fig" rid="{r}"/>' for r in sorted(p["fig_refs"]))
        ps.append(f'<p id="{p["para_id"]}">{esc(p["text"])}{refs}</p>')
    figs = []
    for f in figures:
        figs.append(
            f'<fig id="{f["figure_id"]}"><caption><p>{esc(f["caption"])}</p></caption>'
            f'<graphic xlink:href="{f["graphic"]}"/></fig>'
        )
    return (
        '<article xmlns:xlink="http://www.w3.org/1999/xlink">'
        "<front><article-meta>"
        f"<article-id>{esc(article_id)}</article-id>"
        f"<title-group><article-title>{esc(title)}</article-title></title-group>"
        f"<permissions><license>{esc(license)}</license></permissions>"
        "</article-meta></front>"
        f"<body><sec><title>Case</title>{''.join(ps)}{''.join(figs)}</sec></body>"
        "</article>"
    )


def make_corpus(root: Path, n_articles: int = 10, panels: tuple[int, int] = (2, 2),
                inline_words: int = 40) -> Path:
    """Corpus of gate-passing packages, one 2x2 compound figure each."""
    root.mkdir(parents=True, exist_ok=True)
    cols, rows = panels
    n_panels = cols * rows
    labels = [chr(ord("A") + i) for i in range(n_panels)]
    for i in range(n_articles):
        article_id = f"PMC{i + 1:04d}"
        caption_parts = [f"({lab}) Axial view with lesion{i}{lab.lower()} " + words(10, f"c{i}{lab}")
                         for lab in labels]
        caption = f"Representative compound figure for case {i}. " + " ".join(caption_parts)
        sub_captions = {lab: f"Axial view with lesion{i}{lab.lower()} " + words(10, f"c{i}{lab}")
                        for lab in labels}
        inline = (
            f"The patient in case {i} presented with insulinoma of the pancreas. "
            + words(inline_words, f"inline{i}")
            + " Findings are summarized in the figure."
        )
        write_package(
            root / article_id,
            article_id=article_id,
            paragraphs=[
                {"para_id": "p0001", "text": inline, "fig_refs": ["F1"]},
                {"para_id": "p0002", "text": "Unrelated methods paragraph. " + words(12, f"m{i}"), "fig_refs": []},
            ],
            figures=[{
                "figure_id": "F1",
                "caption": caption,
                "sub_captions": sub_captions,
                "image": grid_png(cols, rows),
            }],
        )
    return root
