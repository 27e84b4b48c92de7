"""Article package parsing.

A package is a directory holding either ``article.xml`` (a documented JATS
subset) or ``article.json`` (the manifest schema below), plus a ``figures/``
directory with the referenced graphics.

JSON manifest schema (UTF-8, field names bit-exact)::

    {"article_id": str, "license": str, "title": str,
     "paragraphs": [{"para_id": str, "text": str, "fig_refs": [str]}],
     "figures": [{"figure_id": str, "graphic": str, "caption": str,
                  "sub_captions": {label: str}}]}

JATS subset recognized in article.xml: ``article`` root, ``fig`` elements with
an ``id`` attribute, a nested ``caption``, and a ``graphic`` with an href
attribute; body ``p`` elements; ``xref`` with ref-type "fig" and ``rid``.
Unknown elements are skipped with a warning, never fatal. The XML subset
carries no sub-caption markup; sub_captions parse empty and are recovered
downstream from caption label markers.
"""
from __future__ import annotations

import json
import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import (
    DanglingGraphic,
    DuplicateFigureId,
    MalformedSource,
    MissingManifest,
    UnknownFigureId,
)

logger = logging.getLogger(__name__)

XLINK_HREF = "{http://www.w3.org/1999/xlink}href"

_KNOWN_TAGS = {
    "article", "front", "body", "back", "sec", "title", "p", "fig",
    "caption", "graphic", "xref", "article-meta", "title-group",
    "article-title", "article-id", "permissions", "license", "license-p",
}


@dataclass(frozen=True)
class Paragraph:
    para_id: str
    text: str
    fig_refs: frozenset[str]


@dataclass(frozen=True)
class FigureEntry:
    figure_id: str
    graphic_path: str  # relative to the package root
    caption: str
    sub_captions: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class ArticlePackage:
    article_id: str
    license: str
    title: str
    paragraphs: tuple[Paragraph, ...]
    figures: tuple[FigureEntry, ...]
    root: Path = field(compare=False)  # filesystem location, not article content

    def figure(self, figure_id: str) -> FigureEntry:
        for fig in self.figures:
            if fig.figure_id == figure_id:
                return fig
        raise UnknownFigureId(f"figure {figure_id!r} not in article {self.article_id!r}")

    def figure_ids(self) -> list[str]:
        return [f.figure_id for f in self.figures]


def _normalize(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip()


def parse_article(package_root: str | Path) -> ArticlePackage:
    """Parse an article package directory into an ArticlePackage.

    Prefers article.xml when both sources are present. Raises MissingManifest,
    MalformedSource, DanglingGraphic, or DuplicateFigureId per the packaging
    contract.
    """
    root = Path(package_root)
    xml_path = root / "article.xml"
    json_path = root / "article.json"
    if xml_path.exists():
        pkg = _parse_xml(root, xml_path)
    elif json_path.exists():
        pkg = _parse_json(root, json_path)
    else:
        raise MissingManifest(f"{root}: neither article.xml nor article.json present")
    _validate(pkg)
    return pkg


def _parse_json(root: Path, path: Path) -> ArticlePackage:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedSource(f"{path.name}: {exc.msg}", line=exc.lineno, column=exc.colno) from exc
    try:
        paragraphs = tuple(
            Paragraph(p["para_id"], p["text"], frozenset(p["fig_refs"]))
            for p in data["paragraphs"]
        )
        figures = tuple(
            FigureEntry(
                f["figure_id"],
                f["graphic"],
                _normalize(f["caption"]),
                dict(f.get("sub_captions") or {}),
            )
            for f in data["figures"]
        )
        return ArticlePackage(
            article_id=data["article_id"],
            license=data["license"],
            title=data.get("title", ""),
            paragraphs=paragraphs,
            figures=figures,
            root=root,
        )
    except (KeyError, TypeError) as exc:
        raise MalformedSource(f"{path.name}: missing or mistyped field: {exc}") from exc


def _parse_xml(root: Path, path: Path) -> ArticlePackage:
    try:
        tree = ET.parse(path)
    except ET.ParseError as exc:
        line, column = exc.position
        raise MalformedSource(f"{path.name}: {exc.msg.split(':')[0]}", line=line, column=column) from exc
    article = tree.getroot()
    if article.tag != "article":
        raise MalformedSource(f"{path.name}: root element is <{article.tag}>, expected <article>")

    for el in article.iter():
        if el.tag not in _KNOWN_TAGS:
            logger.warning("%s: skipping unknown element <%s>", path.name, el.tag)

    article_id = _normalize("".join((article.findtext(".//article-id") or "")))
    title = _normalize(article.findtext(".//article-title") or "")
    license_tag = _normalize(article.findtext(".//license") or article.get("license") or "")

    figures = []
    fig_elements = list(article.iter("fig"))
    for fig in fig_elements:
        fig_id = fig.get("id") or ""
        caption_el = fig.find("caption")
        caption = _normalize(" ".join(caption_el.itertext())) if caption_el is not None else ""
        graphic = fig.find("graphic")
        href = ""
        if graphic is not None:
            href = graphic.get(XLINK_HREF) or graphic.get("href") or ""
        figures.append(FigureEntry(fig_id, href, caption, {}))

    # Body paragraphs; <p> inside captions belongs to the figure, not the text.
    caption_ps = {id(p) for cap in article.iter("caption") for p in cap.iter("p")}
    license_ps = {id(p) for lic in article.iter("license") for p in lic.iter("p")}
    paragraphs = []
    counter = 0
    body = article.find("body")
    for p in (body.iter("p") if body is not None else ()):
        if id(p) in caption_ps or id(p) in license_ps:
            continue
        counter += 1
        para_id = p.get("id") or f"p{counter:04d}"
        refs = frozenset(
            x.get("rid") for x in p.iter("xref")
            if x.get("ref-type") == "fig" and x.get("rid")
        )
        paragraphs.append(Paragraph(para_id, _normalize(" ".join(p.itertext())), refs))

    return ArticlePackage(
        article_id=article_id,
        license=license_tag,
        title=title,
        paragraphs=tuple(paragraphs),
        figures=tuple(figures),
        root=root,
    )


def _validate(pkg: ArticlePackage) -> None:
    if not pkg.article_id:
        raise MalformedSource("article_id is empty")
    seen: set[str] = set()
    for fig in pkg.figures:
        if fig.figure_id in seen:
            raise DuplicateFigureId(f"figure id {fig.figure_id!r} appears twice")
        seen.add(fig.figure_id)
        resolved = (pkg.root / fig.graphic_path).resolve()
        if not str(resolved).startswith(str(pkg.root.resolve())):
            raise DanglingGraphic(f"graphic {fig.graphic_path!r} escapes the package directory")
        if not resolved.is_file():
            raise DanglingGraphic(f"figure {fig.figure_id!r}: graphic {fig.graphic_path!r} not found")
    known = {f.figure_id for f in pkg.figures}
    for para in pkg.paragraphs:
        for ref in para.fig_refs:
            if ref not in known:
                raise MalformedSource(
                    f"paragraph {para.para_id!r} references unknown figure {ref!r}"
                )


def extract_inline_text(pkg: ArticlePackage, figure_id: str) -> str:
    """Concatenate, in document order, every paragraph citing figure_id.

    Paragraphs are joined by one blank line; returns "" when nothing cites
    the figure. Raises UnknownFigureId for ids absent from the package.
    """
    if figure_id not in {f.figure_id for f in pkg.figures}:
        raise UnknownFigureId(f"figure {figure_id!r} not in article {pkg.article_id!r}")
    texts = [p.text for p in pkg.paragraphs if figure_id in p.fig_refs]
    return "\n\n".join(texts)


def to_manifest(pkg: ArticlePackage) -> dict:
    """Render the package as the JSON manifest structure."""
    return {
        "article_id": pkg.article_id,
        "license": pkg.license,
        "title": pkg.title,
        "paragraphs": [
            {"para_id": p.para_id, "text": p.text, "fig_refs": sorted(p.fig_refs)}
            for p in pkg.paragraphs
        ],
        "figures": [
            {
                "figure_id": f.figure_id,
                "graphic": f.graphic_path,
                "caption": f.caption,
                "sub_captions": dict(f.sub_captions),
            }
            for f in pkg.figures
        ],
    }


def write_manifest(pkg: ArticlePackage, path: str | Path) -> None:
    Path(path).write_text(json.dumps(to_manifest(pkg), indent=2, ensure_ascii=False), encoding="utf-8")
