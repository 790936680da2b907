"""Rule-based synthetic document generation."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import ConfigurationError, FontError, GenerationError
from ..layout.grammar import build_graph
from ..layout.graph import LayoutGraph
from ..layout.metrics import TaggedTranscription
from .font import PAPER, BitmapFont, FontSet, render_line
from .stylesheet import LineCorpus, StyleSheet

LINE_BREAK = "\n"
_PAD = 2  # render_line padding


@dataclass(frozen=True)
class Placement:
    """An entity's box ``(x0, y0, x1, y1)`` with exclusive right/bottom edges."""

    name: str
    box: tuple[int, int, int, int]
    n_lines: int
    order: int  # position of the begin token among layout entities


@dataclass
class SynDoc:
    image: np.ndarray
    gt_tokens: TaggedTranscription
    gt_graph: LayoutGraph
    line_count: int
    placements: list[Placement] = field(default_factory=list)

    @property
    def text(self) -> str:
        return "".join(self.gt_tokens.tokens)


@dataclass
class _Frame:
    name: str
    x0: int
    x1: int
    top: int
    order: int
    bottom: int
    children: set = field(default_factory=set)
    n_lines: int = 0


def crop_under_lowest(image: np.ndarray, entity_extents: Sequence, margin: int = 16) -> np.ndarray:
    """Keep rows down to the lowest entity bottom plus ``margin``.

    ``entity_extents`` holds ``(top, bottom)`` row ranges or ``(x0, y0, x1,
    y1)`` boxes, bottoms exclusive.

    Raises:
        ValueError: no entity given.
    """
    if len(entity_extents) == 0:
        raise ValueError("cannot crop without any entity")
    bottom = max(int(e[-1]) for e in entity_extents)
    return image[: min(image.shape[0], bottom + margin)].copy()


def _fit_text(text: str, max_chars: int) -> str:
    if len(text) <= max_chars:
        return text
    cut = text[:max_chars]
    if text[max_chars] != " " and " " in cut:
        cut = cut[: cut.rfind(" ")]
    return cut.strip() or text[:max_chars]


class _Builder:
    def __init__(self, sheet: StyleSheet, corpus: LineCorpus, fonts: FontSet, rng: np.random.Generator):
        self.sheet = sheet
        self.corpus = corpus
        self.fonts = fonts
        self.rng = rng
        h, w = sheet.template
        top, right, bottom, left = sheet.margins
        self.content = (left, w - right, top, h - bottom)
        self.image = np.full((h, w), PAPER, dtype=np.uint8)
        self.skyline = np.full(w, top, dtype=np.int64)
        self.stack: list[_Frame] = []
        self.tokens: list[str] = []
        self.placements: list[Placement] = []
        self.counts: dict[str, int] = {}
        self.n_entities = 0

    # -- geometry -------------------------------------------------------------
    def _span(self, name: str, parent: _Frame | None) -> tuple[int, int]:
        x0, x1 = (parent.x0, parent.x1) if parent else self.content[:2]
        lo, hi = self.sheet.style(name).x_range
        return x0 + int(round(lo * (x1 - x0))), x0 + int(round(hi * (x1 - x0)))

    def _top(self, x0: int, x1: int, parent: _Frame | None) -> int:
        floor = parent.top if parent else self.content[2]
        sky = int(self.skyline[x0:x1].max())
        if sky <= self.content[2]:
            return max(floor, sky)
        lo, hi = self.sheet.entity_spacing
        return max(floor, sky + int(self.rng.integers(lo, hi + 1)))

    # -- planning -------------------------------------------------------------
    def _plan_stack(self, name: str):
        """Containers to close and to open before placing ``name``; None if impossible."""
        schema = self.sheet.schema
        keep = len(self.stack)
        while True:
            top = self.stack[keep - 1] if keep else None
            parent = top.name if top else schema.root
            chain = schema.ancestor_chain(parent, name)
            repeats = top is not None and self.sheet.style(top.name).unique_children and (
                (chain[0] if chain else name) in top.children
            )
            if chain is not None and not repeats:
                break
            if keep == 0:
                return None
            keep -= 1
        for c in chain:
            mc = self.sheet.style(c).max_count
            if mc is not None and self.counts.get(c, 0) >= mc:
                return None
        return keep, chain

    def satisfiable(self, name: str) -> bool:
        mc = self.sheet.style(name).max_count
        if mc is not None and self.counts.get(name, 0) >= mc:
            return False
        return self._plan_stack(name) is not None

    # -- commit ---------------------------------------------------------------
    def _close(self):
        fr = self.stack.pop()
        self.tokens.append(self.sheet.schema.end(fr.name))
        bottom = max(fr.bottom, fr.top + 1)
        self.placements.append(Placement(fr.name, (fr.x0, fr.top, fr.x1, bottom), fr.n_lines, fr.order))
        if self.stack:
            self.stack[-1].bottom = max(self.stack[-1].bottom, bottom)

    def _open(self, name: str, top: int, x0: int, x1: int) -> _Frame:
        if self.stack:
            self.stack[-1].children.add(name)
        fr = _Frame(name, x0, x1, top, self.n_entities, top)
        self.n_entities += 1
        self.counts[name] = self.counts.get(name, 0) + 1
        self.tokens.append(self.sheet.schema.begin(name))
        self.stack.append(fr)
        return fr

    def _render_lines(self, name: str, n_lines: int, width: int):
        style = self.sheet.style(name)
        lines = []
        jitter = self.sheet.max_jitter
        for _ in range(n_lines):
            raw = self.corpus.sample(name, self.rng)
            usable = self.fonts.supporting(raw)
            if not usable:
                raise FontError(f"no font renders {sorted(self.fonts.fonts[0].missing(raw))!r}")
            font: BitmapFont = usable[int(self.rng.integers(len(usable)))]
            size = int(self.rng.integers(style.font_size[0], style.font_size[1] + 1))
            indent = int(self.rng.integers(self.sheet.indent[0], self.sheet.indent[1] + 1))
            ch_w = font.cell(size)[1]
            max_chars = (width - indent - 2 * _PAD + jitter) // (ch_w + jitter)
            if max_chars < 1:
                indent, max_chars = 0, (width - 2 * _PAD + jitter) // (ch_w + jitter)
            if max_chars < 1:
                raise GenerationError(f"class {name!r} is too narrow for a single glyph")
            text = _fit_text(raw, max_chars)
            img = render_line(text, font, size, self.rng, jitter)
            lines.append((text, img, indent))
        return lines

    def place(self, name: str, lines_left: int) -> int:
        """Place one text entity of class ``name``; returns its line count (0 = did not fit)."""
        keep, chain = self._plan_stack(name)
        style = self.sheet.style(name)
        # geometry of the containers to open, computed without committing
        parent = self.stack[keep - 1] if keep else None
        spans = []
        for c in chain:
            x0, x1 = self._span(c, parent)
            parent = _Frame(c, x0, x1, self._top(x0, x1, parent), -1, 0)
            spans.append((c, parent.top, x0, x1))
        x0, x1 = self._span(name, parent)
        y = self._top(x0, x1, parent)
        hi = min(style.max_lines, lines_left)
        n = int(self.rng.integers(min(style.min_lines, hi), hi + 1))
        lines = self._render_lines(name, n, x1 - x0)
        gaps = [int(self.rng.integers(self.sheet.line_spacing[0], self.sheet.line_spacing[1] + 1)) for _ in lines]
        limit = self.content[3]
        fitted, bottom = [], y
        for (text, img, indent), gap in zip(lines, gaps):
            y_line = bottom + (gap if fitted else 0)
            if y_line + img.shape[0] > limit:
                break
            fitted.append((text, img, indent, y_line))
            bottom = y_line + img.shape[0]
        if not fitted:
            return 0
        while len(self.stack) > keep:
            self._close()
        for c, top, cx0, cx1 in spans:
            self._open(c, top, cx0, cx1)
        fr = self._open(name, y, x0, x1)
        right = x0
        for k, (text, img, indent, y_line) in enumerate(fitted):
            if k:
                self.tokens.append(LINE_BREAK)
            self.tokens.extend(text)
            xa = x0 + indent
            h, w = img.shape
            region = self.image[y_line : y_line + h, xa : xa + w]
            np.minimum(region, img, out=region)
            right = max(right, xa + w)
        self.skyline[x0:max(right, x0 + 1)] = bottom
        fr.bottom = bottom
        fr.n_lines = len(fitted)
        for anc in self.stack[:-1]:
            anc.n_lines += len(fitted)
        self._close()
        return len(fitted)

    def finish(self):
        while self.stack:
            self._close()


def _check_inputs(sheet: StyleSheet, corpus: LineCorpus, fonts: FontSet, curriculum_l: int):
    if not 1 <= curriculum_l <= sheet.l_max:
        raise ConfigurationError(f"curriculum_l must lie in [1, {sheet.l_max}], got {curriculum_l}")
    corpus.check_covers(sheet.leaf_classes)


def generate_document(
    template: tuple[int, int] | None,
    curriculum_l: int,
    stylesheet: StyleSheet,
    corpus: LineCorpus,
    fonts: FontSet | None = None,
    rng=None,
) -> SynDoc:
    """Draw a document of 1..``curriculum_l`` text lines.

    Leaf classes are visited round-robin; each visit places the class with
    its configured probability when it is still satisfiable.  Each entity
    gets between its minimum and maximum line count, never exceeding the
    drawn document total.  The image is cropped under the lowest entity.

    Raises:
        ConfigurationError: ``curriculum_l`` outside ``[1, l_max]`` or a
            class without corpus lines.
        GenerationError: not even one line fits on the template.
    """
    sheet = stylesheet.with_template(template) if template is not None else stylesheet
    fonts = fonts or FontSet()
    _check_inputs(sheet, corpus, fonts, curriculum_l)
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    l_doc = int(rng.integers(1, curriculum_l + 1))
    b = _Builder(sheet, corpus, fonts, rng)
    leaves = sheet.leaf_classes
    exhausted: set[str] = set()
    cursor = 0
    placed = 0
    while placed < l_doc:
        choice = None
        for step in range(len(leaves)):
            c = leaves[(cursor + step) % len(leaves)]
            if c in exhausted or not b.satisfiable(c):
                continue
            if rng.random() < sheet.style(c).weight:
                choice, cursor = c, (cursor + step + 1) % len(leaves)
                break
        if choice is None:
            # nobody volunteered this cycle: take the next satisfiable class
            for step in range(len(leaves)):
                c = leaves[(cursor + step) % len(leaves)]
                if c not in exhausted and b.satisfiable(c):
                    choice, cursor = c, (cursor + step + 1) % len(leaves)
                    break
        if choice is None:
            break
        n = b.place(choice, l_doc - placed)
        if n == 0:
            exhausted.add(choice)
        placed += n
    b.finish()
    if placed == 0:
        raise GenerationError("no text line fits on the template")
    image = crop_under_lowest(b.image, [p.box for p in b.placements], sheet.crop_margin)
    tokens = TaggedTranscription(b.tokens)
    graph = build_graph(tokens.tokens, sheet.schema)
    placements = sorted(b.placements, key=lambda p: p.order)
    return SynDoc(image, tokens, graph, placed, placements)
