"""Monospace bitmap fonts and single-line rendering."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from PIL import ImageFont

from ..errors import FontError

INK = 0
PAPER = 255


@lru_cache(maxsize=1)
def _base_glyphs() -> dict[str, np.ndarray]:
    """Boolean ink masks for every printable Latin-1 character of Pillow's
    built-in bitmap font (6 x 11 cells)."""
    font = ImageFont.load_default_imagefont()
    glyphs = {}
    for code in list(range(32, 127)) + list(range(160, 256)):
        ch = chr(code)
        mask = font.getmask(ch)
        w, h = mask.size
        arr = np.array(mask, dtype=np.uint8).reshape(h, w) > 0
        if ch != " " and not arr.any():
            continue
        glyphs[ch] = arr
    return glyphs


@dataclass(frozen=True)
class BitmapFont:
    """A glyph atlas plus a rendering style.

    ``width_factor`` stretches glyphs horizontally and ``bold`` thickens
    strokes by one pixel; the integer ``size`` passed to :meth:`glyph`
    scales both axes by nearest-neighbour replication.
    """

    name: str
    bold: bool = False
    width_factor: int = 1

    @property
    def charset(self) -> frozenset[str]:
        return frozenset(_base_glyphs())

    def supports(self, text: str) -> bool:
        cs = _base_glyphs()
        return all(ch in cs for ch in text)

    def missing(self, text: str) -> set[str]:
        cs = _base_glyphs()
        return {ch for ch in text if ch not in cs}

    def cell(self, size: int) -> tuple[int, int]:
        h, w = next(iter(_base_glyphs().values())).shape
        return h * size, w * size * self.width_factor

    def glyph(self, ch: str, size: int) -> np.ndarray:
        return _styled_glyph(ch, size, self.bold, self.width_factor)


@lru_cache(maxsize=4096)
def _styled_glyph(ch: str, size: int, bold: bool, width_factor: int) -> np.ndarray:
    g = _base_glyphs()[ch]
    if bold:
        g = g | np.pad(g, ((0, 0), (1, 0)))[:, :-1]
    g = np.repeat(np.repeat(g, size, axis=0), size * width_factor, axis=1)
    g.setflags(write=False)
    return g


DEFAULT_FONTS = (
    BitmapFont("mono"),
    BitmapFont("mono-bold", bold=True),
    BitmapFont("mono-wide", width_factor=2),
    BitmapFont("mono-wide-bold", bold=True, width_factor=2),
)


@dataclass(frozen=True)
class FontSet:
    fonts: tuple[BitmapFont, ...] = DEFAULT_FONTS
    sizes: tuple[int, int] = (1, 2)  # inclusive range of integer scales

    def __post_init__(self):
        if not self.fonts:
            raise FontError("empty font set")
        if not 1 <= self.sizes[0] <= self.sizes[1]:
            raise FontError(f"bad size range {self.sizes}")

    def supporting(self, text: str) -> list[BitmapFont]:
        return [f for f in self.fonts if f.supports(text)]


def text_width(text: str, font: BitmapFont, size: int) -> int:
    return len(text) * font.cell(size)[1]


def render_line(text: str, font: BitmapFont, size: int, rng=None, max_jitter: int = 2, pad: int = 2) -> np.ndarray:
    """Render ``text`` as an 8-bit grayscale line (ink 0 on paper 255).

    Each glyph after the first is shifted right by a random 0..``max_jitter``
    pixels.

    Raises:
        FontError: a character has no glyph.
    """
    missing = font.missing(text)
    if missing:
        raise FontError(f"font {font.name!r} cannot render {sorted(missing)!r}")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    ch_h, ch_w = font.cell(size)
    gaps = rng.integers(0, max_jitter + 1, size=max(len(text) - 1, 0)) if max_jitter > 0 else np.zeros(max(len(text) - 1, 0), int)
    xs = np.concatenate(([0], np.cumsum(ch_w + gaps))).astype(int) if text else np.zeros(0, int)
    width = (int(xs[-1]) + ch_w if text else 0) + 2 * pad
    ink = np.zeros((ch_h + 2 * pad, width), dtype=bool)
    for ch, x in zip(text, xs):
        g = font.glyph(ch, size)
        ink[pad : pad + ch_h, pad + x : pad + x + g.shape[1]] |= g
    return np.where(ink, INK, PAPER).astype(np.uint8)


def generate_line(text: str, font: BitmapFont, size: int, rng=None, max_jitter: int = 2) -> tuple[np.ndarray, str]:
    """Synthetic printed line image and its transcription."""
    return render_line(text, font, size, rng, max_jitter), text
