"""Style sheets and line corpora driving synthetic document generation."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable

import numpy as np

from ..errors import ConfigurationError, FormatError
from ..layout.schema import LayoutSchema, read_schema, rimes_schema

DEFAULT_CROP_MARGIN = 16
DEFAULT_L_MAX = 30


@dataclass(frozen=True)
class EntityStyle:
    """Placement and content rules for one layout class.

    ``x_range`` is the horizontal band, as fractions of the enclosing
    container (or of the page inside the margins).  Container classes (those
    with children in the schema) hold no text; ``unique_children`` makes an
    open container close and reopen when a child class would repeat inside
    it.
    """

    name: str
    x_range: tuple[float, float] = (0.0, 1.0)
    min_lines: int = 1
    max_lines: int = 5
    chars_per_line: tuple[int, int] = (10, 60)
    weight: float = 1.0
    max_count: int | None = None
    font_size: tuple[int, int] = (1, 2)
    unique_children: bool = False
    text: str = "words"  # words | number

    def __post_init__(self):
        lo, hi = self.x_range
        if not 0.0 <= lo < hi <= 1.0:
            raise ConfigurationError(f"{self.name}: x_range must satisfy 0 <= lo < hi <= 1")
        if not 1 <= self.min_lines <= self.max_lines:
            raise ConfigurationError(f"{self.name}: need 1 <= min_lines <= max_lines")
        if not 1 <= self.chars_per_line[0] <= self.chars_per_line[1]:
            raise ConfigurationError(f"{self.name}: bad chars_per_line {self.chars_per_line}")
        if not 0.0 < self.weight <= 1.0:
            raise ConfigurationError(f"{self.name}: weight must lie in (0, 1]")
        if self.max_count is not None and self.max_count < 1:
            raise ConfigurationError(f"{self.name}: max_count must be positive")
        if not 1 <= self.font_size[0] <= self.font_size[1]:
            raise ConfigurationError(f"{self.name}: bad font_size {self.font_size}")
        if self.text not in ("words", "number"):
            raise ConfigurationError(f"{self.name}: unknown text kind {self.text!r}")


@dataclass(frozen=True)
class StyleSheet:
    """Document template and per-class rules.

    Leaf classes are visited round-robin in ``entities`` order; each visit
    places the class with probability ``weight`` if it still fits.
    """

    schema: LayoutSchema
    entities: tuple[EntityStyle, ...]
    template: tuple[int, int] = (1600, 1200)  # (H, W)
    margins: tuple[int, int, int, int] = (40, 40, 40, 40)  # top, right, bottom, left
    line_spacing: tuple[int, int] = (2, 8)
    entity_spacing: tuple[int, int] = (10, 30)
    indent: tuple[int, int] = (0, 40)
    max_jitter: int = 2
    crop_margin: int = DEFAULT_CROP_MARGIN
    l_max: int = DEFAULT_L_MAX
    _by_name: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        by_name = {e.name: e for e in self.entities}
        if len(by_name) != len(self.entities):
            raise ConfigurationError("duplicate entity style")
        missing = set(self.schema.class_names) - set(by_name)
        extra = set(by_name) - set(self.schema.class_names)
        if missing or extra:
            raise ConfigurationError(f"style classes differ from schema: missing {sorted(missing)}, extra {sorted(extra)}")
        object.__setattr__(self, "_by_name", by_name)
        h, w = self.template
        top, right, bottom, left = self.margins
        if h - top - bottom <= 0 or w - left - right <= 0:
            raise ConfigurationError("margins leave no room on the template")
        for lo, hi, what in (*self.line_spacing, "line_spacing"), (*self.entity_spacing, "entity_spacing"), (*self.indent, "indent"):
            if not 0 <= lo <= hi:
                raise ConfigurationError(f"bad {what} range")
        if self.l_max < 1 or self.crop_margin < 0 or self.max_jitter < 0:
            raise ConfigurationError("l_max must be positive; crop_margin and max_jitter nonnegative")
        if not self.leaf_classes:
            raise ConfigurationError("style sheet has no text-bearing class")

    def style(self, name: str) -> EntityStyle:
        return self._by_name[name]

    def is_container(self, name: str) -> bool:
        return bool(self.schema.children(name))

    @property
    def leaf_classes(self) -> list[str]:
        return [e.name for e in self.entities if not self.is_container(e.name)]

    # -- JSON ---------------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "schema": self.schema.to_json(),
            "template": list(self.template),
            "margins": list(self.margins),
            "line_spacing": list(self.line_spacing),
            "entity_spacing": list(self.entity_spacing),
            "indent": list(self.indent),
            "max_jitter": self.max_jitter,
            "crop_margin": self.crop_margin,
            "l_max": self.l_max,
            "entities": [
                {
                    "name": e.name,
                    "x_range": list(e.x_range),
                    "min_lines": e.min_lines,
                    "max_lines": e.max_lines,
                    "chars_per_line": list(e.chars_per_line),
                    "weight": e.weight,
                    "max_count": e.max_count,
                    "font_size": list(e.font_size),
                    "unique_children": e.unique_children,
                    "text": e.text,
                }
                for e in self.entities
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "StyleSheet":
        try:
            schema_obj = obj["schema"]
            schema = LayoutSchema.load(schema_obj) if isinstance(schema_obj, str) else LayoutSchema.from_json(schema_obj)
            entities = tuple(
                EntityStyle(
                    name=e["name"],
                    x_range=tuple(e.get("x_range", (0.0, 1.0))),
                    min_lines=int(e.get("min_lines", 1)),
                    max_lines=int(e.get("max_lines", 5)),
                    chars_per_line=tuple(e.get("chars_per_line", (10, 60))),
                    weight=float(e.get("weight", 1.0)),
                    max_count=e.get("max_count"),
                    font_size=tuple(e.get("font_size", (1, 2))),
                    unique_children=bool(e.get("unique_children", False)),
                    text=e.get("text", "words"),
                )
                for e in obj["entities"]
            )
            kw = {k: tuple(obj[k]) for k in ("template", "margins", "line_spacing", "entity_spacing", "indent") if k in obj}
            kw.update({k: int(obj[k]) for k in ("max_jitter", "crop_margin", "l_max") if k in obj})
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise FormatError(f"bad style sheet JSON: {exc}") from None
        return cls(schema, entities, **kw)

    @classmethod
    def load(cls, path: str | Path) -> "StyleSheet":
        if str(path) in BUILTIN_STYLESHEETS:
            return BUILTIN_STYLESHEETS[str(path)]()
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise FormatError(f"cannot read style sheet {path}: {exc}") from None
        return cls.from_json(obj)

    def with_template(self, template: tuple[int, int]) -> "StyleSheet":
        return replace(self, template=tuple(template))


def read_stylesheet() -> StyleSheet:
    """Single-page register: page number on top, sections with a margin
    annotation beside the body."""
    return StyleSheet(
        read_schema(),
        (
            EntityStyle("P"),
            EntityStyle("N", x_range=(0.4, 0.6), max_lines=1, chars_per_line=(1, 3), weight=0.8, max_count=1, text="number"),
            EntityStyle("S", unique_children=True),
            EntityStyle("A", x_range=(0.0, 0.22), max_lines=4, chars_per_line=(5, 18), weight=0.6, font_size=(1, 1)),
            EntityStyle("B", x_range=(0.27, 1.0), max_lines=10, chars_per_line=(20, 70)),
        ),
        template=(2000, 1400),
    )


def rimes_stylesheet() -> StyleSheet:
    """Business letter: sender and recipient blocks, date, subject, opening,
    body paragraphs and a postscript."""
    return StyleSheet(
        rimes_schema(),
        (
            EntityStyle("S", x_range=(0.0, 0.45), max_lines=5, chars_per_line=(8, 30), weight=0.9, max_count=1),
            EntityStyle("R", x_range=(0.5, 1.0), max_lines=5, chars_per_line=(8, 30), weight=0.9, max_count=1),
            EntityStyle("W", x_range=(0.5, 1.0), max_lines=1, chars_per_line=(10, 30), weight=0.8, max_count=1),
            EntityStyle("Y", x_range=(0.0, 1.0), max_lines=2, chars_per_line=(10, 60), weight=0.8, max_count=1),
            EntityStyle("O", x_range=(0.0, 0.6), max_lines=1, chars_per_line=(5, 25), weight=0.8, max_count=1),
            EntityStyle("B", x_range=(0.0, 1.0), max_lines=8, chars_per_line=(30, 80), max_count=3),
            EntityStyle("P", x_range=(0.0, 1.0), max_lines=2, chars_per_line=(10, 60), weight=0.3, max_count=1),
        ),
        template=(1800, 1300),
    )


BUILTIN_STYLESHEETS = {"builtin:read": read_stylesheet, "builtin:rimes": rimes_stylesheet}


# -- line corpus ----------------------------------------------------------------

_WORDS = (
    "the of and to in is was for on that with as by at from his her which this be are had not "
    "have but were all one they their been has an there would more when will who so if no out "
    "up its into than them only other new some could time these two may then do first any my "
    "now such like our over man me even most made after also did many before must through back "
    "years where much your way well down should because each just those people how too little "
    "state good very make world still own see men work long get here between both life being "
    "under never day same another know while last might us great old year off come since against "
    "go came right used take three house letter council parish land order church account paid "
    "received sum pounds mother father brother sister dear madame monsieur contrat assurance "
    "demande merci veuillez agréer salutations distinguées réclamation facture compte banque "
    "rendez-vous adresse numéro téléphone mois année été très bien déjà après être à où"
).split()


@dataclass(frozen=True)
class LineCorpus:
    """Text lines tagged with the layout class they may fill."""

    entries: tuple[tuple[str, str], ...]
    _by_class: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        by_class: dict[str, list[str]] = {}
        for text, cls in self.entries:
            by_class.setdefault(cls, []).append(text)
        object.__setattr__(self, "_by_class", {k: tuple(v) for k, v in by_class.items()})

    def classes(self) -> set[str]:
        return set(self._by_class)

    def lines(self, cls: str) -> tuple[str, ...]:
        return self._by_class.get(cls, ())

    def sample(self, cls: str, rng: np.random.Generator) -> str:
        lines = self._by_class.get(cls)
        if not lines:
            raise ConfigurationError(f"corpus has no line for class {cls!r}")
        return lines[int(rng.integers(len(lines)))]

    def check_covers(self, classes: Iterable[str]) -> None:
        missing = [c for c in classes if not self._by_class.get(c)]
        if missing:
            raise ConfigurationError(f"corpus has no lines for classes {missing}")

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "LineCorpus":
        """``{"text", "class"}`` records."""
        entries = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    entries.append((str(rec["text"]), str(rec["class"])))
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise FormatError(f"{path}:{lineno}: bad corpus line ({exc})") from None
        return cls(tuple(entries))

    @classmethod
    def builtin(cls, stylesheet: StyleSheet, lines_per_class: int = 200, seed: int = 0) -> "LineCorpus":
        """Random word lines sized by each class's ``chars_per_line``."""
        rng = np.random.default_rng(seed)
        entries = []
        for name in stylesheet.leaf_classes:
            style = stylesheet.style(name)
            lo, hi = style.chars_per_line
            for _ in range(lines_per_class):
                target = int(rng.integers(lo, hi + 1))
                if style.text == "number":
                    text = str(int(rng.integers(1, 10 ** target)))
                else:
                    words = []
                    while sum(len(w) + 1 for w in words) < target:
                        w = _WORDS[int(rng.integers(len(_WORDS)))]
                        words.append(w.capitalize() if not words else w)
                    text = " ".join(words)[:target].rstrip()
                    if rng.random() < 0.3:
                        text += "."
                entries.append((text, name))
        return cls(tuple(entries))
