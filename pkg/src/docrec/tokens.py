"""Token dictionaries: character alphabet, CTC blank, layout tokens."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError, InvalidLabelError

BLANK_SYMBOL = "∅"  # ∅
SOT = "<sot>"
EOT = "<eot>"


@dataclass(frozen=True)
class TokenDictionary:
    """Character alphabet ``A`` plus the CTC blank, and optional layout tokens.

    The blank always takes the highest CTC index (``len(characters)``), so
    argmax ties resolve toward characters.  Layout tokens are not part of the
    CTC symbol space; they only enter the DAN vocabulary returned by
    :meth:`vocabulary`.
    """

    characters: tuple[str, ...]
    layout_tokens: tuple[str, ...] = ()
    blank_symbol: str = BLANK_SYMBOL
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        chars = tuple(self.characters)
        object.__setattr__(self, "characters", chars)
        object.__setattr__(self, "layout_tokens", tuple(self.layout_tokens))
        if len(set(chars)) != len(chars):
            raise ConfigurationError("character tokens must be unique")
        if self.blank_symbol in chars:
            raise ConfigurationError("blank symbol collides with a character token")
        overlap = set(chars) & set(self.layout_tokens)
        if overlap:
            raise ConfigurationError(f"tokens both character and layout: {sorted(overlap)}")
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(chars)})

    @classmethod
    def from_text(cls, text: str, layout_tokens: Iterable[str] = ()) -> "TokenDictionary":
        """Alphabet made of the distinct characters of ``text`` in sorted order."""
        return cls(tuple(sorted(set(text))), tuple(layout_tokens))

    @property
    def blank_index(self) -> int:
        return len(self.characters)

    @property
    def size_with_blank(self) -> int:
        return len(self.characters) + 1

    def index(self, token: str) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise InvalidLabelError(f"token {token!r} is not in the alphabet") from None

    def encode(self, target: str | Sequence[str]) -> np.ndarray:
        """Map a label sequence over ``A`` to int64 indices."""
        return np.array([self.index(t) for t in target], dtype=np.int64)

    def encode_path(self, path: str | Sequence[str]) -> np.ndarray:
        """Like :meth:`encode` but also accepts the blank symbol."""
        out = np.empty(len(path), dtype=np.int64)
        for i, t in enumerate(path):
            out[i] = self.blank_index if t == self.blank_symbol else self.index(t)
        return out

    def decode(self, indices: Iterable[int]) -> list[str]:
        out = []
        for i in indices:
            i = int(i)
            out.append(self.blank_symbol if i == self.blank_index else self.characters[i])
        return out

    def vocabulary(self) -> list[str]:
        """DAN prediction vocabulary: characters, layout tokens, then ``<eot>``."""
        return list(self.characters) + list(self.layout_tokens) + [EOT]
