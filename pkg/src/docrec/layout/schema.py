"""Layout schemas: classes, their begin/end tokens and allowed nesting."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from ..errors import ConfigurationError, FormatError


@dataclass(frozen=True)
class LayoutClass:
    name: str
    begin: str
    end: str
    parents: tuple[str, ...]


@dataclass(frozen=True)
class LayoutSchema:
    """A set of layout classes and the parent->child relation between them.

    ``root`` names the implicit document node; a class listing the root among
    its parents may appear at top level.  ``page`` optionally names the class
    whose sub-graphs are compared independently by the graph edit distance.
    """

    classes: tuple[LayoutClass, ...]
    root: str = "D"
    page: str | None = None
    _by_name: dict = field(init=False, repr=False, compare=False)
    _by_token: dict = field(init=False, repr=False, compare=False)
    _children: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        by_name = {}
        by_token = {}
        for c in self.classes:
            if c.name in by_name or c.name == self.root:
                raise ConfigurationError(f"duplicate class name {c.name!r}")
            by_name[c.name] = c
            for tok, kind in ((c.begin, "begin"), (c.end, "end")):
                if tok in by_token:
                    raise ConfigurationError(f"token {tok!r} used twice")
                by_token[tok] = (kind, c.name)
        children: dict[str, list[str]] = {self.root: []}
        for c in self.classes:
            children.setdefault(c.name, [])
        for c in self.classes:
            for p in c.parents:
                if p not in children:
                    raise ConfigurationError(f"class {c.name!r} has unknown parent {p!r}")
                children[p].append(c.name)
        object.__setattr__(self, "_by_name", by_name)
        object.__setattr__(self, "_by_token", by_token)
        object.__setattr__(self, "_children", {k: tuple(v) for k, v in children.items()})
        if self.page is not None and self.page not in by_name:
            raise ConfigurationError(f"page class {self.page!r} is not defined")
        self._check_acyclic()
        unreachable = set(by_name) - self._reachable_from_root()
        if unreachable:
            raise ConfigurationError(f"classes unreachable from root: {sorted(unreachable)}")

    def _check_acyclic(self):
        state: dict[str, int] = {}

        def visit(n):
            state[n] = 1
            for ch in self._children[n]:
                if state.get(ch) == 1:
                    raise ConfigurationError(f"nesting cycle through {ch!r}")
                if ch not in state:
                    visit(ch)
            state[n] = 2

        for n in self._children:
            if n not in state:
                visit(n)

    def _reachable_from_root(self):
        seen = {self.root}
        todo = [self.root]
        while todo:
            for ch in self._children[todo.pop()]:
                if ch not in seen:
                    seen.add(ch)
                    todo.append(ch)
        return seen - {self.root}

    # -- lookups -----------------------------------------------------------
    @property
    def class_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.classes)

    def layout_tokens(self) -> list[str]:
        out = []
        for c in self.classes:
            out += [c.begin, c.end]
        return out

    def token_kind(self, token: str) -> tuple[str, str] | None:
        """``("begin" | "end", class name)`` for layout tokens, None otherwise."""
        return self._by_token.get(token)

    def is_layout(self, token: str) -> bool:
        return token in self._by_token

    def begin(self, name: str) -> str:
        return self._by_name[name].begin

    def end(self, name: str) -> str:
        return self._by_name[name].end

    def children(self, name: str) -> tuple[str, ...]:
        return self._children[name]

    def allows(self, parent: str, child: str) -> bool:
        return child in self._children[parent]

    def ancestor_chain(self, parent: str, child: str) -> list[str] | None:
        """Shortest list of intermediate classes opening ``child`` under ``parent``.

        Returns ``[]`` when ``child`` is a direct child and ``None`` when it
        cannot be reached at all.
        """
        if self.allows(parent, child):
            return []
        prev = {parent: None}
        queue = deque([parent])
        while queue:
            n = queue.popleft()
            for ch in self._children[n]:
                if ch in prev:
                    continue
                prev[ch] = n
                if ch == child:
                    chain = []
                    k = n
                    while k != parent:
                        chain.append(k)
                        k = prev[k]
                    return chain[::-1]
                queue.append(ch)
        return None

    # -- serialization -----------------------------------------------------
    def to_json(self) -> dict:
        return {
            "root": self.root,
            "page": self.page,
            "classes": [
                {"name": c.name, "begin": c.begin, "end": c.end, "parents": list(c.parents)}
                for c in self.classes
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LayoutSchema":
        try:
            root = obj.get("root", "D")
            classes = []
            for c in obj["classes"]:
                name = c["name"]
                classes.append(
                    LayoutClass(
                        name=name,
                        begin=c.get("begin", f"<{name}>"),
                        end=c.get("end", f"</{name}>"),
                        parents=tuple(c.get("parents") or [root]),
                    )
                )
        except (KeyError, TypeError, AttributeError) as exc:
            raise FormatError(f"bad schema JSON: {exc}") from None
        return cls(tuple(classes), root=root, page=obj.get("page"))

    @classmethod
    def load(cls, path: str | Path) -> "LayoutSchema":
        if str(path) in BUILTIN_SCHEMAS:
            return BUILTIN_SCHEMAS[str(path)]()
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise FormatError(f"cannot read schema {path}: {exc}") from None
        return cls.from_json(obj)


def make_schema(nesting: dict[str, Iterable[str]], root: str = "D", page: str | None = None) -> LayoutSchema:
    """Schema from ``{class: parents}`` using ``<X>``/``</X>`` tokens."""
    classes = tuple(
        LayoutClass(name, f"<{name}>", f"</{name}>", tuple(parents) or (root,))
        for name, parents in nesting.items()
    )
    return LayoutSchema(classes, root=root, page=page)


def flat_schema(names: Iterable[str], root: str = "D") -> LayoutSchema:
    return make_schema({n: (root,) for n in names}, root=root)


def read_schema() -> LayoutSchema:
    """READ 2016 pages: page > {page number, section}; section > {annotation, body}."""
    return make_schema(
        {"P": ("D",), "N": ("P",), "S": ("P",), "A": ("S",), "B": ("S",)}, page="P"
    )


def rimes_schema() -> LayoutSchema:
    """RIMES 2009 letters: sender, recipient, date/location, subject, opening,
    body, PS/attachment, all at top level."""
    return flat_schema(["S", "R", "W", "Y", "O", "B", "P"])


BUILTIN_SCHEMAS = {"builtin:read": read_schema, "builtin:rimes": rimes_schema}
