"""Layout-token grammar: tokenization, parsing with diagnostics, post-processing."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from ..errors import GrammarError
from ..tokens import EOT, SOT
from .graph import LayoutGraph
from .schema import LayoutSchema

SPECIAL_TOKENS = (SOT, EOT)


@dataclass(frozen=True)
class Diagnostic:
    position: int
    kind: str  # isolated_end | mismatched_end | unpaired_begin | illegal_nesting
    token: str
    message: str


@dataclass
class ParseResult:
    graph: LayoutGraph | None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.diagnostics


@dataclass
class PostProcessReport:
    corrected_tokens: list[str]
    n_ppe: int
    #: index of each corrected token in the input, None for inserted tokens
    sources: list[int | None] = field(default_factory=list)


def tokenize(text: str, schema: LayoutSchema) -> list[str]:
    """Split a string into layout tokens, special tokens and single characters."""
    specials = sorted(set(schema.layout_tokens()) | set(SPECIAL_TOKENS), key=len, reverse=True)
    out = []
    i = 0
    while i < len(text):
        for tok in specials:
            if text.startswith(tok, i):
                out.append(tok)
                i += len(tok)
                break
        else:
            out.append(text[i])
            i += 1
    return out


def as_tokens(tokens: str | Sequence[str], schema: LayoutSchema) -> list[str]:
    return tokenize(tokens, schema) if isinstance(tokens, str) else list(tokens)


def layout_only(tokens: Sequence[str], schema: LayoutSchema) -> list[str]:
    return [t for t in tokens if schema.is_layout(t)]


def text_only(tokens: Sequence[str], schema: LayoutSchema) -> str:
    return "".join(t for t in tokens if not schema.is_layout(t) and t not in SPECIAL_TOKENS)


def parse_layout(tokens: str | Sequence[str], schema: LayoutSchema) -> ParseResult:
    """Check a token sequence against the schema grammar.

    Character tokens are ignored.  On success the result carries the layout
    graph; otherwise it lists every violation with its token position.
    """
    toks = as_tokens(tokens, schema)
    graph = LayoutGraph.root_only(schema.root)
    stack: list[tuple[str, int, int]] = [(schema.root, 0, -1)]  # (class, node, position)
    diags: list[Diagnostic] = []
    for pos, tok in enumerate(toks):
        kind = schema.token_kind(tok)
        if kind is None:
            continue
        what, name = kind
        if what == "begin":
            parent = stack[-1][0]
            if not schema.allows(parent, name):
                diags.append(Diagnostic(pos, "illegal_nesting", tok, f"{name} cannot appear inside {parent}"))
            node = graph.add_node(name, stack[-1][1])
            stack.append((name, node, pos))
        else:
            if stack[-1][0] == name and len(stack) > 1:
                stack.pop()
                continue
            open_names = [s[0] for s in stack[1:]]
            if name in open_names:
                diags.append(
                    Diagnostic(pos, "mismatched_end", tok, f"{tok} closes {name} while {stack[-1][0]} is open")
                )
                while stack[-1][0] != name:
                    n, _, p = stack.pop()
                    diags.append(Diagnostic(p, "unpaired_begin", schema.begin(n), f"{n} is never closed"))
                stack.pop()
            else:
                diags.append(Diagnostic(pos, "isolated_end", tok, f"isolated end token {tok}"))
    for n, _, p in reversed(stack[1:]):
        diags.append(Diagnostic(p, "unpaired_begin", schema.begin(n), f"{n} is never closed"))
    diags.sort(key=lambda d: d.position)
    return ParseResult(None if diags else graph, diags)


def build_graph(tokens: str | Sequence[str], schema: LayoutSchema) -> LayoutGraph:
    """Layout graph of a grammatical token sequence.

    Raises:
        GrammarError: the sequence does not parse; post-process it first.
    """
    res = parse_layout(tokens, schema)
    if not res.ok:
        d = res.diagnostics[0]
        raise GrammarError(f"{d.kind} at position {d.position}: {d.message}", res.diagnostics)
    return res.graph


def postprocess(tokens: str | Sequence[str], schema: LayoutSchema) -> PostProcessReport:
    """One forward pass that repairs layout tokens so the sequence parses.

    * a begin token that cannot nest under the open entity closes open
      entities until it can, then opens any ancestors the schema requires
      (shortest chain);
    * an end token for a class that is not open is dropped;
    * an end token for an ancestor closes the entities opened inside it;
    * entities still open at the end are closed.

    Character tokens are never touched.  ``n_ppe`` counts every layout token
    added or removed.
    """
    toks = as_tokens(tokens, schema)
    out: list[str] = []
    src: list[int | None] = []
    stack = [schema.root]
    edits = 0

    def emit(token, origin=None):
        out.append(token)
        src.append(origin)

    for pos, tok in enumerate(toks):
        kind = schema.token_kind(tok)
        if kind is None:
            emit(tok, pos)
            continue
        what, name = kind
        if what == "begin":
            while True:
                chain = schema.ancestor_chain(stack[-1], name)
                if chain is not None or len(stack) == 1:
                    break
                emit(schema.end(stack.pop()))
                edits += 1
            if chain is None:  # unreachable from root; schema validation forbids this
                edits += 1
                continue
            for anc in chain:
                emit(schema.begin(anc))
                stack.append(anc)
                edits += 1
            emit(tok, pos)
            stack.append(name)
        elif name in stack[1:]:
            while stack[-1] != name:
                emit(schema.end(stack.pop()))
                edits += 1
            stack.pop()
            emit(tok, pos)
        else:
            edits += 1
    while len(stack) > 1:
        emit(schema.end(stack.pop()))
        edits += 1
    return PostProcessReport(out, edits, src)
