"""Layout graphs: a document root, typed entities, hierarchy and reading-order edges."""
from __future__ import annotations

from dataclasses import dataclass, field

HIERARCHY = "h"
ORDER = "o"


@dataclass
class LayoutGraph:
    """Tree of layout entities under a document root.

    Node 0 is the root (type = schema root name) unless the graph is the
    null graph, which has no nodes at all.  ``parents[i]`` is the parent of
    node ``i`` (``-1`` for the root).  Children are kept in reading order;
    order edges chain consecutive siblings.
    """

    types: list[str] = field(default_factory=list)
    parents: list[int] = field(default_factory=list)

    @classmethod
    def null(cls) -> "LayoutGraph":
        return cls([], [])

    @classmethod
    def root_only(cls, root: str = "D") -> "LayoutGraph":
        return cls([root], [-1])

    def add_node(self, type_: str, parent: int) -> int:
        self.types.append(type_)
        self.parents.append(parent)
        return len(self.types) - 1

    @property
    def n_nodes(self) -> int:
        return len(self.types)

    def children(self, node: int) -> list[int]:
        return [i for i, p in enumerate(self.parents) if p == node]

    @property
    def hierarchy_edges(self) -> list[tuple[int, int]]:
        return [(p, i) for i, p in enumerate(self.parents) if p >= 0]

    @property
    def order_edges(self) -> list[tuple[int, int]]:
        out = []
        by_parent: dict[int, list[int]] = {}
        for i, p in enumerate(self.parents):
            if p >= 0:
                by_parent.setdefault(p, []).append(i)
        for kids in by_parent.values():
            out.extend(zip(kids, kids[1:]))
        return out

    @property
    def n_edges(self) -> int:
        return len(self.hierarchy_edges) + len(self.order_edges)

    def edges(self) -> dict[tuple[int, int], str]:
        e = {pair: HIERARCHY for pair in self.hierarchy_edges}
        e.update({pair: ORDER for pair in self.order_edges})
        return e

    def key(self) -> tuple:
        """Structural fingerprint: equal keys imply isomorphic graphs."""
        return tuple(self.types), tuple(self.parents)

    def subtree(self, node: int) -> "LayoutGraph":
        """The sub-graph rooted at ``node`` (node becomes the new root)."""
        mapping = {node: 0}
        sub = LayoutGraph([self.types[node]], [-1])
        for i in range(node + 1, self.n_nodes):
            p = self.parents[i]
            if p in mapping:
                mapping[i] = sub.add_node(self.types[i], mapping[p])
        # nodes are stored in preorder, but be robust to any order
        pending = [i for i in range(self.n_nodes) if i not in mapping and self._descends(i, node)]
        while pending:
            rest = []
            for i in pending:
                if self.parents[i] in mapping:
                    mapping[i] = sub.add_node(self.types[i], mapping[self.parents[i]])
                else:
                    rest.append(i)
            pending = rest
        return sub

    def _descends(self, i: int, anc: int) -> bool:
        while i >= 0:
            if i == anc:
                return True
            i = self.parents[i]
        return False
