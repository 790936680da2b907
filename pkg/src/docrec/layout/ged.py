"""Exact graph edit distance between layout graphs.

Unit costs for node and edge insertion/deletion; substitution costs 1 when
the type (or edge label) changes and 0 otherwise.  The search is A* over
node assignments with a label-count lower bound.
"""
from __future__ import annotations

import heapq
import itertools
from collections import Counter
from dataclasses import dataclass

from ..errors import SearchBudgetExceeded
from .graph import LayoutGraph

DEFAULT_BUDGET = 10_000_000


@dataclass(frozen=True)
class GedResult:
    distance: int
    page_count_mismatch: bool = False


def _bfs_order(g: LayoutGraph) -> list[int]:
    if g.n_nodes == 0:
        return []
    kids: dict[int, list[int]] = {}
    roots = []
    for i, p in enumerate(g.parents):
        (kids.setdefault(p, []) if p >= 0 else roots).append(i)
    order = []
    queue = list(roots)
    while queue:
        n = queue.pop(0)
        order.append(n)
        queue.extend(kids.get(n, []))
    return order


class _Problem:
    def __init__(self, g1: LayoutGraph, g2: LayoutGraph):
        order = _bfs_order(g1)
        relabel = {old: new for new, old in enumerate(order)}
        self.types1 = [g1.types[i] for i in order]
        self.edges1 = {(relabel[a], relabel[b]): lab for (a, b), lab in g1.edges().items()}
        self.types2 = list(g2.types)
        self.edges2 = g2.edges()
        self.n1 = len(self.types1)
        self.n2 = len(self.types2)
        self.nbrs1 = [set() for _ in range(self.n1)]
        for a, b in self.edges1:
            self.nbrs1[a].add(b)
            self.nbrs1[b].add(a)
        self.nbrs2 = [set() for _ in range(self.n2)]
        for a, b in self.edges2:
            self.nbrs2[a].add(b)
            self.nbrs2[b].add(a)

    def step_cost(self, mapping: tuple, j: int | None) -> int:
        """Cost of mapping the next g1 node to ``j`` (None = delete)."""
        k = len(mapping)
        if j is None:
            cost = 1
        else:
            cost = int(self.types1[k] != self.types2[j])
        for i in self.nbrs1[k]:
            if i >= k:
                continue
            m = mapping[i]
            for a, b, c, d in ((i, k, m, j), (k, i, j, m)):
                l1 = self.edges1.get((a, b))
                if l1 is None:
                    continue
                l2 = self.edges2.get((c, d)) if m is not None and j is not None else None
                cost += 1 if l2 is None else int(l1 != l2)
        if j is not None:
            inverse = {m: i for i, m in enumerate(mapping) if m is not None}
            for m in self.nbrs2[j]:
                i = inverse.get(m)
                if i is None:
                    continue
                # g2 edges between j and an earlier image with no g1 counterpart
                if (j, m) in self.edges2 and (k, i) not in self.edges1:
                    cost += 1
                if (m, j) in self.edges2 and (i, k) not in self.edges1:
                    cost += 1
        return cost

    def completion_cost(self, mapping: tuple) -> int:
        used = {m for m in mapping if m is not None}
        n_insert = self.n2 - len(used)
        e_insert = sum(1 for a, b in self.edges2 if a not in used or b not in used)
        return n_insert + e_insert

    def lower_bound(self, mapping: tuple) -> int:
        k = len(mapping)
        used = {m for m in mapping if m is not None}
        rest2 = [j for j in range(self.n2) if j not in used]
        t1 = Counter(self.types1[k:])
        t2 = Counter(self.types2[j] for j in rest2)
        nodes = max(self.n1 - k, len(rest2)) - sum((t1 & t2).values())
        e1 = Counter(lab for (a, b), lab in self.edges1.items() if a >= k or b >= k)
        e2 = Counter(lab for (a, b), lab in self.edges2.items() if a not in used or b not in used)
        edges = max(sum(e1.values()), sum(e2.values())) - sum((e1 & e2).values())
        return nodes + edges

    def greedy_upper(self) -> int:
        """Cost of a greedy assignment, used to prune the search."""
        mapping: tuple = ()
        g = 0
        for _ in range(self.n1):
            used = set(mapping)
            best = None
            for j in [*range(self.n2), None]:
                if j is not None and j in used:
                    continue
                c = self.step_cost(mapping, j)
                if best is None or c < best[0]:
                    best = (c, j)
            g += best[0]
            mapping = mapping + (best[1],)
        return g + self.completion_cost(mapping)


def _astar(g1: LayoutGraph, g2: LayoutGraph, budget: int) -> int:
    prob = _Problem(g1, g2)
    if prob.n1 == 0:
        return prob.completion_cost(())
    upper = min(prob.greedy_upper(), g1.n_nodes + g1.n_edges + g2.n_nodes + g2.n_edges)
    counter = itertools.count()
    start_h = prob.lower_bound(())
    heap = [(start_h, 0, next(counter), 0, ())]
    expansions = 0
    while heap:
        f, _, _, g, mapping = heapq.heappop(heap)
        if f >= upper:
            return upper
        k = len(mapping)
        if k == prob.n1:
            return g  # completion cost already folded into f == g
        expansions += 1
        if expansions > budget:
            raise SearchBudgetExceeded(
                f"GED search exceeded {budget} expansions", lower_bound=f, upper_bound=upper
            )
        used = set(mapping)
        for j in [*range(prob.n2), None]:
            if j is not None and j in used:
                continue
            child = mapping + (j,)
            cg = g + prob.step_cost(mapping, j)
            if k + 1 == prob.n1:
                total = cg + prob.completion_cost(child)
                if total < upper:
                    heapq.heappush(heap, (total, -(k + 1), next(counter), total, child))
                continue
            cf = cg + prob.lower_bound(child)
            if cf < upper:
                heapq.heappush(heap, (cf, -(k + 1), next(counter), cg, child))
    return upper


def _page_children(g: LayoutGraph, page: str) -> list[int] | None:
    """Top-level page nodes, or None when other classes sit at top level."""
    if g.n_nodes == 0:
        return None
    top = g.children(0)
    if all(g.types[i] == page for i in top):
        return top
    return None


def ged_details(
    g1: LayoutGraph, g2: LayoutGraph, page: str | None = None, budget: int = DEFAULT_BUDGET
) -> GedResult:
    """Graph edit distance, decomposed over pages when both graphs are paged.

    With ``page`` set and both graphs holding only page nodes under the root,
    the k-th pages are compared independently (a missing page against the
    null graph) and root-level edges are counted separately.  Unequal page
    counts are flagged in the result.

    Raises:
        SearchBudgetExceeded: the search needed more than ``budget`` expansions.
    """
    if g1.key() == g2.key():
        return GedResult(0)
    if g1.n_nodes == 0 or g2.n_nodes == 0:
        return GedResult(g1.n_nodes + g1.n_edges + g2.n_nodes + g2.n_edges)
    pages1 = _page_children(g1, page) if page else None
    pages2 = _page_children(g2, page) if page else None
    if pages1 is None or pages2 is None:
        return GedResult(_astar(g1, g2, budget))
    total = int(g1.types[0] != g2.types[0])
    null = LayoutGraph.null()
    for a, b in itertools.zip_longest(pages1, pages2):
        s1 = g1.subtree(a) if a is not None else null
        s2 = g2.subtree(b) if b is not None else null
        total += ged_details(s1, s2, None, budget).distance
    n1, n2 = len(pages1), len(pages2)
    total += abs(n1 - n2)  # root -> page hierarchy edges
    total += abs(max(n1 - 1, 0) - max(n2 - 1, 0))  # page reading-order edges
    return GedResult(total, page_count_mismatch=n1 != n2)


def ged(g1: LayoutGraph, g2: LayoutGraph, page: str | None = None, budget: int = DEFAULT_BUDGET) -> int:
    return ged_details(g1, g2, page, budget).distance
