"""Shared generators and oracles for the layout tests."""
import itertools

import numpy as np

from docrec.layout import LayoutGraph, make_schema

# mixed schema: flat X/Y/Z, B containing A, P pages containing S sections
MIXED = make_schema({"X": (), "Y": (), "Z": (), "B": (), "A": ("B",)})


def random_tree_tokens(schema, rng, max_nodes=6, chars="ab"):
    """Grammatical token list of a random layout tree with some text."""
    out = []
    budget = [int(rng.integers(0, max_nodes + 1))]

    def fill(parent):
        kids = [c.name for c in schema.classes if parent in c.parents]
        while budget[0] > 0 and kids and rng.random() < 0.7:
            name = kids[int(rng.integers(len(kids)))]
            budget[0] -= 1
            out.append(schema.begin(name))
            out.extend(rng.choice(list(chars), size=int(rng.integers(0, 3))))
            fill(name)
            out.append(schema.end(name))

    fill(schema.root)
    return [str(t) for t in out]


def random_graph(rng, max_nodes=5, types="DXYAB"):
    n = int(rng.integers(1, max_nodes + 1))
    g = LayoutGraph([str(rng.choice(list(types)))], [-1])
    for i in range(1, n):
        g.add_node(str(rng.choice(list(types))), int(rng.integers(0, i)))
    return g


def ged_oracle(g1: LayoutGraph, g2: LayoutGraph) -> int:
    """Minimum unit-cost edit script over every injective partial node map.

    Each map fixes which nodes are substituted (the rest are deleted or
    inserted); edges follow: an edge whose endpoints map onto an edge of the
    other graph is substituted, all others are deleted or inserted.
    """
    e1, e2 = g1.edges(), g2.edges()
    n1, n2 = g1.n_nodes, g2.n_nodes
    best = None
    slots = list(range(n2)) + [None] * n1
    seen = set()
    for perm in itertools.permutations(slots, n1):
        if perm in seen:
            continue
        seen.add(perm)
        cost = 0
        used = set()
        for i, j in enumerate(perm):
            if j is None:
                cost += 1
            else:
                used.add(j)
                cost += g1.types[i] != g2.types[j]
        cost += n2 - len(used)
        matched = set()
        for (u, v), lab in e1.items():
            fu, fv = perm[u], perm[v]
            if fu is not None and fv is not None and (fu, fv) in e2:
                cost += e2[(fu, fv)] != lab
                matched.add((fu, fv))
            else:
                cost += 1
        cost += len(e2) - len(matched)
        if best is None or cost < best:
            best = cost
    return best if best is not None else g2.n_nodes + g2.n_edges


def graph_corpus(seed=7, size=24):
    rng = np.random.default_rng(seed)
    corpus = [LayoutGraph.null(), LayoutGraph.root_only()]
    corpus += [random_graph(rng) for _ in range(size)]
    return corpus
