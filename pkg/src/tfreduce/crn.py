"""Structural analysis of reaction networks.

Stoichiometric and kinetic-order matrices, the slow/fast split, conservation
laws, the complex graph with its linkage classes, deficiency and weak
reversibility.  All matrices are exact (Python ints / Fractions).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Sequence

import networkx as nx

from .exact import q_nullspace, q_rank, q_rref, q_transpose
from .model import Complex, Model, Reaction


@dataclass(frozen=True)
class StoichData:
    N: list[list[int]]
    Y: list[list[int]]
    K: list[Fraction]
    reactions: tuple[Reaction, ...]

    @property
    def n(self) -> int:
        return len(self.N)

    @property
    def m(self) -> int:
        return len(self.K)


@dataclass(frozen=True)
class SlowFastSplit:
    N_f: list[list[int]]
    Y_f: list[list[int]]
    K_f: list[Fraction]
    N_s: list[list[int]]
    Y_s: list[list[int]]
    K_s: list[Fraction]
    r: int
    s: int
    fast: tuple[Reaction, ...] = field(default=())
    slow: tuple[Reaction, ...] = field(default=())

    @property
    def n(self) -> int:
        return len(self.N_f)

    @property
    def m_f(self) -> int:
        return len(self.K_f)

    @property
    def m_s(self) -> int:
        return len(self.K_s)


@dataclass
class NetworkGraph:
    nodes: list[Complex]
    edges: list[tuple[int, int]]
    linkage_classes: list[list[int]]
    sccs: list[list[int]]
    terminal: list[bool]  # one flag per entry of ``sccs``

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)


def _columns(reactions: Sequence[Reaction], n: int):
    N = [[0] * len(reactions) for _ in range(n)]
    Y = [[0] * len(reactions) for _ in range(n)]
    for j, rx in enumerate(reactions):
        prod = rx.product.vector(n)
        reac = rx.reactant.vector(n)
        for i in range(n):
            N[i][j] = prod[i] - reac[i]
            Y[i][j] = reac[i]
    return N, Y, [rx.rate_constant for rx in reactions]


def build_stoich(m: Model) -> StoichData:
    if m.generic is not None:
        raise TypeError("stoichiometry is only defined for reaction-network models")
    N, Y, K = _columns(m.reactions, m.n)
    return StoichData(N, Y, K, tuple(m.reactions))


def integer_rank(A: Sequence[Sequence[int]]) -> int:
    if not A or not A[0]:
        return 0
    return q_rank(A)


def split_slow_fast(sd: StoichData, m: Model | None = None) -> SlowFastSplit:
    fast = tuple(rx for rx in sd.reactions if rx.speed == "fast")
    slow = tuple(rx for rx in sd.reactions if rx.speed == "slow")
    if not fast:
        raise ValueError("the model has no fast reaction")
    n = sd.n
    N_f, Y_f, K_f = _columns(fast, n)
    N_s, Y_s, K_s = _columns(slow, n)
    r = integer_rank(N_f)
    return SlowFastSplit(N_f, Y_f, K_f, N_s, Y_s, K_s, r, n - r, fast, slow)


def _primitive(vec: Sequence[Fraction]) -> list[int]:
    den = reduce(lcm, (f.denominator for f in vec), 1)
    ints = [int(f * den) for f in vec]
    g = reduce(gcd, (abs(v) for v in ints), 0) or 1
    ints = [v // g for v in ints]
    first = next((v for v in ints if v), 0)
    return [-v for v in ints] if first < 0 else ints


def left_kernel_basis(A: Sequence[Sequence[int]]) -> list[list[int]]:
    """Canonical integer basis of {y : y A = 0}.

    Rows are the reduced row echelon form of the kernel, each scaled to
    coprime integers with a positive pivot.
    """
    n = len(A)
    if n == 0:
        return []
    if not A[0]:
        basis = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    else:
        basis = q_nullspace(q_transpose(A))
    if not basis:
        return []
    R, piv = q_rref(basis)
    return [_primitive(row) for row in R[: len(piv)]]


def conservation_laws(sd: StoichData) -> list[list[int]]:
    return left_kernel_basis(sd.N)


def build_graph(reactions: Sequence[Reaction], extra_nodes: Sequence[Complex] = ()) -> NetworkGraph:
    """Complex graph of a set of reactions.

    ``extra_nodes`` adds complexes that should count as (possibly isolated)
    nodes even though no reaction in the set touches them.
    """
    nodes: list[Complex] = []
    index: dict[Complex, int] = {}

    def node(c: Complex) -> int:
        if c not in index:
            index[c] = len(nodes)
            nodes.append(c)
        return index[c]

    edges = [(node(rx.reactant), node(rx.product)) for rx in reactions]
    for c in extra_nodes:
        node(c)
    G = nx.DiGraph()
    G.add_nodes_from(range(len(nodes)))
    G.add_edges_from(edges)
    linkage = sorted((sorted(c) for c in nx.weakly_connected_components(G)), key=lambda c: c[0])
    sccs = sorted((sorted(c) for c in nx.strongly_connected_components(G)), key=lambda c: c[0])
    cond = nx.condensation(G, scc=[set(c) for c in sccs])
    terminal = [cond.out_degree(i) == 0 for i in range(len(sccs))]
    return NetworkGraph(nodes, edges, linkage, sccs, terminal)


def deficiency(g: NetworkGraph, A: Sequence[Sequence[int]]) -> int:
    """#nodes - rank(A) - #linkage classes."""
    rank = integer_rank(A) if A and A[0] else 0
    delta = g.num_nodes - rank - len(g.linkage_classes)
    if delta < 0:
        raise RuntimeError(f"negative deficiency {delta}: graph and stoichiometric matrix disagree")
    return delta


def weakly_reversible(g: NetworkGraph) -> bool:
    scc_of = {}
    for k, comp in enumerate(g.sccs):
        for v in comp:
            scc_of[v] = k
    return all(len({scc_of[v] for v in cls}) == 1 for cls in g.linkage_classes)


def fast_graph(m: Model, split: SlowFastSplit | None = None) -> NetworkGraph:
    return build_graph(m.reactions_with("fast"), m.fast_nodes)


@dataclass
class StructuralSummary:
    n: int
    m: int
    r: int
    s: int
    deficiency_fast: int
    weakly_reversible_fast: bool
    fast_nodes: int
    fast_linkage_classes: int
    conservation_laws: list[list[int]]
    L_f: list[list[int]]
    rank_N: int


def analyze_structure(m: Model) -> StructuralSummary:
    sd = build_stoich(m)
    split = split_slow_fast(sd, m)
    g = fast_graph(m, split)
    return StructuralSummary(
        n=sd.n,
        m=sd.m,
        r=split.r,
        s=split.s,
        deficiency_fast=deficiency(g, split.N_f),
        weakly_reversible_fast=weakly_reversible(g),
        fast_nodes=g.num_nodes,
        fast_linkage_classes=len(g.linkage_classes),
        conservation_laws=conservation_laws(sd),
        L_f=left_kernel_basis(split.N_f),
        rank_N=integer_rank(sd.N),
    )
