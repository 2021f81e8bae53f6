from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st

from tfreduce import fixtures
from tfreduce.crn import (
    analyze_structure,
    build_graph,
    build_stoich,
    conservation_laws,
    deficiency,
    fast_graph,
    integer_rank,
    left_kernel_basis,
    split_slow_fast,
    weakly_reversible,
)
from tfreduce.exact import q_matmul, q_rank
from tfreduce.model import Complex, Reaction, parse_model


def _split(name, **k):
    m = fixtures.load(name, **k)
    return m, split_slow_fast(build_stoich(m), m)


def _same_row_space(A, B):
    return q_rank(A) == q_rank(B) == q_rank([list(r) for r in A] + [list(r) for r in B])


def test_example1_fast_columns():
    _, sp = _split("example1")
    assert [[row[j] for row in sp.N_f] for j in range(2)] == [[-1, -1, 1], [1, 1, -1]]
    assert (sp.r, sp.s) == (1, 2)


def test_two_component_fast_matrix_and_rank():
    _, sp = _split("two_component")
    expected = [
        [-1, 1, 0, 0, 1, -1],
        [1, -1, -1, 1, 0, 0],
        [0, 0, -1, 1, 0, 0],
        [0, 0, 0, 0, 1, -1],
        [0, 0, 1, -1, -1, 1],
        [0, 0, 0, 0, 0, 0],
    ]
    assert sp.N_f == expected
    assert (sp.r, sp.s) == (3, 3)


def test_inflow_column():
    m = parse_model("@species X1\n@fast\n0 -> X1 : 1\n")
    sd = build_stoich(m)
    assert sd.N == [[1]] and sd.Y == [[0]]


def test_all_fast_has_empty_slow_part():
    m = parse_model("@species A B\n@fast\nA <-> B : 1, 2\n")
    sp = split_slow_fast(build_stoich(m), m)
    assert sp.m_s == 0
    assert all(not h for h in m.h1())


def test_left_kernel_examples():
    _, sp = _split("two_component")
    assert _same_row_space(left_kernel_basis(sp.N_f), [[1, 1, 0, 0, 1, 0], [0, 0, 1, 1, 1, 0], [0, 0, 0, 0, 0, 1]])
    _, sp1 = _split("example1")
    assert _same_row_space(left_kernel_basis(sp1.N_f), [[1, -1, 0], [1, 0, 1]])
    assert left_kernel_basis([[1, 2], [3, 4]]) == []


def test_conservation_laws_examples():
    m2 = fixtures.load("example2", keep_x4=True)
    cons = conservation_laws(build_stoich(m2))
    assert q_rank(cons + [[1, 0, 1, 0]]) == q_rank(cons)
    m3 = fixtures.load("example3", with_phi=False)
    cons3 = conservation_laws(build_stoich(m3))
    assert q_rank(cons3 + [[4, 5, 6]]) == q_rank(cons3)
    full_rank = parse_model("@species A\n@fast\nA -> 0 : 1\n")
    assert conservation_laws(build_stoich(full_rank)) == []


def test_graph_counts():
    m, sp = _split("two_component")
    g = fast_graph(m, sp)
    assert (g.num_nodes, len(g.linkage_classes)) == (6, 3)
    assert deficiency(g, sp.N_f) == 0
    assert weakly_reversible(g)
    m, sp = _split("dual_phosphorylation")
    g = fast_graph(m, sp)
    assert (g.num_nodes, len(g.linkage_classes)) == (6, 2)
    assert deficiency(g, sp.N_f) == 1
    assert not weakly_reversible(g)
    empty = build_graph([])
    assert empty.num_nodes == 0 and weakly_reversible(empty)


def test_single_reversible_reaction_deficiency():
    m = parse_model("@species X1 X2 X3\n@fast\nX1 + X2 <-> X3 : 1, 1\n")
    sp = split_slow_fast(build_stoich(m), m)
    assert deficiency(fast_graph(m, sp), sp.N_f) == 0


def test_structural_summary_two_component():
    st_ = analyze_structure(fixtures.load("two_component"))
    assert (st_.deficiency_fast, st_.r, st_.s, st_.weakly_reversible_fast) == (0, 3, 3, True)


# ---------------------------------------------------------------------------
# properties

ints = st.integers(-4, 4)


@given(st.integers(1, 5).flatmap(lambda n: st.lists(st.lists(ints, min_size=4, max_size=4), min_size=n, max_size=n)))
def test_left_kernel_annihilates(A):
    B = left_kernel_basis(A)
    assert all(all(v == 0 for v in row) for row in q_matmul(B, A)) if B else True
    assert len(B) + integer_rank(A) == len(A)
    for row in B:
        first = next(v for v in row if v)
        assert first > 0


@st.composite
def random_crn(draw):
    n = draw(st.integers(1, 8))
    complexes = st.dictionaries(st.integers(0, n - 1), st.integers(1, 2), max_size=2)
    reactions = []
    for _ in range(draw(st.integers(1, 10))):
        a = Complex.from_dict(draw(complexes))
        b = Complex.from_dict(draw(complexes))
        if a == b:
            continue
        speed = draw(st.sampled_from(["fast", "slow"]))
        reactions.append(Reaction(a, b, Fraction(1), speed))
    return n, reactions


@given(random_crn())
def test_random_network_properties(data):
    n, reactions = data
    if not reactions:
        return
    g = build_graph(reactions)
    N = [[0] * len(reactions) for _ in range(n)]
    for j, rx in enumerate(reactions):
        for i, (p, r) in enumerate(zip(rx.product.vector(n), rx.reactant.vector(n))):
            N[i][j] = p - r
    assert deficiency(g, N) >= 0
    fast = [j for j, rx in enumerate(reactions) if rx.speed == "fast"]
    slow = [j for j, rx in enumerate(reactions) if rx.speed == "slow"]
    Nf = [[row[j] for j in fast] for row in N]
    Ns = [[row[j] for j in slow] for row in N]
    # column space of N is the sum of those of N_f and N_s
    assert integer_rank(N) == q_rank([a + b for a, b in zip(Nf, Ns)])
    for psi in left_kernel_basis(N):
        assert all(sum(psi[i] * N[i][j] for i in range(n)) == 0 for j in range(len(reactions)))
