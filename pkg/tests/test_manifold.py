from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from tfreduce import fixtures
from tfreduce.crn import build_stoich, left_kernel_basis, split_slow_fast
from tfreduce.exact import RFMatrix, rf_eval, rf_field, v_names
from tfreduce.manifold import (
    NotWeaklyReversible,
    RankDeficientB,
    balance_residual,
    complex_balanced_state,
    compose_fast,
    dphi,
    find_noninteracting_sets,
    monomial_parameterization,
    rational_parameterization,
    sample_points,
    user_parameterization,
    verify_parameterization,
)

F2, F3 = rf_field(v_names(2)), rf_field(v_names(3))


def _split(name, **k):
    m = fixtures.load(name, **k)
    return m, split_slow_fast(build_stoich(m), m)


def _set(sp, m, names):
    idx = tuple(sorted(m.names.index(x) for x in names))
    return next(s for s in find_noninteracting_sets(sp, m) if s.indices == idx)


def test_noninteracting_examples():
    m, sp = _split("dual_phosphorylation")
    assert (2, 3, 4) in [s.indices for s in find_noninteracting_sets(sp, m)]
    m, sp = _split("two_component")
    assert (1, 3, 4) in [s.indices for s in find_noninteracting_sets(sp, m)]
    m, sp = _split("example3", with_phi=False)
    assert find_noninteracting_sets(sp, m) == []


def _sympy_elimination(m, sp, names):
    """Independent oracle: solve the set equations of h0 = 0 with sympy."""
    xs = sympy.symbols(f"x1:{m.n + 1}")
    h0 = []
    for i in range(m.n):
        expr = 0
        for j, k in enumerate(sp.K_f):
            rate = sympy.Rational(k.numerator, k.denominator)
            for a in range(m.n):
                rate *= xs[a] ** sp.Y_f[a][j]
            expr += sp.N_f[i][j] * rate
        h0.append(expr)
    idx = [m.names.index(x) for x in names]
    sol = sympy.solve([h0[i] for i in idx], [xs[i] for i in idx], dict=True)[0]
    return xs, idx, sol


def test_dual_phosphorylation_rational_phi_against_sympy():
    m, sp = _split("dual_phosphorylation")
    p = rational_parameterization(_set(sp, m, ["X3", "X4", "X5"]), sp)
    v1, v2, v3 = F3.gens
    assert list(p.phi) == [v1, v2, v1 * v2 / 2, (v1 + 1) * v1 * v2 / 2, v1 * v2 / 2, v3]
    xs, idx, sol = _sympy_elimination(m, sp, ["X3", "X4", "X5"])
    free = [i for i in range(6) if i not in idx]
    for pt in sample_points(3, 5, seed=7):
        subs = {xs[i]: sympy.Rational(a.numerator, a.denominator) for i, a in zip(free, pt)}
        for i in idx:
            assert rf_eval(p.phi[i], pt) == Fraction(str(sol[xs[i]].subs(subs)))


def test_dual_phosphorylation_rational_phi_general_k():
    k = dict(k1=2, k2=3, k3=5, k4=7, k5=11, k6=13)
    m, sp = _split("dual_phosphorylation", **k)
    p = rational_parameterization(_set(sp, m, ["X3", "X4", "X5"]), sp)
    xs, idx, sol = _sympy_elimination(m, sp, ["X3", "X4", "X5"])
    pt = (Fraction(3, 2), Fraction(5, 7), Fraction(2))
    subs = {xs[0]: sympy.Rational(3, 2), xs[1]: sympy.Rational(5, 7), xs[5]: 2}
    for i in idx:
        assert rf_eval(p.phi[i], pt) == Fraction(str(sol[xs[i]].subs(subs)))


def test_example1_rational_phi():
    m, sp = _split("example1", k1=2, km1=3)
    p = rational_parameterization(_set(sp, m, ["X3"]), sp)
    v1, v2 = F2.gens
    assert list(p.phi) == [v1, v2, Fraction(2, 3) * v1 * v2]


def test_two_component_rational_phi():
    m, sp = _split("two_component")
    p = rational_parameterization(_set(sp, m, ["X2", "X4", "X5"]), sp)
    v1, v2, v3 = F3.gens
    assert list(p.phi) == [v1, v1, v2, v2, v1 * v2, v3]


def test_complex_balanced_examples():
    _, sp = _split("two_component")
    cb = complex_balanced_state(sp)
    assert cb.exact and cb.x == tuple([Fraction(1)] * 6)
    _, sp = _split("example1")
    assert complex_balanced_state(sp).x == (1, 1, 1)
    _, sp = _split("dual_phosphorylation")
    with pytest.raises(NotWeaklyReversible):
        complex_balanced_state(sp)


def test_complex_balanced_closed_form_hint_is_exact():
    k = dict(k1=2, k2=3, k3=5, k4=7, k5=11, k6=13)
    _, sp = _split("two_component", **k)
    k1, k2, k3, k4, k5, k6 = (Fraction(k[f"k{i}"]) for i in range(1, 7))
    hint = (1, k1 / k2, k2 * k4 * k6 / (k1 * k3 * k5), 1, k6 / k5, 1)
    cb = complex_balanced_state(sp, hint)
    assert cb.exact and cb.x == hint


def test_complex_balanced_exact_from_tree_constants():
    k = dict(k1=2, k2=3, k3=5, k4=7, k5=11, k6=13)
    _, sp = _split("two_component", **k)
    k1, k2, k3, k4, k5, k6 = (Fraction(k[f"k{i}"]) for i in range(1, 7))
    cb = complex_balanced_state(sp)
    assert cb.exact and cb.x == (1, k1 / k2, 1, k1 * k3 * k5 / (k2 * k4 * k6), k1 * k3 / (k2 * k4), 1)
    # x3^3 = (k1/km1) x1^2 x2^2 needs an exact cube root
    _, sp = _split("example3", k1=8, km1=27, with_phi=False)
    assert complex_balanced_state(sp).x == (1, 1, Fraction(2, 3))


def test_complex_balanced_numeric_search():
    # 2 is not a rational cube, so no rational balanced state exists
    _, sp = _split("example3", k1=2, km1=1, with_phi=False)
    cb = complex_balanced_state(sp)
    assert not cb.exact and cb.method == "newton"
    assert balance_residual(sp, cb.x) < 1e-10
    assert all(a > 0 for a in cb.x)


def test_monomial_examples():
    p = monomial_parameterization([1, 1, 1], [[1, -1, 0], [1, 0, 1]])
    v1, v2 = F2.gens
    assert list(p.phi) == [v1 * v2, 1 / v1, v2]
    _, sp = _split("example1")
    assert all(not c for c in compose_fast(p, fixtures.load("example1").h0()))
    assert p.evaluate([1, 1]) == [1, 1, 1]
    with pytest.raises(RankDeficientB):
        monomial_parameterization([1, 1, 1], [[1, -1, 0], [2, -2, 0]])


def test_monomial_two_component_matches_display():
    k = dict(k1=2, k2=3, k3=5, k4=7, k5=11, k6=13)
    _, sp = _split("two_component", **k)
    k1, k2, k3, k4, k5, k6 = (Fraction(k[f"k{i}"]) for i in range(1, 7))
    xs = (1, k1 / k2, k2 * k4 * k6 / (k1 * k3 * k5), 1, k6 / k5, 1)
    p = monomial_parameterization(xs, left_kernel_basis(sp.N_f), sp)
    v1, v2, v3 = F3.gens
    assert list(p.phi) == [v1, k1 / k2 * v1, k2 * k4 * k6 / (k1 * k3 * k5) * v2, v2, k6 / k5 * v1 * v2, v3]
    rep = verify_parameterization(p, sp)
    assert rep.passed and rep.manifold_exact and rep.positive


def test_dphi_examples():
    K = Fraction(2, 3)
    v1, v2 = F2.gens
    p = user_parameterization([v1, v2, K * v1 * v2])
    assert dphi(p) == RFMatrix([[1, 0], [0, 1], [K * v2, K * v1]], F2)
    xs = [Fraction(2), Fraction(3), Fraction(5)]
    B = [[1, -1, 0], [1, 0, 1]]
    pm = monomial_parameterization(xs, B)
    at1 = dphi(pm).evaluate([1, 1])
    assert at1 == [[xs[i] * B[j][i] for j in range(2)] for i in range(3)]


def test_dphi_dual_phosphorylation_display():
    m, sp = _split("dual_phosphorylation")
    p = rational_parameterization(_set(sp, m, ["X3", "X4", "X5"]), sp)
    v1, v2, v3 = F3.gens
    h = Fraction(1, 2)
    expected = [
        [1, 0, 0],
        [0, 1, 0],
        [h * v2, h * v1, 0],
        [v1 * v2 + h * v2, h * v1**2 + h * v1, 0],
        [h * v2, h * v1, 0],
        [0, 0, 1],
    ]
    assert dphi(p) == RFMatrix(expected, F3)


def test_verify_flags_typo():
    m = fixtures.load("example1")
    v1, v2 = F2.gens
    good = verify_parameterization(user_parameterization([v1, v2, v1 * v2]), m)
    assert good.passed and good.manifold_exact
    bad = verify_parameterization(user_parameterization([v1, v2, v1 * v2**2]), m)
    assert not bad.passed and bad.manifold_exact is False


def test_sample_points_range_and_determinism():
    pts = sample_points(3, 20, seed=42)
    assert pts == sample_points(3, 20, seed=42)
    assert all(0 < a <= 10 and a.numerator <= 100 and a.denominator <= 100 for pt in pts for a in pt)


# ---------------------------------------------------------------------------
# properties

pos = st.fractions(min_value=Fraction(1, 10), max_value=10, max_denominator=12)


@given(st.lists(pos, min_size=3, max_size=3), st.lists(pos, min_size=2, max_size=2), st.lists(pos, min_size=2, max_size=2))
def test_monomial_log_affine(xs, v, w):
    p = monomial_parameterization(xs, [[1, -1, 0], [1, 0, 1]])
    lhs = p.evaluate([a * b for a, b in zip(v, w)])
    pv, pw = p.evaluate(v), p.evaluate(w)
    assert lhs == [a * b / x for a, b, x in zip(pv, pw, xs)]


@given(st.permutations(range(8)))
def test_noninteracting_sets_stable_under_reaction_order(perm):
    m = fixtures.load("dual_phosphorylation")
    rxs = list(m.reactions)
    m2 = m.with_reactions([rxs[i] for i in perm])
    sp1 = split_slow_fast(build_stoich(m), m)
    sp2 = split_slow_fast(build_stoich(m2), m2)
    assert {s.indices for s in find_noninteracting_sets(sp1, m)} == {s.indices for s in find_noninteracting_sets(sp2, m2)}


@given(st.lists(st.integers(1, 9), min_size=6, max_size=6))
def test_rational_parameterizations_are_exact(ks):
    k = {f"k{i + 1}": v for i, v in enumerate(ks)}
    m, sp = _split("dual_phosphorylation", **k)
    for s in find_noninteracting_sets(sp, m):
        p = rational_parameterization(s, sp)
        assert all(not c for c in compose_fast(p, m.h0()))


@given(st.lists(st.integers(1, 9), min_size=6, max_size=6))
def test_complex_balanced_residual(ks):
    k = {f"k{i + 1}": v for i, v in enumerate(ks)}
    _, sp = _split("two_component", **k)
    cb = complex_balanced_state(sp)
    if cb.exact:
        assert balance_residual(sp, cb.x, exact=True) == 0
    else:
        assert balance_residual(sp, cb.x) < 1e-10
