from fractions import Fraction

import oracles as orc
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from tfreduce import fixtures
from tfreduce.crn import build_stoich, left_kernel_basis, split_slow_fast
from tfreduce.exact import RFMatrix, q_matmul, q_rank, rf_eval, rf_field, v_names
from tfreduce.manifold import (
    complex_balanced_state,
    dphi,
    find_noninteracting_sets,
    monomial_parameterization,
    rational_parameterization,
    user_parameterization,
)
from tfreduce.model import parse_model
from tfreduce.reduce import (
    A_on_phi,
    Dh0_on_phi,
    InconsistencyError,
    PreconditionViolated,
    SingularA,
    SingularLDPhi,
    blanket_hypothesis_report,
    complex_balanced_reduced,
    compute_R_general,
    compute_R_graph_case,
    compute_R_via_L,
    decompose_P_mu,
    eigenvalue_consistency,
    functional_independence_check,
    inherited_first_integrals,
    lemma_BA_check,
    projection_Q,
    projection_Q_on_phi,
    reduced_system,
    stability_analysis,
)

F2, F3 = rf_field(v_names(2)), rf_field(v_names(3))
EX1_L = [[1, 0, 1], [0, 1, 1]]

rates = st.fractions(min_value=Fraction(1, 20), max_value=20, max_denominator=20)


def _split(name, **k):
    m = fixtures.load(name, **k)
    return m, split_slow_fast(build_stoich(m), m)


def _ex1(k1=1, km1=1, k2=1, km2=1, name="example1"):
    """Example 1 (or 2) with Phi = (v1, v2, K v1 v2)."""
    kw = dict(k1=k1, km1=km1, k2=k2) if name == "example2" else dict(k1=k1, km1=km1, k2=k2, km2=km2)
    m, sp = _split(name, **kw)
    K = Fraction(k1) / Fraction(km1)
    phi = monomial_parameterization((1, 1, K), EX1_L, sp)
    return m, sp, decompose_P_mu(sp), phi


def _mat(rows, F):
    return RFMatrix([[F.from_expr(sympy.together(sympy.sympify(e))) for e in row] for row in rows], F)


def _ident(R, phi, dec):
    F = phi.field
    D = dphi(phi)
    assert R @ D == RFMatrix.identity(phi.s, F)
    P = RFMatrix([[F(e) for e in row] for row in dec.P_rational()], F)
    assert (R @ P).is_zero()
    DR = D @ R
    assert DR @ DR == DR


# P / mu


def test_decompose_examples():
    _, sp = _split("example1", k1=3, km1=2)
    dec = decompose_P_mu(sp)
    assert dec.P_rational() == [[1], [1], [-1]]
    x1, x2, x3 = dec.ring.gens
    assert dec.mu == [-3 * x1 * x2 + 2 * x3]
    _, sp = _split("example3")
    assert decompose_P_mu(sp).P_rational() == [[2], [2], [-3]]


def test_decompose_dual_phosphorylation():
    _, sp = _split("dual_phosphorylation", k1=2, k2=3, k3=5, k4=7, k5=11, k6=13)
    dec = decompose_P_mu(sp)
    assert dec.r == 3 and q_rank(dec.P_rational()) == 3
    assert dec.check()
    # the alternative row choice {1, 2, 4} also reproduces h0
    h0 = [sympy.sympify(str(h.as_expr())) for h in dec.h0]
    Pp = sympy.Matrix([[1, 0, 0], [0, 1, 0], [-1, 0, -1], [0, 0, 1], [1, -1, 0], [0, 0, 0]])
    assert sympy.expand(Pp * sympy.Matrix([h0[0], h0[1], h0[3]]) - sympy.Matrix(h0)) == sympy.zeros(6, 1)


@settings(max_examples=20)
@given(rates, rates, rates, rates)
def test_decompose_identity(a, b, c, d):
    _, sp = _split("two_component", k1=a, k2=b, k3=c, k4=d)
    assert decompose_P_mu(sp).check()


# functional independence


def test_independence_examples():
    _, _, dec, phi = _ex1()
    assert functional_independence_check(dec, phi)
    m, sp = _split("dual_phosphorylation")
    phi = rational_parameterization(find_noninteracting_sets(sp, m)[-1], sp)
    assert functional_independence_check(decompose_P_mu(sp), phi, samples=20)


def test_independence_degenerate():
    m = parse_model("@generic\n@vars x1 x2\n@P\n1\n1\n@mu\nx1^2\n@h1\n0\n1\n@phi\nv1\nv2\n")
    dec = decompose_P_mu(m)
    phi = user_parameterization(m.phi)
    res = functional_independence_check(dec, phi, samples=[(0, 1), (Fraction(1, 2), 3), (2, 2)])
    assert res.per_sample == [False, True, True]
    assert not res


# R


def test_R_via_L_example1():
    _, _, dec, phi = _ex1(k1=3, km1=2)
    R = compute_R_via_L(phi, EX1_L)
    assert R == _mat(orc.example1_R(3, 2), F2)
    _ident(R, phi, dec)


def test_R_example1_value():
    _, _, _, phi = _ex1()
    R = compute_R_via_L(phi, EX1_L)
    assert R.evaluate((2, 1)) == [[Fraction(3, 4), Fraction(-2, 4), Fraction(1, 4)], [Fraction(-1, 4), Fraction(2, 4), Fraction(1, 4)]]


@pytest.mark.parametrize("c", [1, 2, Fraction(2, 3)])
def test_L_dphi_example3(c):
    m = fixtures.load("example3", k1=c**3, km1=1)
    phi = user_parameterization(m.phi)
    L = RFMatrix([[F2(e) for e in row] for row in [[1, -1, 0], [3, 0, 2]]], F2)
    assert L @ dphi(phi) == _mat(orc.example3_LDphi(c), F2)


def test_R_via_L_singular():
    _, _, _, phi = _ex1()
    with pytest.raises(SingularLDPhi):
        compute_R_via_L(phi, [[1, 0, 1], [2, 0, 2]])


def test_paths_agree():
    for name in ("example1", "example2", "two_component", "dual_phosphorylation"):
        m, sp = _split(name)
        dec = decompose_P_mu(sp)
        for nis in find_noninteracting_sets(sp, m):
            phi = rational_parameterization(nis, sp)
            L = left_kernel_basis(sp.N_f)
            Rl = compute_R_via_L(phi, L)
            Rg = compute_R_general(phi, dec)
            Rc, _ = compute_R_graph_case(phi, dec)
            assert Rl == Rg == Rc, (name, nis.indices)
            _ident(Rg, phi, dec)


def test_graph_case_two_component_second():
    m, sp = _split("two_component", k1=2, k2=3, k3=5, k4=7, k5=11, k6=13)
    nis = next(s for s in find_noninteracting_sets(sp, m) if s.indices == (1, 3, 4))
    phi = rational_parameterization(nis, sp)
    dec = decompose_P_mu(sp)
    Rc, qss = compute_R_graph_case(phi, dec)
    assert not qss
    assert Rc == compute_R_general(phi, dec)


def test_qss_case():
    # Z = {x2 = 0}: Phi1 = v, Phi2 = 0 and R = (I | -P1 P2^-1)
    m = parse_model("@generic\n@vars x1 x2\n@P\n2\n-1\n@mu\nx2\n@h1\nx1\nx1^2\n@phi\nv1\n0\n")
    dec = decompose_P_mu(m)
    phi = user_parameterization(m.phi)
    R, qss = compute_R_graph_case(phi, dec)
    F1 = phi.field
    assert qss
    assert R == RFMatrix([[F1(1), F1(2)]], F1)
    assert R == compute_R_general(phi, dec)


# reduced system


@pytest.mark.parametrize("k", [(1, 1, 1, 1), (3, 2, 5, 7), (Fraction(1, 2), 3, 2, Fraction(5, 3))])
def test_reduced_example1(k):
    _, sp, dec, phi = _ex1(*k)
    rs = reduced_system(phi, compute_R_via_L(phi, EX1_L), dec, "via_L")
    assert rs.rhs == orc.to_rf(orc.example1_rhs(*k), 2)


def test_reduced_example1_value():
    _, sp, dec, phi = _ex1()
    rs = reduced_system(phi, compute_R_general(phi, dec), dec)
    assert rs.evaluate((2, 1)) == [-6, 3]


@pytest.mark.parametrize("k", [(1, 1, 1), (3, 2, 5), (Fraction(1, 3), 4, Fraction(7, 2))])
def test_reduced_example2_and_integral(k):
    m, sp, dec, phi = _ex1(*k, name="example2")
    rs = reduced_system(phi, compute_R_general(phi, dec), dec)
    assert rs.rhs == orc.to_rf(orc.example2_rhs(*k), 2)
    assert orc.to_rf([orc.example2_integral(k[0], k[1])], 2)[0] in rs.first_integrals


@pytest.mark.parametrize("c,k2,km2", [(1, 1, 1), (2, 3, 5), (Fraction(2, 3), Fraction(1, 2), 4)])
def test_reduced_example3(c, k2, km2):
    m = fixtures.load("example3", k1=c**3, km1=1, k2=k2, km2=km2)
    phi = user_parameterization(m.phi)
    rs = reduced_system(phi, compute_R_via_L(phi, m.L), decompose_P_mu(m))
    assert rs.rhs == orc.to_rf(orc.example3_rhs(c, k2, km2), 2)


K9 = [(1,) * 9, (2, 3, 5, 7, 11, 13, 17, 19, 23), tuple(Fraction(i, i + 2) for i in range(1, 10))]


@pytest.mark.parametrize("k", K9)
@pytest.mark.parametrize("which", ["first", "second"])
def test_two_component_closed_form(k, which):
    xs, rhs = getattr(orc, f"two_component_{which}")(k)
    xs = [Fraction(str(sympy.nsimplify(a))) for a in xs]
    _, sp = _split("two_component", **{f"k{i + 1}": k[i] for i in range(9)})
    phi = monomial_parameterization(xs, orc.TWO_COMPONENT_LF, sp)
    cf = complex_balanced_reduced(phi, orc.TWO_COMPONENT_LF, sp)
    via_L = reduced_system(phi, compute_R_via_L(phi, orc.TWO_COMPONENT_LF), sp, "via_L")
    assert cf.rhs == via_L.rhs == orc.to_rf(rhs, 3)
    assert cf.R == via_L.R
    assert len(cf.first_integrals) == 2


def test_closed_form_example1_all_ones():
    _, sp, dec, phi = _ex1()
    cf = complex_balanced_reduced(phi, EX1_L, sp)
    gen = reduced_system(phi, compute_R_general(phi, dec), dec)
    assert cf.rhs == gen.rhs
    assert cf.path == "complex_balanced"


def test_closed_form_numeric_xstar():
    _, sp = _split("two_component", k1=2, k2=3, k3=5, k4=7, k5=11, k6=13, k8=2, k9=3)
    cb = complex_balanced_state(sp, hint=(Fraction(1, 3), 1, 1, 1, 1, 1), search_exact=False)
    assert not cb.exact
    Lf = orc.TWO_COMPONENT_LF
    phi = monomial_parameterization(cb.x, Lf, sp)
    cf = complex_balanced_reduced(phi, Lf, sp)
    via_L = reduced_system(phi, compute_R_via_L(phi, Lf), sp)
    for v in [(1, 1, 1), (Fraction(1, 2), 3, 2), (5, Fraction(1, 7), 4)]:
        a, b = cf.evaluate(v), via_L.evaluate(v)
        assert all(abs(x - y) <= Fraction(1, 10**10) * max(1, abs(y)) for x, y in zip(a, b))


def test_closed_form_at_ones():
    # v = 1: rhs = (L diag(x*) L^T)^-1 L N_s (K_s o x*^Y_s)
    _, sp = _split("two_component")
    Lf = orc.TWO_COMPONENT_LF
    cb = complex_balanced_state(sp)
    phi = monomial_parameterization(cb.x, Lf, sp)
    cf = complex_balanced_reduced(phi, Lf, sp)
    xs = [Fraction(a) for a in cb.x]
    M = [[sum(Lf[a][i] * xs[i] * Lf[b][i] for i in range(6)) for b in range(3)] for a in range(3)]
    w = []
    for j in range(sp.m_s):
        t = Fraction(sp.K_s[j])
        for i in range(6):
            t *= xs[i] ** sp.Y_s[i][j]
        w.append([t])
    b = q_matmul(q_matmul(Lf, sp.N_s), w)
    expect = sympy.Matrix(M).inv() * sympy.Matrix(b)
    assert cf.evaluate((1, 1, 1)) == [Fraction(str(e)) for e in expect]
    assert cf.evaluate((1, 1, 1))[2] == 0


def test_triviality():
    _, sp = _split("two_component_no_k8_k9", k1=2, k2=3, k5=7)
    cb = complex_balanced_state(sp)
    phi = monomial_parameterization(cb.x, orc.TWO_COMPONENT_LF, sp)
    rs = reduced_system(phi, compute_R_via_L(phi, orc.TWO_COMPONENT_LF), sp)
    assert rs.trivial and not any(rs.rhs)
    assert not any(complex_balanced_reduced(phi, orc.TWO_COMPONENT_LF, sp).rhs)


def test_inherited_integrals_constant_and_failure():
    _, sp, dec, phi = _ex1()
    rs = reduced_system(phi, compute_R_general(phi, dec), dec)
    # a law touching only coordinates fixed to constants gives a constant
    const = user_parameterization(orc.to_rf([orc.v1, orc.v2, 5], 2))
    assert inherited_first_integrals([[0, 0, 1]], const, [F2(0), F2(0)]) == [F2(5)]
    with pytest.raises(InconsistencyError):
        inherited_first_integrals([[1, 0, 0]], phi, rs.rhs)


@pytest.mark.parametrize("k", [(1,) * 8, (2, 3, 5, 7, 11, 13, 17, 19), (Fraction(1, 2), 3, Fraction(2, 3), 1, 4, Fraction(5, 4), 2, 9)])
def test_reduced_dual_phosphorylation(k):
    m, sp = _split("dual_phosphorylation", **{f"k{i + 1}": k[i] for i in range(8)})
    nis = next(s for s in find_noninteracting_sets(sp, m) if s.indices == (2, 3, 4))
    phi = rational_parameterization(nis, sp)
    assert list(phi.phi) == orc.to_rf(orc.dual_phosphorylation_phi(k), 3)
    dec = decompose_P_mu(sp)
    R, _ = compute_R_graph_case(phi, dec)
    assert reduced_system(phi, R, dec).rhs == orc.to_rf(orc.dual_phosphorylation_rhs(k), 3)


def test_invariance_of_Z():
    for name in ("example1", "two_component", "dual_phosphorylation"):
        m, sp = _split(name)
        dec = decompose_P_mu(sp)
        phi = rational_parameterization(find_noninteracting_sets(sp, m)[-1], sp)
        assert (Dh0_on_phi(dec, phi) @ dphi(phi)).is_zero()


def test_oscillator():
    for a, b, c in [(-1, 2, -3), (-2, 1, -1), (Fraction(-1, 2), 3, Fraction(-5, 2))]:
        m = fixtures.load("coupled_oscillator", a=a, b=b, c=c)
        phi = user_parameterization(m.phi)
        dec = decompose_P_mu(m)
        rs = reduced_system(phi, compute_R_via_L(phi, m.L), m, "via_L")
        assert rs.rhs == orc.to_rf(orc.oscillator_rhs(a, b, c), 1)
        assert A_on_phi(dec, phi)[0, 0] == orc.to_rf([orc.oscillator_A(a, b, c)], 1)[0]


def test_oscillator_string():
    m = fixtures.load("coupled_oscillator")
    phi = user_parameterization(m.phi)
    rs = reduced_system(phi, compute_R_via_L(phi, m.L), m)
    assert rs.rhs_strings() == ["-1/4*v1^4 + 3*v1^3"]


# projection


def test_projection_example1():
    _, sp, dec, _ = _ex1()
    Q = projection_Q(dec, (1, 1, 1))
    assert q_matmul(Q, Q) == Q
    assert q_rank(Q) == 2
    assert q_matmul(Q, [[1], [1], [-1]]) == [[0], [0], [0]]


def test_projection_singular():
    _, sp, dec, _ = _ex1(k1=2, km1=3)
    with pytest.raises(SingularA):
        projection_Q(dec, (-1, Fraction(-1, 2), 7))


def test_projection_on_phi_matches_dphi_R():
    for name in ("example1", "two_component"):
        m, sp = _split(name)
        dec = decompose_P_mu(sp)
        phi = rational_parameterization(find_noninteracting_sets(sp, m)[0], sp)
        R = compute_R_general(phi, dec)
        assert projection_Q_on_phi(dec, phi) == dphi(phi) @ R


# stability


def test_stability_example1():
    k1, km1 = Fraction(3), Fraction(2)
    _, sp, dec, phi = _ex1(k1, km1)
    rep = stability_analysis(dec, phi)
    v1, v2 = F2.gens
    assert rep.A_matrix[0, 0] == -(k1 * (v1 + v2) + km1)
    assert rep.all_stable and rep.global_certificate
    assert rep.shortcut is not None and not rep.inconsistencies


def test_stability_oscillator():
    m = fixtures.load("coupled_oscillator")
    rep = stability_analysis(decompose_P_mu(m), user_parameterization(m.phi))
    assert rep.all_stable and rep.shortcut is None


def test_stability_dual_phosphorylation():
    m, sp = _split("dual_phosphorylation")
    dec = decompose_P_mu(sp)
    phi = rational_parameterization(find_noninteracting_sets(sp, m)[-1], sp)
    rep = stability_analysis(dec, phi, samples=20)
    assert rep.method == "routh_hurwitz"
    assert rep.verdicts == ["stable"] * 20
    assert rep.global_certificate
    x = phi.evaluate((1, 1, 1))
    sig = orc.dual_phosphorylation_sigmas((1,) * 8, x)
    assert sig[0] > 0 and sig[2] > 0 and sig[0] * sig[1] - sig[2] > 0
    assert [rf_eval(c, (1, 1, 1)) for c in rep.char_poly[1:]] == [Fraction(str(e)) for e in sig]


def test_stability_eigen_method_agrees():
    _, sp, dec, phi = _ex1(2, 5)
    a = stability_analysis(dec, phi, method="routh_hurwitz")
    b = stability_analysis(dec, phi, method="eigenvalues")
    assert a.verdicts == b.verdicts


# blanket hypothesis


def test_blanket_example1_and_two_component():
    _, _, dec, phi = _ex1()
    assert blanket_hypothesis_report(dec, phi).passed
    m, sp = _split("two_component")
    phi = rational_parameterization(find_noninteracting_sets(sp, m)[0], sp)
    rep = blanket_hypothesis_report(decompose_P_mu(sp), phi)
    assert rep.passed and all(rep.tikhonov) and rep.shortcut is not None


def test_blanket_fold():
    m = parse_model("@generic\n@vars x1 x2\n@P\n0\n1\n@mu\nx2^2 - x1\n@h1\n1\n0\n@phi\nv1^2\nv1\n")
    dec = decompose_P_mu(m)
    phi = user_parameterization(m.phi)
    rep = blanket_hypothesis_report(dec, phi, samples=[(Fraction(1, 10**10),), (Fraction(1, 10**4),), (1,)])
    assert rep.ill_conditioned == [True, False, False]
    assert not rep.passed


# lemma BA


def test_lemma_BA_examples():
    assert lemma_BA_check([[1], [0]], [[1, 0]])
    with pytest.raises(PreconditionViolated):
        lemma_BA_check([[1, 0], [0, 0]], [[1, 0], [0, 0]])


@settings(max_examples=50)
@given(st.lists(st.integers(-5, 5), min_size=8, max_size=8))
def test_lemma_BA_pseudo_inverse(entries):
    A = [entries[2 * i : 2 * i + 2] for i in range(4)]
    if q_rank(A) < 2:
        return
    At = [list(c) for c in zip(*A)]
    B = q_matmul(sympy_inverse(q_matmul(At, A)), At)
    assert lemma_BA_check(A, B)


def sympy_inverse(M):
    inv = sympy.Matrix(M).inv()
    return [[Fraction(str(e)) for e in inv.row(i)] for i in range(inv.rows)]


# eigenvalues


def test_eigenvalue_consistency_fixtures():
    for name in ("example1", "two_component", "dual_phosphorylation"):
        m, sp = _split(name)
        dec = decompose_P_mu(sp)
        phi = rational_parameterization(find_noninteracting_sets(sp, m)[0], sp)
        assert eigenvalue_consistency(dec, phi).passed
    m = fixtures.load("coupled_oscillator")
    assert eigenvalue_consistency(decompose_P_mu(m), user_parameterization(m.phi)).passed
