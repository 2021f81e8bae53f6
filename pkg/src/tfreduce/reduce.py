"""Reduced systems on the critical manifold, projections and stability checks.

Every identity here (R DPhi = I, R P = 0, ...) is established by exact
rational-function arithmetic; only open conditions such as eigenvalue signs
are checked on sample points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from sympy.polys.fields import FracElement
from sympy.polys.rings import PolyElement

from .crn import (
    SlowFastSplit,
    build_graph,
    build_stoich,
    deficiency,
    integer_rank,
    left_kernel_basis,
    split_slow_fast,
    weakly_reversible,
)
from .exact import (
    RFMatrix,
    SingularMatrix,
    charpoly,
    format_ratfun,
    hurwitz_determinants,
    poly_diff,
    poly_eval,
    poly_eval_float,
    poly_ring,
    q_identity,
    q_inverse,
    q_matmul,
    q_rank,
    q_solve,
    rf_charpoly,
    rf_det,
    rf_eval,
    rf_solve_linear,
    rf_sum,
    substitute,
    to_fraction,
    to_qq,
)
from .manifold import (
    Parameterization,
    _rows_spanning,
    dphi,
    fast_polys_from_split,
    sample_points,
    slow_polys_from_split,
)
from .model import Model


class SingularLDPhi(ArithmeticError):
    pass


class SingularAugmentedMatrix(ArithmeticError):
    pass


class NoInvertibleBlock(ArithmeticError):
    pass


class SingularA(ArithmeticError):
    pass


class PreconditionViolated(ValueError):
    pass


class InconsistencyError(AssertionError):
    pass


# ---------------------------------------------------------------------------
# P / mu


@dataclass
class PMuDecomposition:
    """h0 = P mu with P an n x r matrix and mu an r-vector of polynomials.

    For reaction networks P is constant; generic models may supply a
    polynomial P.
    """

    P: list[list[PolyElement]]
    mu: list[PolyElement]
    row_indices: tuple[int, ...] | None
    h0: list[PolyElement]
    ring: object
    split: SlowFastSplit | None = None
    h1: list[PolyElement] | None = None

    @property
    def n(self) -> int:
        return len(self.P)

    @property
    def r(self) -> int:
        return len(self.mu)

    @property
    def constant_P(self) -> bool:
        return all(e.is_ground for row in self.P for e in row)

    def P_rational(self) -> list[list[Fraction]]:
        if not self.constant_P:
            raise ValueError("P depends on x")
        return [[to_fraction(e.LC) if e else Fraction(0) for e in row] for row in self.P]

    def check(self) -> bool:
        """h0 = P mu identically."""
        for i in range(self.n):
            acc = self.ring.zero
            for j in range(self.r):
                acc += self.P[i][j] * self.mu[j]
            if acc != self.h0[i]:
                return False
        return True


def decompose_P_mu(source) -> PMuDecomposition:
    """P/mu split from the first lexicographic spanning set of rows of N_f.

    Each chosen row is divided by the gcd of its entries, so ``mu`` is
    primitive with respect to the stoichiometry.
    """
    if isinstance(source, Model) and source.generic is not None:
        g = source.generic
        ring = source.ring
        return PMuDecomposition(
            P=[list(row) for row in g.fast_P],
            mu=list(g.fast_mu),
            row_indices=None,
            h0=source.h0(),
            ring=ring,
            h1=source.h1(),
        )
    split = _split_of(source)
    ring = poly_ring(tuple(f"x{i + 1}" for i in range(split.n)))
    h0 = fast_polys_from_split(split, ring)
    rows = _rows_spanning(split.N_f)
    scales = []
    for i in rows:
        g = 0
        for e in split.N_f[i]:
            g = np.gcd(g, abs(int(e)))
        first = next(e for e in split.N_f[i] if e)
        scales.append(int(g) if first < 0 else int(g))
    basis = [[Fraction(e, sc) for e in split.N_f[i]] for i, sc in zip(rows, scales)]
    mu = [h0[i].quo_ground(to_qq(sc)) for i, sc in zip(rows, scales)]
    # every row of N_f as a combination of the basis rows: solve basis^T c = row
    BT = [list(col) for col in zip(*basis)]
    P = []
    for i in range(split.n):
        target = [[Fraction(e)] for e in split.N_f[i]]
        coeffs = _least_combination(BT, target)
        P.append([ring.ground_new(to_qq(c)) for c in coeffs])
    h1 = slow_polys_from_split(split, ring)
    dec = PMuDecomposition(P, mu, tuple(rows), h0, ring, split, h1)
    if not dec.check():
        raise InconsistencyError("h0 != P mu")
    return dec


def _least_combination(BT, target) -> list[Fraction]:
    """Solve BT c = target for c (BT has full column rank)."""
    # normal equations keep the system square and exact
    Bt = [list(col) for col in zip(*BT)]
    G = q_matmul(Bt, BT)
    rhs = q_matmul(Bt, target)
    c = [row[0] for row in q_solve(G, rhs)]
    check = q_matmul(BT, [[x] for x in c])
    if any(a[0] != b[0] for a, b in zip(check, target)):
        raise InconsistencyError("row of N_f is not in the span of the chosen rows")
    return c


def _split_of(source) -> SlowFastSplit:
    if isinstance(source, SlowFastSplit):
        return source
    if isinstance(source, Model):
        return split_slow_fast(build_stoich(source), source)
    raise TypeError(f"expected Model or SlowFastSplit, got {type(source).__name__}")


# ---------------------------------------------------------------------------
# composition helpers


def _on_phi(expr, phi: Parameterization) -> FracElement:
    F = phi.field
    if isinstance(expr, PolyElement):
        if phi.phi is None:
            raise ValueError("symbolic composition needs an integral parameterization")
        return substitute(expr, list(phi.phi), F)
    if isinstance(expr, FracElement):
        return substitute(expr.numer, list(phi.phi), F) / substitute(expr.denom, list(phi.phi), F)
    return F.ground_new(to_qq(expr))


def P_on_phi(dec: PMuDecomposition, phi: Parameterization) -> RFMatrix:
    return RFMatrix([[_on_phi(e, phi) for e in row] for row in dec.P], phi.field)


def Dmu_on_phi(dec: PMuDecomposition, phi: Parameterization) -> RFMatrix:
    return RFMatrix([[_on_phi(poly_diff(m, k), phi) for k in range(dec.n)] for m in dec.mu], phi.field)


def Dh0_on_phi(dec: PMuDecomposition, phi: Parameterization) -> RFMatrix:
    return RFMatrix([[_on_phi(poly_diff(h, k), phi) for k in range(dec.n)] for h in dec.h0], phi.field)


def A_on_phi(dec: PMuDecomposition, phi: Parameterization) -> RFMatrix:
    """A(Phi(v)) = Dmu(Phi(v)) P(Phi(v))."""
    return Dmu_on_phi(dec, phi) @ P_on_phi(dec, phi)


def _jac_at(polys, x: Sequence) -> list[list[Fraction]]:
    n = len(x)
    return [[poly_eval(poly_diff(p, k), x) for k in range(n)] for p in polys]


def _jac_at_float(polys, x: Sequence[float]) -> np.ndarray:
    n = len(x)
    return np.array([[poly_eval_float(poly_diff(p, k), x) for k in range(n)] for p in polys], dtype=float)


# ---------------------------------------------------------------------------
# functional independence


@dataclass
class IndependenceResult:
    ranks: list[int]
    r: int
    samples: list[tuple]

    @property
    def per_sample(self) -> list[bool]:
        return [rk == self.r for rk in self.ranks]

    def __bool__(self) -> bool:
        return all(self.per_sample)


def functional_independence_check(
    dec: PMuDecomposition, phi: Parameterization, samples: int | Sequence = 20, seed: int = 42
) -> IndependenceResult:
    """rank Dmu(Phi(v)) = r at sampled positive v (explicit points may be passed)."""
    pts = sample_points(phi.s, samples, seed) if isinstance(samples, int) else [tuple(p) for p in samples]
    ranks = []
    for v in pts:
        if phi.phi is not None and phi.exact:
            x = phi.evaluate(v)
            ranks.append(q_rank(_jac_at(dec.mu, x)))
        else:
            x = phi.evaluate_float([float(a) for a in v])
            ranks.append(int(np.linalg.matrix_rank(_jac_at_float(dec.mu, x))))
    return IndependenceResult(ranks, dec.r, pts)


# ---------------------------------------------------------------------------
# R


def compute_R_via_L(phi: Parameterization, L: Sequence[Sequence]) -> RFMatrix:
    """R(v) = (L*(v) DPhi(v))^-1 L*(v) with L*(v) = L(Phi(v))."""
    F = phi.field
    Ls = RFMatrix([[_on_phi(e, phi) for e in row] for row in L], F)
    if Ls.shape != (phi.s, phi.n):
        raise ValueError(f"L must be {phi.s} x {phi.n}, got {Ls.shape[0]} x {Ls.shape[1]}")
    M = Ls @ dphi(phi)
    try:
        return rf_solve_linear(M, Ls)
    except SingularMatrix as exc:
        raise SingularLDPhi("L DPhi is singular over the function field") from exc


def compute_R_general(phi: Parameterization, dec: PMuDecomposition) -> RFMatrix:
    """Unique R with R (DPhi | P) = (I_s | 0)."""
    F = phi.field
    aug = dphi(phi).hstack(P_on_phi(dec, phi))
    rhs = RFMatrix.identity(phi.s, F).hstack(RFMatrix.zeros(phi.s, dec.r, F))
    try:
        return rf_solve_linear(aug.T(), rhs.T()).T()
    except SingularMatrix as exc:
        raise SingularAugmentedMatrix("(DPhi | P) is singular over the function field") from exc


def _identity_rows(D: RFMatrix) -> list[int] | None:
    """Rows of DPhi forming the s x s identity (species that are parameters)."""
    n, s = D.shape
    F = D.field
    picked = []
    for j in range(s):
        hit = next(
            (i for i in range(n) if all(D[i, k] == (F.one if k == j else F.zero) for k in range(s))),
            None,
        )
        if hit is None:
            return None
        picked.append(hit)
    return sorted(picked) if len(set(picked)) == s else None


def graph_case_split(phi: Parameterization) -> tuple[list[int], bool]:
    """Rows I with DPhi_I invertible; flag is True when Phi_I(v) = v."""
    D = dphi(phi)
    ident = _identity_rows(D)
    if ident is not None:
        return ident, True
    for rows in combinations(range(phi.n), phi.s):
        if rf_det(D.submatrix(list(rows))):
            return list(rows), False
    raise NoInvertibleBlock("no s x s block of DPhi is generically invertible")


def compute_R_graph_case(phi: Parameterization, dec: PMuDecomposition, rows: Sequence[int] | None = None):
    """Block formula for R after moving an invertible s x s block of DPhi to the top.

    Returns ``(R, qss)`` where ``qss`` is true when Phi_1(v) = v and the
    remaining components are constant.
    """
    F = phi.field
    D = dphi(phi)
    if rows is None:
        rows, _ = graph_case_split(phi)
    rows = list(rows)
    rest = [i for i in range(phi.n) if i not in rows]
    P = P_on_phi(dec, phi)
    D1, D2 = D.submatrix(rows), D.submatrix(rest)
    P1, P2 = P.submatrix(rows), P.submatrix(rest)
    I_s = RFMatrix.identity(phi.s, F)
    try:
        D1inv = rf_solve_linear(D1, I_s)
    except SingularMatrix as exc:
        raise NoInvertibleBlock("chosen block of DPhi is singular") from exc
    T = D2 @ D1inv
    S = T @ P1 - P2
    try:
        Sinv = rf_solve_linear(S, RFMatrix.identity(dec.r, F))
    except SingularMatrix as exc:
        raise SingularAugmentedMatrix("DPhi_2 DPhi_1^-1 P_1 - P_2 is singular") from exc
    R1 = I_s - P1 @ Sinv @ T
    R2 = P1 @ Sinv
    # the block formula yields DPhi_1 R; scale back unless DPhi_1 = I
    if D1 != I_s:
        R1, R2 = D1inv @ R1, D1inv @ R2
    cols = [None] * phi.n
    for k, i in enumerate(rows):
        cols[i] = R1.col(k)
    for k, i in enumerate(rest):
        cols[i] = R2.col(k)
    R = RFMatrix([[cols[j][i] for j in range(phi.n)] for i in range(phi.s)], F)
    qss = D1 == I_s and D2.is_zero()
    return R, qss


# ---------------------------------------------------------------------------
# reduced systems


@dataclass
class ReducedSystem:
    rhs: list[FracElement]
    R: RFMatrix
    phi: Parameterization
    path: str
    first_integrals: list[FracElement] = field(default_factory=list)
    trivial: bool = False

    @property
    def s(self) -> int:
        return self.phi.s

    def rhs_strings(self, latex: bool = False) -> list[str]:
        return [format_ratfun(f, latex) for f in self.rhs]

    def evaluate(self, v: Sequence) -> list[Fraction]:
        return [rf_eval(f, v) for f in self.rhs]


def _slow_polys(source):
    if isinstance(source, PMuDecomposition):
        return source.h1, source.split
    if isinstance(source, Model) and source.generic is not None:
        return source.h1(), None
    split = _split_of(source)
    ring = poly_ring(tuple(f"x{i + 1}" for i in range(split.n)))
    return slow_polys_from_split(split, ring), split


def reduced_system(phi: Parameterization, R: RFMatrix, source, path: str = "general") -> ReducedSystem:
    """v' = R(v) h1(Phi(v)); asserts v' = 0 when rank N = rank N_f."""
    F = phi.field
    h1, split = _slow_polys(source)
    h1phi = [_on_phi(h, phi) for h in h1]
    rhs = [rf_sum([R[i, j] * h1phi[j] for j in range(phi.n) if h1phi[j] and R[i, j]], F) for i in range(phi.s)]
    trivial = False
    ints: list[FracElement] = []
    if split is not None:
        N = [rf + rs for rf, rs in zip(split.N_f, split.N_s)]
        trivial = integer_rank(N) == split.r
        if trivial and any(rhs):
            raise InconsistencyError("rank N = rank N_f but the reduced right-hand side is not zero")
        ints = inherited_first_integrals(left_kernel_basis(N), phi, rhs)
    return ReducedSystem(rhs, R, phi, path, ints, trivial)


def complex_balanced_reduced(phi: Parameterization, L_f: Sequence[Sequence[int]], split: SlowFastSplit) -> ReducedSystem:
    """Closed form v' = diag(v) (L_f diag(x* o v^L_f) L_f^T)^-1 L_f N_s (K_s o x*^Y_s o v^(L_f Y_s))."""
    if phi.kind != "monomial" or phi.phi is None:
        raise ValueError("closed form needs a monomial parameterization with integer exponents")
    if [list(map(Fraction, r)) for r in L_f] != [list(r) for r in phi.B]:
        raise ValueError("parameterization exponents must equal L_f")
    F = phi.field
    s, n = phi.s, phi.n
    xs = [Fraction(a) for a in phi.x_star]
    # x* o v^L_f, built directly from the monomials
    xv = []
    for i in range(n):
        t = F.ground_new(to_qq(xs[i]))
        for k in range(s):
            if L_f[k][i]:
                t = t * F.gens[k] ** int(L_f[k][i])
        xv.append(t)
    M = RFMatrix(
        [[rf_sum([xv[i] * (L_f[a][i] * L_f[b][i]) for i in range(n) if L_f[a][i] and L_f[b][i]], F) for b in range(s)] for a in range(s)],
        F,
    )
    LY = q_matmul(L_f, split.Y_s) if split.m_s else [[] for _ in range(s)]
    w = []
    for j in range(split.m_s):
        t = F.ground_new(to_qq(split.K_s[j]))
        for i in range(n):
            if split.Y_s[i][j]:
                t = t * F.ground_new(to_qq(xs[i] ** split.Y_s[i][j]))
        for k in range(s):
            e = int(LY[k][j])
            if e:
                t = t * F.gens[k] ** e
        w.append(t)
    LN = q_matmul(L_f, split.N_s) if split.m_s else [[] for _ in range(s)]
    b = RFMatrix([[rf_sum([w[j] * LN[k][j] for j in range(split.m_s) if LN[k][j]], F)] for k in range(s)], F)
    Minv = rf_solve_linear(M, RFMatrix.identity(s, F))
    y = Minv @ b
    rhs = [F.gens[k] * y[k, 0] for k in range(s)]
    Lm = RFMatrix([[F.ground_new(to_qq(e)) for e in row] for row in L_f], F)
    R = RFMatrix([[F.gens[k] * e for e in row] for k, row in enumerate((Minv @ Lm).rows)], F)
    N = [rf + rs for rf, rs in zip(split.N_f, split.N_s)]
    ints = inherited_first_integrals(left_kernel_basis(N), phi, rhs)
    return ReducedSystem(rhs, R, phi, "complex_balanced", ints, integer_rank(N) == split.r)


def inherited_first_integrals(cons: Sequence[Sequence], phi: Parameterization, rhs: Sequence[FracElement]) -> list[FracElement]:
    """psi o Phi for each conservation law; checks D(psi o Phi) rhs = 0 exactly."""
    F = phi.field
    out = []
    for psi in cons:
        t = rf_sum([phi.phi[i] * Fraction(c) for i, c in enumerate(psi) if c], F)
        deriv = rf_sum([t.diff(F.gens[k]) * rhs[k] for k in range(phi.s) if rhs[k]], F)
        if deriv:
            raise InconsistencyError(f"conservation law {list(psi)} is not inherited by the reduced system")
        out.append(t)
    return out


# ---------------------------------------------------------------------------
# projection


def projection_Q(dec: PMuDecomposition, x: Sequence) -> list[list[Fraction]]:
    """Q(x) = I - P A(x)^-1 Dmu(x) at a rational point."""
    x = [Fraction(a) for a in x]
    P = [[poly_eval(e, x) for e in row] for row in dec.P]
    Dmu = _jac_at(dec.mu, x)
    A = q_matmul(Dmu, P)
    if q_rank(A) < dec.r:
        raise SingularA(f"A(x) is singular at x = {[str(a) for a in x]}")
    PA = q_matmul(P, q_inverse(A))
    corr = q_matmul(PA, Dmu)
    I = q_identity(dec.n)
    return [[I[i][j] - corr[i][j] for j in range(dec.n)] for i in range(dec.n)]


def projection_Q_on_phi(dec: PMuDecomposition, phi: Parameterization) -> RFMatrix:
    F = phi.field
    P = P_on_phi(dec, phi)
    Dmu = Dmu_on_phi(dec, phi)
    A = Dmu @ P
    try:
        X = rf_solve_linear(A, Dmu)
    except SingularMatrix as exc:
        raise SingularA("A(Phi(v)) is singular over the function field") from exc
    return RFMatrix.identity(dec.n, F) - P @ X


# ---------------------------------------------------------------------------
# stability


@dataclass
class StabilityReport:
    A_matrix: RFMatrix
    sample_points: list[tuple]
    verdicts: list[str]
    method: str
    shortcut: str | None
    char_poly: list[FracElement]
    hurwitz: list[FracElement] | None
    global_certificate: bool
    inconsistencies: list[str] = field(default_factory=list)

    @property
    def all_stable(self) -> bool:
        return all(v == "stable" for v in self.verdicts)


def _positive_coefficients(f: FracElement) -> bool:
    cs = [to_fraction(c) for c in f.numer.coeffs()] + [to_fraction(c) for c in f.denom.coeffs()]
    return bool(f) and (all(c > 0 for c in cs) or all(c < 0 for c in cs))


def deficiency_zero_certificate(split: SlowFastSplit | None) -> str | None:
    if split is None:
        return None
    g = build_graph(split.fast)
    if weakly_reversible(g) and deficiency(g, split.N_f) == 0:
        return "fast subnetwork weakly reversible with deficiency zero"
    return None


def _eig_verdict(eigs: np.ndarray, tol: float = 1e-9) -> str:
    top = float(np.max(eigs.real)) if len(eigs) else -1.0
    if top < -tol:
        return "stable"
    if top > tol:
        return "unstable"
    return "marginal"


def stability_analysis(
    dec: PMuDecomposition,
    phi: Parameterization,
    samples: int | Sequence = 20,
    method: str = "auto",
    seed: int = 42,
) -> StabilityReport:
    """Sign conditions on the eigenvalues of A(Phi(v)) at sample points."""
    A = A_on_phi(dec, phi)
    r = dec.r
    if method == "auto":
        method = "routh_hurwitz" if r <= 4 else "eigenvalues"
    cp = rf_charpoly(A)
    hw = hurwitz_determinants(cp) if method == "routh_hurwitz" else None
    certificate = False
    if hw is not None:
        certificate = all(_positive_coefficients(h) and _value_sign_positive(h) for h in hw + [cp[-1]])
    pts = sample_points(phi.s, samples, seed) if isinstance(samples, int) else [tuple(p) for p in samples]
    verdicts = []
    exact = phi.phi is not None and phi.exact
    for v in pts:
        Av = A.evaluate(v) if exact else None
        Af = np.array([[float(e) for e in row] for row in Av]) if Av is not None else A.evaluate_float([float(a) for a in v])
        eigs = np.linalg.eigvals(Af) if r else np.zeros(0)
        if method == "routh_hurwitz" and exact:
            hv = [rf_eval(h, v) for h in hw]
            if all(h > 0 for h in hv):
                verdicts.append("stable")
            else:
                verdict = _eig_verdict(eigs)
                verdicts.append("marginal" if verdict == "stable" else verdict)
        else:
            verdicts.append(_eig_verdict(eigs))
    shortcut = deficiency_zero_certificate(dec.split)
    issues = []
    if shortcut is not None:
        for v, verdict in zip(pts, verdicts):
            if verdict != "stable":
                issues.append(f"deficiency-zero network but verdict {verdict} at v = {[str(a) for a in v]}")
    return StabilityReport(A, pts, verdicts, method, shortcut, cp, hw, certificate, issues)


def _value_sign_positive(f: FracElement) -> bool:
    cs = [to_fraction(c) for c in f.numer.coeffs()]
    ds = [to_fraction(c) for c in f.denom.coeffs()]
    return (cs[0] > 0) == (ds[0] > 0)


# ---------------------------------------------------------------------------
# blanket hypothesis


@dataclass
class BlanketReport:
    samples: list[tuple]
    rank_ok: list[bool]
    A_nonsingular: list[bool]
    tikhonov: list[bool]
    fenichel: list[bool]
    ill_conditioned: list[bool]
    shortcut: str | None

    @property
    def passed(self) -> bool:
        return all(self.rank_ok) and all(self.A_nonsingular) and all(self.fenichel) and not any(self.ill_conditioned)


def blanket_hypothesis_report(
    dec: PMuDecomposition, phi: Parameterization, samples: int | Sequence = 20, seed: int = 42, cond_limit: float = 1e8
) -> BlanketReport:
    """rank Dh0 = r, A nonsingular and eigenvalue signs at sample points."""
    pts = sample_points(phi.s, samples, seed) if isinstance(samples, int) else [tuple(p) for p in samples]
    exact = phi.phi is not None and phi.exact
    rank_ok, nonsing, tik, fen, ill = [], [], [], [], []
    for v in pts:
        if exact:
            x = phi.evaluate(v)
            J = _jac_at(dec.h0, x)
            rank_ok.append(q_rank(J) == dec.r)
            P = [[rf_eval_poly(e, x) for e in row] for row in dec.P]
            A = q_matmul(_jac_at(dec.mu, x), P)
            nonsing.append(q_rank(A) == dec.r)
            Af = np.array([[float(e) for e in row] for row in A], dtype=float).reshape(dec.r, dec.r)
            Dmu = np.array([[float(e) for e in row] for row in _jac_at(dec.mu, x)], dtype=float)
            Pf = np.array([[float(e) for e in row] for row in P], dtype=float)
        else:
            x = phi.evaluate_float([float(a) for a in v])
            J = _jac_at_float(dec.h0, x)
            rank_ok.append(int(np.linalg.matrix_rank(J)) == dec.r)
            Pf = np.array([[poly_eval_float(e, x) for e in row] for row in dec.P], dtype=float)
            Dmu = _jac_at_float(dec.mu, x)
            Af = Dmu @ Pf
            nonsing.append(int(np.linalg.matrix_rank(Af)) == dec.r)
        eigs = np.linalg.eigvals(Af) if dec.r else np.zeros(0)
        tik.append(bool(np.all(eigs.real < 0)))
        fen.append(bool(np.all(eigs.real != 0)))
        ill.append(_ill_conditioned(Af, Dmu, Pf, cond_limit) if dec.r else False)
    return BlanketReport(pts, rank_ok, nonsing, tik, fen, ill, deficiency_zero_certificate(dec.split))


def _ill_conditioned(A: np.ndarray, Dmu: np.ndarray, P: np.ndarray, cond_limit: float) -> bool:
    # smallest singular value of A against the scale of its factors; a plain
    # condition number cannot see a 1 x 1 A going to zero
    sv = np.linalg.svd(A, compute_uv=False)
    scale = np.linalg.norm(Dmu, 2) * np.linalg.norm(P, 2)
    if not np.all(np.isfinite(sv)) or sv[-1] == 0 or scale == 0:
        return True
    return bool(sv[0] / sv[-1] > cond_limit or sv[-1] / scale < 1 / cond_limit)


def rf_eval_poly(p: PolyElement, x: Sequence) -> Fraction:
    return poly_eval(p, x)


# ---------------------------------------------------------------------------
# lemma BA


def lemma_BA_check(A: Sequence[Sequence], B: Sequence[Sequence]) -> bool:
    """For A (n x s), B (s x n) with AB a rank-s projection, test BA = I_s."""
    A = [[Fraction(e) for e in row] for row in A]
    B = [[Fraction(e) for e in row] for row in B]
    s = len(A[0])
    AB = q_matmul(A, B)
    if q_rank(AB) != s:
        raise PreconditionViolated(f"rank(AB) = {q_rank(AB)} differs from s = {s}")
    if q_matmul(AB, AB) != AB:
        raise PreconditionViolated("AB is not idempotent")
    return q_matmul(B, A) == q_identity(s)


# ---------------------------------------------------------------------------
# eigenvalue consistency


@dataclass
class EigenConsistency:
    samples: list[tuple]
    max_deviation: list[float]
    tol: float

    @property
    def passed(self) -> bool:
        return all(d <= self.tol for d in self.max_deviation)


def _match(a: np.ndarray, b: np.ndarray) -> float:
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max()) if len(rows) else 0.0


def eigenvalue_consistency(
    dec: PMuDecomposition, phi: Parameterization, samples: int | Sequence = 20, seed: int = 42, tol: float = 1e-8
) -> EigenConsistency:
    """Spectrum of Dh0 on Z against that of A plus s zeros."""
    pts = sample_points(phi.s, samples, seed) if isinstance(samples, int) else [tuple(p) for p in samples]
    devs = []
    for v in pts:
        if phi.phi is not None and phi.exact:
            x = phi.evaluate(v)
            J = np.array([[float(e) for e in row] for row in _jac_at(dec.h0, x)])
            P = [[rf_eval_poly(e, x) for e in row] for row in dec.P]
            A = np.array([[float(e) for e in row] for row in q_matmul(_jac_at(dec.mu, x), P)]).reshape(dec.r, dec.r)
        else:
            x = phi.evaluate_float([float(a) for a in v])
            J = _jac_at_float(dec.h0, x)
            P = np.array([[poly_eval_float(e, x) for e in row] for row in dec.P], dtype=float)
            A = _jac_at_float(dec.mu, x) @ P
        ej = np.linalg.eigvals(J)
        ea = np.concatenate([np.linalg.eigvals(A) if dec.r else np.zeros(0), np.zeros(phi.s)])
        scale = max(1.0, float(np.max(np.abs(ej))))
        devs.append(_match(ej, ea) / scale)
    return EigenConsistency(pts, devs, tol)


__all__ = [
    "A_on_phi",
    "BlanketReport",
    "EigenConsistency",
    "InconsistencyError",
    "IndependenceResult",
    "NoInvertibleBlock",
    "PMuDecomposition",
    "PreconditionViolated",
    "ReducedSystem",
    "SingularA",
    "SingularAugmentedMatrix",
    "SingularLDPhi",
    "StabilityReport",
    "blanket_hypothesis_report",
    "charpoly",
    "complex_balanced_reduced",
    "compute_R_general",
    "compute_R_graph_case",
    "compute_R_via_L",
    "decompose_P_mu",
    "deficiency_zero_certificate",
    "eigenvalue_consistency",
    "functional_independence_check",
    "graph_case_split",
    "inherited_first_integrals",
    "lemma_BA_check",
    "projection_Q",
    "projection_Q_on_phi",
    "reduced_system",
    "stability_analysis",
]
