"""Parameterizations of the critical manifold (the zero set of the fast part).

Three constructions are provided: rational parameterizations obtained by
eliminating a non-interacting species set, monomial parameterizations
``x* o v^B`` through a complex-balanced steady state, and user-supplied
expressions.
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import chain, combinations
from typing import Sequence

import numpy as np
from sympy import integer_nthroot
from sympy.polys.fields import FracElement

from .crn import (
    SlowFastSplit,
    build_graph,
    build_stoich,
    left_kernel_basis,
    split_slow_fast,
    weakly_reversible,
)
from .exact import (
    RFMatrix,
    SingularMatrix,
    format_ratfun,
    poly_eval_float,
    poly_ring,
    q_inverse,
    q_matmul,
    q_nullspace,
    q_rank,
    rf_eval,
    rf_field,
    rf_rank,
    rf_solve_linear,
    substitute,
    to_fraction,
    to_qq,
    v_names,
)
from .model import Model
from .sim import dopri5


class NotWeaklyReversible(ValueError):
    pass


class NoPositiveSolution(RuntimeError):
    pass


class RankDeficientB(ValueError):
    pass


class SingularLinearSystem(ArithmeticError):
    pass


class NonPositiveCoefficients(UserWarning):
    pass


# ---------------------------------------------------------------------------
# sampling


def sample_points(dim: int, count: int = 20, seed: int = 42) -> list[tuple[Fraction, ...]]:
    """Reproducible positive rational points with coordinates p/q in (0, 10], p, q <= 100."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        pt = []
        for _ in range(dim):
            while True:
                p, q = rng.randint(1, 100), rng.randint(1, 100)
                if p <= 10 * q:
                    break
            pt.append(Fraction(p, q))
        out.append(tuple(pt))
    return out


# ---------------------------------------------------------------------------
# types


@dataclass
class Parameterization:
    """A map from positive parameters v (length s) onto the critical manifold.

    ``phi`` holds the components as rational functions in ``v1 .. vs``; it is
    ``None`` only for monomial maps with non-integer exponents, which are
    available numerically through :meth:`evaluate_float`.
    """

    kind: str  # "rational" | "monomial" | "user"
    n: int
    s: int
    phi: tuple[FracElement, ...] | None
    x_star: tuple | None = None
    B: tuple[tuple[Fraction, ...], ...] | None = None
    exact: bool = True
    free_species: tuple[int, ...] | None = None
    eliminated_species: tuple[int, ...] | None = None
    domain_note: str = "v > 0"
    notes: list[str] = field(default_factory=list)

    @property
    def field(self):
        return rf_field(v_names(self.s))

    @property
    def integral(self) -> bool:
        return self.phi is not None

    def evaluate(self, v: Sequence) -> list[Fraction]:
        if self.phi is None:
            raise ValueError("exact evaluation needs integer exponents")
        return [rf_eval(f, v) for f in self.phi]

    def evaluate_float(self, v: Sequence[float]) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if self.kind == "monomial":
            xs = np.array([float(x) for x in self.x_star])
            B = np.array([[float(b) for b in row] for row in self.B])
            return xs * np.prod(v[:, None] ** B, axis=0)
        return np.array([float(rf_eval(f, [Fraction(float(a)) for a in v])) for f in self.phi])

    def jacobian_float(self, v: Sequence[float]) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if self.kind == "monomial":
            B = np.array([[float(b) for b in row] for row in self.B])
            return self.evaluate_float(v)[:, None] * B.T / v[None, :]
        return dphi(self).evaluate_float(v)

    def strings(self) -> list[str]:
        if self.phi is not None:
            return [format_ratfun(f) for f in self.phi]
        out = []
        for i in range(self.n):
            factors = [f"v{j + 1}^({self.B[j][i]})" for j in range(self.s) if self.B[j][i]]
            out.append("*".join([str(self.x_star[i])] + factors))
        return out


@dataclass(frozen=True)
class NonInteractingSet:
    indices: tuple[int, ...]
    certificate: dict


@dataclass
class ComplexBalancedState:
    x: tuple
    exact: bool
    residual: float
    method: str


# ---------------------------------------------------------------------------
# helpers shared with reduce


def fast_polys_from_split(split: SlowFastSplit, ring) -> list:
    """h0 = N_f (K_f o x^Y_f) as polynomials in ``ring``."""
    return _mass_action(split.N_f, split.Y_f, split.K_f, ring)


def slow_polys_from_split(split: SlowFastSplit, ring) -> list:
    return _mass_action(split.N_s, split.Y_s, split.K_s, ring)


def _mass_action(N, Y, K, ring) -> list:
    n = len(N)
    out = [ring.zero] * n
    for j, k in enumerate(K):
        rate = ring.ground_new(to_qq(k))
        for i in range(n):
            if Y[i][j]:
                rate = rate * ring.gens[i] ** Y[i][j]
        for i in range(n):
            if N[i][j]:
                out[i] = out[i] + rate * N[i][j]
    return out


def _fast_source(source):
    """Return (h0 polynomials, split or None) for a Model or a SlowFastSplit."""
    if isinstance(source, Model):
        split = None
        if source.generic is None:
            split = split_slow_fast(build_stoich(source), source)
        return source.h0(), split
    if isinstance(source, SlowFastSplit):
        ring = poly_ring(tuple(f"x{i + 1}" for i in range(source.n)))
        return fast_polys_from_split(source, ring), source
    raise TypeError(f"expected Model or SlowFastSplit, got {type(source).__name__}")


# ---------------------------------------------------------------------------
# non-interacting sets


def _induced_reaches_zero(split: SlowFastSplit, subset: Sequence[int]) -> bool:
    sub = set(subset)
    adj: dict[int, set[int]] = {}  # node: species index, or -1 for the zero complex

    def project(vec):
        hit = [i for i in sub if vec[i]]
        return hit[0] if hit else -1

    for j in range(split.m_f):
        reac = [split.Y_f[i][j] for i in range(split.n)]
        prod = [split.Y_f[i][j] + split.N_f[i][j] for i in range(split.n)]
        a, b = project(reac), project(prod)
        if a != b:
            adj.setdefault(a, set()).add(b)
    # backward search from the zero node
    rev: dict[int, set[int]] = {}
    for a, bs in adj.items():
        for b in bs:
            rev.setdefault(b, set()).add(a)
    seen = {-1}
    stack = [-1]
    while stack:
        node = stack.pop()
        for prev in rev.get(node, ()):
            if prev not in seen:
                seen.add(prev)
                stack.append(prev)
    return sub <= seen


def _non_interacting(split: SlowFastSplit, subset: Sequence[int]) -> bool:
    for j in range(split.m_f):
        reac = sum(split.Y_f[i][j] for i in subset)
        prod = sum(split.Y_f[i][j] + split.N_f[i][j] for i in subset)
        if reac > 1 or prod > 1:
            return False
    return True


def find_noninteracting_sets(split: SlowFastSplit, model: Model | None = None) -> list[NonInteractingSet]:
    """All r-subsets of species satisfying the three elimination conditions."""
    out = []
    r = split.r
    for subset in combinations(range(split.n), r):
        if not _non_interacting(split, subset):
            continue
        rows = [split.N_f[i] for i in subset]
        if q_rank(rows) != r:
            continue
        if not _induced_reaches_zero(split, subset):
            continue
        out.append(NonInteractingSet(subset, {"non_interacting": True, "row_rank": r, "paths_to_zero": True}))
    return out


def rational_parameterization(nis: NonInteractingSet, split: SlowFastSplit) -> Parameterization:
    """Solve the fast equations of the set species for those species."""
    n, r, s = split.n, split.r, split.s
    subset = list(nis.indices)
    free = [i for i in range(n) if i not in subset]
    F = rf_field(v_names(s))
    ring = poly_ring(tuple(f"x{i + 1}" for i in range(n)))
    h0 = fast_polys_from_split(split, ring)
    pos = {sp: j for j, sp in enumerate(subset)}
    M = [[F.zero] * r for _ in range(r)]
    c = [[F.zero] for _ in range(r)]
    for row, i in enumerate(subset):
        for monom, coeff in h0[i].terms():
            hits = [(k, e) for k, e in enumerate(monom) if e and k in pos]
            term = F.ground_new(coeff)
            for k, e in enumerate(monom):
                if e and k not in pos:
                    term = term * F.gens[free.index(k)] ** e
            if not hits:
                c[row][0] = c[row][0] - term
            elif len(hits) == 1 and hits[0][1] == 1:
                col = pos[hits[0][0]]
                M[row][col] = M[row][col] + term
            else:
                raise SingularLinearSystem("fast equations are not linear in the chosen species")
    try:
        sol = rf_solve_linear(RFMatrix(M, F), RFMatrix(c, F))
    except SingularMatrix as exc:
        raise SingularLinearSystem(f"elimination system for species {subset} is singular") from exc
    phi = [None] * n
    for j, i in enumerate(free):
        phi[i] = F.gens[j]
    for j, i in enumerate(subset):
        phi[i] = sol[j, 0]
    p = Parameterization(
        kind="rational",
        n=n,
        s=s,
        phi=tuple(phi),
        free_species=tuple(free),
        eliminated_species=tuple(subset),
    )
    for i in subset:
        if not _all_positive(phi[i]):
            msg = f"solution for species {i + 1} has non-positive coefficients"
            p.notes.append(msg)
            warnings.warn(msg, NonPositiveCoefficients, stacklevel=2)
    return p


def _all_positive(f: FracElement) -> bool:
    coeffs = [to_fraction(c) for c in f.numer.coeffs()] + [to_fraction(c) for c in f.denom.coeffs()]
    return all(c > 0 for c in coeffs) or all(c < 0 for c in coeffs)


# ---------------------------------------------------------------------------
# complex balancing


def balance_residual(split: SlowFastSplit, x: Sequence, exact: bool = False):
    """Largest relative node imbalance (inflow vs outflow) over fast complexes."""
    g = build_graph(split.fast)
    inflow = {i: 0 for i in range(g.num_nodes)}
    outflow = {i: 0 for i in range(g.num_nodes)}
    for (a, b), rx in zip(g.edges, split.fast):
        if exact:
            rate = rx.rate_constant
            for i, c in rx.reactant.coefficients:
                rate = rate * Fraction(x[i]) ** c
        else:
            rate = float(rx.rate_constant)
            for i, c in rx.reactant.coefficients:
                rate *= float(x[i]) ** c
        outflow[a] += rate
        inflow[b] += rate
    worst = 0
    for i in range(g.num_nodes):
        scale = max(abs(inflow[i]), abs(outflow[i]))
        if scale:
            worst = max(worst, abs(inflow[i] - outflow[i]) / scale)
    return worst


def _rows_spanning(N: Sequence[Sequence[int]]) -> list[int]:
    rows: list[int] = []
    for i in range(len(N)):
        if q_rank([N[k] for k in rows + [i]]) > len(rows):
            rows.append(i)
    return rows


def _newton_log(split: SlowFastSplit, x0: np.ndarray, tol: float = 1e-14, maxiter: int = 200):
    N = np.array(split.N_f, dtype=float)
    Y = np.array(split.Y_f, dtype=float)
    K = np.array([float(k) for k in split.K_f])
    rows = _rows_spanning(split.N_f)
    Lf = np.array(left_kernel_basis(split.N_f), dtype=float).reshape(-1, split.n)
    target = Lf @ x0

    def F(y):
        x = np.exp(y)
        w = K * np.prod(x[:, None] ** Y, axis=0)
        return np.concatenate([(N @ w)[rows], Lf @ x - target])

    def J(y):
        x = np.exp(y)
        w = K * np.prod(x[:, None] ** Y, axis=0)
        Jh = N @ (w[:, None] * Y.T)
        return np.vstack([Jh[rows], Lf * x[None, :]])

    y = np.log(x0)
    f = F(y)
    for _ in range(maxiter):
        norm = np.max(np.abs(f))
        if norm < tol * max(1.0, np.max(np.abs(target))):
            return np.exp(y), norm
        try:
            step = np.linalg.solve(J(y), -f)
        except np.linalg.LinAlgError:
            return None, norm
        lam = 1.0
        while lam > 1e-10:
            y_new = y + lam * step
            f_new = F(y_new)
            if np.all(np.isfinite(f_new)) and np.max(np.abs(f_new)) < (1 - 1e-4 * lam) * norm:
                break
            lam /= 2
        else:
            return None, norm
        y, f = y_new, f_new
    return None, float(np.max(np.abs(f)))


def _relax_fast(split: SlowFastSplit, x0: np.ndarray) -> np.ndarray:
    N = np.array(split.N_f, dtype=float)
    Y = np.array(split.Y_f, dtype=float)
    K = np.array([float(k) for k in split.K_f])

    def f(t, x):
        return N @ (K * np.prod(np.abs(x)[:, None] ** Y, axis=0))

    sol = dopri5(f, 0.0, x0, [200.0], tol=1e-10)
    return sol[-1]


def _tree_constants(split: SlowFastSplit):
    """Kernel of the weighted Laplacian on each linkage class: x^y = lambda K_y."""
    g = build_graph(split.fast)
    out = []
    for cls in g.linkage_classes:
        if len(cls) < 2:
            continue
        pos = {v: i for i, v in enumerate(cls)}
        La = [[Fraction(0)] * len(cls) for _ in cls]
        for (a, b), rx in zip(g.edges, split.fast):
            if a in pos:
                La[pos[b]][pos[a]] += rx.rate_constant
                La[pos[a]][pos[a]] -= rx.rate_constant
        ker = q_nullspace(La)
        if len(ker) != 1:
            return None
        out.append([(g.nodes[v], ker[0][pos[v]]) for v in cls])
    return out


def _rational_root(q: Fraction, d: int) -> Fraction | None:
    a, ea = integer_nthroot(q.numerator, d)
    b, eb = integer_nthroot(q.denominator, d)
    return Fraction(a, b) if ea and eb else None


def exact_balanced_candidates(split: SlowFastSplit, limit: int = 200):
    """Rational solutions of the binomial system x^(y - y0) = K_y / K_y0.

    Species outside a chosen support are set to 1; supports are tried from
    the last species backwards, so later species carry the rate constants.
    """
    classes = _tree_constants(split)
    if classes is None:
        return
    rows, rhs = [], []
    for cls in classes:
        (y0, k0), rest = cls[0], cls[1:]
        for y, k in rest:
            if k0 == 0 or k / k0 <= 0:
                return
            rows.append([a - b for a, b in zip(y.vector(split.n), y0.vector(split.n))])
            rhs.append(k / k0)
    if not rows:
        yield tuple(Fraction(1) for _ in range(split.n))
        return
    keep: list[int] = []
    for i in range(len(rows)):
        if q_rank([rows[j] for j in keep + [i]]) > len(keep):
            keep.append(i)
    E = [rows[i] for i in keep]
    r = [rhs[i] for i in keep]
    rho = len(keep)
    tried = 0
    for support in combinations(reversed(range(split.n)), rho):
        if tried >= limit:
            return
        tried += 1
        support = sorted(support)
        M = [[Fraction(E[i][j]) for j in support] for i in range(rho)]
        if q_rank(M) < rho:
            continue
        Minv = q_inverse(M)
        x = [Fraction(1)] * split.n
        ok = True
        for a, sp in enumerate(support):
            exps = Minv[a]
            d = 1
            for e in exps:
                d = d * e.denominator // np.gcd(d, e.denominator)
            val = Fraction(1)
            for e, q in zip(exps, r):
                val *= q ** int(e * d)
            root = _rational_root(val, d)
            if root is None:
                ok = False
                break
            x[sp] = root
        if ok:
            yield tuple(x)


def complex_balanced_state(split: SlowFastSplit, hint: Sequence | None = None, search_exact: bool = True) -> ComplexBalancedState:
    """Positive complex-balanced steady state of the fast subnetwork.

    Rational candidates (the hint, all-ones, then roots of the tree-constant
    binomials) are tried first; ``search_exact=False`` goes straight to the
    Newton iteration started from the hint.
    """
    g = build_graph(split.fast)
    if not weakly_reversible(g):
        raise NotWeaklyReversible("fast subnetwork is not weakly reversible; no complex-balanced steady state exists")
    candidates = []
    if search_exact and hint is not None and all(isinstance(h, (int, Fraction)) for h in hint):
        candidates.append(tuple(Fraction(h) for h in hint))
    if search_exact:
        candidates.append(tuple(Fraction(1) for _ in range(split.n)))
    for cand in chain(candidates, exact_balanced_candidates(split) if search_exact else ()):
        if all(c > 0 for c in cand) and balance_residual(split, cand, exact=True) == 0:
            return ComplexBalancedState(cand, True, 0.0, "exact")
    x0 = np.array([float(h) for h in hint], dtype=float) if hint is not None else np.ones(split.n)
    if np.any(x0 <= 0):
        raise ValueError("hint must be positive")
    x, res = _newton_log(split, x0)
    method = "newton"
    if x is None:
        relaxed = _relax_fast(split, x0)
        if np.all(relaxed > 0):
            x, res = _newton_log(split, relaxed)
            method = "relaxation+newton"
    if x is None:
        raise NoPositiveSolution(f"Newton iteration did not converge (last residual {res:.3e})")
    bal = balance_residual(split, x)
    if bal >= 1e-10:
        raise NoPositiveSolution(f"steady state found but not complex balanced (relative residual {bal:.3e})")
    return ComplexBalancedState(tuple(float(a) for a in x), False, bal, method)


# ---------------------------------------------------------------------------
# monomial parameterizations


def monomial_parameterization(x_star: Sequence, B: Sequence[Sequence], split: SlowFastSplit | None = None) -> Parameterization:
    """Phi(v) = x* o v^B; B has one row per parameter."""
    Bq = tuple(tuple(Fraction(b) for b in row) for row in B)
    s = len(Bq)
    n = len(x_star)
    if any(len(row) != n for row in Bq):
        raise ValueError("B must have one column per species")
    if q_rank([list(r) for r in Bq]) != s:
        raise RankDeficientB(f"exponent matrix has rank {q_rank([list(r) for r in Bq])} < {s}")
    if split is not None:
        prod = q_matmul([list(r) for r in Bq], [[Fraction(a) for a in row] for row in split.N_f])
        if any(e != 0 for row in prod for e in row) or s != split.s:
            raise RankDeficientB("row span of B is not the left kernel of N_f")
    exact = all(isinstance(a, (int, Fraction)) for a in x_star)
    xs = tuple(Fraction(a) for a in x_star) if exact else tuple(float(a) for a in x_star)
    if any(a <= 0 for a in xs):
        raise ValueError("x* must be positive")
    integral = all(b.denominator == 1 for row in Bq for b in row)
    phi = None
    if integral:
        F = rf_field(v_names(s))
        comps = []
        for i in range(n):
            f = F.ground_new(to_qq(xs[i]))
            for j in range(s):
                e = int(Bq[j][i])
                if e:
                    f = f * F.gens[j] ** e
            comps.append(f)
        phi = tuple(comps)
    return Parameterization(kind="monomial", n=n, s=s, phi=phi, x_star=xs, B=Bq, exact=exact)


def dphi(p: Parameterization) -> RFMatrix:
    """Jacobian n x s; closed form diag(x* o v^B) B^T diag(1/v) for monomial maps."""
    F = p.field
    if p.kind == "monomial":
        if p.phi is None:
            raise ValueError("symbolic Jacobian needs integer exponents; use jacobian_float")
        rows = []
        for i in range(p.n):
            row = []
            for j in range(p.s):
                b = p.B[j][i]
                row.append(p.phi[i] * F.ground_new(to_qq(b)) / F.gens[j] if b else F.zero)
            rows.append(row)
        return RFMatrix(rows, F)
    return RFMatrix([[f.diff(F.gens[j]) for j in range(p.s)] for f in p.phi], F)


def user_parameterization(phi: Sequence[FracElement]) -> Parameterization:
    F = phi[0].field
    return Parameterization(kind="user", n=len(phi), s=F.ngens, phi=tuple(phi))


# ---------------------------------------------------------------------------
# verification


@dataclass
class ParameterizationReport:
    manifold_exact: bool | None
    manifold_residual: float
    generic_rank: int | None
    point_ranks: list[int]
    positive: bool
    s: int
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def compose_fast(p: Parameterization, h0) -> list:
    return [substitute(h, list(p.phi), p.field) for h in h0]


def verify_parameterization(p: Parameterization, source, samples: int = 20, seed: int = 42) -> ParameterizationReport:
    """Check h0 o Phi = 0, rank DPhi = s and positivity of Phi on positive samples."""
    h0, _ = _fast_source(source)
    pts = sample_points(p.s, samples, seed)
    failures = []
    exact_ok = None
    resid = 0.0
    if p.phi is not None and p.exact:
        comp = compose_fast(p, h0)
        exact_ok = all(not c for c in comp)
        if not exact_ok:
            bad = [i + 1 for i, c in enumerate(comp) if c]
            failures.append(f"h0 o Phi is not identically zero (components {bad})")
            resid = max(abs(float(rf_eval(c, pt))) for c in comp for pt in pts[:3])
    else:
        for pt in pts:
            x = p.evaluate_float([float(a) for a in pt])
            vals = np.array([poly_eval_float(h, x) for h in h0])
            scale = max(1.0, float(np.max(np.abs(x))))
            resid = max(resid, float(np.max(np.abs(vals))) / scale)
        if resid >= 1e-10:
            failures.append(f"h0 o Phi residual {resid:.3e} exceeds 1e-10")
    grank = None
    ranks = []
    if p.phi is not None:
        D = dphi(p)
        grank = rf_rank(D)
        if grank != p.s:
            failures.append(f"generic rank of DPhi is {grank}, expected {p.s}")
        for pt in pts:
            if p.exact:
                ranks.append(q_rank(D.evaluate(pt)))
            else:
                ranks.append(int(np.linalg.matrix_rank(D.evaluate_float([float(a) for a in pt]))))
    else:
        for pt in pts:
            ranks.append(int(np.linalg.matrix_rank(p.jacobian_float([float(a) for a in pt]))))
    if any(rk != p.s for rk in ranks):
        failures.append("DPhi loses rank at a sample point")
    positive = True
    for pt in pts:
        if p.phi is not None and p.exact:
            vals = p.evaluate(pt)
        else:
            vals = p.evaluate_float([float(a) for a in pt])
        if any(vv <= 0 for vv in vals):
            positive = False
    if not positive:
        failures.append("Phi leaves the positive orthant at a sample point")
    return ParameterizationReport(exact_ok, resid, grank, ranks, positive, p.s, failures)
