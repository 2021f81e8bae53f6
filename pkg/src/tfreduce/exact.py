"""Exact arithmetic kernel.

Polynomials and rational functions are sympy's sparse ``PolyElement`` /
``FracElement`` over QQ with graded-lex order; everything else here
(fraction-free elimination, ranks, evaluation, printing) is built on top.
Plain rational matrices are lists of lists of :class:`fractions.Fraction`.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import chain
from typing import Iterable, Sequence

import numpy as np
from sympy.polys.domains import QQ
from sympy.polys.fields import FracElement, FracField, field
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, PolyRing, ring

Rational = Fraction


class SingularMatrix(ArithmeticError):
    """Raised when a linear system has no unique solution."""


class ZeroBaseNegativeExponent(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# scalars


def to_qq(value) -> "QQ.dtype":
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    if isinstance(value, float):
        f = Fraction(value)
        return QQ(f.numerator, f.denominator)
    if isinstance(value, int):
        return QQ(value)
    return QQ.convert(value)


def to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    # gmpy2.mpq / PythonMPQ
    return Fraction(int(value.numerator), int(value.denominator))


def parse_rational(text: str) -> Fraction:
    """Convert ``'3'``, ``'-2/7'`` or ``'0.125'`` to an exact Fraction."""
    text = text.strip()
    if "/" in text:
        p, q = text.split("/", 1)
        return Fraction(int(p), int(q))
    return Fraction(text)


# ---------------------------------------------------------------------------
# rings and fields


@lru_cache(maxsize=None)
def poly_ring(names: tuple[str, ...]) -> PolyRing:
    return ring(",".join(names), QQ, grlex)[0] if names else ring("_", QQ, grlex)[0]


@lru_cache(maxsize=None)
def rf_field(names: tuple[str, ...]) -> FracField:
    return field(",".join(names), QQ, grlex)[0] if names else field("_", QQ, grlex)[0]


def v_names(s: int) -> tuple[str, ...]:
    return tuple(f"v{i + 1}" for i in range(s))


def is_constant(f) -> bool:
    if isinstance(f, FracElement):
        return f.numer.is_ground and f.denom.is_ground
    return f.is_ground


def constant_value(f) -> Fraction:
    if isinstance(f, FracElement):
        return to_fraction(f.numer.LC if f.numer else 0) / to_fraction(f.denom.LC)
    return to_fraction(f.LC if f else 0)


# ---------------------------------------------------------------------------
# evaluation and substitution


def poly_eval(p: PolyElement, point: Sequence) -> Fraction:
    """Exact value of ``p`` at a rational point."""
    if len(point) != p.ring.ngens and not (p.ring.ngens == 1 and p.ring.symbols[0].name == "_"):
        raise ValueError(f"point has {len(point)} coordinates, ring has {p.ring.ngens}")
    total = QQ.zero
    pt = [to_qq(a) for a in point]
    for monom, coeff in p.terms():
        term = coeff
        for a, e in zip(pt, monom):
            if e:
                term *= a**e
        total += term
    return to_fraction(total)


def rf_eval(f: FracElement, point: Sequence) -> Fraction:
    den = poly_eval(f.denom, point)
    if den == 0:
        raise ZeroDivisionError("rational function has a pole at the given point")
    return poly_eval(f.numer, point) / den


def poly_eval_float(p: PolyElement, point: Sequence[float]) -> float:
    total = 0.0
    for monom, coeff in p.terms():
        term = float(to_fraction(coeff))
        for a, e in zip(point, monom):
            if e:
                term *= a**e
        total += term
    return total


def rf_eval_float(f: FracElement, point: Sequence[float]) -> float:
    return poly_eval_float(f.numer, point) / poly_eval_float(f.denom, point)


def substitute(p: PolyElement, values: Sequence, target: FracField) -> FracElement:
    """Compose polynomial ``p`` with a vector of rational functions."""
    if len(values) != p.ring.ngens:
        raise ValueError("substitution length does not match number of variables")
    vals = [target.ground_new(to_qq(v)) if not isinstance(v, FracElement) else v for v in values]
    cache: dict[tuple[int, int], FracElement] = {}

    def power(i: int, e: int) -> FracElement:
        key = (i, e)
        if key not in cache:
            cache[key] = vals[i] ** e
        return cache[key]

    # accumulate over a common denominator to avoid a gcd per term
    R = target.ring
    pairs = []
    for monom, coeff in p.terms():
        num, den = R.ground_new(coeff), R.one
        for i, e in enumerate(monom):
            if e:
                f = power(i, e)
                num, den = num * f.numer, den * f.denom
        pairs.append((num, den))
    return rf_sum_raw(pairs, target)


def rf_sum(terms: Iterable[FracElement], target: FracField) -> FracElement:
    return rf_sum_raw(((t.numer, t.denom) for t in terms), target)


def rf_sum_raw(pairs: Iterable[tuple[PolyElement, PolyElement]], target: FracField) -> FracElement:
    """Sum of numer/denom pairs over their lcm with one cancellation at the end."""
    groups: dict = {}
    for num, den in pairs:
        if den.LC < 0:
            num, den = -num, -den
        if den in groups:
            groups[den] = groups[den] + num
        else:
            groups[den] = num
    if not groups:
        return target.zero
    dens = list(groups)
    L = dens[0]
    for d in dens[1:]:
        if L.rem(d):
            L = L.lcm(d)
    num = target.ring.zero
    for d, n in groups.items():
        num = num + n * L.exquo(d) if d != L else num + n
    return target.new(num, L)


def poly_matmul(A: Sequence[Sequence[PolyElement]], B: Sequence[Sequence[PolyElement]]) -> list[list[PolyElement]]:
    k = len(B)
    n = len(B[0]) if k else 0
    out = []
    for row in A:
        zero = row[0].ring.zero if row else None
        out.append([sum((row[t] * B[t][j] for t in range(k) if row[t] and B[t][j]), zero) for j in range(n)])
    return out


def to_field(p: PolyElement, target: FracField) -> FracElement:
    """Embed a polynomial into a field whose generators include the ring's."""
    return substitute(p, [target.gens[target.symbols.index(s)] for s in p.ring.symbols], target)


def rf_diff(f: FracElement, var_index: int) -> FracElement:
    return f.diff(f.field.gens[var_index])


def poly_diff(p: PolyElement, var_index: int) -> PolyElement:
    return p.diff(p.ring.gens[var_index])


# ---------------------------------------------------------------------------
# printing


def _format_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_poly(p: PolyElement, latex: bool = False) -> str:
    """Deterministic printer; terms in descending graded-lex order."""
    names = [s.name for s in p.ring.symbols]
    if not p:
        return "0"
    terms = sorted(p.terms(), key=lambda t: (sum(t[0]), t[0]), reverse=True)
    pieces = []
    for monom, coeff in terms:
        c = to_fraction(coeff)
        sign = "-" if c < 0 else "+"
        c = abs(c)
        factors = []
        for name, e in zip(names, monom):
            if not e:
                continue
            if latex:
                base = _latex_name(name)
                factors.append(base if e == 1 else f"{base}^{{{e}}}")
            else:
                factors.append(name if e == 1 else f"{name}^{e}")
        if latex:
            if c.denominator != 1:
                cs = rf"\frac{{{c.numerator}}}{{{c.denominator}}}"
            else:
                cs = str(c.numerator)
            body = " ".join(factors)
            text = body if (c == 1 and factors) else (cs + (" " + body if body else ""))
        else:
            body = "*".join(factors)
            text = body if (c == 1 and factors) else (_format_coeff(c) + ("*" + body if body else ""))
        pieces.append((sign, text))
    first_sign, first = pieces[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, text in pieces[1:]:
        out += f" {sign} {text}"
    return out


def _latex_name(name: str) -> str:
    head = name.rstrip("0123456789")
    tail = name[len(head):]
    return f"{head}_{{{tail}}}" if tail and head else name


def format_ratfun(f, latex: bool = False) -> str:
    if isinstance(f, PolyElement):
        return format_poly(f, latex)
    num, den = f.numer, f.denom
    if den.is_ground:
        c = to_fraction(den.LC)
        if c == 1:
            return format_poly(num, latex)
        num = num.quo_ground(den.LC)
        return format_poly(num, latex)
    ns, ds = format_poly(num, latex), format_poly(den, latex)
    if latex:
        return rf"\frac{{{ns}}}{{{ds}}}"
    if len(num.terms()) > 1:
        ns = f"({ns})"
    if len(den.terms()) > 1 or "*" in ds:
        ds = f"({ds})"
    return f"{ns}/{ds}"


# ---------------------------------------------------------------------------
# rational-function matrices


class RFMatrix:
    """Dense matrix with entries in a rational function field."""

    __slots__ = ("field", "rows")

    def __init__(self, rows: Sequence[Sequence], field: FracField):
        self.field = field
        self.rows = [[e if isinstance(e, FracElement) else field.ground_new(to_qq(e)) for e in row] for row in rows]
        if self.rows and any(len(r) != len(self.rows[0]) for r in self.rows):
            raise ValueError("ragged matrix")

    # construction
    @classmethod
    def zeros(cls, m: int, n: int, field: FracField) -> "RFMatrix":
        return cls([[field.zero] * n for _ in range(m)], field)

    @classmethod
    def identity(cls, n: int, field: FracField) -> "RFMatrix":
        return cls([[field.one if i == j else field.zero for j in range(n)] for i in range(n)], field)

    @classmethod
    def column(cls, entries: Sequence, field: FracField) -> "RFMatrix":
        return cls([[e] for e in entries], field)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), (len(self.rows[0]) if self.rows else 0)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def col(self, j: int) -> list:
        return [r[j] for r in self.rows]

    def entries(self):
        return chain.from_iterable(self.rows)

    def T(self) -> "RFMatrix":
        m, n = self.shape
        return RFMatrix([[self.rows[i][j] for i in range(m)] for j in range(n)], self.field)

    def __matmul__(self, other: "RFMatrix") -> "RFMatrix":
        m, k = self.shape
        k2, n = other.shape
        if k != k2:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = []
        for i in range(m):
            row = []
            for j in range(n):
                pairs = [
                    (a.numer * b.numer, a.denom * b.denom)
                    for a, b in ((self.rows[i][t], other.rows[t][j]) for t in range(k))
                    if a and b
                ]
                row.append(rf_sum_raw(pairs, self.field))
            out.append(row)
        return RFMatrix(out, self.field)

    def over_common_denominator(self) -> tuple[list[list[PolyElement]], PolyElement]:
        """Polynomial matrix N and polynomial d with self = N / d."""
        d = self.field.ring.one
        for den in {e.denom for e in self.entries() if e}:
            if den != d and d.rem(den):
                d = d.lcm(den)
        return [[e.numer * d.exquo(e.denom) if e else e.numer for e in row] for row in self.rows], d

    def product_equals(self, other: "RFMatrix", target: "RFMatrix") -> bool:
        """Decide self @ other == target over common denominators, without cancelling."""
        if self.shape[1] != other.shape[0] or target.shape != (self.shape[0], other.shape[1]):
            raise ValueError("shape mismatch")
        (A, a), (B, b), (C, c) = (M.over_common_denominator() for M in (self, other, target))
        ab = a * b
        return all(c * x == ab * y for rx, ry in zip(poly_matmul(A, B), C) for x, y in zip(rx, ry))

    def __add__(self, other: "RFMatrix") -> "RFMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return RFMatrix([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)], self.field)

    def __sub__(self, other: "RFMatrix") -> "RFMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return RFMatrix([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)], self.field)

    def __neg__(self) -> "RFMatrix":
        return RFMatrix([[-a for a in r] for r in self.rows], self.field)

    def scale(self, c) -> "RFMatrix":
        return RFMatrix([[c * a for a in r] for r in self.rows], self.field)

    def __eq__(self, other) -> bool:
        return isinstance(other, RFMatrix) and self.shape == other.shape and self.rows == other.rows

    __hash__ = None

    def is_zero(self) -> bool:
        return all(not e for e in self.entries())

    def hstack(self, other: "RFMatrix") -> "RFMatrix":
        return RFMatrix([r1 + r2 for r1, r2 in zip(self.rows, other.rows)], self.field)

    def vstack(self, other: "RFMatrix") -> "RFMatrix":
        return RFMatrix(self.rows + other.rows, self.field)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int] | None = None) -> "RFMatrix":
        cols = range(self.shape[1]) if cols is None else cols
        return RFMatrix([[self.rows[i][j] for j in cols] for i in rows], self.field)

    def evaluate(self, point: Sequence) -> list[list[Fraction]]:
        return [[rf_eval(e, point) for e in r] for r in self.rows]

    def evaluate_float(self, point: Sequence[float]):
        return np.array([[rf_eval_float(e, point) for e in r] for r in self.rows], dtype=float)

    def to_strings(self, latex: bool = False) -> list[list[str]]:
        return [[format_ratfun(e, latex) for e in r] for r in self.rows]

    def __repr__(self) -> str:
        return f"RFMatrix({self.to_strings()})"


def _clear_row(row: Sequence[FracElement]) -> list[PolyElement]:
    """Multiply a row by the lcm of its denominators; returns polynomials."""
    den = None
    for e in row:
        if e:
            if den is None:
                den = e.denom
            elif e.denom != den and den.rem(e.denom):
                den = den.lcm(e.denom)
    if den is None:
        return [e.numer for e in row]
    return [(e.numer * den.exquo(e.denom)) if e else e.numer for e in row]


def rf_rank(A: RFMatrix) -> int:
    """Generic rank over the rational-function field."""
    m, n = A.shape
    if m == 0 or n == 0:
        return 0
    M = [_clear_row(row) for row in A.rows]
    return _rank_poly(M, n)


def _rank_poly(M: list[list[PolyElement]], n: int) -> int:
    # column skipping breaks the nested-minor structure Bareiss relies on,
    # so eliminate with gcd-reduced multipliers and keep rows primitive
    m = len(M)
    rank = 0
    r = 0
    for c in range(n):
        if r >= m:
            break
        p = next((i for i in range(r, m) if M[i][c]), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        piv = M[r][c]
        for i in range(r + 1, m):
            a = M[i][c]
            if not a:
                continue
            g = piv.gcd(a)
            pf, af = piv.exquo(g), a.exquo(g)
            row = [pf * M[i][j] - af * M[r][j] for j in range(n)]
            M[i] = _primitive_row(row)
        rank += 1
        r += 1
    return rank


def _primitive_row(row: list[PolyElement]) -> list[PolyElement]:
    g = None
    for e in row:
        if e:
            g = e if g is None else g.gcd(e)
            if g.is_ground:
                break
    if g is None or g.is_ground:
        return row
    return [e.exquo(g) if e else e for e in row]


def rf_det(A: RFMatrix) -> FracElement:
    m, n = A.shape
    if m != n:
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        return A.field.one
    dens = []
    M = []
    for row in A.rows:
        den = A.field.ring.one
        for e in row:
            if e:
                den = den.lcm(e.denom)
        dens.append(den)
        M.append([(e.numer * den.exquo(e.denom)) if e else e.numer for e in row])
    sign = 1
    prev = A.field.ring.one
    for k in range(n - 1):
        if not M[k][k]:
            p = next((i for i in range(k + 1, n) if M[i][k]), None)
            if p is None:
                return A.field.zero
            M[k], M[p] = M[p], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[k][k] * M[i][j] - M[i][k] * M[k][j]).exquo(prev)
        prev = M[k][k]
    det = M[n - 1][n - 1]
    total_den = A.field.ring.one
    for d in dens:
        total_den = total_den * d
    out = A.field.new(det, total_den)
    return out if sign > 0 else -out


def rf_solve_linear(A: RFMatrix, b: RFMatrix) -> RFMatrix:
    """Solve ``A X = b`` exactly by Bareiss elimination on the cleared system."""
    m, n = A.shape
    if m != n:
        raise ValueError("coefficient matrix must be square")
    if b.shape[0] != m:
        raise ValueError("right-hand side has the wrong number of rows")
    k = b.shape[1]
    F = A.field
    aug = [_clear_row(ra + rb) for ra, rb in zip(A.rows, b.rows)]
    # standard Bareiss with partial (nonzero) pivoting on the diagonal
    prev = F.ring.one
    for c in range(n):
        p = next((i for i in range(c, n) if aug[i][c]), None)
        if p is None:
            raise SingularMatrix("determinant is identically zero")
        if p != c:
            aug[c], aug[p] = aug[p], aug[c]
        piv = aug[c][c]
        for i in range(c + 1, n):
            a = aug[i][c]
            row_i = aug[i]
            row_c = aug[c]
            for j in range(c + 1, n + k):
                row_i[j] = (piv * row_i[j] - a * row_c[j]).exquo(prev)
            row_i[c] = F.ring.zero
        prev = piv
    # det * X is polynomial (Cramer), so back substitution stays in the ring
    det = aug[n - 1][n - 1]
    X = [[F.zero] * k for _ in range(n)]
    for j in range(k):
        Y = [F.ring.zero] * n
        for i in range(n - 1, -1, -1):
            acc = det * aug[i][n + j]
            for t in range(i + 1, n):
                if aug[i][t] and Y[t]:
                    acc -= aug[i][t] * Y[t]
            Y[i] = acc.exquo(aug[i][i])
            X[i][j] = F.new(Y[i], det) if Y[i] else F.zero
    return RFMatrix(X, F)


def rf_inverse(A: RFMatrix) -> RFMatrix:
    return rf_solve_linear(A, RFMatrix.identity(A.shape[0], A.field))


# ---------------------------------------------------------------------------
# vectors


def monomial_pow(x: Sequence, M: Sequence[Sequence]) -> list:
    """Column-wise monomials ``x^M``: component l is prod_i x_i ** M[i][l]."""
    n = len(x)
    if len(M) != n:
        raise ValueError("exponent matrix must have one row per base entry")
    m = len(M[0]) if n else 0
    out = []
    for l in range(m):
        val = None
        for i in range(n):
            e = M[i][l]
            if e == 0:
                continue
            e = int(e) if Fraction(e).denominator == 1 else e
            if not isinstance(e, int):
                raise ValueError("rational exponents are not representable as rational functions")
            if e < 0 and not x[i]:
                raise ZeroBaseNegativeExponent(f"base entry {i} is zero but exponent is {e}")
            term = x[i] ** e
            val = term if val is None else val * term
        if val is None:
            val = x[0] ** 0 if n else 1
        out.append(val)
    return out


def hadamard(a: Sequence, b: Sequence) -> list:
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    return [p * q for p, q in zip(a, b)]


# ---------------------------------------------------------------------------
# rational matrices (lists of Fractions)


def q_matrix(rows) -> list[list[Fraction]]:
    return [[Fraction(e) if not isinstance(e, Fraction) else e for e in r] for r in rows]


def q_matmul(A, B):
    k = len(B)
    n = len(B[0]) if k else 0
    return [[sum((A[i][t] * B[t][j] for t in range(k)), Fraction(0)) for j in range(n)] for i in range(len(A))]


def q_identity(n: int):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def q_transpose(A):
    return [list(c) for c in zip(*A)] if A else []


def q_rref(A) -> tuple[list[list[Fraction]], list[int]]:
    M = [list(map(Fraction, r)) for r in A]
    m = len(M)
    n = len(M[0]) if m else 0
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [e * inv for e in M[r]]
        for i in range(m):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    return M, pivots


def q_rank(A) -> int:
    if not A or not A[0]:
        return 0
    return len(q_rref(A)[1])


def q_solve(A, B):
    """Solve ``A X = B`` for square nonsingular rational ``A``."""
    n = len(A)
    aug = [list(a) + list(b) for a, b in zip(A, B)]
    R, piv = q_rref(aug)
    if piv[:n] != list(range(n)):
        raise SingularMatrix("matrix is singular")
    return [row[n:] for row in R[:n]]


def q_inverse(A):
    return q_solve(A, q_identity(len(A)))


def q_nullspace(A) -> list[list[Fraction]]:
    """Basis of the right kernel of ``A`` (one list per basis vector)."""
    m = len(A)
    n = len(A[0]) if m else 0
    R, piv = q_rref(A) if m else ([], [])
    free = [j for j in range(n) if j not in piv]
    basis = []
    for f in free:
        vec = [Fraction(0)] * n
        vec[f] = Fraction(1)
        for row, pc in zip(R, piv):
            vec[pc] = -row[f]
        basis.append(vec)
    return basis


def charpoly(A) -> list[Fraction]:
    """Coefficients [1, c1, ..., cn] of det(lambda I - A) (Faddeev-LeVerrier)."""
    n = len(A)
    coeffs = [Fraction(1)]
    M = [[Fraction(0)] * n for _ in range(n)]
    I = q_identity(n)
    for k in range(1, n + 1):
        M = [[a + coeffs[-1] * b for a, b in zip(rm, ri)] for rm, ri in zip(q_matmul(A, M), I)]
        AM = q_matmul(A, M)
        c = -sum((AM[i][i] for i in range(n)), Fraction(0)) / k
        coeffs.append(c)
    return coeffs


def rf_charpoly(A: RFMatrix) -> list:
    """Coefficients [1, c1, ..., cn] of det(lambda I - A) over the function field."""
    n = A.shape[0]
    F = A.field
    coeffs = [F.one]
    M = RFMatrix.zeros(n, n, F)
    I = RFMatrix.identity(n, F)
    for k in range(1, n + 1):
        M = A @ M + I.scale(coeffs[-1])
        AM = A @ M
        coeffs.append(-rf_sum([AM[i, i] for i in range(n)], F) / k)
    return coeffs


def hurwitz_determinants(coeffs: Sequence) -> list:
    """Leading principal minors of the Hurwitz matrix of a monic polynomial.

    ``coeffs`` is [1, c1, ..., cn]; entries may be Fractions or field elements.
    """
    n = len(coeffs) - 1
    zero = coeffs[0] - coeffs[0]

    def a(k):
        return coeffs[k] if 0 <= k <= n else zero

    H = [[a(2 * (j + 1) - (i + 1)) for j in range(n)] for i in range(n)]
    out = []
    for k in range(1, n + 1):
        out.append(_det_generic([row[:k] for row in H[:k]]))
    return out


def _det_generic(M: list[list]):
    """Determinant by cofactor-free Gaussian elimination over any field."""
    M = [list(r) for r in M]
    n = len(M)
    det = M[0][0] - M[0][0] + 1
    for c in range(n):
        p = next((i for i in range(c, n) if M[i][c]), None)
        if p is None:
            return det - det
        if p != c:
            M[c], M[p] = M[p], M[c]
            det = -det
        det = det * M[c][c]
        for i in range(c + 1, n):
            f = M[i][c] / M[c][c]
            if f:
                M[i] = [x - f * y for x, y in zip(M[i], M[c])]
    return det
