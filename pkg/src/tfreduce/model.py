"""Input models: slow-fast mass-action networks and generic polynomial systems.

File format (line oriented, ``#`` starts a comment)::

    @species X1 X2 X3
    @fast
    X1 + X2 <-> X3 : 1, 1
    @slow
    X1 + X3 <-> 2 X2 : 1, 1

Generic systems declare ``@generic``, their state variables with ``@vars``
and the fast part as a product ``P * mu`` (``@P`` rows are comma separated,
``@mu`` and ``@h1`` hold one expression per line). ``@phi`` (one rational
expression in ``v1 .. vs`` per state variable) and ``@L`` (comma separated
rows) supply a user parameterization and left annihilator for either kind.
``@fastnodes`` registers complexes as isolated nodes of the fast graph and
``@epsilon`` sets the default perturbation parameter for simulation.

Expressions use ``+ - * / ^`` with integer exponents. Fractional exponents
are not part of the expression grammar; parameterizations such as
``K v1^(2/3) v2^(2/3)`` go through :func:`tfreduce.manifold.monomial_parameterization`
with a rational exponent matrix instead.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from sympy.polys.fields import FracElement
from sympy.polys.rings import PolyElement

from .exact import format_ratfun, poly_ring, rf_field, to_qq, v_names

MAX_STOICH = 10**6

SECTIONS = ("species", "fast", "slow", "generic", "vars", "phi", "P", "mu", "h1", "L", "epsilon", "fastnodes")


class ModelError(ValueError):
    """Problem in a model file, with 1-based line/column when known."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.message = message
        self.line = line
        self.col = col
        loc = f"line {line}, column {col}: " if line is not None else ""
        super().__init__(loc + message)


class ModelSyntaxError(ModelError):
    pass


class DuplicateSpeciesError(ModelError):
    pass


class NonPositiveRateError(ModelError):
    pass


class UnknownIdentifierError(ModelError):
    pass


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class Species:
    name: str
    index: int


@dataclass(frozen=True)
class Complex:
    """Nonnegative integer combination of species; empty means the zero node."""

    coefficients: tuple[tuple[int, int], ...] = ()

    @classmethod
    def from_dict(cls, coeffs: dict[int, int]) -> "Complex":
        if any(c < 0 for c in coeffs.values()):
            raise ValueError("complex coefficients must be nonnegative")
        return cls(tuple(sorted((i, c) for i, c in coeffs.items() if c)))

    def as_dict(self) -> dict[int, int]:
        return dict(self.coefficients)

    def vector(self, n: int) -> list[int]:
        out = [0] * n
        for i, c in self.coefficients:
            out[i] = c
        return out

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    def format(self, names: list[str]) -> str:
        if self.is_zero:
            return "0"
        return " + ".join(names[i] if c == 1 else f"{c} {names[i]}" for i, c in self.coefficients)


@dataclass(frozen=True)
class Reaction:
    reactant: Complex
    product: Complex
    rate_constant: Fraction
    speed: str  # "fast" | "slow"
    line: Optional[int] = field(default=None, compare=False)

    def __post_init__(self):
        if self.rate_constant <= 0:
            raise NonPositiveRateError(f"rate constant must be positive, got {self.rate_constant}", self.line)
        if self.reactant == self.product:
            raise ModelError("reactant and product complexes coincide", self.line)
        if self.speed not in ("fast", "slow"):
            raise ValueError(f"speed must be 'fast' or 'slow', not {self.speed!r}")


@dataclass(frozen=True)
class GenericModel:
    """Polynomial system x' = P(x) mu(x) + eps h1(x)."""

    state_variables: tuple[str, ...]
    fast_P: tuple[tuple[PolyElement, ...], ...]
    fast_mu: tuple[PolyElement, ...]
    slow_h1: tuple[PolyElement, ...]

    @property
    def n(self) -> int:
        return len(self.state_variables)

    @property
    def r(self) -> int:
        return len(self.fast_mu)


@dataclass(frozen=True)
class Model:
    species: tuple[Species, ...] = ()
    reactions: tuple[Reaction, ...] = ()
    generic: Optional[GenericModel] = None
    epsilon_default: Fraction = Fraction(1, 100)
    phi: Optional[tuple[FracElement, ...]] = None
    L: Optional[tuple[tuple[PolyElement, ...], ...]] = None
    fast_nodes: tuple[Complex, ...] = ()

    @property
    def kind(self) -> str:
        return "generic" if self.generic is not None else "crn"

    @property
    def names(self) -> list[str]:
        if self.generic is not None:
            return list(self.generic.state_variables)
        return [s.name for s in self.species]

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def ring(self):
        return poly_ring(tuple(self.names))

    def reactions_with(self, speed: str) -> list[Reaction]:
        return [r for r in self.reactions if r.speed == speed]

    def mass_action_field(self, speed: str | None = None) -> list[PolyElement]:
        """N (K o x^Y) restricted to reactions of the given speed."""
        R = self.ring
        out = [R.zero] * self.n
        for rx in self.reactions:
            if speed is not None and rx.speed != speed:
                continue
            rate = R.ground_new(to_qq(rx.rate_constant))
            for i, c in rx.reactant.coefficients:
                rate = rate * R.gens[i] ** c
            net = [p - q for p, q in zip(rx.product.vector(self.n), rx.reactant.vector(self.n))]
            for i, d in enumerate(net):
                if d:
                    out[i] = out[i] + rate * d
        return out

    def h0(self) -> list[PolyElement]:
        """Fast part of the vector field."""
        if self.generic is None:
            return self.mass_action_field("fast")
        g = self.generic
        R = self.ring
        return [sum((p * m for p, m in zip(row, g.fast_mu)), R.zero) for row in g.fast_P]

    def h1(self) -> list[PolyElement]:
        """Slow part of the vector field."""
        if self.generic is None:
            return self.mass_action_field("slow")
        return list(self.generic.slow_h1)

    @property
    def s_declared(self) -> int | None:
        """Number of parameters used by a user ``@phi`` section."""
        if self.phi is None:
            return None
        return self.phi[0].field.ngens

    def with_reactions(self, reactions) -> "Model":
        return Model(
            species=self.species,
            reactions=tuple(reactions),
            generic=self.generic,
            epsilon_default=self.epsilon_default,
            phi=self.phi,
            L=self.L,
            fast_nodes=self.fast_nodes,
        )


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t]+)
  | (?P<arrow2><->)
  | (?P<arrow>->)
  | (?P<num>\d+\.\d*|\.\d+|\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),:])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str, line: int, col0: int = 1) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ModelSyntaxError(f"unexpected character {text[pos]!r}", line, col0 + pos)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), line, col0 + pos))
        pos = m.end()
    return toks


class _Cursor:
    def __init__(self, toks: list[_Tok], line: int, end_col: int):
        self.toks = toks
        self.i = 0
        self.line = line
        self.end_col = end_col

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise ModelSyntaxError("unexpected end of line", self.line, self.end_col)
        self.i += 1
        return tok

    def accept(self, text: str) -> _Tok | None:
        tok = self.peek()
        if tok is not None and tok.text == text:
            self.i += 1
            return tok
        return None

    def expect(self, text: str) -> _Tok:
        tok = self.peek()
        if tok is None or tok.text != text:
            where = (tok.line, tok.col) if tok else (self.line, self.end_col)
            got = repr(tok.text) if tok else "end of line"
            raise ModelSyntaxError(f"expected {text!r}, got {got}", *where)
        self.i += 1
        return tok

    def done(self) -> bool:
        return self.i >= len(self.toks)


# ---------------------------------------------------------------------------
# expressions


class _ExprParser:
    """Recursive descent over + - * / ^ producing elements of a fraction field."""

    def __init__(self, cur: _Cursor, F, names: dict[str, int]):
        self.cur = cur
        self.F = F
        self.names = names

    def parse(self):
        val = self.expr()
        tok = self.cur.peek()
        if tok is not None and tok.text != ",":
            raise ModelSyntaxError(f"unexpected token {tok.text!r}", tok.line, tok.col)
        return val

    def expr(self):
        cur = self.cur
        if cur.accept("-"):
            val = -self.term()
        else:
            cur.accept("+")
            val = self.term()
        while True:
            if cur.accept("+"):
                val = val + self.term()
            elif cur.accept("-"):
                val = val - self.term()
            else:
                return val

    def term(self):
        val = self.power()
        while True:
            tok = self.cur.peek()
            if tok is not None and tok.text == "*":
                self.cur.next()
                val = val * self.power()
            elif tok is not None and tok.text == "/":
                self.cur.next()
                den = self.power()
                if not den:
                    raise ModelSyntaxError("division by zero", tok.line, tok.col)
                val = val / den
            else:
                return val

    def power(self):
        base = self.unary()
        if self.cur.accept("^"):
            neg = bool(self.cur.accept("-"))
            tok = self.cur.next()
            if tok.kind != "num" or not tok.text.isdigit():
                raise ModelSyntaxError("exponent must be an integer literal", tok.line, tok.col)
            e = int(tok.text)
            if neg:
                if not base:
                    raise ModelSyntaxError("zero raised to a negative power", tok.line, tok.col)
                return base ** (-e)
            return base**e
        return base

    def unary(self):
        if self.cur.accept("-"):
            return -self.unary()
        return self.atom()

    def atom(self):
        tok = self.cur.next()
        if tok.text == "(":
            val = self.expr()
            self.cur.expect(")")
            return val
        if tok.kind == "num":
            return self.F.ground_new(to_qq(Fraction(tok.text)))
        if tok.kind == "name":
            if tok.text not in self.names:
                raise UnknownIdentifierError(f"unknown identifier {tok.text!r}", tok.line, tok.col)
            return self.F.gens[self.names[tok.text]]
        raise ModelSyntaxError(f"unexpected token {tok.text!r}", tok.line, tok.col)


def parse_expression(text: str, variables: list[str], line: int = 1):
    """Parse one rational expression over ``variables``."""
    F = rf_field(tuple(variables))
    toks = _tokenize(text, line)
    cur = _Cursor(toks, line, len(text) + 1)
    if cur.done():
        raise ModelSyntaxError("empty expression", line, 1)
    return _ExprParser(cur, F, {v: i for i, v in enumerate(variables)}).parse()


def _as_poly(f: FracElement, ring, line: int) -> PolyElement:
    if not f.denom.is_ground:
        raise ModelSyntaxError("expected a polynomial expression", line, 1)
    num = f.numer.quo_ground(f.denom.LC)
    return num.set_ring(ring) if num.ring != ring else num


# ---------------------------------------------------------------------------
# reactions


def _parse_rational(cur: _Cursor) -> tuple[Fraction, _Tok]:
    neg = cur.accept("-")
    tok = cur.next()
    if tok.kind != "num":
        raise ModelSyntaxError(f"expected a rate constant, got {tok.text!r}", tok.line, tok.col)
    val = Fraction(tok.text)
    if cur.accept("/"):
        den = cur.next()
        if den.kind != "num" or not den.text.isdigit():
            raise ModelSyntaxError("expected an integer denominator", den.line, den.col)
        if int(den.text) == 0:
            raise ModelSyntaxError("zero denominator", den.line, den.col)
        val = val / int(den.text)
    start = neg or tok
    return (-val if neg else val), start


def _parse_complex(cur: _Cursor, species: dict[str, int]) -> Complex:
    tok = cur.peek()
    if tok is not None and tok.text == "0" and (cur.i + 1 >= len(cur.toks) or cur.toks[cur.i + 1].kind != "name"):
        cur.next()
        return Complex()
    coeffs: dict[int, int] = {}
    terms: list[tuple[int, _Tok]] = []
    while True:
        tok = cur.peek()
        if tok is None or tok.kind not in ("num", "name"):
            where = (tok.line, tok.col) if tok else (cur.line, cur.end_col)
            raise ModelSyntaxError("expected a species term", *where)
        coeff = 1
        if tok.kind == "num":
            cur.next()
            if not tok.text.isdigit():
                raise ModelSyntaxError("stoichiometric coefficient must be an integer", tok.line, tok.col)
            coeff = int(tok.text)
            if coeff > MAX_STOICH:
                raise ModelSyntaxError(f"stoichiometric coefficient exceeds {MAX_STOICH}", tok.line, tok.col)
            tok = cur.peek()
            if tok is None or tok.kind != "name":
                where = (tok.line, tok.col) if tok else (cur.line, cur.end_col)
                raise ModelSyntaxError("expected a species name after the coefficient", *where)
        terms.append((coeff, cur.next()))
        plus = cur.peek()
        if plus is None or plus.text != "+":
            break
        cur.next()
        nxt = cur.peek()
        if nxt is None or nxt.kind not in ("num", "name"):
            raise ModelSyntaxError("dangling '+' without a following species term", plus.line, plus.col)
    # names are resolved only once the complex is syntactically complete
    for coeff, name in terms:
        if name.text not in species:
            raise UnknownIdentifierError(f"unknown species {name.text!r}", name.line, name.col)
        idx = species[name.text]
        coeffs[idx] = coeffs.get(idx, 0) + coeff
    return Complex.from_dict(coeffs)


def _parse_reaction(toks: list[_Tok], line: int, end_col: int, speed: str, species: dict[str, int]):
    cur = _Cursor(toks, line, end_col)
    lhs = _parse_complex(cur, species)
    arrow = cur.next()
    if arrow.kind not in ("arrow", "arrow2"):
        raise ModelSyntaxError(f"expected '->' or '<->', got {arrow.text!r}", arrow.line, arrow.col)
    rhs = _parse_complex(cur, species)
    cur.expect(":")
    kf, ktok = _parse_rational(cur)
    kr = None
    if arrow.kind == "arrow2":
        cur.expect(",")
        kr, krtok = _parse_rational(cur)
    if not cur.done():
        tok = cur.peek()
        raise ModelSyntaxError(f"unexpected token {tok.text!r}", tok.line, tok.col)
    if kf <= 0:
        raise NonPositiveRateError(f"rate constant must be positive, got {kf}", line, ktok.col)
    if lhs == rhs:
        raise ModelSyntaxError("reactant and product complexes coincide", line, 1)
    out = [Reaction(lhs, rhs, kf, speed, line)]
    if kr is not None:
        if kr <= 0:
            raise NonPositiveRateError(f"rate constant must be positive, got {kr}", line, krtok.col)
        out.append(Reaction(rhs, lhs, kr, speed, line))
    return out


# ---------------------------------------------------------------------------
# files


def _strip_comment(raw: str) -> str:
    return raw.split("#", 1)[0].rstrip()


def parse_model(text: str) -> Model:
    """Parse model text; raises :class:`ModelError` subclasses on bad input."""
    if not text or not text.strip():
        raise ModelSyntaxError("empty model text", 1, 1)
    species: dict[str, int] = {}
    reactions: list[Reaction] = []
    sections: dict[str, list[tuple[int, str, int]]] = {}
    section = None
    generic = False
    epsilon = Fraction(1, 100)
    fastnodes_lines: list[tuple[int, str, int]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = _strip_comment(raw)
        if not body.strip():
            continue
        offset = len(body) - len(body.lstrip())
        stripped = body.strip()
        if stripped.startswith("@"):
            m = re.match(r"@(\w+)", stripped)
            key = m.group(1) if m else ""
            if key not in SECTIONS:
                raise ModelSyntaxError(f"unknown section marker '@{key}'", lineno, offset + 1)
            rest_col = offset + m.end() + 1
            rest = stripped[m.end():]
            section = key
            if key == "generic":
                generic = True
                if rest.strip():
                    raise ModelSyntaxError("'@generic' takes no arguments", lineno, rest_col)
                continue
            if key == "species":
                for tok in _tokenize(rest, lineno, rest_col):
                    if tok.kind != "name":
                        raise ModelSyntaxError(f"invalid species name {tok.text!r}", tok.line, tok.col)
                    if tok.text in species:
                        raise DuplicateSpeciesError(f"duplicate species {tok.text!r}", tok.line, tok.col)
                    species[tok.text] = len(species)
                continue
            if key == "epsilon":
                cur = _Cursor(_tokenize(rest, lineno, rest_col), lineno, rest_col + len(rest))
                epsilon, tok = _parse_rational(cur)
                if not cur.done() or epsilon <= 0:
                    raise ModelSyntaxError("@epsilon needs one positive rational", lineno, rest_col)
                continue
            if rest.strip():
                sections.setdefault(key, []).append((lineno, rest, rest_col))
            else:
                sections.setdefault(key, [])
            continue
        if section is None:
            raise ModelSyntaxError("content before any section marker", lineno, offset + 1)
        if section == "species":
            for tok in _tokenize(body, lineno):
                if tok.kind != "name":
                    raise ModelSyntaxError(f"invalid species name {tok.text!r}", tok.line, tok.col)
                if tok.text in species:
                    raise DuplicateSpeciesError(f"duplicate species {tok.text!r}", tok.line, tok.col)
                species[tok.text] = len(species)
            continue
        sections.setdefault(section, []).append((lineno, body, 1))

    # reactions
    for speed in ("fast", "slow"):
        for lineno, body, col in sections.get(speed, []):
            toks = _tokenize(body, lineno, col)
            reactions.extend(_parse_reaction(toks, lineno, col + len(body), speed, species))
    for lineno, body, col in sections.get("fastnodes", []):
        toks = _tokenize(body, lineno, col)
        cur = _Cursor(toks, lineno, col + len(body))
        while not cur.done():
            fastnodes_lines.append(_parse_complex(cur, species))
            cur.accept(",")

    gen = None
    if generic:
        if species or reactions:
            raise ModelSyntaxError("a generic model cannot declare species or reactions", 1, 1)
        var_lines = sections.get("vars", [])
        names: list[str] = []
        for lineno, body, col in var_lines:
            for tok in _tokenize(body, lineno, col):
                if tok.kind != "name":
                    raise ModelSyntaxError(f"invalid variable name {tok.text!r}", tok.line, tok.col)
                if tok.text in names:
                    raise DuplicateSpeciesError(f"duplicate variable {tok.text!r}", tok.line, tok.col)
                names.append(tok.text)
        if not names:
            raise ModelSyntaxError("generic model needs an @vars section", 1, 1)
        ring = poly_ring(tuple(names))
        P = tuple(tuple(_as_poly(e, ring, ln) for e in _split_exprs(body, names, ln, col)) for ln, body, col in sections.get("P", []))
        mu = tuple(_as_poly(_one_expr(body, names, ln, col), ring, ln) for ln, body, col in sections.get("mu", []))
        h1 = tuple(_as_poly(_one_expr(body, names, ln, col), ring, ln) for ln, body, col in sections.get("h1", []))
        gen = GenericModel(tuple(names), P, mu, h1)
        xnames = names
    else:
        for key in ("P", "mu", "h1", "vars"):
            if key in sections:
                raise ModelSyntaxError(f"'@{key}' is only valid in a generic model", sections[key][0][0] if sections[key] else 1, 1)
        xnames = list(species)

    phi = None
    if "phi" in sections:
        lines = sections["phi"]
        used = set()
        for ln, body, col in lines:
            for tok in _tokenize(body, ln, col):
                if tok.kind == "name":
                    m = re.fullmatch(r"v([1-9]\d*)", tok.text)
                    if not m:
                        raise UnknownIdentifierError(f"unknown identifier {tok.text!r} in @phi (use v1, v2, ...)", tok.line, tok.col)
                    used.add(int(m.group(1)))
        s = max(used) if used else 0
        if gen is not None:
            s = max(s, gen.n - gen.r)
        vn = list(v_names(s))
        phi = tuple(_one_expr(body, vn, ln, col) for ln, body, col in lines)
    L = None
    if "L" in sections:
        xring = poly_ring(tuple(xnames))
        L = tuple(tuple(_as_poly(e, xring, ln) for e in _split_exprs(body, xnames, ln, col)) for ln, body, col in sections["L"])

    return Model(
        species=tuple(Species(n, i) for n, i in species.items()),
        reactions=tuple(reactions),
        generic=gen,
        epsilon_default=epsilon,
        phi=phi,
        L=L,
        fast_nodes=tuple(fastnodes_lines),
    )


def _one_expr(body: str, names: list[str], line: int, col: int):
    toks = _tokenize(body, line, col)
    cur = _Cursor(toks, line, col + len(body))
    val = _ExprParser(cur, rf_field(tuple(names)), {v: i for i, v in enumerate(names)}).parse()
    if not cur.done():
        tok = cur.peek()
        raise ModelSyntaxError(f"unexpected token {tok.text!r}", tok.line, tok.col)
    return val


def _split_exprs(body: str, names: list[str], line: int, col: int):
    toks = _tokenize(body, line, col)
    cur = _Cursor(toks, line, col + len(body))
    parser = _ExprParser(cur, rf_field(tuple(names)), {v: i for i, v in enumerate(names)})
    out = [parser.parse()]
    while cur.accept(","):
        out.append(parser.parse())
    if not cur.done():
        tok = cur.peek()
        raise ModelSyntaxError(f"unexpected token {tok.text!r}", tok.line, tok.col)
    return out


def load_model(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


# ---------------------------------------------------------------------------
# validation and printing


@dataclass(frozen=True)
class Diagnostic:
    level: str  # "error" | "warning"
    message: str

    def __str__(self) -> str:
        return f"{self.level}: {self.message}"


def validate_model(m: Model) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    if m.n == 0:
        out.append(Diagnostic("error", "model declares no species or state variables"))
    if m.generic is None:
        if not m.reactions_with("fast"):
            out.append(Diagnostic("error", "model has no fast reaction"))
        for rx in m.reactions:
            if rx.rate_constant <= 0:
                out.append(Diagnostic("error", f"nonpositive rate constant on line {rx.line}"))
        used = set()
        for rx in m.reactions:
            used.update(i for i, _ in rx.reactant.coefficients)
            used.update(i for i, _ in rx.product.coefficients)
        for sp in m.species:
            if sp.index not in used:
                out.append(Diagnostic("warning", f"unused species {sp.name}"))
    else:
        g = m.generic
        if g.r == 0:
            out.append(Diagnostic("error", "generic model has no fast equation (@mu is empty)"))
        if len(g.fast_P) != g.n:
            out.append(Diagnostic("error", f"dimension mismatch: P has {len(g.fast_P)} rows, expected {g.n}"))
        if any(len(row) != g.r for row in g.fast_P):
            widths = sorted({len(row) for row in g.fast_P})
            out.append(Diagnostic("error", f"dimension mismatch: P has {widths} columns but mu has length {g.r}"))
        if len(g.slow_h1) != g.n:
            out.append(Diagnostic("error", f"dimension mismatch: h1 has length {len(g.slow_h1)}, expected {g.n}"))
        if g.r >= g.n and g.n:
            out.append(Diagnostic("error", f"need r < n, got r={g.r}, n={g.n}"))
    if m.phi is not None and len(m.phi) != m.n:
        out.append(Diagnostic("error", f"dimension mismatch: @phi has {len(m.phi)} entries, expected {m.n}"))
    if m.L is not None:
        if any(len(row) != m.n for row in m.L):
            out.append(Diagnostic("error", f"dimension mismatch: @L rows must have {m.n} entries"))
        if m.phi is not None and len(m.L) != m.s_declared:
            out.append(Diagnostic("error", f"dimension mismatch: @L has {len(m.L)} rows, @phi uses {m.s_declared} parameters"))
    return out


def _fmt_rate(k: Fraction) -> str:
    return str(k.numerator) if k.denominator == 1 else f"{k.numerator}/{k.denominator}"


def format_model(m: Model) -> str:
    """Render a model in the file format; parsing the result gives an equal model."""
    lines: list[str] = []
    if m.epsilon_default != Fraction(1, 100):
        lines.append(f"@epsilon {_fmt_rate(m.epsilon_default)}")
    if m.generic is None:
        names = m.names
        lines.append("@species " + " ".join(names))
        for speed in ("fast", "slow"):
            rxs = m.reactions_with(speed)
            if rxs:
                lines.append(f"@{speed}")
                for rx in rxs:
                    lines.append(f"{rx.reactant.format(names)} -> {rx.product.format(names)} : {_fmt_rate(rx.rate_constant)}")
        if m.fast_nodes:
            lines.append("@fastnodes " + ", ".join(c.format(names) for c in m.fast_nodes))
    else:
        g = m.generic
        lines += ["@generic", "@vars " + " ".join(g.state_variables), "@P"]
        lines += [", ".join(format_ratfun(e) for e in row) for row in g.fast_P]
        lines.append("@mu")
        lines += [format_ratfun(e) for e in g.fast_mu]
        lines.append("@h1")
        lines += [format_ratfun(e) for e in g.slow_h1]
    if m.phi is not None:
        lines.append("@phi")
        lines += [format_ratfun(e) for e in m.phi]
    if m.L is not None:
        lines.append("@L")
        lines += [", ".join(format_ratfun(e) for e in row) for row in m.L]
    return "\n".join(lines) + "\n"
