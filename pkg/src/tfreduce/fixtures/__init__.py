"""Worked example networks as model text, parameterized by rate constants.

The bundled ``*.tfr`` files are these generators evaluated at their default
arguments; :func:`bundled` lists them for the CLI and the test-suite.
"""

from __future__ import annotations

from fractions import Fraction
from importlib import resources

from ..model import Model, parse_model


def _q(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def rational_cube_root(x) -> Fraction:
    x = Fraction(x)
    p = round(abs(x.numerator) ** (1 / 3))
    q = round(x.denominator ** (1 / 3))
    for a in (p - 1, p, p + 1):
        for b in (q - 1, q, q + 1):
            if a > 0 and b > 0 and Fraction(a, b) ** 3 == x:
                return Fraction(a, b)
    raise ValueError(f"{x} is not the cube of a rational number")


def example1(k1=1, km1=1, k2=1, km2=1) -> str:
    """Fast X1 + X2 <-> X3, slow X1 + X3 <-> 2 X2."""
    return (
        "# hypothetical slow-fast system\n"
        "@species X1 X2 X3\n"
        "@fast\n"
        f"X1 + X2 <-> X3 : {_q(k1)}, {_q(km1)}\n"
        "@slow\n"
        f"X1 + X3 <-> 2 X2 : {_q(k2)}, {_q(km2)}\n"
    )


def example2(k1=1, km1=1, k2=1, keep_x4=False) -> str:
    """Michaelis-Menten with slow degradation of the complex X3 -> X1 (+ X4)."""
    species = "X1 X2 X3 X4" if keep_x4 else "X1 X2 X3"
    product = "X1 + X4" if keep_x4 else "X1"
    return (
        f"@species {species}\n"
        "@fast\n"
        f"X1 + X2 <-> X3 : {_q(k1)}, {_q(km1)}\n"
        "@slow\n"
        f"X3 -> {product} : {_q(k2)}\n"
    )


def example3(k1=1, km1=1, k2=1, km2=1, with_phi=True) -> str:
    """Fast 2 X1 + 2 X2 <-> 3 X3 with the polynomial parameterization.

    ``k1/km1`` must be a rational cube: the manifold is
    ``x3^3 = (k1/km1) x1^2 x2^2`` and the parameterization
    ``(v1^3, v2^3, c v1^2 v2^2)`` needs ``c^3 = k1/km1``.
    """
    text = (
        "@species X1 X2 X3\n"
        "@fast\n"
        f"2 X1 + 2 X2 <-> 3 X3 : {_q(k1)}, {_q(km1)}\n"
        "@slow\n"
        f"X1 + X3 <-> 2 X2 : {_q(k2)}, {_q(km2)}\n"
    )
    if with_phi:
        c = rational_cube_root(Fraction(k1) / Fraction(km1))
        text += f"@phi\nv1^3\nv2^3\n{_q(c)}*v1^2*v2^2\n@L\n1, -1, 0\n3, 0, 2\n"
    return text


def two_component(k1=1, k2=1, k3=1, k4=1, k5=1, k6=1, k7=1, k8=1, k9=1, with_k8_k9=True) -> str:
    """Two-component system with a dead-end complex X6; k1..k6 fast."""
    text = (
        "# histidine kinase X1/X2, response regulator X3/X4, dead-end complex X6\n"
        "@species X1 X2 X3 X4 X5 X6\n"
        "@fast\n"
        f"X1 <-> X2 : {_q(k1)}, {_q(k2)}\n"
        f"X2 + X3 <-> X5 : {_q(k3)}, {_q(k4)}\n"
        f"X5 <-> X1 + X4 : {_q(k5)}, {_q(k6)}\n"
        "@slow\n"
        f"X4 -> X3 : {_q(k7)}\n"
    )
    if with_k8_k9:
        text += f"X1 + X3 <-> X6 : {_q(k8)}, {_q(k9)}\n"
    text += "@fastnodes X6\n"
    return text


def dual_phosphorylation(k1=1, k2=1, k3=1, k4=1, k5=1, k6=1, k7=1, k8=1) -> str:
    """Dual phosphorylation without phosphatase; k1..k6 fast."""
    return (
        "@species X1 X2 X3 X4 X5 X6\n"
        "@fast\n"
        f"X1 + X2 <-> X3 : {_q(k1)}, {_q(k2)}\n"
        f"X3 -> X4 : {_q(k3)}\n"
        f"X4 <-> X1 + X5 : {_q(k4)}, {_q(k5)}\n"
        f"X5 -> X2 : {_q(k6)}\n"
        "@slow\n"
        f"X1 + X5 -> X1 + X6 : {_q(k7)}\n"
        f"X6 -> X5 : {_q(k8)}\n"
    )


def coupled_oscillator(a=-1, b=2, c=-3) -> str:
    """Degenerate normal form x1' = x1 (a x1 + b x2), x2' = c x2 (a x1 + b x2)."""
    return (
        "# a < 0, b > 0, c < 0\n"
        "@generic\n"
        "@vars x1 x2\n"
        "@P\n"
        "x1\n"
        f"{_q(c)}*x2\n"
        "@mu\n"
        f"{_q(a)}*x1 + {_q(b)}*x2\n"
        "@h1\n"
        "x1^3\n"
        "-x2^4\n"
        "@phi\n"
        f"{_q(b)}*v1\n"
        f"{_q(-Fraction(a))}*v1\n"
        "@L\n"
        f"{_q(c)}*x2, -x1\n"
    )


GENERATORS = {
    "example1": example1,
    "example2": example2,
    "example3": example3,
    "two_component": two_component,
    "two_component_no_k8_k9": lambda **k: two_component(with_k8_k9=False, **k),
    "dual_phosphorylation": dual_phosphorylation,
    "coupled_oscillator": coupled_oscillator,
}


def bundled() -> list[str]:
    return sorted(GENERATORS)


def fixture_path(name: str):
    return resources.files(__package__).joinpath(f"{name}.tfr")


def load(name: str, **rates) -> Model:
    """Parse a fixture; with keyword rates the text is regenerated."""
    if rates:
        return parse_model(GENERATORS[name](**rates))
    return parse_model(fixture_path(name).read_text(encoding="utf-8"))
