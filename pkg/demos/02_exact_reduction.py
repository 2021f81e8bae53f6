"""
Exact reduction onto a parameterized critical manifold
======================================================

For the fast binding X1 + X2 <-> X3 the critical manifold is
x3 = K x1 x2 with K = k1/k-1. Taking v = (x1, x2) as coordinates,
the reduced system is v' = R(v) h1(Phi(v)), where R is the left inverse
of DPhi that annihilates the fast direction P.
"""

from fractions import Fraction

from tfreduce import (
    compute_R_general,
    compute_R_via_L,
    decompose_P_mu,
    fixtures,
    monomial_parameterization,
    reduced_system,
    split_slow_fast,
)
from tfreduce.crn import build_stoich
from tfreduce.exact import format_ratfun
from tfreduce.manifold import dphi

model = fixtures.load("example1", k1=3, km1=2, k2=5, km2=7)
split = split_slow_fast(build_stoich(model), model)

# h0 = P mu with P = (1, 1, -1)^T and mu = k-1 x3 - k1 x1 x2
dec = decompose_P_mu(split)
print("P =", [str(row[0]) for row in dec.P_rational()])

K = Fraction(3, 2)
phi = monomial_parameterization((1, 1, K), [[1, 0, 1], [0, 1, 1]], split)
print("Phi(v) =", phi.strings())

###############################################################################
# R can be obtained in two ways: from the block system R (DPhi | P) = (I | 0),
# or as (L* DPhi)^-1 L* for a matrix L whose rows annihilate P.

R = compute_R_general(phi, dec)
R_L = compute_R_via_L(phi, [[1, 0, 1], [0, 1, 1]])
print("paths agree:", R == R_L)
for row in R.rows:
    print("  ", [format_ratfun(e) for e in row])

# R DPhi = I holds identically in v
print("R DPhi = I:", R @ dphi(phi) == type(R).identity(2, phi.field))

rs = reduced_system(phi, R, dec)
for i, line in enumerate(rs.rhs_strings(), 1):
    print(f"v{i}' = {line}")

###############################################################################
# Reduced systems are exact rational functions, so evaluating them at a
# rational point gives an exact rational number.

print("rhs at v = (2, 1):", [str(a) for a in rs.evaluate((2, 1))])

###############################################################################
# Conservation laws of the full network carry over: x1 + 2 x2 + 3 x3 becomes
# a first integral of the reduced flow.

print("first integrals:", [format_ratfun(f) for f in rs.first_integrals])
