"""
Attractivity of the critical manifold
=====================================

The nonzero eigenvalues of Dh0 on the manifold are those of
A = Dmu P. Evaluated along Phi(v), A becomes a matrix of rational functions,
and the Routh-Hurwitz determinants of its characteristic polynomial decide
stability without computing eigenvalues.
"""

from fractions import Fraction

from tfreduce import (
    decompose_P_mu,
    find_noninteracting_sets,
    fixtures,
    monomial_parameterization,
    rational_parameterization,
    split_slow_fast,
    stability_analysis,
)
from tfreduce.crn import build_stoich
from tfreduce.exact import format_ratfun
from tfreduce.reduce import eigenvalue_consistency

model = fixtures.load("example1", k1=3, km1=2)
split = split_slow_fast(build_stoich(model), model)
dec = decompose_P_mu(split)
# Phi(v) = (v1, v2, (k1/k-1) v1 v2)
phi = monomial_parameterization((1, 1, Fraction(3, 2)), [[1, 0, 1], [0, 1, 1]], split)

rep = stability_analysis(dec, phi)
print("A(Phi(v)) =", format_ratfun(rep.A_matrix[0, 0]))
print("verdicts:", set(rep.verdicts), "| certificate for all v > 0:", rep.global_certificate)
print("shortcut:", rep.shortcut)

###############################################################################
# Dual phosphorylation has a three-dimensional fast part. The characteristic
# polynomial is lambda^3 + s1 lambda^2 + s2 lambda + s3, and stability needs
# s1 > 0, s1 s2 - s3 > 0 and s3 > 0.

model = fixtures.load("dual_phosphorylation")
split = split_slow_fast(build_stoich(model), model)
dec = decompose_P_mu(split)
phi = rational_parameterization(find_noninteracting_sets(split, model)[-1], split)

rep = stability_analysis(dec, phi, samples=20)
print("method:", rep.method)
for name, c in zip(("s1", "s2", "s3"), rep.char_poly[1:]):
    print(f"  {name} = {format_ratfun(c)}")
print("stable at all 20 samples:", rep.all_stable)
print("all Hurwitz determinants have positive coefficients:", rep.global_certificate)

###############################################################################
# Cross-check against floating point eigenvalues: the spectrum of Dh0 is that
# of A together with s zeros.

ec = eigenvalue_consistency(dec, phi, samples=20)
print("largest deviation:", max(ec.max_deviation))
