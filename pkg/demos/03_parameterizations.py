"""
Two ways to parameterize the critical manifold
==============================================

A non-interacting species set can be eliminated rationally from the fast
steady-state equations. When the fast part is weakly reversible with
deficiency zero, complex-balanced states give a monomial parameterization
x = x* o v^L instead. Both routes are shown on the two-component network.
"""

from tfreduce import (
    complex_balanced_reduced,
    complex_balanced_state,
    compute_R_graph_case,
    decompose_P_mu,
    find_noninteracting_sets,
    fixtures,
    left_kernel_basis,
    monomial_parameterization,
    rational_parameterization,
    reduced_system,
    split_slow_fast,
    verify_parameterization,
)
from tfreduce.crn import build_stoich

rates = dict(k1=2, k2=3, k3=5, k4=7, k5=11, k6=13, k7=1, k8=2, k9=3)
model = fixtures.load("two_component", **rates)
split = split_slow_fast(build_stoich(model), model)
dec = decompose_P_mu(split)
names = model.names

sets = find_noninteracting_sets(split, model)
print("eliminable species sets:", [[names[i] for i in s.indices] for s in sets])

###############################################################################
# Rational elimination of the first set.

phi = rational_parameterization(sets[0], split)
print("Phi =", phi.strings())
print("on the manifold, full rank, positive:", verify_parameterization(phi, split).passed)
R, qss = compute_R_graph_case(phi, dec)
rs = reduced_system(phi, R, dec)
for i, line in enumerate(rs.rhs_strings(), 1):
    print(f"v{i}' = {line}")

###############################################################################
# Complex balancing. The state x* is found exactly from the spanning-tree
# constants of each linkage class, and the rows of L_f span the left kernel
# of the fast stoichiometric matrix.

cb = complex_balanced_state(split)
print("x* =", [str(a) for a in cb.x], "exact" if cb.exact else "numeric")
Lf = left_kernel_basis(split.N_f)
mono = monomial_parameterization(cb.x, Lf, split)
print("Phi =", mono.strings())

cf = complex_balanced_reduced(mono, Lf, split)
for i, line in enumerate(cf.rhs_strings(), 1):
    print(f"v{i}' = {line}")

###############################################################################
# Without an exact candidate the balanced state comes from a damped Newton
# iteration in log coordinates. Its floats enter Phi as exact binary rationals.

approx = complex_balanced_state(split, hint=(1, 1, 1, 1, 1, 1), search_exact=False)
print("Newton x* =", [f"{a:.12g}" for a in approx.x], "residual", approx.residual)
