"""
Structure of a slow-fast reaction network
=========================================

Parse a network from text, look at its stoichiometry and ask the
deficiency/weak-reversibility questions that decide which
parameterization of the critical manifold is available.
"""

from tfreduce import (
    analyze_structure,
    build_stoich,
    fixtures,
    parse_model,
    split_slow_fast,
)
from tfreduce.crn import fast_graph

# Two linked binding steps are fast; the exchange X1 + X3 <-> 2 X2 is slow.
text = """
@species X1 X2 X3
@fast
X1 + X2 <-> X3 : 3, 2
@slow
X1 + X3 <-> 2 X2 : 1, 1/2
"""
model = parse_model(text)

sd = build_stoich(model)
print("N =", sd.N)
print("Y =", sd.Y)

split = split_slow_fast(sd, model)
print("fast part N_f =", split.N_f)

# s = n - rank N_f is the dimension of the critical manifold
st = analyze_structure(model)
print(f"n = {st.n}, r = {st.r}, s = {st.s}")
print("deficiency of the fast subnetwork:", st.deficiency_fast)
print("weakly reversible:", st.weakly_reversible_fast)
print("conservation laws:", st.conservation_laws)

g = fast_graph(model, split)
print("fast complexes:", [c.format(model.names) for c in g.nodes])
print("linkage classes:", g.linkage_classes)

###############################################################################
# The bundled dual phosphorylation network is the standard counter-example:
# its fast part is not weakly reversible and has deficiency one.

dp = analyze_structure(fixtures.load("dual_phosphorylation"))
print("dual phosphorylation: deficiency", dp.deficiency_fast, "weakly reversible", dp.weakly_reversible_fast)
