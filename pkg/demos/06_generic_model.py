"""
A polynomial system that is not a reaction network
==================================================

The fast part only needs to factor as h0 = P mu. Here P depends on x, the
manifold is the line a x1 + b x2 = 0, and the reduction uses a matrix L with
L P = 0 supplied in the model file.
"""

import io
from contextlib import redirect_stdout

from tfreduce import (
    compute_R_via_L,
    decompose_P_mu,
    parse_model,
    reduced_system,
    stability_analysis,
    user_parameterization,
)
from tfreduce.cli import main
from tfreduce.exact import format_ratfun

text = """
@generic
@vars x1 x2
@P
x1
-3*x2
@mu
-x1 + 2*x2
@h1
x1^3
-x2^4
@phi
2*v1
v1
@L
-3*x2, -x1
"""
model = parse_model(text)
phi = user_parameterization(model.phi)
dec = decompose_P_mu(model)

R = compute_R_via_L(phi, model.L)
rs = reduced_system(phi, R, model, "via_L")
print("v1' =", rs.rhs_strings()[0])

# A = Dmu P restricted to the manifold; negative for v1 > 0
rep = stability_analysis(dec, phi)
print("A =", format_ratfun(rep.A_matrix[0, 0]), "| stable:", rep.all_stable)

###############################################################################
# The same reduction from the command line. ``fixture:NAME`` loads a bundled
# model; a path to a .tfr file works the same way.

buf = io.StringIO()
with redirect_stdout(buf):
    code = main(["reduce", "fixture:coupled_oscillator"])
print("exit code", code)
print(buf.getvalue()[:400])
