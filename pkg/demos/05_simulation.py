"""
Full system against the reduced system
======================================

Integrate x' = h0(x) + eps h1(x) for a ladder of eps and compare with the
reduced flow on the manifold. Time is rescaled to tau = eps t, so all runs
cover the same slow interval. Away from the initial layer the gap should
shrink roughly in proportion to eps.
"""

import numpy as np

from tfreduce import convergence_study, fixtures, integrate_full, integrate_reduced
from tfreduce.cli import reduce_model
from tfreduce.sim import manifold_residual

model = fixtures.load("example1")
red = reduce_model(model)
print("parameterization:", red.label)

# slow trajectory from v0 = (2, 1), lifted to x = Phi(v)
tr = integrate_reduced(red.rsys, [2.0, 1.0], tau_end=5.0, points=6)
for tau, x in zip(tr.times, tr.x):
    print(f"tau = {tau:3.1f}  x = {np.array2string(x, precision=4)}")
print("max distance from the manifold:", manifold_residual(model.h0(), tr.x).max())

###############################################################################
# One full run: it starts on the manifold and stays within O(eps) of it.

full = integrate_full(model, 0.01, tr.x[0], t_end_slow=5.0, points=6)
print("full run at eps = 0.01, final state:", np.array2string(full.states[-1], precision=4))

###############################################################################
# The error ladder. Each halving of eps should roughly halve the error.

cr = convergence_study(model, red.rsys, [2.0, 1.0], eps_ladder=[0.04, 0.02, 0.01, 0.005], tau_window=(0.1, 5.0))
for eps, err in zip(cr.eps_ladder, cr.errors):
    print(f"eps = {eps:<6} sup error = {err:.3e}")
print("ratios:", [round(q, 3) for q in cr.ratios], "monotone:", cr.monotone)

###############################################################################
# Starting off the manifold adds a fast transient. The reduced flow then has
# to start from where the fast flow (eps = 0) lands, not from the projection.

x0 = np.array([2.0, 1.0, 2.5])
landing = integrate_full(model, 0, x0, t_end_fast=100).states[-1]
off = convergence_study(model, red.rsys, landing[:2], tau_window=(0.1, 5.0), x0=x0)
print("off-manifold ratios:", [round(q, 3) for q in off.ratios])
