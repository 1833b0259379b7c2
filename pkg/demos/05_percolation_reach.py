#!/usr/bin/env python3
"""Disagreement percolation: open each vertex with probability tanh(beta d).

High-temperature uniqueness reduces to this site-percolation model not
percolating.  The finite stand-in for "no infinite open path" is the decay,
in the depth N, of the probability that the root's open cluster reaches
level N on a fresh random triangulation.  Shared uniforms couple the beta
values within each trial, so the curves below are exactly monotone.
"""

from cdt_ising.percolation import annealed_reach_curve, annealed_reach_probability

BETAS = [0.02, 0.05, 0.08, 0.12, 0.2]
TRIALS = 1500

print(f"annealed reach curves, {TRIALS} trials per depth (coupled across beta):\n")
header = f"{'depth':>6}" + "".join(f"  beta={b:<6}" for b in BETAS)
print(header)
for depth in (5, 10, 20):
    row = annealed_reach_curve(depth, BETAS, TRIALS, seed=1234)
    cells = "".join(f"  {e.estimate:<11.4f}" for e in row)
    print(f"{depth:>6}{cells}")

print("\nat beta = 0.05 the decay in depth is already crisp:")
for depth in (10, 20, 30):
    est = annealed_reach_probability(depth, 0.05, 2000, seed=99)
    print(f"  depth {depth:>2}: reach probability {est.estimate:.4f} +- {est.stderr:.4f}")

print("\nbelow beta ~ 0.03 the root itself is almost never open (its degree is")
print("typically ~6 and tanh(0.03*6) ~ 0.18), so reach events at depth 10+ are")
print("too rare to measure directly; the coupled curves still show the decay.")
