# Desk-scale Monte-Carlo study of random covert codebooks.
#
# We draw Bernoulli(alpha) codebooks for the excitation channel, compute the
# warden's exact n-fold average state, and compare it against the innocent
# reference: relative entropy, trace distance, Helstrom error, and the
# soft-covering (resolvability) upper bound on the expected trace distance.
# Doubling the codebook size visibly tightens the approximation.

import math

from covertq import channels as chn
from covertq import covert_sim as cs

gamma = 0.25
quad = chn.build_covert_channel(chn.stinespring_from_kraus(chn.excitation_channel(gamma)))

print("resolvability: mean trace distance vs soft-covering bound (n=8, alpha=0.25)")
for k_total in (16, 64, 256):
    cfg = cs.SimConfig(n=8, gamma=gamma, alpha=0.25, m_size=k_total, l_size=1,
                       seed=0, samples=200)
    mean, rhs, holds = cs.resolvability_experiment(cfg, quad)
    print(f"  K={k_total:4d}: mean={mean:.4f}  bound={rhs:.4f}  holds={holds}")

print()
print("covertness report for one seeded codebook (n=8, 16 messages x 4 bins)")
cfg = cs.SimConfig(n=8, gamma=gamma, alpha=0.25, m_size=16, l_size=4, seed=1)
cb = cs.sample_codebook(cfg)
rep = cs.covertness_report(cb, quad, cfg)
print(f"  D(average || innocent)   = {rep.dCovert:.5f}")
print(f"  trace dist to mixed ref  = {rep.traceDistToMixed:.5f}")
print(f"  Helstrom error           = {rep.helstromError:.5f} (chance = 0.5)")
print(f"  Pinsker lower bound      = {rep.pinskerLowerBound:.5f}")

print()
print("square-root-measurement decoder on the same codebook")
small = cs.SimConfig(n=6, gamma=gamma, alpha=0.3, m_size=4, l_size=2, seed=3)
dec = cs.sqrt_measurement_decoder(cs.sample_codebook(small), quad, small)
print(f"  average error = {dec.averageError:.5f}, max error = {dec.maxError:.5f}")

# the scaled divergence n * D(omega_alpha || omega0) with alpha = g / sqrt(n)
# approaches g^2 chi^2 / 2, the square-root-law constant
print()
g = 0.7
values, target = cs.covertness_scaling(quad, g, [16, 36, 64, 100, 144])
print(f"quadratic limit g^2 chi^2 / 2 = {target:.5f} (g = {g})")
for n, v in values:
    print(f"  n={n:4d}: n*D = {v:.5f}  rel dev = {abs(v - target) / target:.4f}")
