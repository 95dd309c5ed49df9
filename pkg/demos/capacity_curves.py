"""How much timing uncertainty costs, in bits per unit cost.

Two binary channels share the same crossover noise (0.1) but differ in what
silence costs. When the idle symbol is free, the capacity per unit cost falls
exactly as 1/(1 + beta): the timing term always binds. When every symbol costs
the same, the synchronous rate survives small beta untouched and only beyond
a threshold does the timing term take over.

Run:  python3 demos/capacity_curves.py
"""
import math

from asynccpuc import GaussianChannel, async_cpuc, bsc, gaussian_cpuc, sync_cpuc

free_idle = bsc(0.1, cost=(0.0, 1.0))
flat_cost = bsc(0.1, cost=(1.0, 1.0))

print("BSC(0.1), idle symbol free vs. both symbols costing 1\n")
print(f"{'beta':>6} {'free idle':>10} {'binding':>16} {'flat cost':>10} {'binding':>16}")
for beta in (0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0):
    a = async_cpuc(free_idle, beta)
    b = async_cpuc(flat_cost, beta)
    print(f"{beta:6.2f} {a.value:10.6f} {a.binding_term:>16} {b.value:10.6f} {b.binding_term:>16}")

print(f"\nsynchronous, flat cost (Shannon capacity): {sync_cpuc(flat_cost).value:.6f}")
print("free idle: the optimum is approached, not attained, as the idle symbol "
      "takes all the mass")

# where the flat-cost curve leaves the synchronous value
lo, hi, sync = 0.0, 8.0, sync_cpuc(flat_cost).value
while hi - lo > 1e-4:
    mid = (lo + hi) / 2
    lo, hi = (mid, hi) if async_cpuc(flat_cost, mid).value >= sync - 1e-7 else (lo, mid)
print(f"flat cost: timing starts to bind near beta = {lo:.4f}")

print("\nGaussian channel, quadratic cost, N0 = 1")
for beta in (0.0, 1.0, 3.0):
    print(f"  beta={beta}: {gaussian_cpuc(GaussianChannel(1.0), beta):.6f} "
          f"(log2 e = {math.log2(math.e):.6f})")
