"""Error probability of the random constant-composition code with the
sequential typicality decoder, as the rate moves through the achievability
condition B / N <= min{I, (I + D)/(1 + beta)}.

The asymptotic picture is a sharp transition at rho = 1. At B = 8 the picture
is blurred: with only 8 bits, a code at half the rate limit is still far from
reliable under this decoder. The second half of this script shows why, by
scanning the decoder threshold and by comparing against a maximum-likelihood
decoder that is told the exact start time. Neither reaches the small-error
regime at this message length.

Run:  python3 demos/phase_transition.py [trials]
"""
import sys

import numpy as np

from asynccpuc import CodeSpec, bsc, estimate, generate_codebook, per_symbol_rate, sweep_rate
from asynccpuc.coding import DecoderConfig
from asynccpuc.simulator import blocklength, output_stream, rate_composition, rows_to_csv

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 5000
channel = bsc(0.1, cost=(0.0, 1.0))
beta, B = 0.25, 8

p = rate_composition(channel, beta)
rate = per_symbol_rate(p, channel, beta)
print(f"composition {p}, per-symbol rate limit {rate:.4f} bits\n")

rows = sweep_rate(channel, beta, B, [0.25, 0.5, 0.75, 1.0, 1.5], trials, seed=0)
print(rows_to_csv(rows))

N = blocklength(B, 0.5, rate)
spec = CodeSpec(B=B, N=N, beta=beta, composition=p, seed=0)
cb = generate_codebook(spec, channel)

print(f"threshold scan at rho = 0.5 (N = {N}, default threshold {cb.threshold:.3f})")
for thr in (0.12, 0.16, 0.20, 0.24, 0.30):
    est = estimate(cb, channel, spec, trials, seed=1, config=DecoderConfig(thr, N))
    print(f"  threshold {thr:.2f}: max error {est.max_error:.3f}, mean {est.mean_error:.3f}")

# maximum likelihood with the start time revealed: a yardstick no causal
# decoder without timing information can beat
rng = np.random.default_rng(2)
logq = np.log(channel.Q)
errors = np.zeros(cb.M)
per_message = max(1, trials // cb.M)
for m in range(cb.M):
    for _ in range(per_message):
        y = np.fromiter(output_stream(cb.codewords[m], 1, channel, N, rng), dtype=int)
        scores = logq[cb.codewords, y[None, :]].sum(axis=1)
        best = np.flatnonzero(scores == scores.max())
        errors[m] += rng.choice(best) != m
errors /= per_message
print(f"\nstart-time-aware maximum likelihood, {per_message} trials per message: "
      f"max error {errors.max():.3f}, mean {errors.mean():.3f}")
