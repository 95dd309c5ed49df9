"""Non-uniform arrival times: what matters is the size of a high-probability
set of arrival times, not the entropy.

A spike mixture sends the message at time 1 half of the time and uniformly
over 2**(beta B) slots otherwise. Its entropy per bit is only about beta / 2,
but the effective timing uncertainty it imposes on the receiver is the full
beta, because half the mass is spread over the whole window.

Run:  python3 demos/arrival_models.py
"""
from asynccpuc import ArrivalModel, async_cpuc, beta_bar, bsc, smallest_covering_set_size

Bs = [8, 12, 16, 20]
channel = bsc(0.1, cost=(0.0, 1.0))
models = {
    "uniform beta=1": ArrivalModel("uniform", {"beta": 1.0}),
    "spike beta=1": ArrivalModel("spike_mixture", {"beta": 1.0}),
    "geometric mean 2^B": ArrivalModel("geometric", {"beta": 1.0}),
    "point mass": ArrivalModel("point_mass", {"t": 1}),
}

print(f"{'model':>20} {'beta_bar':>9} {'H/B at B=20':>12} {'capacity':>9}")
for name, model in models.items():
    est = beta_bar(model, Bs)
    cap = async_cpuc(channel, est.value).value
    print(f"{name:>20} {est.value:9.4f} {est.normalized_entropy[-1]:12.4f} {cap:9.5f}")

print("\nSpike mixture, B = 12: covering-set size against the allowed miss probability")
spike = ArrivalModel("spike_mixture", {"beta": 1.0}, B=12)
for eps in (0.6, 0.5, 0.4, 0.1, 0.01):
    print(f"  eps={eps:<5} S={smallest_covering_set_size(spike, eps)}")
print("Below eps = 1/2 the set must reach into the uniform part and grows like 2**B.")
