"""Arrival-time laws for the message and the effective timing uncertainty
``beta_bar = inf lim log2 S(eps_B) / B``, where ``S(eps)`` is the size of the
smallest set of arrival times carrying probability at least ``1 - eps``.

Structured families scale with the number of bits ``B`` and have closed-form
covering sizes and entropies, so ``B`` up to a few dozen costs nothing. The
``explicit`` family holds an arbitrary probability list and uses the greedy
count directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NonConvergentSequence

FAMILIES = ("uniform", "geometric", "spike_mixture", "point_mass", "explicit")
_SUM_TOL = 1e-12
# geometric laws are truncated at this many means
GEOMETRIC_SPAN = 64


def greedy_covering_size(probs, epsilon: float) -> int:
    """Fewest atoms whose total mass is at least 1 - epsilon (largest first)."""
    if not 0 <= epsilon < 1:
        raise ValueError(f"epsilon must lie in [0, 1), got {epsilon!r}")
    p = np.sort(np.asarray(probs, dtype=float))[::-1]
    if epsilon == 0:
        # every atom counts, however small; the rounding slack below would drop tails
        return max(1, int(np.count_nonzero(p)))
    acc = np.cumsum(p)
    need = 1.0 - epsilon - _SUM_TOL
    return int(np.searchsorted(acc, need, side="left")) + 1


@dataclass(frozen=True)
class ArrivalModel:
    """A family of arrival laws indexed by the number of bits ``B``.

    Parameters per family:

    - ``uniform``: ``beta`` (A = 2**(beta B)) or a fixed ``A``
    - ``geometric``: ``beta`` (success probability 2**-(beta B), truncated at
      ``GEOMETRIC_SPAN`` means) or fixed ``q`` and ``A_max``
    - ``spike_mixture``: ``beta``; time 1 w.p. 1/2, else uniform on
      ``2..A+1`` with ``A = 2**(beta B)``
    - ``point_mass``: ``t``
    - ``explicit``: ``probs`` (times 1..len(probs))
    """

    family: str
    params: dict = field(default_factory=dict)
    B: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown arrival family {self.family!r}")
        if self.family == "explicit":
            p = np.asarray(self.params["probs"], dtype=float)
            if np.any(p < 0) or abs(math.fsum(p) - 1) > _SUM_TOL:
                raise ValueError("explicit arrival probabilities must sum to 1")

    def with_bits(self, B: int) -> "ArrivalModel":
        return replace(self, B=B)

    @classmethod
    def from_dict(cls, spec: dict, B: int = 1) -> "ArrivalModel":
        spec = dict(spec)
        family = spec.pop("family")
        B = int(spec.pop("B", B))
        return cls(family, spec, B)

    # -- sizes -------------------------------------------------------------

    def _A(self) -> int:
        if "A" in self.params:
            return int(self.params["A"])
        return max(1, round(2 ** (self.params["beta"] * self.B)))

    def _geometric(self) -> tuple[float, int]:
        if "q" in self.params:
            return float(self.params["q"]), int(self.params["A_max"])
        mean = 2 ** (self.params["beta"] * self.B)
        return 1.0 / mean, max(1, round(GEOMETRIC_SPAN * mean))

    @property
    def support_size(self) -> int:
        fam = self.family
        if fam == "uniform":
            return self._A()
        if fam == "geometric":
            return self._geometric()[1]
        if fam == "spike_mixture":
            return self._A() + 1
        if fam == "point_mass":
            return int(self.params.get("t", 1))
        return len(self.params["probs"])

    def pmf(self) -> np.ndarray:
        """Probabilities of times 1..support_size (materialised; keep it small)."""
        fam = self.family
        n = self.support_size
        if fam == "uniform":
            return np.full(n, 1.0 / n)
        if fam == "geometric":
            q, n = self._geometric()
            logp = np.arange(n) * math.log1p(-q)
            p = np.exp(logp)
            return p / p.sum()
        if fam == "spike_mixture":
            A = self._A()
            p = np.full(A + 1, 0.5 / A)
            p[0] = 0.5
            return p
        if fam == "point_mass":
            p = np.zeros(n)
            p[-1] = 1.0
            return p
        return np.asarray(self.params["probs"], dtype=float)

    def sample(self, rng: np.random.Generator) -> int:
        fam = self.family
        if fam == "uniform":
            return int(rng.integers(1, self._A() + 1))
        if fam == "geometric":
            q, n = self._geometric()
            while True:
                t = int(rng.geometric(q))
                if t <= n:
                    return t
        if fam == "spike_mixture":
            if rng.random() < 0.5:
                return 1
            return int(rng.integers(2, self._A() + 2))
        if fam == "point_mass":
            return int(self.params.get("t", 1))
        p = self.pmf()
        return int(rng.choice(p.size, p=p)) + 1

    def entropy(self) -> float:
        fam = self.family
        if fam == "uniform":
            return math.log2(self._A())
        if fam == "spike_mixture":
            return 1.0 + 0.5 * math.log2(self._A())
        if fam == "point_mass":
            return 0.0
        if fam == "geometric":
            q, n = self._geometric()
            r = 1.0 - q
            rn = r ** n
            z = 1.0 - rn
            # mean of (t - 1) under the truncated law
            mean = r / q - n * rn / z
            return -(math.log2(q / z) + mean * math.log2(r))
        p = self.pmf()
        p = p[p > 0]
        return float(-np.sum(p * np.log2(p)))

    def covering_set(self, epsilon: float) -> np.ndarray:
        """Times of a smallest set with probability >= 1 - epsilon."""
        p = self.pmf()
        order = np.argsort(-p, kind="stable")
        return np.sort(order[:smallest_covering_set_size(self, epsilon)] + 1)


def smallest_covering_set_size(model: ArrivalModel, epsilon: float) -> int:
    """Size of the smallest set of arrival times with probability >= 1 - eps.

    Taking atoms in decreasing order of probability is optimal; the structured
    families evaluate that greedy count in closed form.
    """
    if not 0 <= epsilon < 1:
        raise ValueError(f"epsilon must lie in [0, 1), got {epsilon!r}")
    fam = model.family
    need = 1.0 - epsilon
    if fam == "uniform":
        A = model._A()
        return max(1, math.ceil(need * A - _SUM_TOL * A))
    if fam == "spike_mixture":
        A = model._A()
        if need <= 0.5 + _SUM_TOL:
            return 1
        return 1 + math.ceil((need - 0.5) * 2 * A - _SUM_TOL * A)
    if fam == "point_mass":
        return 1
    if fam == "geometric":
        q, n = model._geometric()
        z = -math.expm1(n * math.log1p(-q))
        # smallest k with (1 - (1-q)**k) / z >= need
        target = need * z
        if target >= 1.0:
            return n
        k = math.ceil(math.log1p(-target) / math.log1p(-q) - 1e-9)
        return int(min(max(k, 1), n))
    return greedy_covering_size(model.pmf(), epsilon)


SCHEDULES = {
    "1/B": lambda B: 1.0 / B,
    "2^-sqrt(B)": lambda B: 2.0 ** (-math.sqrt(B)),
    "log(B)/B": lambda B: math.log2(B) / B,
}


@dataclass
class BetaBarEstimate:
    value: float
    residual: float
    schedule: str
    per_schedule: dict
    sequences: dict
    normalized_entropy: list


def _extrapolate(Bs, logs):
    """Second-order Richardson: fit ``log2 S = b B + c1 + c2 / B`` through each
    run of three consecutive B values and keep the slope ``b``. This removes
    both the constant offset and the leading 1/B drift of ``log2 S / B``."""
    out = []
    for i in range(len(Bs) - 2):
        b = np.asarray(Bs[i:i + 3], dtype=float)
        design = np.column_stack([b, np.ones(3), 1.0 / b])
        out.append(float(np.linalg.solve(design, np.asarray(logs[i:i + 3]))[0]))
    return out


def beta_bar(model: ArrivalModel, Bs, schedules=None, tol: float = 0.05) -> BetaBarEstimate:
    """Estimate beta_bar from covering-set sizes at the given B values.

    For each vanishing schedule eps_B the sequence log2 S(eps_B) / B is
    extrapolated; the reported value is the smallest limit over schedules.
    Raises NonConvergentSequence when the last two extrapolated values of the
    winning schedule differ by more than ``tol``.
    """
    Bs = [int(b) for b in Bs]
    if len(Bs) < 4 or any(b2 <= b1 for b1, b2 in zip(Bs, Bs[1:])):
        raise ValueError("need at least four increasing B values")
    names = list(SCHEDULES) if schedules is None else list(schedules)
    per, seqs, resid = {}, {}, {}
    for name in names:
        eps = SCHEDULES[name]
        logs = []
        for B in Bs:
            e = min(max(eps(B), 0.0), 1.0 - 1e-12)
            logs.append(math.log2(smallest_covering_set_size(model.with_bits(B), e)))
        ext = _extrapolate(Bs, logs)
        seqs[name] = [l / B for l, B in zip(logs, Bs)]
        per[name] = ext[-1]
        resid[name] = abs(ext[-1] - ext[-2])
    best = min(names, key=lambda s: per[s])
    if resid[best] > tol:
        raise NonConvergentSequence(
            f"schedule {best}: successive estimates differ by {resid[best]:.3g} > {tol}")
    hs = [model.with_bits(B).entropy() / B for B in Bs]
    return BetaBarEstimate(max(per[best], 0.0), resid[best], best, per, seqs, hs)


def effective_capacity(channel, model: ArrivalModel, Bs, **solver_kwargs):
    """Asynchronous capacity per unit cost at the estimated beta_bar."""
    from .capacity import async_cpuc

    return async_cpuc(channel, beta_bar(model, Bs).value, **solver_kwargs)
