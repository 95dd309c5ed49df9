"""Synchronous and asynchronous capacity per unit cost.

The asynchronous value at timing uncertainty ``beta`` is

    C(beta) = max_P min{ I / E[k],  (I + D(Y||Y_star)) / (E[k] (1 + beta)) }

with the numerator of the second term equal to ``sum_x P(x) f(x)``,
``f(x) = D(Q(.|x) || Q(.|star))``. Both ratios are quasiconcave in P, so the
max-min is found by bisection on the level ``lam``: a level is feasible when
some P satisfies ``I - lam E[k] > 0`` and ``E[f] - lam (1 + beta) E[k] > 0``,
and that test is a concave program.

When zero-cost inputs exist the supremum may only be approached as
``E[k] -> 0``. That boundary limit has a closed form and is computed exactly;
the bisection then only has to decide whether some interior P beats it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .channel import Channel, GaussianChannel, detect_infinite_cpuc, validate
from .errors import (AllCostsInfinite, DeltaOutOfRange, NonConvergence,
                     StarNotUsableOrCostly)
from .info import divergence_sum_identity, mutual_information, row_divergences

MUTUAL_INFO = "mutual_info_term"
TIMING = "timing_term"
BOTH = "both"

LOG2E = math.log2(math.e)
# weight on the informative symbol when the optimum is only a limit
BOUNDARY_WEIGHT = 1e-6


@dataclass
class CapacityResult:
    value: float
    optimizer: np.ndarray
    binding_term: str
    iterations: int = 0
    residual: float = 0.0
    attained: bool = True
    argmax_symbol: int | None = None

    def __float__(self):
        return float(self.value)


def rate_terms(p, channel: Channel, beta: float = 0.0) -> tuple[float, float]:
    """The two per-symbol rate terms ``I`` and ``(I + D(Y||Y_star)) / (1+beta)``."""
    i = mutual_information(p, channel)
    return i, divergence_sum_identity(p, channel) / (1 + beta)


def per_symbol_rate(p, channel: Channel, beta: float = 0.0) -> float:
    """min{I, (I + D)/(1 + beta)}: the largest B/N the random-coding scheme
    supports with composition ``p``."""
    return min(rate_terms(p, channel, beta))


def ratio_terms(p, channel: Channel, beta: float = 0.0) -> tuple[float, float]:
    """The two terms of the max-min objective evaluated at ``p``."""
    p = np.asarray(p, dtype=float)
    k = float(p[p > 0] @ channel.cost[p > 0])
    i, g = rate_terms(p, channel, beta)
    if k == 0:
        return (math.inf if i > 0 else 0.0), (math.inf if g > 0 else 0.0)
    return i / k, g / k


def _binding(a: float, b: float) -> str:
    if a == b or (math.isfinite(a) and math.isfinite(b)
                  and abs(a - b) <= 1e-9 * max(1.0, abs(a))):
        return BOTH
    return MUTUAL_INFO if a < b else TIMING


def _two_point(n: int, base: int, other: int, weight: float = BOUNDARY_WEIGHT) -> np.ndarray:
    p = np.zeros(n)
    p[base] = 1 - weight
    p[other] += weight
    return p


def _argmax(values: np.ndarray, candidates: np.ndarray) -> int:
    # lowest index wins ties
    idx = np.flatnonzero(candidates)
    return int(idx[np.argmax(values[idx])])


class _LevelProblem:
    """Concave feasibility test at a fixed level ``lam``, on the usable support."""

    def __init__(self, channel: Channel, support: np.ndarray, beta: float | None):
        self.Q = channel.Q[support]
        self.k = channel.cost[support]
        self.f = row_divergences(self.Q, channel.star_row) if beta is not None else None
        self.beta = beta
        self.n = int(support.sum())

    def info(self, p):
        py = p @ self.Q
        d = row_divergences(self.Q, np.maximum(py, 1e-300))
        return float(p @ d), d

    def slack(self, p, lam):
        i, _ = self.info(p)
        k = float(p @ self.k)
        s = i - lam * k
        if self.beta is not None:
            s = min(s, float(p @ self.f) - lam * (1 + self.beta) * k)
        return s

    def solve(self, lam, starts):
        n = self.n

        def obj(z):
            return -z[-1]

        def obj_grad(z):
            g = np.zeros(n + 1)
            g[-1] = -1.0
            return g

        def c_info(z):
            p = z[:n]
            i, _ = self.info(p)
            return i - lam * (p @ self.k) - z[-1]

        def c_info_grad(z):
            p = z[:n]
            _, d = self.info(p)
            d = np.where(np.isfinite(d), d, 1e6)
            return np.append(d - LOG2E - lam * self.k, -1.0)

        cons = [{"type": "ineq", "fun": c_info, "jac": c_info_grad},
                {"type": "eq", "fun": lambda z: np.sum(z[:n]) - 1.0,
                 "jac": lambda z: np.append(np.ones(n), 0.0)}]
        if self.beta is not None:
            lin = self.f - lam * (1 + self.beta) * self.k
            cons.append({"type": "ineq", "fun": lambda z: z[:n] @ lin - z[-1],
                         "jac": lambda z: np.append(lin, -1.0)})
        bounds = [(0.0, 1.0)] * n + [(None, None)]

        best_s, best_p = -math.inf, None
        for p0 in starts:
            z0 = np.append(p0, self.slack(p0, lam))
            try:
                res = minimize(obj, z0, jac=obj_grad, constraints=cons, bounds=bounds,
                               method="SLSQP", options={"maxiter": 300, "ftol": 1e-14})
                p = np.clip(res.x[:n], 0.0, None)
            except (ValueError, FloatingPointError):
                continue
            if not p.sum() > 0:
                continue
            p = p / p.sum()
            # certify on the projected point rather than trusting the solver's t
            s = self.slack(p, lam)
            if s > best_s:
                best_s, best_p = s, p
        return best_s, best_p


def _solve(channel: Channel, beta: float | None, tol: float, max_iter: int,
           restarts: int, seed: int) -> CapacityResult:
    validate(channel)
    usable = channel.usable
    n = channel.n_inputs
    if not usable.any():
        raise AllCostsInfinite("no usable input has finite cost")

    cost = channel.cost
    zero = usable & (cost == 0)
    pos = usable & (cost > 0)

    if detect_infinite_cpuc(channel):
        a, b = np.flatnonzero(zero)[:2]
        p = np.zeros(n)
        p[[a, b]] = 0.5
        return CapacityResult(math.inf, p, BOTH)

    if beta is not None:
        f = row_divergences(channel.Q, channel.star_row)
        if np.any(usable & np.isinf(f)):
            # any mass on such a symbol makes the timing term infinite, so the
            # supremum coincides with the synchronous one
            res = _solve(channel, None, tol, max_iter, restarts, seed)
            res.binding_term = MUTUAL_INFO
            return res

    # boundary limit E[k] -> 0 along directions leaving a zero-cost symbol
    lo, lo_p, lo_binding, lo_arg = 0.0, None, MUTUAL_INFO, None
    if zero.any() and pos.any():
        z0 = int(np.flatnonzero(zero)[0])
        d0 = row_divergences(channel.Q, channel.Q[z0])
        ratio = np.where(pos, d0 / np.where(pos, cost, 1.0), -math.inf)
        if beta is not None and row_divergences(channel.Q[[z0]], channel.star_row)[0] == 0:
            # zero-cost row equals the noise row: both terms share the limit
            # sum R f / sum R k, the timing one divided by 1 + beta
            a = _argmax(ratio, pos)
            lo = ratio[a] / (1 + beta)
            lo_binding = BOTH if beta == 0 else TIMING
        else:
            a = _argmax(ratio, pos)
            lo = ratio[a]
            lo_binding = MUTUAL_INFO
        lo_p, lo_arg = _two_point(n, z0, a), a
        if math.isinf(lo):
            return CapacityResult(math.inf, lo_p, lo_binding, attained=False, argmax_symbol=a)

    if not pos.any():
        z0 = int(np.flatnonzero(usable)[0])
        p = np.zeros(n)
        p[z0] = 1.0
        return CapacityResult(0.0, p, BOTH)

    # upper bound on the level
    n_rows = len({tuple(r) for r in channel.Q[usable]})
    if n_rows <= 1:
        p = np.zeros(n)
        p[np.flatnonzero(usable)[0]] = 1.0
        return CapacityResult(0.0, p, BOTH)
    if zero.any():
        hi = float(np.max(row_divergences(channel.Q[pos], channel.Q[np.flatnonzero(zero)[0]])
                          / cost[pos]))
    else:
        hi = min(math.log2(n_rows), math.log2(channel.n_outputs)) / float(cost[pos].min())
        if beta is not None:
            f = row_divergences(channel.Q, channel.star_row)
            hi = min(hi, float(np.max(f[usable] / cost[usable])) / (1 + beta))
    hi = max(hi, lo)

    prob = _LevelProblem(channel, usable, beta)
    rng = np.random.default_rng(seed)
    m = prob.n
    fixed_starts = [np.full(m, 1.0 / m)] + [rng.dirichlet(np.ones(m)) for _ in range(restarts)]

    best_p = None
    it = 0
    while hi - lo > tol and it < max_iter:
        it += 1
        lam = 0.5 * (lo + hi)
        starts = list(fixed_starts)
        if best_p is not None:
            starts.insert(0, best_p)
        s, p = prob.solve(lam, starts)
        k = float(p @ prob.k) if p is not None else 0.0
        if p is not None and s > 0 and k > 0:
            full = np.zeros(n)
            full[usable] = p
            a, b = ratio_terms(full, channel, beta if beta is not None else 0.0)
            val = a if beta is None else min(a, b)
            if val > lo:
                lo, best_p = val, p
                hi = max(hi, lo)
            else:
                hi = lam
        else:
            hi = lam
    if hi - lo > tol:
        raise NonConvergence(f"bracket [{lo}, {hi}] wider than {tol} after {it} iterations")

    if best_p is None:
        p = lo_p if lo_p is not None else usable / usable.sum()
        return CapacityResult(lo, p, lo_binding, iterations=it, residual=hi - lo,
                              attained=lo_p is None, argmax_symbol=lo_arg)
    full = np.zeros(n)
    full[usable] = best_p
    a, b = ratio_terms(full, channel, beta if beta is not None else 0.0)
    binding = MUTUAL_INFO if beta is None else _binding(a, b)
    return CapacityResult(lo, full, binding, iterations=it, residual=hi - lo)


def sync_cpuc(channel: Channel, *, tol: float = 1e-7, max_iter: int = 200,
              restarts: int = 3, seed: int = 0) -> CapacityResult:
    """max_P I(X;Y) / E[k(X)]."""
    return _solve(channel, None, tol, max_iter, restarts, seed)


def async_cpuc(channel: Channel, beta: float, *, tol: float = 1e-7, max_iter: int = 200,
               restarts: int = 3, seed: int = 0) -> CapacityResult:
    """Asynchronous capacity per unit cost at delay exponent 0."""
    if not beta >= 0:
        raise ValueError(f"beta must be >= 0, got {beta!r}")
    return _solve(channel, float(beta), tol, max_iter, restarts, seed)


def _require_free_star(channel: Channel) -> None:
    validate(channel)
    if not channel.usable_star or channel.cost[channel.star] != 0:
        raise StarNotUsableOrCostly(
            "closed form needs the idle symbol to be usable and of zero cost")


def sync_cpuc_zero_cost(channel: Channel) -> CapacityResult:
    """max_x D(Q(.|x) || Q(.|star)) / k(x) when the idle symbol is free."""
    _require_free_star(channel)
    n = channel.n_inputs
    f = row_divergences(channel.Q, channel.star_row)
    cost = channel.cost
    usable = channel.usable
    free_info = usable & (cost == 0) & (f > 0)
    if free_info.any():
        a = int(np.flatnonzero(free_info)[0])
        p = np.zeros(n)
        p[[channel.star, a]] = 0.5
        return CapacityResult(math.inf, p, BOTH, argmax_symbol=a)
    pos = usable & (cost > 0)
    if not pos.any():
        p = np.zeros(n)
        p[channel.star] = 1.0
        return CapacityResult(0.0, p, BOTH)
    ratio = np.where(pos, f / np.where(pos, cost, 1.0), -math.inf)
    a = _argmax(ratio, pos)
    return CapacityResult(float(ratio[a]), _two_point(n, channel.star, a), BOTH,
                          attained=False, argmax_symbol=a)


def async_cpuc_zero_cost(channel: Channel, beta: float) -> CapacityResult:
    """The free-idle-symbol closed form: the synchronous value over 1 + beta."""
    if not beta >= 0:
        raise ValueError(f"beta must be >= 0, got {beta!r}")
    res = sync_cpuc_zero_cost(channel)
    res.value = res.value / (1 + beta)
    if beta > 0 and res.binding_term == BOTH and math.isfinite(res.value) and res.value > 0:
        res.binding_term = TIMING
    return res


def async_cpuc_delay(channel: Channel, beta: float, delta: float, **kwargs) -> CapacityResult:
    """Capacity at delay exponent 0 < delta < beta: that of beta - delta."""
    if not 0 < delta < beta:
        raise DeltaOutOfRange(f"need 0 < delta < beta, got delta={delta!r}, beta={beta!r}")
    return async_cpuc(channel, beta - delta, **kwargs)


def gaussian_cpuc(ch: GaussianChannel, beta: float) -> float:
    """log2(e) / (N0 (1 + beta)) for the quadratic-cost Gaussian channel."""
    if not beta >= 0:
        raise ValueError(f"beta must be >= 0, got {beta!r}")
    return LOG2E / ch.n0 / (1 + beta)
