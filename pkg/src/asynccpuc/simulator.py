"""End-to-end asynchronous transmission trials and Monte Carlo estimates."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .arrival import ArrivalModel
from .capacity import async_cpuc, per_symbol_rate
from .channel import Channel
from .coding import (IMMEDIATE, CodeSpec, Codebook, DecoderConfig, SequentialDecoder,
                     _Scorer, candidate_starts, code_cost, generate_codebook, start_time)
from .errors import NuOutOfRange

CSV_COLUMNS = ("beta", "B", "N", "rho", "trials", "max_err", "err_ci_lo", "err_ci_hi",
               "delay_q90", "rate_per_unit_cost")

_CHUNK = 256
EXHAUSTIVE_MAX_A = 2 ** 14


@dataclass
class TrialOutcome:
    message: int
    nu: int
    sigma: int
    tau: int
    decoded: int
    error: bool
    delay: int
    delay_from_start: int
    cost: float
    seed: tuple
    early_stop: bool


def wilson_interval(k: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (95% by default)."""
    if n == 0:
        return 0.0, 1.0
    phat = k / n
    denom = 1 + z * z / n
    centre = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    # pin the endpoints exactly at k = 0 and k = n
    lo = 0.0 if k == 0 else max(0.0, centre - half)
    hi = 1.0 if k == n else min(1.0, centre + half)
    return lo, hi


def output_stream(codeword, sigma: int, channel: Channel, length: int,
                  rng: np.random.Generator):
    """Yield ``Y_1..Y_length``: noise outside ``[sigma, sigma+N-1]``, the
    codeword's output law inside. Symbols are drawn in small chunks so
    memory does not grow with the horizon."""
    N = len(codeword)
    cum = np.cumsum(channel.Q, axis=1)
    cum[:, -1] = 1.0
    star = channel.star
    t = 1
    while t <= length:
        n = min(_CHUNK, length - t + 1)
        times = np.arange(t, t + n)
        inside = (times >= sigma) & (times < sigma + N)
        x = np.full(n, star, dtype=np.intp)
        x[inside] = codeword[times[inside] - sigma]
        u = rng.random(n)
        y = (u[:, None] >= cum[x]).sum(axis=1)
        yield from y.tolist()
        t += n


def _trial_rngs(seed: int, index: int) -> tuple[np.random.Generator, np.random.Generator]:
    ss = np.random.SeedSequence([seed, index])
    chan, tie = ss.spawn(2)
    return np.random.default_rng(chan), np.random.default_rng(tie)


def run_trial(codebook: Codebook, channel: Channel, spec: CodeSpec, m: int,
              seed: int, index: int = 0, policy: str = IMMEDIATE,
              arrival: ArrivalModel | None = None, config: DecoderConfig | None = None,
              starts=None, nu: int | None = None, _scorer=None) -> TrialOutcome:
    """One transmission of message ``m`` (0-based).

    ``nu`` is drawn uniformly on ``1..A`` (or from ``arrival``) unless given.
    ``starts`` restricts the decoder to windows beginning at those times; the
    waiting policy sets it to the allowed transmission instants automatically.
    """
    rng, tie_rng = _trial_rngs(seed, index)
    A = spec.A
    if arrival is not None:
        A = max(A, arrival.support_size)
    if nu is None:
        nu = int(rng.integers(1, A + 1)) if arrival is None else arrival.sample(rng)
    elif not 1 <= nu <= A:
        raise NuOutOfRange(f"nu={nu} outside 1..{A}")
    if policy == IMMEDIATE:
        sigma = nu
    else:
        sigma = start_time(policy, nu, spec)
    if starts is None:
        starts = candidate_starts(policy, spec)
    decoder = SequentialDecoder(codebook, channel, A, config=config, starts=starts,
                                scorer=_scorer, rng=tie_rng)
    cw = codebook.codewords[m]
    for y in output_stream(cw, sigma, channel, decoder.deadline, rng):
        hit = decoder.push(y)
        if hit is not None:
            tau, decoded = hit
            break
    else:  # pragma: no cover - the decoder always decides at its deadline
        raise RuntimeError("decoder passed its deadline without deciding")
    return TrialOutcome(message=m, nu=nu, sigma=sigma, tau=tau, decoded=decoded,
                        error=decoded != m, delay=tau - nu, delay_from_start=tau - sigma,
                        cost=float(codebook.costs[m]), seed=(seed, index),
                        early_stop=tau < sigma)


@dataclass
class SimEstimate:
    error_by_message: np.ndarray
    trials_by_message: np.ndarray
    max_error: float
    mean_error: float
    err_ci: tuple[float, float]
    mean_err_ci: tuple[float, float]
    delay_quantile: int
    delay_epsilon: float
    rate_per_unit_cost: float
    trials: int
    max_cost: float
    early_stops: int


def delay_quantile(delays_by_message, epsilon: float) -> int:
    """Smallest d with empirical P_m(tau - nu <= d) >= 1 - eps for every m."""
    worst = -math.inf
    for d in delays_by_message:
        if len(d) == 0:
            continue
        d = np.sort(np.asarray(d))
        k = max(1, math.ceil((1 - epsilon) * len(d) - 1e-9))
        worst = max(worst, int(d[k - 1]))
    return int(worst)


def simulate_trials(codebook, channel, spec, trials: int, seed: int, threads: int = 1,
                    exhaustive: bool = False, **trial_kwargs) -> list[TrialOutcome]:
    """Trials stratified round-robin over messages (trial i sends i mod M),
    each seeded by ``(seed, i)``; output order is trial order.

    With ``exhaustive`` every (message, arrival time) pair gets the same number
    of trials, ``max(1, trials // (M A))``, instead of sampling the arrival.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    scorer = _Scorer(codebook, channel)
    M, A = codebook.M, spec.A
    if exhaustive:
        if A > EXHAUSTIVE_MAX_A:
            raise ValueError(f"exhaustive mode needs A <= {EXHAUSTIVE_MAX_A}, got {A}")
        trials = M * A * max(1, trials // (M * A))

    def work(idx):
        return [run_trial(codebook, channel, spec, i % M, seed, index=i, _scorer=scorer,
                          nu=(i // M) % A + 1 if exhaustive else None, **trial_kwargs)
                for i in idx]

    if threads <= 1:
        return work(range(trials))
    chunks = [range(s, min(s + _CHUNK, trials)) for s in range(0, trials, _CHUNK)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(work, chunks))
    return [o for part in parts for o in part]


def summarize(outcomes: list[TrialOutcome], codebook: Codebook, B: int,
              epsilon: float = 0.1) -> SimEstimate:
    M = codebook.M
    errs = np.zeros(M, dtype=np.int64)
    counts = np.zeros(M, dtype=np.int64)
    delays = [[] for _ in range(M)]
    for o in outcomes:
        counts[o.message] += 1
        errs[o.message] += o.error
        delays[o.message].append(o.delay)
    seen = counts > 0
    rates = np.zeros(M)
    rates[seen] = errs[seen] / counts[seen]
    worst = int(np.argmax(np.where(seen, rates, -1.0)))
    kmax = code_cost(codebook)
    return SimEstimate(
        error_by_message=rates, trials_by_message=counts,
        max_error=float(rates[worst]), mean_error=float(errs.sum() / counts.sum()),
        err_ci=wilson_interval(int(errs[worst]), int(counts[worst])),
        mean_err_ci=wilson_interval(int(errs.sum()), int(counts.sum())),
        delay_quantile=delay_quantile(delays, epsilon), delay_epsilon=epsilon,
        rate_per_unit_cost=B / kmax if kmax > 0 else math.inf,
        trials=len(outcomes), max_cost=kmax,
        early_stops=sum(o.early_stop for o in outcomes))


def estimate(codebook: Codebook, channel: Channel, spec: CodeSpec, trials: int,
             seed: int, epsilon: float = 0.1, threads: int = 1, **trial_kwargs) -> SimEstimate:
    """Monte Carlo estimate of the maximum (over messages) error probability,
    the delay d(eps) and the rate per unit cost."""
    outcomes = simulate_trials(codebook, channel, spec, trials, seed, threads=threads,
                               **trial_kwargs)
    return summarize(outcomes, codebook, spec.B, epsilon)


def rate_composition(channel: Channel, beta: float) -> np.ndarray:
    """Input law maximising the per-symbol rate min{I, (I + D)/(1 + beta)}."""
    unit = channel.with_costs(np.where(channel.usable, 1.0, np.inf))
    p = async_cpuc(unit, beta).optimizer
    # snap solver dust so the rejection sampler sees a clean support
    p = np.where(p < 1e-9, 0.0, p)
    return p / p.sum()


def blocklength(B: int, rho: float, rate: float, n_max: int = 100_000) -> int:
    """Smallest N with B / N <= rho * rate, clipped to [2, n_max]."""
    if not rate > 0:
        return n_max
    return int(min(max(2, math.ceil(B / (rho * rate) - 1e-9)), n_max))


def sweep_rate(channel: Channel, beta: float, B: int, rate_fractions, trials: int,
               seed: int = 0, composition=None, policy: str = IMMEDIATE, delta: float = 0.0,
               epsilon: float = 0.1, n_max: int = 100_000, threads: int = 1) -> list[dict]:
    """Error, delay and rate per unit cost as the blocklength shrinks towards
    (and past) what the random-coding scheme supports.

    For each fraction ``rho`` the blocklength is the smallest N with
    ``B / N <= rho * min{I, (I + D)/(1 + beta)}`` at ``composition`` (default:
    the law maximising that per-symbol rate).
    """
    p = rate_composition(channel, beta) if composition is None else np.asarray(composition, float)
    rate = per_symbol_rate(p, channel, beta)
    rows = []
    for rho in rate_fractions:
        if not 0 < rho <= 2:
            raise ValueError(f"rate fraction must lie in (0, 2], got {rho!r}")
        N = blocklength(B, rho, rate, n_max)
        spec = CodeSpec(B=B, N=N, beta=beta, composition=p, delta=delta, seed=seed)
        cb = generate_codebook(spec, channel)
        est = estimate(cb, channel, spec, trials, seed, epsilon=epsilon, threads=threads,
                       policy=policy)
        rows.append({"beta": beta, "B": B, "N": N, "rho": rho, "trials": est.trials,
                     "max_err": est.max_error, "err_ci_lo": est.err_ci[0],
                     "err_ci_hi": est.err_ci[1], "delay_q90": est.delay_quantile,
                     "rate_per_unit_cost": est.rate_per_unit_cost})
    return rows


def rows_to_csv(rows, columns=CSV_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def outcomes_to_csv(outcomes) -> str:
    rows = []
    for o in outcomes:
        d = asdict(o)
        d["seed"] = f"{o.seed[0]}:{o.seed[1]}"
        rows.append(d)
    cols = tuple(rows[0]) if rows else tuple(TrialOutcome.__dataclass_fields__)
    return rows_to_csv(rows, cols)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v
