"""Constant-composition random codebooks, start policies and the sequential
typicality decoder.

Times are 1-based (arrival ``nu`` in ``1..A``); message indices are 0-based.
"""
from __future__ import annotations

import csv
import io
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .channel import Channel, as_distribution
from .errors import NuOutOfRange, RejectionBudgetExceeded

IMMEDIATE = "immediate"
WAIT_MULTIPLE = "wait_multiple"

REJECTION_BUDGET = 10_000
# slack on L1 comparisons so rational types sitting exactly on the boundary pass
_EQ_TOL = 1e-12


def default_threshold(N: int) -> float:
    """1 / log2(N), clamped to the largest possible L1 distance."""
    return min(1.0 / math.log2(N), 2.0)


@dataclass(frozen=True, eq=False)
class CodeSpec:
    B: int
    N: int
    beta: float
    composition: np.ndarray
    delta: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.B < 1:
            raise ValueError(f"B must be >= 1, got {self.B}")
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if not (self.delta == 0 or 0 <= self.delta < self.beta):
            raise ValueError(f"need 0 <= delta < beta, got delta={self.delta}")
        p = as_distribution(self.composition)
        p.setflags(write=False)
        object.__setattr__(self, "composition", p)

    @property
    def M(self) -> int:
        return 2 ** self.B

    @property
    def A(self) -> int:
        return max(1, round(2 ** (self.beta * self.B)))

    @property
    def W(self) -> int:
        """Spacing of allowed start times under the waiting policy."""
        return max(1, round(2 ** (self.delta * self.B)))

    @property
    def threshold(self) -> float:
        return default_threshold(self.N)


@dataclass(frozen=True, eq=False)
class Codebook:
    codewords: np.ndarray      # (M, N) input symbol indices
    costs: np.ndarray          # per-codeword total cost
    composition: np.ndarray
    threshold: float
    rejections: int = 0

    @property
    def M(self) -> int:
        return self.codewords.shape[0]

    @property
    def N(self) -> int:
        return self.codewords.shape[1]

    def types(self, n_inputs: int) -> np.ndarray:
        counts = np.stack([np.bincount(c, minlength=n_inputs) for c in self.codewords])
        return counts / self.N

    def to_csv(self, channel: Channel | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["message", "symbols", "cost"])
        for m, (c, k) in enumerate(zip(self.codewords, self.costs)):
            labels = [channel.inputs[s] for s in c] if channel else [str(s) for s in c]
            w.writerow([m, " ".join(labels), repr(float(k))])
        return buf.getvalue()


def _streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent generators for codebook drawing and decoder tie-breaks."""
    code_ss, tie_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(code_ss), np.random.default_rng(tie_ss)


def generate_codebook(spec: CodeSpec, channel: Channel,
                      threshold: float | None = None) -> Codebook:
    """Draw 2**B codewords i.i.d. from the composition, resampling each one
    until its type is within ``threshold`` (L1) of the composition."""
    p = spec.composition
    if p.shape[0] != channel.n_inputs:
        raise ValueError("composition length does not match the input alphabet")
    if np.any((p > 0) & ~channel.usable):
        raise ValueError("composition puts mass on unusable inputs")
    threshold = spec.threshold if threshold is None else threshold
    rng, _ = _streams(spec.seed)
    n_in = channel.n_inputs
    codewords = np.empty((spec.M, spec.N), dtype=np.intp)
    rejections = 0
    for m in range(spec.M):
        for _ in range(REJECTION_BUDGET):
            x = rng.choice(n_in, size=spec.N, p=p)
            t = np.bincount(x, minlength=n_in) / spec.N
            if np.abs(t - p).sum() <= threshold + _EQ_TOL:
                codewords[m] = x
                break
            rejections += 1
        else:
            raise RejectionBudgetExceeded(
                f"codeword {m}: no admissible draw in {REJECTION_BUDGET} attempts "
                f"(N={spec.N} is too short for this composition)")
    codewords.setflags(write=False)
    costs = channel.cost[codewords].sum(axis=1)
    return Codebook(codewords, costs, p, threshold, rejections)


def code_cost(codebook: Codebook) -> float:
    """Maximum total cost over codewords."""
    return float(np.max(codebook.costs))


def start_time(policy: str, nu: int, spec: CodeSpec) -> int:
    A = spec.A
    if not 1 <= nu <= A:
        raise NuOutOfRange(f"nu={nu} outside 1..{A}")
    if policy == IMMEDIATE:
        return nu
    if policy == WAIT_MULTIPLE:
        W = spec.W
        return min(-(-nu // W) * W, A)
    raise ValueError(f"unknown start policy {policy!r}")


def candidate_starts(policy: str, spec: CodeSpec) -> np.ndarray | None:
    """Start times the decoder must consider; None means every time 1..A."""
    if policy == WAIT_MULTIPLE and spec.W > 1:
        W, A = spec.W, spec.A
        starts = np.arange(W, A + 1, W)
        if starts.size == 0 or starts[-1] != A:
            starts = np.append(starts, A)
        return starts
    return None


@dataclass
class DecoderConfig:
    threshold: float
    window: int
    seed: int = 0

    def __post_init__(self):
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")

    @classmethod
    def for_codebook(cls, codebook: Codebook, seed: int = 0) -> "DecoderConfig":
        return cls(threshold=codebook.threshold, window=codebook.N, seed=seed)


class _Scorer:
    """Vectorised L1 distance between every codeword's joint type with a
    window and the target P(x)Q(y|x)."""

    def __init__(self, codebook: Codebook, channel: Channel):
        self.M, self.N = codebook.codewords.shape
        self.ny = channel.n_outputs
        self.K = channel.n_inputs * self.ny
        self.target = (codebook.composition[:, None] * channel.Q).ravel()
        self.y_target = codebook.composition @ channel.Q
        self.base = (codebook.codewords * self.ny
                     + (np.arange(self.M) * self.K)[:, None])

    def distances(self, window: np.ndarray) -> np.ndarray:
        flat = (self.base + window[None, :]).ravel()
        counts = np.bincount(flat, minlength=self.M * self.K).reshape(self.M, self.K)
        return np.abs(counts / self.N - self.target).sum(axis=1)

    def y_distance(self, window: np.ndarray) -> float:
        t = np.bincount(window, minlength=self.ny) / self.N
        return float(np.abs(t - self.y_target).sum())


def decode_step(y_window, scorer: _Scorer, config: DecoderConfig,
                rng: np.random.Generator, final: bool = False):
    """One decision of the sequential decoder on the last N outputs.

    Returns the declared message, or None to keep going. On the final step a
    decision is forced: the L1-closest codeword.
    """
    window = np.asarray(y_window, dtype=np.intp)
    # the joint-type distance is at least the output-marginal distance
    if not final and scorer.y_distance(window) > config.threshold + _EQ_TOL:
        return None
    d = scorer.distances(window)
    hits = np.flatnonzero(d <= config.threshold + _EQ_TOL)
    if hits.size == 0:
        if not final:
            return None
        hits = np.flatnonzero(d <= d.min() + _EQ_TOL)
    if hits.size == 1:
        return int(hits[0])
    return int(hits[rng.integers(hits.size)])


class SequentialDecoder:
    """Feeds on one output symbol at a time and stops at the first window
    whose joint type with some codeword is typical.

    ``starts`` restricts the windows tested to those beginning at the given
    times (used when the transmitter only starts at known instants). The
    decision is forced at the deadline ``last_start + N - 1``.
    """

    def __init__(self, codebook: Codebook, channel: Channel, A: int,
                 config: DecoderConfig | None = None, starts=None, scorer=None,
                 rng: np.random.Generator | None = None):
        self.config = config or DecoderConfig.for_codebook(codebook)
        self.N = codebook.N
        self.scorer = scorer or _Scorer(codebook, channel)
        self.starts = None if starts is None else set(int(s) for s in starts)
        last = A if starts is None else int(max(starts))
        self.deadline = last + self.N - 1
        self.buf: deque = deque(maxlen=self.N)
        self.t = 0
        self.rng = rng if rng is not None else _streams(self.config.seed)[1]

    def push(self, y: int):
        """Consume output ``Y_t``; return ``(t, message)`` on stopping, else None."""
        self.t += 1
        self.buf.append(int(y))
        if self.t < self.N:
            return None
        start = self.t - self.N + 1
        final = self.t >= self.deadline
        if self.starts is not None and start not in self.starts and not final:
            return None
        m = decode_step(np.fromiter(self.buf, dtype=np.intp, count=self.N),
                        self.scorer, self.config, self.rng, final=final)
        return None if m is None else (self.t, m)
