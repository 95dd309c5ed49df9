"""Entropy, divergence and mutual information in bits, plus joint types.

All logarithms are base 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import Channel
from .errors import LengthMismatch


def _matrix(channel) -> np.ndarray:
    return channel.Q if isinstance(channel, Channel) else np.asarray(channel, dtype=float)


def entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz))) + 0.0


def kl_divergence(p, q) -> float:
    """D(p || q) in bits; ``inf`` when p puts mass where q has none."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"shape mismatch {p.shape} vs {q.shape}")
    mask = p > 0
    if np.any(q[mask] <= 0):
        return math.inf
    return max(float(np.sum(p[mask] * np.log2(p[mask] / q[mask]))), 0.0)


def row_divergences(Q, q) -> np.ndarray:
    """D(Q[x] || q) for every row x, vectorised."""
    Q = np.asarray(Q, dtype=float)
    q = np.asarray(q, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(Q > 0, Q * np.log2(Q / q), 0.0)
    out = terms.sum(axis=1)
    blocked = np.any((Q > 0) & (q <= 0), axis=1)
    out[blocked] = math.inf
    return np.maximum(out, 0.0)


def output_distribution(p, channel) -> np.ndarray:
    return np.asarray(p, dtype=float) @ _matrix(channel)


def mutual_information(p, channel) -> float:
    """I(X;Y) = sum_x p(x) D(Q(.|x) || PQ)."""
    p = np.asarray(p, dtype=float)
    Q = _matrix(channel)
    py = p @ Q
    d = row_divergences(Q[p > 0], py)
    return max(float(np.sum(p[p > 0] * d)), 0.0)


def divergence_sum_identity(p, channel: Channel) -> float:
    """D(XY || X,Y_star) = sum_x p(x) D(Q(.|x) || Q(.|star)).

    Equals I(X;Y) + D(Y || Y_star).
    """
    p = np.asarray(p, dtype=float)
    f = row_divergences(channel.Q[p > 0], channel.star_row)
    if np.any(np.isinf(f)):
        return math.inf
    return float(np.sum(p[p > 0] * f))


@dataclass(frozen=True, eq=False)
class JointType:
    """Empirical joint distribution of an (input, output) sequence pair.

    Integer counts are the stored state; frequencies are derived on demand.
    """

    counts: np.ndarray

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def freq(self) -> np.ndarray:
        return self.counts / self.n

    @property
    def x_counts(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def y_counts(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    def mutual_information(self) -> float:
        px = self.x_counts / self.n
        cond = np.divide(self.counts, self.x_counts[:, None],
                         out=np.zeros(self.counts.shape), where=self.x_counts[:, None] > 0)
        return mutual_information(px, cond)


def joint_type(xs, ys, nx: int | None = None, ny: int | None = None) -> JointType:
    xs = np.asarray(xs, dtype=np.intp)
    ys = np.asarray(ys, dtype=np.intp)
    if xs.shape != ys.shape or xs.ndim != 1 or xs.size == 0:
        raise LengthMismatch(
            f"need two non-empty sequences of equal length, got {xs.shape} and {ys.shape}")
    nx = int(xs.max()) + 1 if nx is None else nx
    ny = int(ys.max()) + 1 if ny is None else ny
    counts = np.bincount(xs * ny + ys, minlength=nx * ny).reshape(nx, ny)
    return JointType(counts)


def typicality_distance(j: JointType, p, channel) -> float:
    """L1 distance between the joint type and P(x)Q(y|x)."""
    target = np.asarray(p, dtype=float)[:, None] * _matrix(channel)
    return float(np.abs(j.freq - target).sum())


def is_typical(j: JointType, p, channel, threshold: float) -> bool:
    return typicality_distance(j, p, channel) <= threshold
