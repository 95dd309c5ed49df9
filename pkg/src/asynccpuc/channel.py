"""Discrete memoryless channels with an idle symbol and per-symbol costs."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ChannelError, MissingStarRow, NegativeCost, NonStochasticRow

ROW_TOL = 1e-12

_JSON_KEYS = {"inputs", "outputs", "star", "usable_star", "Q", "cost"}
# optional sections that other modules read from the same file
_JSON_EXTRA_KEYS = {"arrival"}


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Channel:
    """A DMC over one unified input alphabet that includes the idle symbol.

    ``Q[x, y]`` is the transition matrix, ``cost[x]`` the cost of input ``x``
    (may be ``inf``) and ``star`` the index of the idle symbol whose row is the
    pure-noise output law. ``usable_star`` says whether codewords may use it.
    """

    Q: np.ndarray
    cost: np.ndarray
    star: int = 0
    usable_star: bool = True
    inputs: tuple = field(default=())
    outputs: tuple = field(default=())

    def __post_init__(self):
        Q = _frozen(self.Q)
        cost = _frozen(self.cost)
        if Q.ndim != 2:
            raise ChannelError(f"transition matrix must be 2-D, got shape {Q.shape}")
        if cost.shape != (Q.shape[0],):
            raise ChannelError(
                f"cost has shape {cost.shape}, expected ({Q.shape[0]},)")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "cost", cost)
        inputs = tuple(self.inputs) or tuple(str(i) for i in range(Q.shape[0]))
        outputs = tuple(self.outputs) or tuple(str(j) for j in range(Q.shape[1]))
        if len(inputs) != Q.shape[0] or len(outputs) != Q.shape[1]:
            raise ChannelError("alphabet labels do not match the matrix shape")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "outputs", outputs)
        object.__setattr__(self, "star", int(self.star))
        object.__setattr__(self, "usable_star", bool(self.usable_star))

    @property
    def n_inputs(self) -> int:
        return self.Q.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.Q.shape[1]

    @property
    def star_row(self) -> np.ndarray:
        return self.Q[self.star]

    @property
    def usable(self) -> np.ndarray:
        """Mask of inputs that a codeword may contain: finite cost, and not
        the idle symbol unless it is flagged usable."""
        mask = np.isfinite(self.cost)
        if not self.usable_star:
            mask = mask.copy()
            mask[self.star] = False
        return mask

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_dict(cls, spec: dict) -> "Channel":
        unknown = set(spec) - _JSON_KEYS - _JSON_EXTRA_KEYS
        if unknown:
            raise ChannelError(f"unknown keys in channel spec: {sorted(unknown)}")
        missing = _JSON_KEYS - set(spec)
        if missing:
            raise ChannelError(f"missing keys in channel spec: {sorted(missing)}")
        inputs = [str(s) for s in spec["inputs"]]
        star = str(spec["star"])
        if star not in inputs:
            raise MissingStarRow(f"idle symbol {star!r} is not among the inputs")
        cost = [_parse_cost(c) for c in spec["cost"]]
        return cls(Q=spec["Q"], cost=cost, star=inputs.index(star),
                   usable_star=bool(spec["usable_star"]), inputs=tuple(inputs),
                   outputs=tuple(str(s) for s in spec["outputs"]))

    @classmethod
    def load(cls, path) -> "Channel":
        with open(Path(path)) as fh:
            spec = json.load(fh)
        if not isinstance(spec, dict):
            raise ChannelError("channel file must hold a JSON object")
        return cls.from_dict(spec)

    def to_dict(self) -> dict:
        return {
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "star": self.inputs[self.star],
            "usable_star": self.usable_star,
            "Q": self.Q.tolist(),
            "cost": [c if math.isfinite(c) else "inf" for c in self.cost.tolist()],
        }

    def with_costs(self, cost) -> "Channel":
        return Channel(self.Q, cost, self.star, self.usable_star,
                       self.inputs, self.outputs)


def _parse_cost(c) -> float:
    if isinstance(c, str):
        if c.strip().lower() in {"inf", "+inf", "infinity"}:
            return math.inf
        raise ChannelError(f"cannot parse cost {c!r}")
    return float(c)


def bsc(eps: float, cost=(1.0, 1.0), star: int = 0, usable_star: bool = True) -> Channel:
    """Binary symmetric channel with crossover ``eps``."""
    Q = [[1 - eps, eps], [eps, 1 - eps]]
    return Channel(Q, cost, star=star, usable_star=usable_star,
                   inputs=("0", "1"), outputs=("0", "1"))


def noiseless(n: int, cost=None, star: int = 0, usable_star: bool = True) -> Channel:
    cost = np.ones(n) if cost is None else cost
    return Channel(np.eye(n), cost, star=star, usable_star=usable_star)


def validate(channel: Channel) -> None:
    """Check every channel invariant, raising on the first violation."""
    Q, cost = channel.Q, channel.cost
    if not 0 <= channel.star < channel.n_inputs:
        raise MissingStarRow(
            f"idle symbol index {channel.star} has no row in a "
            f"{channel.n_inputs}-input channel")
    for x, row in enumerate(Q):
        bad = np.flatnonzero(~np.isfinite(row) | (row < 0) | (row > 1))
        if bad.size:
            raise NonStochasticRow(
                f"row {x}, entry {bad[0]}: {row[bad[0]]!r} is not a probability")
        s = math.fsum(row)
        if abs(s - 1.0) > ROW_TOL:
            raise NonStochasticRow(f"row {x} sums to {s!r}, not 1")
    for x, c in enumerate(cost):
        if np.isnan(c) or c < 0:
            raise NegativeCost(f"cost of input {x} is {c!r}")


def detect_infinite_cpuc(channel: Channel) -> bool:
    """True iff two usable zero-cost inputs have different output laws.

    A distribution supported on such a pair has positive mutual information
    at zero expected cost.
    """
    zero = np.flatnonzero(channel.usable & (channel.cost == 0))
    rows = channel.Q[zero]
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            if np.abs(rows[i] - rows[j]).sum() > ROW_TOL:
                return True
    return False


@dataclass(frozen=True)
class GaussianChannel:
    """Additive white Gaussian noise of variance ``n0 / 2``, cost ``x**2``."""

    n0: float

    def __post_init__(self):
        if not self.n0 > 0:
            raise ChannelError(f"n0 must be positive, got {self.n0!r}")

    @property
    def variance(self) -> float:
        return self.n0 / 2


def as_distribution(p, n: int | None = None) -> np.ndarray:
    """Validate a probability vector and return it as a float array."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or (n is not None and p.shape[0] != n):
        raise ValueError(f"expected a length-{n} probability vector, got shape {p.shape}")
    if np.any(p < 0) or abs(math.fsum(p) - 1.0) > ROW_TOL:
        raise ValueError(f"not a probability vector: {p}")
    return p
