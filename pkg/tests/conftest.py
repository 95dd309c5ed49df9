import itertools

import numpy as np
import pytest

from asynccpuc.channel import Channel, bsc


@pytest.fixture
def bsc_star():
    """BSC(0.1) whose input 0 is a free, usable idle symbol."""
    return bsc(0.1, cost=(0.0, 1.0))


@pytest.fixture
def bsc_unit():
    return bsc(0.1)


def simplex_grid(n, step=0.01):
    """All points of the n-simplex with coordinates on a step grid."""
    k = round(1 / step)
    pts = [c for c in itertools.product(range(k + 1), repeat=n - 1) if sum(c) <= k]
    pts = np.array([list(c) + [k - sum(c)] for c in pts], dtype=float)
    return pts / k


def brute_objective(P, Q, cost, star, beta=None):
    """min{I/E[k], (I + D(Y||Y_star))/((1+beta)E[k])} at each row of P.

    Written directly from the definitions with natural logs converted at the
    end, independent of the package's divergence helpers.
    """
    P = np.atleast_2d(P)
    PY = P @ Q
    with np.errstate(divide="ignore", invalid="ignore"):
        hy = -np.sum(np.where(PY > 0, PY * np.log(PY), 0.0), axis=1)
        hyx_rows = -np.sum(np.where(Q > 0, Q * np.log(Q), 0.0), axis=1)
        I = (hy - P @ hyx_rows) / np.log(2)
        qs = Q[star]
        dy = np.sum(np.where(PY > 0, PY * np.log(PY / qs), 0.0), axis=1) / np.log(2)
    K = P @ cost
    with np.errstate(divide="ignore", invalid="ignore"):
        first = np.where(K > 0, I / K, -np.inf)
        if beta is None:
            return first
        second = np.where(K > 0, (I + dy) / ((1 + beta) * K), -np.inf)
    return np.minimum(first, second)


def grid_capacity(channel: Channel, beta=None, step=0.01):
    usable = channel.usable
    P = np.zeros((0, channel.n_inputs))
    sub = simplex_grid(int(usable.sum()), step)
    P = np.zeros((sub.shape[0], channel.n_inputs))
    P[:, usable] = sub
    cost = np.where(usable, channel.cost, 0.0)
    return float(np.max(brute_objective(P, channel.Q, cost, channel.star, beta)))


def random_channel(rng, nx, ny, zero_cost_star=True, min_cost=0.2):
    Q = rng.dirichlet(np.ones(ny), size=nx)
    # keep every row fully supported so divergences stay finite
    Q = 0.9 * Q + 0.1 / ny
    Q = Q / Q.sum(axis=1, keepdims=True)
    cost = rng.uniform(min_cost, 3.0, size=nx)
    if zero_cost_star:
        cost[0] = 0.0
    return Channel(Q, cost, star=0, usable_star=True)


def refined_grid_capacity(channel: Channel, beta=None, step=0.01, zoom=100):
    """Two-level grid search: the flat ``step`` grid, then a grid ``zoom`` times
    finer over the cells around the best flat point.

    At the kink of min{., .} a flat grid is only first-order accurate, so the
    second level is needed to resolve values to ~step**2.
    """
    usable = channel.usable
    d = int(usable.sum())
    sub = simplex_grid(d, step)
    P = np.zeros((sub.shape[0], channel.n_inputs))
    P[:, usable] = sub
    cost = np.where(usable, channel.cost, 0.0)
    vals = brute_objective(P, channel.Q, cost, channel.star, beta)
    centre = sub[int(np.argmax(vals))]
    offs = np.arange(-zoom, zoom + 1) * (step / zoom)
    grids = np.meshgrid(*([offs] * (d - 1)), indexing="ij")
    head = centre[:-1] + np.stack([g.ravel() for g in grids], axis=1)
    local = np.column_stack([head, 1 - head.sum(axis=1)])
    local = local[np.all(local >= -1e-15, axis=1)].clip(0)
    P = np.zeros((local.shape[0], channel.n_inputs))
    P[:, usable] = local
    fine = brute_objective(P, channel.Q, cost, channel.star, beta)
    return float(max(vals.max(), fine.max()))


def brute_capacity(channel: Channel, beta=None, step=0.01, ray=1e-7):
    """Brute-force supremum: the two-level grid plus points a distance ``ray``
    from each zero-cost vertex towards every grid point of the opposite face,
    where a supremum approached as E[k] -> 0 lives."""
    best = refined_grid_capacity(channel, beta, step)
    usable = channel.usable
    cost = np.where(usable, channel.cost, 0.0)
    for v in np.flatnonzero(usable & (channel.cost == 0)):
        others = usable.copy()
        others[v] = False
        if not others.any():
            continue
        face = simplex_grid(int(others.sum()), step)
        P = np.zeros((face.shape[0], channel.n_inputs))
        P[:, others] = ray * face
        P[:, v] = 1 - ray
        best = max(best, float(np.max(brute_objective(P, channel.Q, cost, channel.star, beta))))
    return best


# one line per acceptance criterion, echoed at the end of every run
ACCEPTANCE_REPORT: dict[int, str] = {}


def report_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_REPORT[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_REPORT:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_REPORT):
            terminalreporter.write_line(ACCEPTANCE_REPORT[n])
