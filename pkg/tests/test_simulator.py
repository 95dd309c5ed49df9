import math

import numpy as np
import pytest
from scipy import stats

from asynccpuc.arrival import ArrivalModel
from asynccpuc.channel import Channel, bsc, noiseless
from asynccpuc.coding import WAIT_MULTIPLE, CodeSpec, Codebook, generate_codebook
from asynccpuc.errors import NuOutOfRange
from asynccpuc.simulator import (CSV_COLUMNS, blocklength, delay_quantile, estimate,
                                 output_stream, outcomes_to_csv, rows_to_csv, run_trial,
                                 simulate_trials, sweep_rate, wilson_interval)

ALPHA = 1e-4


def noiseless_book():
    ch = noiseless(3, cost=(0, 1, 1))
    words = np.array([[1, 1, 2, 2], [1, 2, 1, 2], [1, 2, 2, 1], [2, 1, 1, 2]])
    cb = Codebook(words, ch.cost[words].sum(axis=1), np.array([0, 0.5, 0.5]), 0.01)
    return ch, cb, CodeSpec(B=2, N=4, beta=1, composition=[0, 0.5, 0.5])


def test_noiseless_exhaustive_is_error_free():
    ch, cb, spec = noiseless_book()
    assert spec.A == 4
    for m in range(4):
        for nu in range(1, 5):
            o = run_trial(cb, ch, spec, m, seed=0, nu=nu)
            assert not o.error
            assert (o.sigma, o.tau, o.delay) == (nu, nu + 3, 3)


def test_noiseless_estimate_interval():
    ch, cb, spec = noiseless_book()
    est = estimate(cb, ch, spec, 64, seed=0, exhaustive=True)
    assert est.trials == 64
    assert est.max_error == 0.0
    lo, hi = est.err_ci
    assert lo == 0.0 and 0 < hi < 0.5
    assert est.rate_per_unit_cost == 2 / 4


def test_exhaustive_covers_each_pair_equally():
    ch, cb, spec = noiseless_book()
    outs = simulate_trials(cb, ch, spec, 32, seed=0, exhaustive=True)
    pairs = [(o.message, o.nu) for o in outs]
    assert sorted(set(pairs)) == [(m, nu) for m in range(4) for nu in range(1, 5)]
    assert all(pairs.count(p) == 2 for p in set(pairs))


def test_identical_rows_error_is_one_minus_one_over_m():
    ch = Channel([[0.3, 0.7], [0.3, 0.7]], [0, 1])
    spec = CodeSpec(B=2, N=8, beta=1, composition=[0.5, 0.5], seed=2)
    cb = generate_codebook(spec, ch)
    est = estimate(cb, ch, spec, 8000, seed=4)
    lo, hi = est.mean_err_ci
    assert lo <= 0.75 <= hi


def test_synchronous_has_fixed_arrival(bsc_star):
    spec = CodeSpec(B=3, N=10, beta=0, composition=[0.5, 0.5])
    cb = generate_codebook(spec, bsc_star)
    outs = simulate_trials(cb, bsc_star, spec, 50, seed=0)
    assert all(o.nu == 1 and o.sigma == 1 for o in outs)


def test_nu_out_of_range(bsc_star):
    spec = CodeSpec(B=2, N=6, beta=1, composition=[0.5, 0.5])
    cb = generate_codebook(spec, bsc_star)
    with pytest.raises(NuOutOfRange):
        run_trial(cb, bsc_star, spec, 0, seed=0, nu=5)


def test_outcome_invariants(bsc_star):
    spec = CodeSpec(B=3, N=10, beta=1, composition=[0.5, 0.5])
    cb = generate_codebook(spec, bsc_star)
    for o in simulate_trials(cb, bsc_star, spec, 200, seed=3):
        assert 1 <= o.nu <= o.sigma <= spec.A
        assert o.tau <= spec.A + spec.N - 1
        assert o.delay >= -(spec.N - 1)
        assert o.early_stop == (o.tau < o.sigma)


def test_stream_law_chi_square():
    Q = np.array([[0.6, 0.3, 0.1], [0.1, 0.2, 0.7], [0.25, 0.25, 0.5]])
    ch = Channel(Q, [0, 1, 1])
    n = 100_000
    codeword = np.tile([1, 2], n)
    sigma = n + 1
    y = np.fromiter(output_stream(codeword, sigma, ch, sigma + 2 * n - 1,
                                  np.random.default_rng(0)), dtype=int)
    classes = {"noise": (y[:n], Q[0]), "x=1": (y[n::2], Q[1]), "x=2": (y[n + 1::2], Q[2])}
    for name, (sample, law) in classes.items():
        assert sample.size == n, name
        observed = np.bincount(sample, minlength=3)
        p = stats.chisquare(observed, law * n).pvalue
        assert p > ALPHA, name


def test_stream_after_codeword_is_noise():
    ch = Channel([[1.0, 0.0], [0.0, 1.0]], [0, 1])
    y = list(output_stream(np.array([1, 1, 1]), 5, ch, 12, np.random.default_rng(0)))
    assert y == [0, 0, 0, 0, 1, 1, 1, 0, 0, 0, 0, 0]


def test_reproducible_and_thread_independent(bsc_star):
    spec = CodeSpec(B=4, N=14, beta=0.5, composition=[0.5, 0.5], seed=7)
    cb = generate_codebook(spec, bsc_star)
    a = outcomes_to_csv(simulate_trials(cb, bsc_star, spec, 600, seed=11))
    b = outcomes_to_csv(simulate_trials(cb, bsc_star, spec, 600, seed=11))
    c = outcomes_to_csv(simulate_trials(cb, bsc_star, spec, 600, seed=11, threads=4))
    assert a == b == c
    assert a != outcomes_to_csv(simulate_trials(cb, bsc_star, spec, 600, seed=12))


def test_wilson_interval_shrinks_by_root_two(bsc_star):
    spec = CodeSpec(B=3, N=10, beta=1, composition=[0.5, 0.5])
    cb = generate_codebook(spec, bsc_star)
    small = estimate(cb, bsc_star, spec, 2000, seed=0).mean_err_ci
    large = estimate(cb, bsc_star, spec, 4000, seed=0).mean_err_ci
    ratio = (large[1] - large[0]) / (small[1] - small[0])
    assert abs(ratio - 1 / math.sqrt(2)) <= 0.2 / math.sqrt(2)


def test_wilson_interval_known_values():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0 and hi == pytest.approx(0.036994, abs=1e-6)
    lo, hi = wilson_interval(50, 100)
    assert (lo + hi) / 2 == pytest.approx(0.5)


def test_error_nondecreasing_in_beta(bsc_star):
    errs = []
    for beta in (0.1, 0.5, 1.0):
        spec = CodeSpec(B=4, N=16, beta=beta, composition=[0.5, 0.5])
        cb = generate_codebook(spec, bsc_star)
        errs.append(estimate(cb, bsc_star, spec, 4000, seed=1).max_error)
    assert errs[0] <= errs[1] <= errs[2]


def test_delay_quantile():
    assert delay_quantile([[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]], 0.1) == 9
    assert delay_quantile([[1] * 10, [5] * 10], 0.1) == 5
    assert delay_quantile([[3, 4], []], 0.5) == 3


def test_delay_quantile_nonincreasing_in_epsilon(bsc_star):
    spec = CodeSpec(B=3, N=10, beta=1, composition=[0.5, 0.5])
    cb = generate_codebook(spec, bsc_star)
    outs = simulate_trials(cb, bsc_star, spec, 400, seed=0)
    delays = [[o.delay for o in outs if o.message == m] for m in range(cb.M)]
    qs = [delay_quantile(delays, e) for e in (0.01, 0.1, 0.3, 0.6)]
    assert all(b <= a for a, b in zip(qs, qs[1:]))


def test_wait_multiple_policy_reports_both_delays(bsc_star):
    spec = CodeSpec(B=3, N=8, beta=2, delta=1, composition=[0.5, 0.5])
    cb = generate_codebook(spec, bsc_star)
    outs = simulate_trials(cb, bsc_star, spec, 200, seed=0, policy=WAIT_MULTIPLE)
    for o in outs:
        assert o.sigma % spec.W == 0 or o.sigma == spec.A
        assert o.delay - o.delay_from_start == o.sigma - o.nu


def test_arrival_model_drives_nu(bsc_star):
    spec = CodeSpec(B=3, N=8, beta=1, composition=[0.5, 0.5])
    cb = generate_codebook(spec, bsc_star)
    model = ArrivalModel("point_mass", {"t": 5}, B=3)
    outs = simulate_trials(cb, bsc_star, spec, 40, seed=0, arrival=model)
    assert {o.nu for o in outs} == {5}


def test_blocklength():
    assert blocklength(8, 0.5, 0.5) == 32
    assert blocklength(8, 1.0, 0.0, n_max=50) == 50
    assert blocklength(1, 2.0, 1.0) == 2


def test_sweep_rate_small_rate_grows_blocklength(bsc_star):
    rows = sweep_rate(bsc_star, 0.25, 3, [0.05, 0.5], trials=40, seed=0, n_max=200)
    assert rows[0]["N"] > rows[1]["N"]
    assert rows[0]["rate_per_unit_cost"] < rows[1]["rate_per_unit_cost"]
    text = rows_to_csv(rows)
    assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
    assert len(text.splitlines()) == 3


def test_sweep_rate_rejects_bad_fraction(bsc_star):
    with pytest.raises(ValueError):
        sweep_rate(bsc_star, 0.25, 3, [2.5], trials=10)
