import math

import numpy as np
import pytest

from hh_net_epi import (
    Constant,
    EpidemicOutcome,
    Fixed,
    ModelParams,
    Network,
    Poisson,
    ZeroOrInfinite,
    build_network,
    classify_major,
    run_batch,
    run_epidemic,
)
from hh_net_epi.simulator import replicate_rng, simulate, summarize_outcomes, write_outcomes_csv

BASE = ModelParams(n=3, lambda_L=1.0, lambda_G=0.1, degree=Poisson(8.0), period=Fixed(1.0))


def test_no_transmission_infects_only_the_initial_case(rng):
    net = build_network(100, 3, Poisson(5.0), rng)
    for params in (BASE.with_(lambda_L=0.0, lambda_G=0.0), BASE.with_(period=ZeroOrInfinite(0.0))):
        out = run_epidemic(net, params, rng)
        assert out.individuals_infected == 1 and out.households_infected == 1
        assert out.infected.tolist() == [out.initial_individual]


def test_single_edge_transmission_probability():
    net = Network(m=2, n=1, degrees=np.array([1, 1]), edges=np.array([[0, 1]]))
    lam = 0.7
    params = ModelParams(n=1, lambda_L=0.0, lambda_G=lam, degree=Constant(1), period=Fixed(1.0))
    rng = np.random.default_rng(8)
    reps = 100_000
    hits = sum(run_epidemic(net, params, rng).individuals_infected == 2 for _ in range(reps))
    p = 1 - math.exp(-lam)
    assert abs(hits / reps - p) <= 3 * math.sqrt(p * (1 - p) / reps)


def test_household_size_mismatch(rng):
    net = build_network(10, 2, Poisson(2.0), rng)
    with pytest.raises(ValueError):
        run_epidemic(net, BASE, rng)


def test_specific_initial_degree(rng):
    net = build_network(300, 3, Poisson(5.0), rng)
    params = BASE.with_(initial_degree=7)
    for _ in range(20):
        out = run_epidemic(net, params, rng)
        assert net.degrees[out.initial_individual] == 7
    with pytest.raises(ValueError):
        run_epidemic(net, BASE.with_(initial_degree=500), rng)


def test_household_count_matches_recount(rng):
    net = build_network(500, 4, Poisson(3.0), rng)
    params = BASE.with_(n=4)
    for _ in range(20):
        out = run_epidemic(net, params, rng)
        assert out.households_infected == len(set((out.infected // 4).tolist()))
        assert out.individuals_infected == len(out.infected)
        assert out.initial_individual in out.infected


def test_saturated_households_are_fully_infected(rng):
    net = build_network(200, 3, Poisson(3.0), rng)
    out = run_epidemic(net, BASE.with_(lambda_L=1e6), rng)
    assert out.individuals_infected == 3 * out.households_infected


def test_classify_major():
    o = EpidemicOutcome(450, 150, 0)
    assert classify_major(o, 3000)  # exactly 15% counts as major
    assert not classify_major(EpidemicOutcome(449, 150, 0), 3000)
    net = Network(m=1000, n=3, degrees=np.zeros(3000, dtype=int), edges=np.zeros((0, 2), dtype=int))
    assert classify_major(o, net)


def test_summary_standard_errors():
    outcomes = [EpidemicOutcome(1000 if r % 2 else 1, 1, 0) for r in range(10_000)]
    s = summarize_outcomes(outcomes, m=1000, n=3)
    assert s.n_major == 5000 and s.p_hat == 0.5
    assert s.p_se == pytest.approx(0.005)
    assert s.z_hat == pytest.approx(1 / 3)
    assert s.z_se == pytest.approx(0.0)


def test_subcritical_batch_has_no_major_outbreaks():
    s = run_batch(BASE.with_(lambda_G=0.0), m=200, replicates=50, seed=1)
    assert s.n_major == 0 and s.p_hat == 0.0
    assert s.z_hat is None and s.z_se is None


def test_monotone_coupling_in_global_rate():
    lams = [0.03, 0.06, 0.1, 0.2]
    for r in range(200):
        net = build_network(200, 3, Poisson(5.0), replicate_rng(99, r))
        sets = []
        for lam in lams:
            out = run_epidemic(net, BASE.with_(lambda_G=lam), replicate_rng(1234, r))
            sets.append(set(out.infected.tolist()))
        for small, large in zip(sets, sets[1:]):
            assert small <= large


def test_monotone_coupling_in_local_rate():
    for r in range(100):
        net = build_network(200, 3, Poisson(5.0), replicate_rng(98, r))
        a = run_epidemic(net, BASE.with_(lambda_L=0.3), replicate_rng(7, r))
        b = run_epidemic(net, BASE.with_(lambda_L=1.5), replicate_rng(7, r))
        assert set(a.infected.tolist()) <= set(b.infected.tolist())


def test_final_sizes_are_bimodal():
    outcomes = simulate(BASE, m=1000, replicates=500, seed=3)
    z = np.array([o.individuals_infected for o in outcomes]) / 3000
    assert np.mean((z > 0.05) & (z < 0.15)) <= 0.01


def test_replicates_are_exchangeable():
    a = run_batch(BASE, m=300, replicates=600, seed=10)
    b = run_batch(BASE, m=300, replicates=600, seed=11)
    assert abs(a.p_hat - b.p_hat) <= 3 * math.hypot(a.p_se, b.p_se)


def test_results_do_not_depend_on_worker_count():
    a = simulate(BASE, m=100, replicates=40, seed=5, workers=1)
    b = simulate(BASE, m=100, replicates=40, seed=5, workers=3)
    assert a == b


def test_fixed_network_mode():
    a = simulate(BASE, m=100, replicates=30, seed=5, fixed_network=True)
    b = simulate(BASE, m=100, replicates=30, seed=5, fixed_network=True)
    assert a == b
    assert len(a) == 30


def test_reproducible_batches():
    assert run_batch(BASE, 150, 60, seed=4) == run_batch(BASE, 150, 60, seed=4)


def test_write_outcomes_csv(tmp_path):
    outcomes = [EpidemicOutcome(450, 150, 0), EpidemicOutcome(2, 1, 5)]
    path = tmp_path / "raw.csv"
    write_outcomes_csv(outcomes, 1000, 3, path)
    assert path.read_bytes() == b"replicate,final_size,households_infected,is_major\n0,450,150,1\n1,2,1,0\n"
