import math

import pytest

from pphs_stability.abstraction import pphs_stability_verdict
from pphs_stability.casestudy import (contracting_quadrants, eight_location_example,
                                      quadrant_system, switched_system)
from pphs_stability.harness import (oracle_max_mean_payoff, oracle_mean_payoff, policy_value,
                                    simulate_chain, simulate_pphs)
from pphs_stability.mdp import INF, Wdtmc, Wmdp
from pphs_stability.meanpayoff import Verdict


def test_two_cycle_simulation():
    c = Wdtmc.from_matrices([[0, 1], [1, 0]], [[0, 1], [-3, 0]])
    rep = simulate_chain(c, 10**6, runs=1, seed=3)
    assert rep.estimate == pytest.approx(-1.0, abs=1e-2)


def test_absorbing_self_loop():
    c = Wdtmc.from_matrices([[0, 1], [0, 1]], [[5, 7], [0, -2]])
    rep = simulate_chain(c, 10_000, runs=3, seed=1)
    # one +7 step, then -2 forever
    assert rep.partial_means == pytest.approx([(7 - 2 * 9_999) / 10_000] * 3)


def test_seed_determinism():
    c = Wdtmc.from_matrices([[0.5, 0.5], [0.3, 0.7]], [[1, -1], [2, -3]])
    a = simulate_chain(c, 5_000, runs=4, seed=11)
    b = simulate_chain(c, 5_000, runs=4, seed=11)
    assert a.partial_means == b.partial_means
    assert simulate_chain(c, 5_000, runs=4, seed=12).partial_means != a.partial_means
    # chunking does not change the sampled path
    assert simulate_chain(c, 5_000, runs=4, seed=11, chunk=777).partial_means == a.partial_means


def test_policy_value_and_oracle():
    m = Wmdp.build([[({0: 1.0}, -1.0), ({1: 1.0}, 0.0)], [({1: 1.0}, 2.0)]])
    assert policy_value(m, [0, 0]) == -1.0
    assert policy_value(m, [1, 0]) == 2.0
    assert oracle_max_mean_payoff(m) == 2.0
    assert oracle_mean_payoff(m, maximize=False) == -1.0
    inf = Wmdp.build([[({0: 0.5, 1: 0.5}, 0.0)], [({1: 1.0}, INF)]])
    assert oracle_max_mean_payoff(inf) == INF


def test_simulate_contracting_quadrants():
    rep = simulate_pphs(contracting_quadrants(0.5), 200, runs=3, seed=0)
    assert rep.stuck == 0
    assert rep.partial_means == pytest.approx([math.log(0.5)] * 3)


def test_simulate_divergent_quadrant():
    H = quadrant_system([[0.5], [0.5], [0.5], [0.5]], divergent=[(0, 0)])
    rep = simulate_pphs(H, 50, runs=2, seed=0)
    assert all(x == INF for x in rep.partial_means)


def test_simulate_switched_system_contracts():
    rep = simulate_pphs(switched_system(8), 500, runs=10, seed=5)
    assert rep.negative_fraction >= 0.9
    assert rep.estimate < 0


def test_simulation_trace_recording():
    rep = simulate_pphs(contracting_quadrants(0.8), 12, runs=1, seed=0, record=True)
    trace = rep.steps[0]
    assert len(trace) == 12
    assert [s.loc for s in trace[:5]] == [0, 1, 2, 3, 0]
    assert all(s.weight == pytest.approx(math.log(0.8)) for s in trace)


def test_simulate_pphs_seed_determinism():
    H = switched_system(8)
    a = simulate_pphs(H, 300, runs=3, seed=9)
    assert a.partial_means == simulate_pphs(H, 300, runs=3, seed=9).partial_means


def test_bad_arguments():
    c = Wdtmc.from_matrices([[1.0]], [[0.0]])
    with pytest.raises(ValueError):
        simulate_chain(c, 0)


def test_stable_verdicts_have_negative_simulated_means():
    for H in (switched_system(8), switched_system(16), eight_location_example(),
              contracting_quadrants(0.9)):
        assert pphs_stability_verdict(H) is Verdict.STABLE
        rep = simulate_pphs(H, 10**4, runs=2, seed=7)
        assert rep.stuck == 0
        assert all(x < 0 for x in rep.partial_means)
