import numpy as np
import pytest

from pphs_stability.chain import (EnumerationTooLarge, NotIrreducible, count_policies,
                                  decide_as_convergence, effective_weight, stationary_distribution,
                                  wdtmc_as_convergent)
from pphs_stability.harness import simulate_chain
from pphs_stability.mdp import INF, Wdtmc, Wmdp, induce
from randmodels import random_irreducible_chain, random_wmdp


def c_(P, W, init=0):
    return Wdtmc.from_matrices(np.array(P, float), np.array(W, float), init)


def test_stationary_examples():
    assert stationary_distribution(c_([[1]], [[0]]), [0]).probs.tolist() == [1.0]
    d = stationary_distribution(c_([[0, 1], [1, 0]], [[0, 0], [0, 0]]), [0, 1])
    assert d.probs == pytest.approx([0.5, 0.5])
    p, q = 0.3, 0.6
    d = stationary_distribution(c_([[1 - p, p], [q, 1 - q]], np.zeros((2, 2))), [0, 1])
    assert d.probs == pytest.approx([q / (p + q), p / (p + q)])


def test_stationary_rejects_reducible():
    with pytest.raises(NotIrreducible):
        stationary_distribution(c_([[0, 1], [0, 1]], np.zeros((2, 2))), [0, 1])


def test_stationary_balance(rng):
    for _ in range(50):
        c = random_irreducible_chain(rng, int(rng.integers(1, 9)))
        d = stationary_distribution(c, range(c.n_states)).probs
        assert d.sum() == pytest.approx(1.0, abs=1e-9) and np.all(d >= 0)
        assert np.max(np.abs(d @ c.P - d)) <= 1e-8


def test_effective_weight_examples():
    assert effective_weight(c_([[0, 1], [1, 0]], [[0, 1], [-3, 0]]), [0, 1]) == pytest.approx(-1.0)
    assert effective_weight(c_([[1]], [[-2]]), [0]) == -2.0
    assert effective_weight(c_([[1]], [[INF]]), [0]) == INF


def test_effective_weight_matches_simulation(rng):
    c = random_irreducible_chain(rng, 4)
    rep = simulate_chain(c, 10**6, runs=1, seed=3)
    assert rep.estimate == pytest.approx(effective_weight(c, range(4)), abs=1e-2)


def test_wdtmc_as_convergent_examples():
    assert wdtmc_as_convergent(c_([[1]], [[-1]]))
    # init splits between two absorbing states with weights -1 and 0
    assert not wdtmc_as_convergent(c_([[0, .5, .5], [0, 1, 0], [0, 0, 1]], [[0, 0, 0], [0, -1, 0], [0, 0, 0]]))
    # a +inf edge on the transient prefix does not matter
    assert wdtmc_as_convergent(c_([[0, 1], [0, 1]], [[0, INF], [0, -1]]))


def test_scale_and_prefix_invariance(rng):
    for _ in range(100):
        c = random_irreducible_chain(rng, int(rng.integers(1, 6)), low=-1.0, high=0.6)
        base = wdtmc_as_convergent(c)
        assert wdtmc_as_convergent(Wdtmc.from_matrices(c.P, 3.7 * c.W, c.init)) == base
        # prepend a transient gadget of two states with arbitrary weights
        n = c.n_states
        P = np.zeros((n + 2, n + 2))
        W = np.zeros((n + 2, n + 2))
        P[2:, 2:], W[2:, 2:] = c.P, c.W
        P[0, 1], P[0, 2 + c.init] = 0.5, 0.5
        P[1, 2 + c.init] = 1.0
        W[0, 1], W[0, 2 + c.init], W[1, 2 + c.init] = 100.0, -50.0, 7.0
        assert wdtmc_as_convergent(Wdtmc.from_matrices(P, W, 0)) == base


def test_decide_examples():
    neg = Wmdp.build([[({0: .5, 1: .5}, -1.0), ({1: 1.0}, -0.5)], [({0: 1.0}, -2.0)]])
    assert decide_as_convergence(neg).convergent
    m = Wmdp.build([[({1: 1.0}, -1.0), ({0: 1.0}, 0.0)], [({1: 1.0}, -1.0)]])
    dec = decide_as_convergence(m)
    assert not dec.convergent
    assert dec.witness.policy == (1, 0) and dec.witness.bscc == frozenset({0})
    assert dec.witness.weight == 0.0


def test_enumeration_cap():
    m = Wmdp.build([[({0: 1.0}, -1.0)] * 3] * 4)
    assert count_policies(m) == 81
    with pytest.raises(EnumerationTooLarge):
        decide_as_convergence(m, cap=80)


def worst_bscc_by_simulation(m, rng):
    """Largest long-run average over reachable bottom components, estimated by simulation."""
    from pphs_stability.chain import policies
    from pphs_stability.graph import bsccs_reachable
    worst = -INF
    for rho in policies(m):
        ch = induce(m, rho)
        for b in bsccs_reachable(ch):
            start = min(b)
            rep = simulate_chain(Wdtmc(ch.P, ch.W, start), 20000, runs=1, seed=int(rng.integers(1 << 30)))
            worst = max(worst, rep.estimate)
    return worst


def test_decide_against_simulated_worst_bscc(rng):
    checked = 0
    while checked < 15:
        m = random_wmdp(rng, max_states=4, max_actions=2, low=-3, high=1.5)
        worst = worst_bscc_by_simulation(m, rng)
        if abs(worst) < 0.1:
            continue  # too close to call with a finite simulation
        assert decide_as_convergence(m).convergent == (worst < 0)
        checked += 1
