import numpy as np

from pphs_stability.graph import (bsccs_reachable, mec_decompose, reachable_states, scc_decompose,
                                  tarjan)
from pphs_stability.mdp import Wdtmc, Wmdp, induce
from randmodels import mec_oracle, random_wmdp, scc_oracle
from test_mdp import example_chain_wmdp


def chain(P, init=0):
    return Wdtmc.from_matrices(np.array(P, dtype=float), np.zeros((len(P), len(P))), init)


def test_reachable_examples():
    assert reachable_states(chain([[1.0]]), 0) == {0}
    c = chain([[0, 1, 0], [0, 0, 1], [0, 0, 1]])
    assert reachable_states(c, 0) == {0, 1, 2}
    assert reachable_states(example_chain_wmdp(), 0) == set(range(8))


def test_scc_examples():
    two = scc_decompose(chain([[0, 1], [1, 0]]))
    assert two.components == [frozenset({0, 1})] and two.is_bottom == [True]
    p = scc_decompose(chain([[0, 1], [0, 1]]))
    assert p.components == [frozenset({0}), frozenset({1})]
    assert p.is_bottom == [False, True]


def test_bsccs_reachable_examples():
    assert bsccs_reachable(chain([[1.0]])) == [frozenset({0})]
    c = chain([[0, 1, 0], [0, 1, 0], [0, 0, 1]])
    assert bsccs_reachable(c) == [frozenset({1})]


def test_scc_against_closure_oracle(rng):
    for _ in range(100):
        n = 8
        P = (rng.random((n, n)) < 0.2).astype(float)
        P[np.arange(n), rng.integers(0, n, n)] = 1.0
        c = chain(P / P.sum(axis=1, keepdims=True))
        part = scc_decompose(c)
        assert part.components == scc_oracle(n, lambda s: c.successors(s))
        for comp, bottom in zip(part.components, part.is_bottom):
            assert bottom == all(c.successors(s) <= comp for s in comp)


def test_bsccs_against_definition(rng):
    for _ in range(100):
        n = 6
        P = (rng.random((n, n)) < 0.25).astype(float)
        P[np.arange(n), rng.integers(0, n, n)] = 1.0
        c = chain(P / P.sum(axis=1, keepdims=True), int(rng.integers(n)))
        reach = reachable_states(c, c.init)
        expected = [b for b in scc_oracle(n, c.successors)
                    if b & reach and all(c.successors(s) <= b for s in b)]
        assert bsccs_reachable(c) == expected


def test_tarjan_deep_graph():
    n = 5000
    comps = tarjan(n, lambda s: [s + 1] if s + 1 < n else [0])
    assert len(comps) == 1 and len(comps[0]) == n


def test_mec_examples():
    mecs = mec_decompose(example_chain_wmdp())
    assert len(mecs) == 1 and mecs[0].states == frozenset(range(8))
    m = Wmdp.build([[({0: 1.0}, 0.0), ({1: 1.0}, 0.0)], [({1: 1.0}, 0.0)]])
    mecs = mec_decompose(m)
    assert [(mc.states, mc.enabled) for mc in mecs] == [
        (frozenset({0}), {0: (0,)}), (frozenset({1}), {1: (0,)})]


def test_mec_against_exhaustive_oracle(rng):
    for _ in range(60):
        m = random_wmdp(rng, max_states=5, max_actions=2)
        got = {frozenset(mc.pairs()) for mc in mec_decompose(m, check_pruning=True)}
        assert got == mec_oracle(m)


def test_mec_fixpoint(rng):
    for _ in range(50):
        m = random_wmdp(rng, max_states=6, max_actions=3)
        for mc in mec_decompose(m):
            sub, order = m.restrict(sorted(mc.states), {s: list(a) for s, a in mc.enabled.items()})
            again = mec_decompose(sub)
            assert len(again) == 1
            assert {(order[s], k) for s, k in again[0].pairs()} == mc.pairs()


def test_bsccs_are_end_components(rng):
    from pphs_stability.graph import is_end_component
    for _ in range(50):
        m = random_wmdp(rng, max_states=6, max_actions=3)
        rho = [int(rng.integers(len(a))) for a in m.actions]
        for b in bsccs_reachable(induce(m, rho)):
            assert is_end_component(m, [(s, rho[s]) for s in b])
