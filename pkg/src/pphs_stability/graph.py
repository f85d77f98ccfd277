"""Reachability, SCC/BSCC and maximal end component decomposition."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .mdp import Wdtmc, Wmdp


@dataclass(frozen=True)
class SccPartition:
    components: list[frozenset[int]]
    is_bottom: list[bool]

    def bottoms(self) -> list[frozenset[int]]:
        return [c for c, b in zip(self.components, self.is_bottom) if b]


@dataclass(frozen=True)
class Mec:
    states: frozenset[int]
    enabled: dict[int, tuple[int, ...]]

    def pairs(self) -> set[tuple[int, int]]:
        return {(s, a) for s, acts in self.enabled.items() for a in acts}


def tarjan(n: int, succ: Callable[[int], Iterable[int]]) -> list[list[int]]:
    """Strongly connected components of the digraph on ``range(n)``.

    Iterative, so deep graphs do not hit the recursion limit. Components come
    out in reverse topological order (sinks first).
    """
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            pushed = False
            for w in it:
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(succ(w))))
                    pushed = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if pushed:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def reachable_states(g: Wmdp | Wdtmc, start: int) -> set[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for t in g.successors(s):
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return seen


def scc_decompose(c: Wdtmc | Wmdp) -> SccPartition:
    """SCCs ordered by smallest member, each flagged bottom if no edge leaves it."""
    succ = [sorted(c.successors(s)) for s in range(c.n_states)]
    comps = sorted((frozenset(cc) for cc in tarjan(c.n_states, succ.__getitem__)), key=min)
    bottom = [all(t in comp for s in comp for t in succ[s]) for comp in comps]
    return SccPartition(comps, bottom)


def bsccs_reachable(c: Wdtmc) -> list[frozenset[int]]:
    reach = reachable_states(c, c.init)
    return [b for b in scc_decompose(c).bottoms() if b & reach]


def mec_decompose(m: Wmdp, check_pruning: bool = False) -> list[Mec]:
    """Maximal end components of ``m`` ordered by smallest state.

    Works on the bipartite graph of state vertices ``0..n-1`` and one vertex per
    state-action pair; a pair is pruned as soon as one of its successors falls
    in another SCC than the pair itself, until nothing changes.
    """
    n = m.n_states
    pairs = [(s, k) for s, k, _ in m.state_actions()]
    supports = [m.actions[s][k].support() for s, k in pairs]
    alive = [True] * len(pairs)
    of_state: list[list[int]] = [[] for _ in range(n)]
    for v, (s, _) in enumerate(pairs):
        of_state[s].append(v)

    def succ(u: int) -> list[int]:
        if u < n:
            return [n + v for v in of_state[u] if alive[v]]
        return supports[u - n]

    while True:
        comp_of = [0] * (n + len(pairs))
        for cid, comp in enumerate(tarjan(n + len(pairs), succ)):
            for u in comp:
                comp_of[u] = cid
        doomed = [v for v in range(len(pairs)) if alive[v]
                  and any(comp_of[t] != comp_of[n + v] for t in supports[v])]
        if not doomed:
            break
        for v in doomed:
            if check_pruning:
                assert any(comp_of[t] != comp_of[pairs[v][0]] for t in supports[v])
            alive[v] = False

    groups: dict[int, dict[int, list[int]]] = {}
    for v, (s, k) in enumerate(pairs):
        if alive[v]:
            groups.setdefault(comp_of[n + v], {}).setdefault(s, []).append(k)
    mecs = [Mec(frozenset(en), {s: tuple(ks) for s, ks in sorted(en.items())})
            for en in groups.values()]
    return sorted(mecs, key=lambda mc: min(mc.states))


def is_end_component(m: Wmdp, pairs: Sequence[tuple[int, int]]) -> bool:
    """Closedness plus strong connectivity of the sub-structure given by ``pairs``."""
    states = {s for s, _ in pairs}
    if not states:
        return False
    adj: dict[int, set[int]] = {s: set() for s in states}
    for s, k in pairs:
        sup = m.actions[s][k].support()
        if any(t not in states for t in sup):
            return False
        adj[s].update(sup)
    order = sorted(states)
    idx = {s: i for i, s in enumerate(order)}
    comps = tarjan(len(order), lambda i: [idx[t] for t in adj[order[i]]])
    return len(comps) == 1
