import os
import random
import subprocess
import sys
import time
from fractions import Fraction

import networkx as nx
import pytest

from kdmatch import flow
from kdmatch.instance import Instance, RequestArrival, Server, random_instance
from kdmatch.offline import (
    flow_network,
    has_perfect_b_matching,
    max_b_matching,
    max_weight_b_matching,
    optimal_assignment,
)
from kdmatch.ratio import Params
from oracles import brute_force_b_matching, small_random_instance, unit_server_matching_size


def test_star_capacity_two():
    inst = Instance(1, 3, [Server(0, 2)], [RequestArrival(i, (0,)) for i in range(3)])
    assert max_b_matching(inst) == 2


def test_shared_single_server():
    inst = Instance(1, 1, [Server(0, 1), Server(1, 1)], [RequestArrival(0, (0,)), RequestArrival(1, (0,))])
    assert max_b_matching(inst) == 1
    assert not has_perfect_b_matching(inst)


def test_star_not_perfect():
    assert not has_perfect_b_matching(Instance(1, 1, [Server(0, 2)], [RequestArrival(0, (0,))]))


def test_heavy_server_wins():
    inst = Instance(1, 2, [Server(0, 1, Fraction(1)), Server(1, 1, Fraction(10))], [RequestArrival(0, (0, 1))])
    assert max_weight_b_matching(inst) == 10


def test_unit_weights_match_cardinality():
    inst = random_instance(Params(2, 3, 2), 12, 4)
    assert max_weight_b_matching(inst) == max_b_matching(inst)


def test_empty():
    inst = Instance(1, 1, [], [])
    assert max_b_matching(inst) == 0
    assert max_weight_b_matching(inst) == 0
    assert has_perfect_b_matching(inst)


@pytest.mark.parametrize("seed", range(200))
def test_brute_force(seed):
    inst = small_random_instance(seed)
    assert max_b_matching(inst) == brute_force_b_matching(inst)
    assert max_weight_b_matching(inst) == brute_force_b_matching(inst, weighted=True)


@pytest.mark.parametrize("seed", range(40))
def test_weighted_brackets(seed):
    inst = small_random_instance(seed)
    size = max_b_matching(inst)
    if not inst.servers:
        return
    weights = [s.weight for s in inst.servers]
    assert min(weights) * size <= max_weight_b_matching(inst) <= max(weights) * size


@pytest.mark.parametrize("seed", range(30))
def test_unit_server_blowup(seed):
    inst = random_instance(Params(2, 3, 3), 10, seed, capacities=[1, 2, 3])
    assert max_b_matching(inst) == unit_server_matching_size(inst)


@pytest.mark.parametrize("seed", range(20))
def test_assignment_is_feasible_and_optimal(seed):
    inst = small_random_instance(seed + 1000)
    assign = optimal_assignment(inst)
    assert len(assign) == max_b_matching(inst)
    load = [0] * len(inst.servers)
    nbrs = {a.id: a.neighbors for a in inst.arrivals}
    for r, s in assign.items():
        assert s in nbrs[r]
        load[s] += 1
    assert all(l <= s.capacity for l, s in zip(load, inst.servers))


@pytest.mark.parametrize("k,d,b", [(2, 2, 1), (2, 2, 4), (3, 2, 2), (3, 3, 2), (4, 3, 1)])
def test_valid_graphs_perfectly_matchable(k, d, b):
    for seed in range(100):
        inst = random_instance(Params(k, d, b), 3 * d, seed)
        assert has_perfect_b_matching(inst), seed


def _random_network(rng, n):
    tails, heads, caps = [], [], []
    for _ in range(rng.randint(0, 4 * n)):
        u, v = rng.randrange(n), rng.randrange(n)
        if u != v:
            tails.append(u)
            heads.append(v)
            caps.append(rng.randint(0, 9))
    return tails, heads, caps


@pytest.mark.parametrize("name", sorted(flow.backends()))
@pytest.mark.parametrize("seed", range(40))
def test_backend_against_networkx(name, seed):
    rng = random.Random(seed)
    n = rng.randint(2, 15)
    tails, heads, caps = _random_network(rng, n)
    value, flows = flow.backends()[name](n, tails, heads, caps, 0, n - 1)
    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    for u, v, c in zip(tails, heads, caps):
        if g.has_edge(u, v):
            g[u][v]["capacity"] += c
        else:
            g.add_edge(u, v, capacity=c)
    assert value == nx.maximum_flow_value(g, 0, n - 1)
    # flows are feasible and conserve at interior nodes
    net = [0] * n
    for u, v, c, f in zip(tails, heads, caps, flows):
        assert 0 <= f <= c
        net[u] -= f
        net[v] += f
    assert net[n - 1] == value == -net[0]
    assert all(x == 0 for x in net[1:n - 1])


def test_backends_agree_on_matchings():
    backs = flow.backends()
    for seed in range(20):
        inst = random_instance(Params(3, 2, 2), 25, seed)
        n, tails, heads, caps, _ = flow_network(inst)
        values = {name: f(n, tails, heads, caps, 0, 1)[0] for name, f in backs.items()}
        assert len(set(values.values())) == 1


def test_compiled_backend_built():
    assert "cython" in flow.backends()
    assert flow.BACKEND == ("python" if os.environ.get("KDMATCH_PURE_PYTHON") else "cython")


def test_pure_python_switch():
    code = (
        "from kdmatch import flow; from kdmatch.offline import max_b_matching;"
        "from kdmatch.instance import random_instance; from kdmatch.ratio import Params;"
        "print(flow.BACKEND, max_b_matching(random_instance(Params(2,2,2), 10, 0)))"
    )
    env = dict(os.environ, KDMATCH_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["python", "20"]


def test_hundred_thousand_edges():
    rng = random.Random(0)
    n_servers = 6000
    servers = [Server(i, rng.randint(1, 4)) for i in range(n_servers)]
    arrivals = [
        RequestArrival(j, tuple(rng.sample(range(n_servers), 3))) for j in range(34000)
    ]
    inst = Instance(2, 3, servers, arrivals)
    start = time.perf_counter()
    value = max_b_matching(inst)
    elapsed = time.perf_counter() - start
    assert 0 < value <= min(len(arrivals), inst.total_capacity)
    assert elapsed < 10, elapsed
