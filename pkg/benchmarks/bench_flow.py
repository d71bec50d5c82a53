"""Compare the compiled and pure-Python max-flow kernels on b-matching networks.

    python3 benchmarks/bench_flow.py --servers 2000 --requests 12000 --repeat 3
"""

import argparse
import random
import time

from kdmatch import flow
from kdmatch.instance import Instance, RequestArrival, Server
from kdmatch.offline import flow_network


def build(n_servers, n_requests, width, seed):
    rng = random.Random(seed)
    servers = [Server(i, rng.randint(1, 4)) for i in range(n_servers)]
    arrivals = [
        RequestArrival(j, tuple(rng.sample(range(n_servers), width))) for j in range(n_requests)
    ]
    return flow_network(Instance(2, width, servers, arrivals))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--servers", type=int, default=2000)
    ap.add_argument("--requests", type=int, default=12000)
    ap.add_argument("--width", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    n, tails, heads, caps, _ = build(args.servers, args.requests, args.width, args.seed)
    print(f"network: {n} nodes, {len(tails)} arcs")
    times = {}
    values = set()
    for name, fn in flow.backends().items():
        best = float("inf")
        for _ in range(args.repeat):
            start = time.perf_counter()
            value, _ = fn(n, tails, heads, caps, 0, 1)
            best = min(best, time.perf_counter() - start)
        values.add(value)
        times[name] = best
        print(f"{name:>7}: max flow {value}, best of {args.repeat}: {best * 1000:.1f} ms")
    if len(values) != 1:
        raise SystemExit(f"backends disagree: {values}")
    if "cython" in times:
        print(f"speedup: {times['python'] / times['cython']:.1f}x")


if __name__ == "__main__":
    main()
