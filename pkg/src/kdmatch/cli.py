"""Command-line harness: ratios, tables, runs, adversary battles and sweeps.

Exit status: 0 all checks passed, 1 an audit or invariant failed,
2 usage error, 3 unknown policy or unusable configuration, 4 invalid
parameters or sweep grid, 5 I/O or instance-format error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any

from .adversary import run_adversary, run_adversary_variable, verify_transcript
from .engine import POLICIES, dual_feasibility_errors, make_policy, run_stream
from .errors import ConfigurationError, InstanceFormatError, ParameterError
from .instance import (
    Instance,
    format_rational,
    random_instance,
    read_instance,
    validate_kd_graph,
    write_instance,
)
from .offline import max_b_matching, max_weight_b_matching
from .ratio import Params, competitive_ratio, min_competitive_ratio
from .table import build_table, table_to_csv

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_POLICY, EXIT_PARAMS, EXIT_IO = 0, 1, 2, 3, 4, 5
OUT_DIR_ENV = "KDMATCH_OUT_DIR"


class GridError(ValueError):
    pass


def truncated_decimal(q: Fraction, digits: int = 12) -> str:
    """Decimal expansion truncated (not rounded) to ``digits`` places."""
    sign = "-" if q < 0 else ""
    q = abs(q)
    scaled = q.numerator * 10**digits // q.denominator
    whole, frac = divmod(scaled, 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


@dataclass
class ExperimentRecord:
    command: str
    params: dict[str, Any]
    policy: str
    P: str
    D: str | None
    OPT: str
    ratio: str
    audit_pass: int
    audit_total: int
    seed: int | None = None
    ok: bool = True
    failures: list[str] = field(default_factory=list)
    timestamp: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def evaluate(inst: Instance, policy_name: str, command: str, params: dict,
             seed: int | None = None, extra_failures: list[str] | None = None) -> ExperimentRecord:
    """Run ``policy_name`` on ``inst`` and gather every end-state check."""
    policy = make_policy(policy_name)
    result = run_stream(inst, policy)
    weighted = policy.weighted
    opt = max_weight_b_matching(inst) if weighted else Fraction(max_b_matching(inst))
    failures = list(extra_failures or [])
    if not result.audits_ok:
        bad = [a.request for a in result.audits if not a.passed]
        failures.append(f"{len(bad)} step audits failed (first request {bad[0]})")
    if result.P > opt:
        failures.append(f"P = {result.P} exceeds OPT = {opt}")
    if policy.tracks_duals and validate_kd_graph(inst).is_kd_graph:
        if any(x != 1 for x in result.state.x):
            failures.append("final duals not all 1")
        if dual_feasibility_errors(inst, result):
            failures.append("final dual infeasible")
        if opt > result.D:
            failures.append(f"OPT = {opt} exceeds dual D = {result.D}")
        if result.c_effective is not None and result.P < result.c_effective * opt:
            failures.append(f"P/OPT below {result.c_effective}")
    ratio = "n/a" if opt == 0 else format_rational(result.P / opt)
    return ExperimentRecord(
        command=command,
        params=params,
        policy=policy.name,
        P=format_rational(result.P),
        D=format_rational(result.D) if policy.tracks_duals else None,
        OPT=format_rational(opt),
        ratio=ratio,
        audit_pass=result.audit_passes,
        audit_total=len(result.audits),
        seed=seed,
        ok=not failures,
        failures=failures,
    )


def adversary_record(t, policy_name: str, command: str, params: dict) -> ExperimentRecord:
    """Verify a transcript, then replay its instance through :func:`evaluate`."""
    failures = verify_transcript(t).failures
    rec = evaluate(t.instance, policy_name, command, params, extra_failures=failures)
    weighted = make_policy(policy_name).weighted
    live = sum(t.instance.servers[dec.server].weight if weighted else 1
               for dec in t.decisions if dec.server is not None)
    if rec.P != format_rational(live):
        rec.failures.append(f"replay P = {rec.P} differs from live run {live}")
        rec.ok = False
    return rec


def _capacities(text: str) -> list[int]:
    try:
        caps = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad capacity list {text!r}") from None
    if not caps or min(caps) < 1:
        raise argparse.ArgumentTypeError("capacities must be positive integers")
    return caps


def _out_path(name: str | None, default: str) -> Path:
    path = Path(name or default)
    if not path.is_absolute() and name is None:
        path = Path(os.environ.get(OUT_DIR_ENV, ".")) / path
    return path


def _append(path: Path, line: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(line + "\n")


def cmd_ratio(args) -> int:
    if args.capacities is None and args.b is None:
        raise ParameterError("give -b or --capacities")
    if args.d == 1:
        value = Fraction(1)
    elif args.capacities is not None:
        value = min_competitive_ratio(args.k, args.d, args.capacities)
    else:
        value = competitive_ratio(Params(args.k, args.d, args.b))
    print(f"{format_rational(value)} ≈ {truncated_decimal(value)}")
    if args.k < args.d:
        print("note: k < d, optimality of this ratio is not established", file=sys.stderr)
    return EXIT_OK


def cmd_table(args) -> int:
    t = build_table(Params(args.k, args.d, args.b))
    if args.csv:
        sys.stdout.write(table_to_csv(t))
        return EXIT_OK
    print(f"c* = {format_rational(t.c_star)}, 1/(b c*) = {format_rational(t.saturation)}")
    for l in range(t.params.b, -1, -1):
        cells = ["" if v is None else format_rational(v) for v in t.values[l]]
        print(f"l={l}: " + "  ".join(f"{c:>12}" for c in cells))
    return EXIT_OK


def cmd_run(args) -> int:
    inst = read_instance(args.instance)
    rec = evaluate(inst, args.policy, "run", {"instance": str(args.instance), "k": inst.k, "d": inst.d})
    print(rec.to_json())
    if args.out:
        _append(Path(args.out), rec.to_json())
    return EXIT_OK if rec.ok else EXIT_CHECK


def cmd_adversary(args) -> int:
    if args.capacities:
        t = run_adversary_variable(args.k, args.d, args.capacities, args.policy, args.scale)
        params = {"k": args.k, "d": args.d, "capacities": sorted(set(args.capacities)), "scale": args.scale}
    else:
        t = run_adversary(Params(args.k, args.d, args.b), args.policy, args.scale)
        params = {"k": args.k, "d": args.d, "b": args.b, "scale": args.scale}
    rec = adversary_record(t, args.policy, "adversary", params)
    print(rec.to_json())
    if args.emit_instance:
        write_instance(t.instance, args.emit_instance)
    if args.out:
        _append(Path(args.out), rec.to_json())
    return EXIT_OK if rec.ok else EXIT_CHECK


def cmd_verify(args) -> int:
    inst = read_instance(args.instance)
    rep = validate_kd_graph(inst)
    print(json.dumps(asdict(rep)))
    return EXIT_OK if rep.is_kd_graph else EXIT_CHECK


GRID_KEYS = {"k", "d", "b", "policy", "seed", "n", "scale", "mode"}


def _grid_values(key: str, text: str) -> list:
    if key in ("policy", "mode"):
        vals = [v.strip() for v in text.split(",") if v.strip()]
    else:
        vals = []
        for part in text.split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = part.split("..", 1)
                vals.extend(range(int(lo), int(hi) + 1))
            elif part:
                vals.append(int(part))
    if not vals:
        raise GridError(f"no values for {key!r}")
    return vals


def parse_grid(spec: str) -> list[dict]:
    """``"k=2,3;d=2;b=1..4;policy=wa,greedy"`` -> list of cells (cartesian product)."""
    axes: dict[str, list] = {}
    for chunk in spec.split(";"):
        if not chunk.strip():
            continue
        if "=" not in chunk:
            raise GridError(f"grid entry {chunk!r} lacks '='")
        key, text = (s.strip() for s in chunk.split("=", 1))
        if key not in GRID_KEYS:
            raise GridError(f"unknown grid key {key!r}; allowed: {sorted(GRID_KEYS)}")
        try:
            axes[key] = _grid_values(key, text)
        except ValueError as exc:
            raise GridError(f"bad values for {key!r}: {exc}") from None
    axes.setdefault("policy", ["wa"])
    axes.setdefault("mode", ["adversary"])
    axes.setdefault("seed", [0])
    axes.setdefault("n", [64])
    axes.setdefault("scale", [1])
    for key in ("k", "d", "b"):
        if key not in axes:
            raise GridError(f"grid must set {key!r}")
    for pol in axes["policy"]:
        if pol not in POLICIES:
            raise ConfigurationError(f"unknown policy {pol!r}")
    for mode in axes["mode"]:
        if mode not in ("adversary", "random"):
            raise GridError(f"mode must be adversary or random, got {mode!r}")
    keys = sorted(axes)
    cells = [dict(zip(keys, combo)) for combo in itertools.product(*(axes[k] for k in keys))]
    # The adversary is only defined for k >= d.
    cells = [c for c in cells if c["mode"] == "random" or c["k"] >= c["d"]]
    if not cells:
        raise GridError("grid is empty after dropping adversary cells with k < d")
    return cells


def run_cell(cell: dict) -> str:
    """One sweep cell -> one JSON line.  Deterministic given the cell."""
    p = Params(cell["k"], cell["d"], cell["b"])
    if cell["mode"] == "adversary":
        t = run_adversary(p, cell["policy"], cell["scale"])
        rec = adversary_record(t, cell["policy"], "sweep", cell)
    else:
        inst = random_instance(p, cell["n"], cell["seed"])
        rec = evaluate(inst, cell["policy"], "sweep", cell, seed=cell["seed"])
    return rec.to_json()


def cmd_sweep(args) -> int:
    cells = parse_grid(args.grid)
    out = _out_path(args.out, "sweep.jsonl")
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            lines = pool.map(run_cell, cells)
            ok = _write_lines(out, lines)
    else:
        ok = _write_lines(out, map(run_cell, cells))
    print(f"{len(cells)} cells -> {out}")
    return EXIT_OK if ok else EXIT_CHECK


def _write_lines(out: Path, lines) -> bool:
    ok = True
    for line in lines:
        _append(out, line)
        rec = json.loads(line)
        ok &= rec["ok"]
    return ok


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kdmatch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def kd(p, need_b=True):
        p.add_argument("-k", type=int, required=True)
        p.add_argument("-d", type=int, required=True)
        p.add_argument("-b", type=int, required=need_b)

    p = sub.add_parser("ratio", help="optimal competitive ratio c*")
    kd(p, need_b=False)
    p.add_argument("--capacities", type=_capacities)
    p.set_defaults(func=cmd_ratio)

    p = sub.add_parser("table", help="dump the value table V(l, delta)")
    kd(p)
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("run", help="run a policy on an instance file")
    p.add_argument("instance")
    p.add_argument("--policy", default="wa")
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("adversary", help="play the adaptive adversary against a policy")
    kd(p, need_b=False)
    p.add_argument("--capacities", type=_capacities)
    p.add_argument("--policy", default="wa")
    p.add_argument("--scale", type=int, default=1)
    p.add_argument("--emit-instance")
    p.add_argument("--out")
    p.set_defaults(func=cmd_adversary)

    p = sub.add_parser("sweep", help="run a parameter grid, appending JSONL records")
    p.add_argument("--grid", required=True, help='e.g. "k=2,3;d=2;b=1..4;policy=wa,greedy;mode=adversary"')
    p.add_argument("--out", help=f"output file (default ${OUT_DIR_ENV}/sweep.jsonl)")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="check that an instance file is a (k,d)-graph")
    p.add_argument("instance")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "policy", None) is not None and args.policy not in POLICIES:
        print(f"error: unknown policy {args.policy!r}; choose from {', '.join(POLICIES)}", file=sys.stderr)
        return EXIT_POLICY
    if args.command == "adversary" and args.b is None and args.capacities is None:
        print("error: give -b or --capacities", file=sys.stderr)
        return EXIT_PARAMS
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_POLICY
    except (ParameterError, GridError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except (OSError, InstanceFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
