"""Command-line front end: reproducible experiments with CSV + figure output.

Every subcommand echoes its fully resolved configuration as ``#`` comment
lines at the top of the CSV, followed by a deterministic body: the same
(subcommand, configuration, seed) always produces byte-identical rows.
Wall-clock timings go into trailing comment lines so they never perturb
the body.  Verification subcommands exit with code 2 when a checked
invariant fails, so CI can gate on them.

A companion PNG is rendered next to each CSV unless --no-plot is given.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from . import bounds as bnd
from .attack import AttackConfig, exact_attack_advantage, make_attack_distinguisher
from .faultlab import (
    AdversaryScript,
    FaultSpec,
    FSSetup,
    INDEX_TARGETS,
    ScriptStep,
    UFCMA,
    UFCMA0,
    UFFCMA,
    UFNFCMA,
    UFRMA,
    enumerate_faultsign_joint,
    enumerate_sim_joint,
    make_forging_adversary,
    reduction_b_cma0,
    run_game,
)
from .purified import (
    averaged_classical_density,
    epsilon_x,
    random_circuit,
    reduced_adv_density,
    run_circuit_purified,
    support_size,
    trace_distance,
)
from .reprogame import ReproConfig, estimate_advantage
from .sigcore import make_challenge_oracle, schnorr_toy, split_exponent_toy, tv_distance

EXIT_INVARIANT = 2


def _workers(args) -> int:
    if args.workers:
        return args.workers
    return min(4, os.cpu_count() or 1)


def ordered_map(fn, items, workers: int):
    """Map over items in a thread pool, results in input order."""
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def write_csv(path, config: dict, columns, rows, timings=None) -> None:
    lines = [f"# qreprolab {__version__}"]
    for key in sorted(config):
        lines.append(f"# {key}: {config[key]}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in columns))
    body = "\n".join(lines) + "\n"
    if timings:
        body += "".join(f"# {k}: {v:.3f}\n" for k, v in timings.items())
    if path == "-":
        sys.stdout.write(body)
    else:
        with open(path, "w") as fh:
            fh.write(body)


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def _maybe_plot(args, render_name: str, rows, out: str, **kwargs) -> None:
    if args.no_plot or out == "-" or not rows:
        return
    from . import plotting  # deferred: matplotlib import is slow

    stem, _ = os.path.splitext(out)
    getattr(plotting, render_name)(rows, stem + ".png", **kwargs)


def _parse_grid(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok]


# ---------------------------------------------------------------------------
# attack


def cmd_attack(args) -> int:
    qs = _parse_grid(args.q)
    points = [(args.n, args.m, q) for q in qs]
    t0 = time.perf_counter()

    def one(point):
        n, m, q = point
        cfg = AttackConfig(n=n, m=m, q=q)
        exact = exact_attack_advantage(cfg, seed=args.seed)
        mc_adv = mc_ci = float("nan")
        if args.trials:
            game_cfg = ReproConfig(n1=n, n2=0, m=m, big_r=1, b=0, seed=args.seed)
            mc_adv, mc_ci = estimate_advantage(
                game_cfg, make_attack_distinguisher(cfg), args.trials
            )
        return {
            "n": n, "m": m, "q": q, "R": 1, "trials": args.trials,
            "exact_adv": exact.advantage, "p_same": exact.p_same, "p_diff": exact.p_diff,
            "mc_adv": mc_adv, "mc_ci": mc_ci,
            "lower_bound": exact.lower, "upper_bound": exact.upper,
        }

    rows = ordered_map(one, points, _workers(args))
    config = {"subcommand": "attack", "n": args.n, "m": args.m, "q": args.q,
              "trials": args.trials, "seed": args.seed}
    columns = ["n", "m", "q", "R", "trials", "exact_adv", "p_same", "p_diff",
               "mc_adv", "mc_ci", "lower_bound", "upper_bound"]
    write_csv(args.out, config, columns, rows,
              {"wall_time_s": time.perf_counter() - t0})
    _maybe_plot(args, "plot_attack_rows", rows, args.out)
    violations = [
        r for r in rows
        if not (r["lower_bound"] - 1e-12 <= r["exact_adv"] <= r["upper_bound"] + 1e-12)
    ]
    if violations:
        print(f"bound sandwich violated on {len(violations)} row(s)", file=sys.stderr)
        return EXIT_INVARIANT
    return 0


# ---------------------------------------------------------------------------
# superposition-oracle verification


def cmd_supo_verify(args) -> int:
    if args.n > 4 or args.m != 1:
        print("superposition-oracle verification runs at n <= 4, m = 1", file=sys.stderr)
        return 1
    t0 = time.perf_counter()
    rng = np.random.Generator(np.random.Philox(key=args.seed))
    rows = []
    failed = False
    for circuit in range(args.circuits):
        steps = random_circuit(args.n, args.m, args.depth, rng)
        queries = sum(1 for s in steps if s[0] == "query")
        po = run_circuit_purified(args.n, args.m, steps)
        dist = trace_distance(
            reduced_adv_density(po),
            averaged_classical_density(args.n, args.m, steps),
        )
        eps = [epsilon_x(po, x) for x in range(1 << args.n)]
        mean_overlap = float(np.mean([1.0 - e for e in eps]))
        slack = mean_overlap - (1.0 - queries / (1 << args.n))
        support = support_size(po) if args.n <= 3 else -1
        row = {
            "circuit": circuit, "depth": args.depth, "queries": queries,
            "trace_distance": dist, "mean_overlap": mean_overlap,
            "bound1_slack": slack, "support_size": support,
        }
        for x, e in enumerate(eps):
            row[f"eps_x{x}"] = e
        rows.append(row)
        if dist > 1e-9 or slack < -1e-12 or (support >= 0 and support > queries):
            failed = True
    config = {"subcommand": "supo-verify", "n": args.n, "m": args.m,
              "depth": args.depth, "circuits": args.circuits, "seed": args.seed}
    columns = ["circuit", "depth", "queries", "trace_distance", "mean_overlap",
               "bound1_slack", "support_size"] + [f"eps_x{x}" for x in range(1 << args.n)]
    write_csv(args.out, config, columns, rows,
              {"wall_time_s": time.perf_counter() - t0})
    _maybe_plot(args, "plot_supo_rows", rows, args.out)
    if failed:
        print("superposition-oracle equivalence check failed", file=sys.stderr)
        return EXIT_INVARIANT
    return 0


# ---------------------------------------------------------------------------
# bounds


def _parse_value(text: str):
    text = text.strip()
    if text.startswith("2^"):
        return bnd.Log2(float(text[2:]))
    if "/" in text:
        return Fraction(text)
    if "." in text or "e" in text or "E" in text:
        return float(text)
    return int(text)


def read_params(path: str) -> dict:
    params = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            params[key.strip()] = _parse_value(value)
    return params


def _parse_sweep(text: str):
    """``name=v1,v2,...`` or ``name=start:stop:xK`` (geometric by K)."""
    name, _, spec = text.partition("=")
    if ":" in spec:
        start_s, stop_s, step_s = spec.split(":")
        if not step_s.startswith("x"):
            raise ValueError("sweep step must look like x2")
        start, stop, factor = float(start_s), float(stop_s), float(step_s[1:])
        vals = []
        v = start
        while v <= stop * (1 + 1e-12):
            vals.append(v)
            v *= factor
        return name.strip(), vals
    return name.strip(), [_parse_value(tok) for tok in spec.split(",") if tok]


def cmd_bounds(args) -> int:
    t0 = time.perf_counter()
    if args.preset == "dilithium-footnote":
        preset = bnd.dilithium_footnote_preset()
        rows = [{
            "bound": "fs-cma-sizing",
            "q_s_log2": preset["q_s_log2"], "q_h_log2": preset["q_h_log2"],
            "entropy_bits": preset["entropy_bits"],
            "entropy_bytes": preset["entropy_bytes"],
            "relative_increase": preset["relative_increase"],
            "log2_value": preset["alpha_log2"], "clamped": 0,
        }]
        columns = ["bound", "q_s_log2", "q_h_log2", "entropy_bits", "entropy_bytes",
                   "relative_increase", "log2_value", "clamped"]
        config = {"subcommand": "bounds", "preset": args.preset}
        write_csv(args.out, config, columns, rows,
                  {"wall_time_s": time.perf_counter() - t0})
        ok = abs(preset["entropy_bytes"] - 32.0) < 0.5 and \
            abs(preset["relative_increase"] - 0.016) < 0.001
        if not ok:
            print("sizing preset drifted from the expected figures", file=sys.stderr)
            return EXIT_INVARIANT
        return 0

    if not args.bound:
        print("--bound or --preset is required", file=sys.stderr)
        return 1
    bound = bnd.BOUNDS[args.bound]
    params = read_params(args.params) if args.params else {}
    sweep_name, sweep_vals = (None, [None])
    if args.sweep:
        sweep_name, sweep_vals = _parse_sweep(args.sweep)
    rows = []
    for v in sweep_vals:
        p = dict(params)
        if sweep_name:
            p[sweep_name] = v
        missing = [name for name in bound.params if name not in p]
        if missing:
            print(f"missing parameters: {missing}", file=sys.stderr)
            return 1
        res = bound.fn(*[p[name] for name in bound.params], mode="log2")
        row = {"bound": args.bound}
        for name in bound.params:
            row[name] = p[name].value if isinstance(p[name], bnd.Log2) else p[name]
        row["log2_value"] = res.log2_value
        row["clamped"] = int(res.clamped)
        rows.append(row)
    columns = ["bound", *bound.params, "log2_value", "clamped"]
    config = {"subcommand": "bounds", "bound": args.bound, "params": args.params or "",
              "sweep": args.sweep or ""}
    write_csv(args.out, config, columns, rows,
              {"wall_time_s": time.perf_counter() - t0})
    _maybe_plot(args, "plot_bounds_rows", rows, args.out, sweep_param=sweep_name)
    return 0


# ---------------------------------------------------------------------------
# games


def _scheme_by_name(name: str):
    if name == "schnorr":
        return schnorr_toy()
    if name == "split":
        return split_exponent_toy()
    raise ValueError(f"unknown scheme {name!r}")


def _load_script(args) -> AdversaryScript:
    if args.adversary.endswith(".json"):
        with open(args.adversary) as fh:
            raw = json.load(fh)
        steps = []
        for s in raw["steps"]:
            spec = None
            if "index" in s:
                spec = FaultSpec(index=s["index"], kind=s.get("kind", "id"),
                                 bit=s.get("bit", 0), value=s.get("value", 0),
                                 target=s.get("target"))
            steps.append(ScriptStep(op=s["op"], m=s["m"], nonce=s.get("nonce", 0), spec=spec))
        return AdversaryScript(steps=tuple(steps), final=tuple(raw["final"]))
    # built-in scripts, phrased in whichever oracle the game provides
    if args.game == "uf-f-cma":
        step = ScriptStep(op="faultsign", m=1, spec=FaultSpec(index=9, kind="id"))
    elif args.game == "uf-nf-cma":
        step = ScriptStep(op="nonce_faultsign", m=1, nonce=1,
                          spec=FaultSpec(index=1, kind="id"))
    else:
        step = ScriptStep(op="sign", m=1)
    if args.adversary == "replayer":
        steps = () if args.game in ("uf-cma0", "uf-rma") else (step,)
        final = ("none",) if not steps else ("replay", 0, 2)
        return AdversaryScript(steps=steps, final=final)
    if args.adversary == "sk-forger":
        steps = () if args.game in ("uf-cma0", "uf-rma") else (step,)
        return AdversaryScript(steps=steps, final=("forge_with_leaked_sk", 3))
    raise ValueError(f"unknown adversary script {args.adversary!r}")


_GAMES = {
    "uf-cma": lambda: UFCMA(),
    "uf-cma0": lambda: UFCMA0(),
    "uf-rma": lambda: UFRMA(n_messages=3),
    "uf-f-cma": lambda: UFFCMA(),
    "uf-nf-cma": lambda: UFNFCMA(),
}


def _all_one_bit_faults(scheme, index: int, msg_bits: int):
    widths = {
        "w": scheme.widths.w, "m": msg_bits, "pk": scheme.widths.pk,
        "c": scheme.widths.c, "z": scheme.widths.z, "st": scheme.widths.st,
        "sk": scheme.widths.sk,
    }
    specs = [FaultSpec(index=index, kind="id")]
    for target in INDEX_TARGETS[index]:
        for bit in range(widths[target]):
            specs.append(FaultSpec(index, "flip", bit, 0, target))
            specs.append(FaultSpec(index, "set", bit, 0, target))
            specs.append(FaultSpec(index, "set", bit, 1, target))
    return specs


def cmd_games(args) -> int:
    t0 = time.perf_counter()
    scheme = _scheme_by_name(args.scheme)

    if args.game == "sim-equality":
        rng = np.random.Generator(np.random.Philox(key=args.seed))
        pk, sk = scheme.keygen(rng)
        indices = [5, 6, 9] + ([4, 7] if scheme.subset_revealing else [])
        rows = []
        failed = False
        for index in indices:
            for spec in _all_one_bit_faults(scheme, index, msg_bits=8):
                if index in (4, 7) and spec.target in ("st", "sk") and not scheme.subset_revealing:
                    continue
                genuine = enumerate_faultsign_joint(scheme, sk, pk, m=5, spec=spec,
                                                    domain_bits=20, msg_bits=8)
                simulated = enumerate_sim_joint(scheme, pk, m=5, spec=spec,
                                                domain_bits=20, msg_bits=8)
                tv = tv_distance(genuine, simulated)
                rows.append({
                    "game": "sim-equality", "scheme": scheme.name, "seed": args.seed,
                    "fault_index": index,
                    "fault": f"{spec.kind}@{spec.target}:{spec.bit}:{spec.value}",
                    "tv_distance": float(tv), "outcome": int(tv == 0),
                })
                if tv != 0:
                    failed = True
        config = {"subcommand": "games", "game": args.game, "scheme": args.scheme,
                  "seed": args.seed}
        columns = ["game", "scheme", "seed", "fault_index", "fault", "tv_distance", "outcome"]
        write_csv(args.out, config, columns, rows,
                  {"wall_time_s": time.perf_counter() - t0})
        _maybe_plot(args, "plot_game_rows", rows, args.out)
        if failed:
            print("simulation/faulty-signing distributions differ", file=sys.stderr)
            return EXIT_INVARIANT
        return 0

    if args.game == "reduction-cma0":
        def episode(i):
            seed = (args.seed << 16) | i
            out = reduction_b_cma0(scheme, _KeyedForger(scheme, [1, 2], 9), seed)
            return {"game": "reduction-cma0", "scheme": scheme.name, "seed": seed,
                    "fault_index": -1, "fault": "",
                    "outcome": int(out.reduction_won),
                    "a_won": int(out.adversary_won), "b_won": int(out.reduction_won)}

        rows = ordered_map(episode, list(range(args.episodes)), _workers(args))
        config = {"subcommand": "games", "game": args.game, "scheme": args.scheme,
                  "episodes": args.episodes, "seed": args.seed}
        columns = ["game", "scheme", "seed", "fault_index", "fault", "outcome",
                   "a_won", "b_won"]
        write_csv(args.out, config, columns, rows,
                  {"wall_time_s": time.perf_counter() - t0})
        _maybe_plot(args, "plot_game_rows", rows, args.out)
        if any(r["a_won"] and not r["b_won"] for r in rows):
            print("reduction lost a winning episode", file=sys.stderr)
            return EXIT_INVARIANT
        return 0

    game = _GAMES[args.game]()
    script = _load_script(args)
    setup = FSSetup(scheme=scheme)
    from .sigcore import fs_signature_scheme
    from .oracle import ProgrammableOracle

    def episode(i):
        seed = (args.seed << 16) | i
        if args.game in ("uf-f-cma", "uf-nf-cma"):
            outcome, transcript = run_game(game, setup, script, seed)
        else:
            h = ProgrammableOracle(make_challenge_oracle(scheme, 20, seed ^ 0xC0FFEE))
            sig = fs_signature_scheme(scheme, h, variant="standard")
            outcome, transcript = run_game(game, sig, script, seed)
        row = {"game": game.name, "scheme": scheme.name, "seed": seed,
               "fault_index": -1, "fault": args.adversary, "outcome": outcome,
               "q_s": transcript.sign_queries}
        for idx in sorted(INDEX_TARGETS):
            row[f"q_s_{idx}"] = transcript.per_index_queries.get(idx, 0)
        return row

    rows = ordered_map(episode, list(range(args.episodes)), _workers(args))
    config = {"subcommand": "games", "game": args.game, "scheme": args.scheme,
              "adversary": args.adversary, "episodes": args.episodes, "seed": args.seed}
    columns = ["game", "scheme", "seed", "fault_index", "fault", "outcome", "q_s"] + [
        f"q_s_{idx}" for idx in sorted(INDEX_TARGETS)
    ]
    write_csv(args.out, config, columns, rows,
              {"wall_time_s": time.perf_counter() - t0})
    _maybe_plot(args, "plot_game_rows", rows, args.out)
    return 0


class _KeyedForger:
    """Chosen-message winner that reads the public key it is handed and
    derives the matching secret key by exhaustive search (toy groups)."""

    def __init__(self, scheme, sign_messages, m_star):
        self.scheme = scheme
        self.sign_messages = sign_messages
        self.m_star = m_star

    def __call__(self, pk, sign_oracle, h, rng):
        sk = next(s for p, s in self.scheme.enumerate_keys() if p == pk)
        inner = make_forging_adversary(self.scheme, sk, self.sign_messages, self.m_star)
        return inner(pk, sign_oracle, h, rng)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qreprolab",
        description="Oracle-reprogramming games, the matching distinguisher, "
                    "fault-injection signature games, and bound evaluators.",
    )
    parser.add_argument("--workers", type=int, default=0,
                        help="worker threads for grids/episodes (0 = auto)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("attack", help="run the single-point distinguisher over a q grid")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--q", type=str, required=True, help="single value or comma list")
    p.add_argument("--trials", type=int, default=0,
                   help="Monte-Carlo trials per arm (0 = exact only)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str, default="-")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(fn=cmd_attack)

    p = sub.add_parser("supo-verify", help="check the superposition oracle against "
                                           "averaged classical tables")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--circuits", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str, default="-")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(fn=cmd_supo_verify)

    p = sub.add_parser("bounds", help="evaluate a bound over a parameter sweep")
    p.add_argument("--bound", type=str, choices=sorted(bnd.BOUNDS), default=None)
    p.add_argument("--params", type=str, default=None, help="key=value file; 2^k allowed")
    p.add_argument("--sweep", type=str, default=None,
                   help="name=v1,v2,... or name=start:stop:xK")
    p.add_argument("--preset", type=str, choices=["dilithium-footnote"], default=None)
    p.add_argument("--out", type=str, default="-")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(fn=cmd_bounds)

    p = sub.add_parser("games", help="run unforgeability game episodes")
    p.add_argument("--game", type=str, required=True,
                   choices=sorted(_GAMES) + ["sim-equality", "reduction-cma0"])
    p.add_argument("--scheme", type=str, default="schnorr", choices=["schnorr", "split"])
    p.add_argument("--adversary", type=str, default="replayer",
                   help="built-in script name or a .json script table")
    p.add_argument("--episodes", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str, default="-")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(fn=cmd_games)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
