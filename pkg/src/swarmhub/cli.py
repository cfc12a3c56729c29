"""Command line entry points: run, batch, serve, replay."""
from __future__ import annotations

import argparse
import json
import os
import sys
from multiprocessing import Pool
from pathlib import Path

from .collective import Model
from .engine import run_headless
from .replay import replay as replay_log
from .report import batch_report, trial_report
from .scenario import Scenario, ScenarioError, load_scenario, scenario_from_dict

DEFAULT_OUT = os.environ.get("SWARMHUB_OUT", "swarmhub-out")


def _scenario_from_args(args) -> Scenario:
    if getattr(args, "scenario", None):
        sc = load_scenario(args.scenario)
    else:
        components = {"easy": ["easy"], "hard": ["hard"],
                      "full": ["easy", "hard"]}[args.difficulty]
        sc = scenario_from_dict({"components": components})
    if getattr(args, "seed", None) is not None:
        sc.seed = args.seed
    return sc


def cmd_run(args) -> int:
    sc = _scenario_from_args(args)
    model = Model(args.model) if args.model else sc.model
    result = run_headless(sc, model=model, policy=args.policy, seed=sc.seed,
                          probe_responder=args.probe_responder)
    out = Path(args.out) / f"{model.value}-{args.policy or 'null'}-seed{sc.seed}"
    paths = result.save(out)
    print(trial_report(result))
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


def _batch_worker(job) -> dict:
    doc, model, policy, seed = job
    sc = scenario_from_dict(doc)
    sc.seed = seed
    result = run_headless(sc, model=Model(model), policy=policy, seed=seed)
    return result.to_dict()


def cmd_batch(args) -> int:
    sc = _scenario_from_args(args)
    doc = sc.to_dict()
    seeds = range(args.seed_start, args.seed_start + args.seeds)
    jobs = [(doc, args.model or sc.model.value, args.policy, s) for s in seeds]
    if args.workers > 1:
        with Pool(args.workers) as pool:
            results = pool.map(_batch_worker, jobs)
    else:
        results = [_batch_worker(j) for j in jobs]
    report = batch_report(results)
    print(report)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "batch-report.txt").write_text(report)
    (out / "batch-results.json").write_text(json.dumps(results))
    print(f"saved: {out / 'batch-report.txt'}")
    return 0


def cmd_serve(args) -> int:
    sc = _scenario_from_args(args)
    model = Model(args.model) if args.model else sc.model
    from .server import serve
    static = args.static if args.static else None
    print(f"serving on ws://{args.host}:{args.port}/session "
          f"(model {model.value}, components {[c.value for c in sc.components]})")
    serve(sc, model, port=args.port, host=args.host, policy=args.policy,
          pace=args.pace, static_dir=static)
    return 0


def cmd_replay(args) -> int:
    result = replay_log(args.log)
    print(trial_report(result))
    if args.out:
        Path(args.out).write_text(trial_report(result))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="swarmhub",
                                description="hub-based collective best-of-n simulator")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp, policy_default=None):
        sp.add_argument("--scenario", help="scenario JSON file")
        sp.add_argument("--difficulty", choices=["easy", "hard", "full"],
                        default="full", help="used when no scenario file is given")
        sp.add_argument("--model", choices=["M1", "M2", "M3"], default=None)
        sp.add_argument("--policy", choices=["null", "greedy", "consensus"],
                        default=policy_default)
        sp.add_argument("--seed", type=int, default=None)

    run_p = sub.add_parser("run", help="run one headless trial")
    common(run_p)
    run_p.add_argument("--probe-responder", choices=["none", "oracle"], default="none")
    run_p.add_argument("--out", default=DEFAULT_OUT)
    run_p.set_defaults(fn=cmd_run)

    batch_p = sub.add_parser("batch", help="run a seed range and aggregate")
    common(batch_p)
    batch_p.add_argument("--seeds", type=int, default=20)
    batch_p.add_argument("--seed-start", type=int, default=0)
    batch_p.add_argument("--workers", type=int, default=max(1, os.cpu_count() or 1))
    batch_p.add_argument("--out", default=DEFAULT_OUT)
    batch_p.set_defaults(fn=cmd_batch)

    serve_p = sub.add_parser("serve", help="serve a live operator session")
    common(serve_p)
    serve_p.add_argument("--port", type=int, default=8750)
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--pace", type=float, default=1.0,
                         help="real-time factor; 0 runs unpaced")
    serve_p.add_argument("--static", default=None, help="console bundle directory")
    serve_p.set_defaults(fn=cmd_serve)

    replay_p = sub.add_parser("replay", help="recompute metrics from an event log")
    replay_p.add_argument("log")
    replay_p.add_argument("--out", default=None)
    replay_p.set_defaults(fn=cmd_replay)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
