"""Command line harness tying the stages into deterministic runs.

Subcommands cover the full path from preference triples to reports:
synth -> ingest -> build-vmr -> render -> respond -> score -> filter ->
train-toy -> metrics, plus gradcheck for the estimator oracles and
pipeline to run everything into one output tree. Exit codes: 0 success,
2 usage error, 3 data validation error (with an error JSON on stderr).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import parse_kv_file, resolve
from .filtering import AccuracyBand, compute_stats, filter_prompts, read_filter_report, write_filter_report, write_stats_csv
from .grpo import GrpoConfig
from .lab import (
    ExperimentConfig,
    LinearOptionPolicy,
    TaskKind,
    TaskSpec,
    ToyPolicy,
    finite_diff_grad,
    grad_rlvr,
    grad_verifree,
    grad_vmr,
    run_experiment,
    tasks_from_instances,
    train_policy,
)
from .metrics import metrics_report, read_step_counts, resolve_step_counts, write_metrics_report
from .seeding import derive_seed
from .synth import RESPONDER_NAMES, SyntheticSpec, scripted_rollouts, synth_triples
from .triples import load_triples, write_manifest, write_triples
from .verifier import read_rollouts, read_verdicts, score_batch, split_think_response, write_rollouts, write_verdicts
from .vmr import balance_tolerance, batch_build, position_balance, read_instances, render_prompt, write_instances

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3


def _fail(message: str, **details) -> int:
    payload: dict = {"error": "validation", "message": message}
    if details:
        payload["details"] = details
    print(json.dumps(payload, ensure_ascii=False, sort_keys=True), file=sys.stderr)
    return EXIT_VALIDATION


def _usage_fail(message: str) -> int:
    payload = {"error": "usage", "message": message}
    print(json.dumps(payload, ensure_ascii=False, sort_keys=True), file=sys.stderr)
    return EXIT_USAGE


def _echo_config(values: dict) -> None:
    print("config: " + json.dumps(values, ensure_ascii=False, sort_keys=True))


def _write_json(payload: dict, path: Path) -> None:
    path.write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def _file_values(args) -> dict[str, str]:
    return parse_kv_file(args.config) if getattr(args, "config", None) else {}


# ---------------------------------------------------------------- synth

def cmd_synth(args) -> int:
    fv = _file_values(args)
    seed = resolve(args.seed, fv, "seed", None, int)
    if seed is None:
        return _usage_fail("--seed is required")
    n_triples = resolve(args.n_triples, fv, "n_triples", 48, int)
    n_keywords = resolve(args.n_keywords, fv, "n_required_keywords", 3, int)
    config = {"n_triples": n_triples, "n_required_keywords": n_keywords, "seed": seed}
    _echo_config(config)
    spec = SyntheticSpec(n_triples=n_triples, n_required_keywords=n_keywords, seed=seed)
    triples = synth_triples(spec)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_triples(triples, args.out)
    print(f"wrote {len(triples)} triples to {args.out}")
    return EXIT_OK


# --------------------------------------------------------------- ingest

def cmd_ingest(args) -> int:
    out_dir = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    triples, manifest, rejected = load_triples(args.infile)
    if not triples:
        return _fail("no valid triples in input", source=str(args.infile))
    write_triples(triples, out_dir / "triples.valid.jsonl")
    write_manifest(manifest, out_dir / "manifest.json")
    with (out_dir / "rejections.jsonl").open("w", encoding="utf-8") as fh:
        for r in rejected:
            fh.write(json.dumps(
                {"line_number": r.line_number, "reason": r.reason.value}, sort_keys=True
            ))
            fh.write("\n")
    print(f"accepted {manifest.n_triples} triples, rejected {manifest.n_rejected_records} records")
    return EXIT_OK


# ------------------------------------------------------------ build-vmr

def cmd_build_vmr(args) -> int:
    fv = _file_values(args)
    seed = resolve(args.seed, fv, "seed", None, int)
    if seed is None:
        return _usage_fail("--seed is required")
    _echo_config({"seed": seed, "workers": args.workers})
    triples, _, rejected = load_triples(args.infile)
    if rejected:
        return _fail(
            "input contains invalid records; run ingest first",
            n_rejected=len(rejected),
        )
    if not triples:
        return _fail("no triples to build from", source=str(args.infile))
    instances = batch_build(triples, seed, workers=args.workers)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_instances(instances, args.out)
    balance = position_balance(instances)
    report = {
        "n_instances": len(instances),
        "fraction_correct_a": balance,
        "tolerance_3sigma": balance_tolerance(len(instances)),
    }
    if args.report:
        args.report.parent.mkdir(parents=True, exist_ok=True)
        _write_json(report, args.report)
    print(f"wrote {len(instances)} instances to {args.out} (fraction A: {balance:.4f})")
    return EXIT_OK


# --------------------------------------------------------------- render

def cmd_render(args) -> int:
    instances = read_instances(args.infile)
    if not instances:
        return _fail("no instances to render", source=str(args.infile))
    args.out.parent.mkdir(parents=True, exist_ok=True)
    n_collisions = 0
    with args.out.open("w", encoding="utf-8") as fh:
        for inst in instances:
            prompt = render_prompt(inst)
            if prompt.marker_collisions:
                n_collisions += 1
                print(
                    f"warning: instance {inst.triple_id} contains section markers: "
                    + ", ".join(prompt.marker_collisions),
                    file=sys.stderr,
                )
            fh.write(json.dumps(
                {
                    "instance_ref": prompt.instance_ref,
                    "text": prompt.text,
                    "marker_collisions": list(prompt.marker_collisions),
                },
                ensure_ascii=False,
                sort_keys=True,
            ))
            fh.write("\n")
    print(f"rendered {len(instances)} prompts to {args.out} ({n_collisions} with marker collisions)")
    return EXIT_OK


# -------------------------------------------------------------- respond

def cmd_respond(args) -> int:
    fv = _file_values(args)
    seed = resolve(args.seed, fv, "seed", None, int)
    if seed is None:
        return _usage_fail("--seed is required")
    group_size = resolve(args.group_size, fv, "group_size", 8, int)
    responder = resolve(args.responder, fv, "responder", "mixed")
    p = resolve(args.p, fv, "p", 0.75, float)
    _echo_config({"responder": responder, "group_size": group_size, "p": p, "seed": seed})
    instances = read_instances(args.instances)
    if not instances:
        return _fail("no instances to respond to", source=str(args.instances))
    rollouts = scripted_rollouts(instances, responder, group_size, seed, p=p)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_rollouts(rollouts, args.out)
    print(f"wrote {len(rollouts)} rollouts to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------- score

def cmd_score(args) -> int:
    instances = read_instances(args.instances)
    rollouts = read_rollouts(args.rollouts)
    if not rollouts:
        return _fail("no rollouts", source=str(args.rollouts))
    verdicts = score_batch(instances, rollouts)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_verdicts(verdicts, args.out)
    mean_reward = sum(v.reward for v in verdicts) / len(verdicts)
    print(f"scored {len(verdicts)} rollouts to {args.out} (mean reward: {mean_reward:.4f})")
    return EXIT_OK


# --------------------------------------------------------------- filter

def cmd_filter(args) -> int:
    fv = _file_values(args)
    lo = resolve(args.lo, fv, "lo", 0.0, float)
    hi = resolve(args.hi, fv, "hi", 0.85, float)
    _echo_config({"lo": lo, "hi": hi})
    band = AccuracyBand(lo=lo, hi=hi)
    verdicts = read_verdicts(args.verdicts)
    if not verdicts:
        return _fail("no verdicts", source=str(args.verdicts))
    stats = compute_stats(verdicts)
    kept, dropped = filter_prompts(stats, band)
    args.out_stats.parent.mkdir(parents=True, exist_ok=True)
    write_stats_csv(stats, args.out_stats)
    args.out_report.parent.mkdir(parents=True, exist_ok=True)
    write_filter_report(band, kept, dropped, args.out_report)
    print(f"kept {len(kept)} prompts, dropped {len(dropped)} (band [{band.lo}, {band.hi}])")
    return EXIT_OK


# ------------------------------------------------------------ train-toy

_EXPERIMENT_KEYS = (
    "estimator", "n_tasks", "n_latents", "n_answers", "group_size", "steps",
    "learning_rate", "seed", "updates_per_batch", "init_scale",
)


def _experiment_config(args, fv: dict[str, str]) -> ExperimentConfig | None:
    overrides: dict = {}
    for key in _EXPERIMENT_KEYS:
        cli_value = getattr(args, key, None)
        value = resolve(cli_value, fv, key, None)
        if value is not None:
            overrides[key] = value
    if overrides.get("seed") is None:
        return None
    return ExperimentConfig.from_dict(overrides)


def cmd_train_toy(args) -> int:
    fv = _file_values(args)
    config = _experiment_config(args, fv)
    if config is None:
        return _usage_fail("--seed is required")
    _echo_config(config.to_dict())
    if args.policy == "tabular":
        _, tasks, trace = run_experiment(config)
    else:
        if not args.instances:
            return _usage_fail("--instances is required for the linear policy")
        instances = read_instances(args.instances)
        if args.keep_report:
            dropped = set(read_filter_report(args.keep_report)["dropped_ids"])
            instances = [inst for inst in instances if inst.triple_id not in dropped]
        if not instances:
            return _fail("no instances left to train on")
        if config.estimator != "vmr":
            return _fail("linear policy training supports the vmr estimator only")
        tasks = tasks_from_instances(instances)
        config = dataclasses.replace(config, n_tasks=len(tasks))
        policy = LinearOptionPolicy.zeros(config.n_latents)
        trace = train_policy(policy, tasks, config)
    args.out_trace.parent.mkdir(parents=True, exist_ok=True)
    trace.to_csv(args.out_trace)
    summary = {
        "config": config.to_dict(),
        "policy": args.policy,
        "n_tasks": len(tasks),
        "final": dataclasses.asdict(trace.final),
    }
    if args.out_summary:
        args.out_summary.parent.mkdir(parents=True, exist_ok=True)
        _write_json(summary, args.out_summary)
    print(
        f"trained {len(trace)} steps: accuracy {trace.records[0].accuracy:.4f} "
        f"-> {trace.final.accuracy:.4f}, trace in {args.out_trace}"
    )
    return EXIT_OK


# -------------------------------------------------------------- metrics

def cmd_metrics(args) -> int:
    rollouts = read_rollouts(args.rollouts)
    if not rollouts:
        return _fail("no rollouts", source=str(args.rollouts))
    parsed = [split_think_response(r.raw_text) for r in rollouts]
    step_counts = None
    if args.step_counts:
        counts = read_step_counts(args.step_counts)
        step_counts = resolve_step_counts([r.prompt_id for r in rollouts], counts)
    per_rep = None
    if args.verdicts:
        per_rep = []
        for path in args.verdicts:
            verdicts = read_verdicts(path)
            if not verdicts:
                return _fail("no verdicts", source=str(path))
            per_rep.append(sum(v.reward for v in verdicts) / len(verdicts))
    report = metrics_report(parsed, per_rep_accuracies=per_rep, step_counts=step_counts)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_metrics_report(report, args.out)
    print(f"wrote metrics report to {args.out}")
    return EXIT_OK


# ------------------------------------------------------------- gradcheck

def cmd_gradcheck(args) -> int:
    fv = _file_values(args)
    seed = resolve(args.seed, fv, "seed", None, int)
    if seed is None:
        return _usage_fail("--seed is required")
    n_policies = resolve(args.n_policies, fv, "n_policies", 20, int)
    tolerance = resolve(args.tolerance, fv, "tolerance", 1e-6, float)
    _echo_config({"n_policies": n_policies, "seed": seed, "tolerance": tolerance})
    max_dev = 0.0
    identity_exact = True
    for i in range(n_policies):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, i))))
        n_contexts = int(rng.integers(1, 4))
        n_latents = int(rng.integers(1, 5))
        n_answers = int(rng.integers(2, 5))
        context = int(rng.integers(n_contexts))
        policy = ToyPolicy.random(n_contexts, n_latents, n_answers, rng)
        closed = TaskSpec(
            kind=TaskKind.CLOSED_ANSWER, context=context,
            reference=int(rng.integers(n_answers)),
        )
        fd = finite_diff_grad(policy, closed).values
        for grad_fn in (grad_rlvr, grad_verifree):
            max_dev = max(max_dev, float(np.abs(grad_fn(policy, closed).values - fd).max()))
        policy2 = ToyPolicy.random(n_contexts, n_latents, 2, rng)
        label = "A" if int(rng.integers(2)) == 0 else "B"
        mcq = TaskSpec(kind=TaskKind.MCQ, context=context, correct_label=label)
        fd2 = finite_diff_grad(policy2, mcq).values
        vmr_grad = grad_vmr(policy2, mcq).values
        max_dev = max(max_dev, float(np.abs(vmr_grad - fd2).max()))
        closed_eq = TaskSpec(
            kind=TaskKind.CLOSED_ANSWER, context=context,
            reference=0 if label == "A" else 1,
        )
        if not np.array_equal(vmr_grad, grad_rlvr(policy2, closed_eq).values):
            identity_exact = False
    ok = max_dev <= tolerance and identity_exact
    report = {
        "n_policies": n_policies,
        "max_abs_deviation": max_dev,
        "tolerance": tolerance,
        "identity_exact": identity_exact,
        "ok": ok,
    }
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        _write_json(report, args.out)
    print(
        f"gradcheck over {n_policies} policies: max deviation {max_dev:.3e} "
        f"(tolerance {tolerance:.1e}), identity exact: {identity_exact}"
    )
    return EXIT_OK if ok else 1


# ------------------------------------------------------------- pipeline

def cmd_pipeline(args) -> int:
    fv = _file_values(args)
    seed = resolve(args.seed, fv, "seed", None, int)
    if seed is None:
        return _usage_fail("--seed is required")
    knobs = {
        "seed": seed,
        "n_triples": resolve(args.n_triples, fv, "n_triples", 48, int),
        "n_required_keywords": resolve(args.n_keywords, fv, "n_required_keywords", 3, int),
        "group_size": resolve(args.group_size, fv, "group_size", 8, int),
        "responder": resolve(args.responder, fv, "responder", "mixed"),
        "p": resolve(args.p, fv, "p", 0.75, float),
        "reps": resolve(args.reps, fv, "reps", 4, int),
        "filter_lo": resolve(args.filter_lo, fv, "filter_lo", 0.0, float),
        "filter_hi": resolve(args.filter_hi, fv, "filter_hi", 0.85, float),
        "train_steps": resolve(args.train_steps, fv, "train_steps", 160, int),
        "train_latents": resolve(args.train_latents, fv, "train_latents", 2, int),
        "train_learning_rate": resolve(args.train_lr, fv, "train_learning_rate", 4.0, float),
    }
    _echo_config(knobs)
    out = args.out_dir
    for sub in ("inputs", "instances", "rollouts", "verdicts", "reports"):
        (out / sub).mkdir(parents=True, exist_ok=True)

    spec = SyntheticSpec(
        n_triples=knobs["n_triples"],
        n_required_keywords=knobs["n_required_keywords"],
        seed=seed,
    )
    triples = synth_triples(spec)
    write_triples(triples, out / "inputs" / "triples.jsonl")

    loaded, manifest, rejected = load_triples(out / "inputs" / "triples.jsonl")
    manifest = dataclasses.replace(manifest, source_path="inputs/triples.jsonl")
    write_triples(loaded, out / "inputs" / "triples.valid.jsonl")
    write_manifest(manifest, out / "inputs" / "manifest.json")
    with (out / "inputs" / "rejections.jsonl").open("w", encoding="utf-8") as fh:
        for r in rejected:
            fh.write(json.dumps({"line_number": r.line_number, "reason": r.reason.value}, sort_keys=True))
            fh.write("\n")

    instances = batch_build(loaded, seed)
    write_instances(instances, out / "instances" / "instances.jsonl")
    balance = position_balance(instances)
    _write_json(
        {
            "n_instances": len(instances),
            "fraction_correct_a": balance,
            "tolerance_3sigma": balance_tolerance(len(instances)),
        },
        out / "instances" / "balance.json",
    )
    with (out / "instances" / "prompts.jsonl").open("w", encoding="utf-8") as fh:
        for inst in instances:
            prompt = render_prompt(inst)
            fh.write(json.dumps(
                {
                    "instance_ref": prompt.instance_ref,
                    "text": prompt.text,
                    "marker_collisions": list(prompt.marker_collisions),
                },
                ensure_ascii=False,
                sort_keys=True,
            ))
            fh.write("\n")

    per_rep_accuracy = []
    for rep in range(knobs["reps"]):
        rep_seed = derive_seed(seed, 7000 + rep)
        rollouts = scripted_rollouts(
            instances, knobs["responder"], knobs["group_size"], rep_seed, p=knobs["p"]
        )
        write_rollouts(rollouts, out / "rollouts" / f"rollouts_rep{rep}.jsonl")
        verdicts = score_batch(instances, rollouts)
        write_verdicts(verdicts, out / "verdicts" / f"verdicts_rep{rep}.jsonl")
        per_rep_accuracy.append(sum(v.reward for v in verdicts) / len(verdicts))

    verdicts0 = read_verdicts(out / "verdicts" / "verdicts_rep0.jsonl")
    stats = compute_stats(verdicts0)
    band = AccuracyBand(lo=knobs["filter_lo"], hi=knobs["filter_hi"])
    kept, dropped = filter_prompts(stats, band)
    write_stats_csv(stats, out / "reports" / "prompt_stats.csv")
    write_filter_report(band, kept, dropped, out / "reports" / "filter_report.json")

    dropped_ids = {s.prompt_id for s in dropped}
    kept_instances = [inst for inst in instances if inst.triple_id not in dropped_ids]
    if not kept_instances:
        return _fail("accuracy-band filter dropped every prompt; nothing to train on")
    train_config = ExperimentConfig(
        estimator="vmr",
        n_tasks=len(kept_instances),
        n_latents=knobs["train_latents"],
        n_answers=2,
        group_size=knobs["group_size"],
        steps=knobs["train_steps"],
        learning_rate=knobs["train_learning_rate"],
        seed=derive_seed(seed, 8000),
    )
    tasks = tasks_from_instances(kept_instances)
    policy = LinearOptionPolicy.zeros(train_config.n_latents)
    trace = train_policy(policy, tasks, train_config)
    trace.to_csv(out / "reports" / "train_trace.csv")
    _write_json(
        {
            "config": train_config.to_dict(),
            "policy": "linear",
            "n_tasks": len(tasks),
            "final": dataclasses.asdict(trace.final),
        },
        out / "reports" / "train_summary.json",
    )

    rollouts0 = read_rollouts(out / "rollouts" / "rollouts_rep0.jsonl")
    parsed = [split_think_response(r.raw_text) for r in rollouts0]
    report = metrics_report(parsed, per_rep_accuracies=per_rep_accuracy)
    write_metrics_report(report, out / "reports" / "metrics.json")

    _write_json(
        {"pipeline": knobs, "grpo_defaults": GrpoConfig().to_dict()},
        out / "reports" / "effective_config.json",
    )
    print(
        f"pipeline complete in {out}: {len(instances)} instances, "
        f"{len(kept)} prompts kept, final train accuracy {trace.final.accuracy:.4f}"
    )
    return EXIT_OK


# --------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vmrkit",
        description="Verifiable multiple-choice reformulation toolkit.",
    )
    parser.add_argument("--version", action="version", version=f"vmrkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="generate a synthetic preference corpus")
    sp.add_argument("--n-triples", type=int, dest="n_triples")
    sp.add_argument("--n-keywords", type=int, dest="n_keywords")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--config", type=Path)
    sp.add_argument("--out", type=Path, required=True)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("ingest", help="validate triples and persist the clean set")
    sp.add_argument("--in", type=Path, required=True, dest="infile")
    sp.add_argument("--out-dir", type=Path, required=True, dest="out_dir")
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("build-vmr", help="build two-option instances from triples")
    sp.add_argument("--in", type=Path, required=True, dest="infile")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--config", type=Path)
    sp.add_argument("--out", type=Path, required=True)
    sp.add_argument("--report", type=Path)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_build_vmr)

    sp = sub.add_parser("render", help="render evaluator prompts for instances")
    sp.add_argument("--in", type=Path, required=True, dest="infile")
    sp.add_argument("--out", type=Path, required=True)
    sp.set_defaults(func=cmd_render)

    sp = sub.add_parser("respond", help="produce scripted rollouts for instances")
    sp.add_argument("--instances", type=Path, required=True)
    sp.add_argument("--responder", choices=RESPONDER_NAMES)
    sp.add_argument("--group-size", type=int, dest="group_size")
    sp.add_argument("--p", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--config", type=Path)
    sp.add_argument("--out", type=Path, required=True)
    sp.set_defaults(func=cmd_respond)

    sp = sub.add_parser("score", help="score rollouts against instances")
    sp.add_argument("--instances", type=Path, required=True)
    sp.add_argument("--rollouts", type=Path, required=True)
    sp.add_argument("--out", type=Path, required=True)
    sp.set_defaults(func=cmd_score)

    sp = sub.add_parser("filter", help="drop prompts outside the accuracy band")
    sp.add_argument("--verdicts", type=Path, required=True)
    sp.add_argument("--lo", type=float)
    sp.add_argument("--hi", type=float)
    sp.add_argument("--config", type=Path)
    sp.add_argument("--out-stats", type=Path, required=True, dest="out_stats")
    sp.add_argument("--out-report", type=Path, required=True, dest="out_report")
    sp.set_defaults(func=cmd_filter)

    sp = sub.add_parser("train-toy", help="train a toy policy with group-relative updates")
    sp.add_argument("--policy", choices=("tabular", "linear"), default="tabular")
    sp.add_argument("--estimator", choices=("rlvr", "verifree", "vmr"))
    sp.add_argument("--n-tasks", type=int, dest="n_tasks")
    sp.add_argument("--n-latents", type=int, dest="n_latents")
    sp.add_argument("--n-answers", type=int, dest="n_answers")
    sp.add_argument("--group-size", type=int, dest="group_size")
    sp.add_argument("--steps", type=int)
    sp.add_argument("--learning-rate", type=float, dest="learning_rate")
    sp.add_argument("--updates-per-batch", type=int, dest="updates_per_batch")
    sp.add_argument("--init-scale", type=float, dest="init_scale")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--config", type=Path)
    sp.add_argument("--instances", type=Path)
    sp.add_argument("--keep-report", type=Path, dest="keep_report")
    sp.add_argument("--out-trace", type=Path, required=True, dest="out_trace")
    sp.add_argument("--out-summary", type=Path, dest="out_summary")
    sp.set_defaults(func=cmd_train_toy)

    sp = sub.add_parser("metrics", help="length, density, and Avg@k reports")
    sp.add_argument("--rollouts", type=Path, required=True)
    sp.add_argument("--verdicts", type=Path, action="append")
    sp.add_argument("--step-counts", type=Path, dest="step_counts")
    sp.add_argument("--out", type=Path, required=True)
    sp.set_defaults(func=cmd_metrics)

    sp = sub.add_parser("gradcheck", help="check estimator gradients against finite differences")
    sp.add_argument("--n-policies", type=int, dest="n_policies")
    sp.add_argument("--tolerance", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--config", type=Path)
    sp.add_argument("--out", type=Path)
    sp.set_defaults(func=cmd_gradcheck)

    sp = sub.add_parser("pipeline", help="run every stage into one output tree")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--config", type=Path)
    sp.add_argument("--out-dir", type=Path, required=True, dest="out_dir")
    sp.add_argument("--n-triples", type=int, dest="n_triples")
    sp.add_argument("--n-keywords", type=int, dest="n_keywords")
    sp.add_argument("--group-size", type=int, dest="group_size")
    sp.add_argument("--responder", choices=RESPONDER_NAMES)
    sp.add_argument("--p", type=float)
    sp.add_argument("--reps", type=int)
    sp.add_argument("--filter-lo", type=float, dest="filter_lo")
    sp.add_argument("--filter-hi", type=float, dest="filter_hi")
    sp.add_argument("--train-steps", type=int, dest="train_steps")
    sp.add_argument("--train-latents", type=int, dest="train_latents")
    sp.add_argument("--train-lr", type=float, dest="train_lr")
    sp.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        return _fail(f"file not found: {exc.filename or exc}")
    except ValueError as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
