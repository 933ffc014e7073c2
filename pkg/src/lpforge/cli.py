"""Command-line entry point: ``lpforge <subcommand> ...``.

Exit codes: 0 success (solver verdicts such as Infeasible included), 1 domain
error with diagnostics on stderr, 2 usage error.

Settings come from a key/value config file (``--config``, or the path in
``$LPFORGE_CONFIG``) and are overridden by flags. Recognized keys::

    solve.feasibility_tol, solve.integrality_tol, solve.node_limit,
    solve.objective_equality_tol, solve.exact_size_limit
    gen.seed, gen.n_items, gen.n_machines, gen.n_periods,
    gen.demand_range, gen.capacity_range, gen.cost_range   (as "lo,hi")
    gen.big_m_mode, gen.max_retries, gen.feasibility_screen_nodes,
    gen.preset (default|classic), gen.weight.<Family>, gen.mutation.<RULE>
    jobs

Whenever a subcommand writes a file or directory, a JSON run manifest is
written next to it (``<out>.manifest.json``, or ``run_manifest.json`` inside
an output directory).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict, replace
from typing import Dict, List, Mapping, Optional, Sequence

from lpforge import __version__
from lpforge.datagen import (
    CLASSIC_PRESET,
    GenConfig,
    downscale_instance,
    generate_base_model,
    generate_dataset,
    regenerate_from_manifest,
    transfer_labels,
    write_dataset,
)
from lpforge.errors import Diagnostic, LPForgeError, count_errors
from lpforge.evalmetrics import corpus_metrics, curve_rows, judge_corpus, load_corpus, subsample_curve
from lpforge.injection import describe_spec, inject_with_report, parse_config_text, spec_from_config
from lpforge.lp import parse_lp_diagnostics, serialize_lp, validate
from lpforge.lp.writer import format_number
from lpforge.pruning import (
    PruneLabelSet,
    apply_pruning,
    curve_csv,
    curve_report,
    label_prunable,
    read_predictions,
    score_predictions,
)
from lpforge.repair import repair
from lpforge.solver.brute import brute_force_solve
from lpforge.solver.core import SolveConfig, solve

CONFIG_ENV = "LPFORGE_CONFIG"
RUN_MANIFEST_DIR_NAME = "run_manifest.json"


class _Usage(Exception):
    pass


class _ArgParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        raise _Usage(message)


# -- config --------------------------------------------------------------------------


def load_config(path: Optional[str]) -> Dict[str, str]:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def _interval(text: str):
    lo, _, hi = text.partition(",")
    return (float(lo), float(hi or lo))


def solve_config(values: Mapping[str, str], args: argparse.Namespace, run: Optional["RunManifest"] = None) -> SolveConfig:
    kw = {}
    for key, conv in (("feasibility_tol", float), ("integrality_tol", float), ("node_limit", int),
                      ("objective_equality_tol", float), ("exact_size_limit", int)):
        if f"solve.{key}" in values:
            kw[key] = conv(values[f"solve.{key}"])
    if getattr(args, "node_limit", None) is not None:
        kw["node_limit"] = args.node_limit
    cfg = SolveConfig(**kw)
    if run is not None:
        run.config["solve"] = asdict(cfg)
    return cfg


def gen_config(values: Mapping[str, str], args: argparse.Namespace) -> GenConfig:
    kw: Dict[str, object] = {}
    for key, conv in (("seed", int), ("n_items", int), ("n_machines", int), ("n_periods", int),
                      ("big_m_mode", str), ("max_retries", int), ("feasibility_screen_nodes", int)):
        if f"gen.{key}" in values:
            kw[key] = conv(values[f"gen.{key}"])
    for key in ("demand_range", "capacity_range", "cost_range"):
        if f"gen.{key}" in values:
            kw[key] = _interval(values[f"gen.{key}"])
    preset = values.get("gen.preset", "default")
    if preset == "classic":
        kw["param_ranges"] = CLASSIC_PRESET
    elif preset != "default":
        raise LPForgeError("INVALID_CONFIG", f"unknown preset {preset!r}")
    cfg = GenConfig(**kw)
    weights = dict(cfg.family_weights)
    rates = dict(cfg.mutation_rates)
    for k, v in values.items():
        if k.startswith("gen.weight."):
            weights[k[len("gen.weight."):]] = float(v)
        elif k.startswith("gen.mutation."):
            rates[k[len("gen.mutation."):]] = float(v)
    overrides = {"family_weights": weights, "mutation_rates": rates}
    for flag, key in (("seed", "seed"), ("items", "n_items"), ("machines", "n_machines"), ("periods", "n_periods")):
        if getattr(args, flag, None) is not None:
            overrides[key] = getattr(args, flag)
    return replace(cfg, **overrides)


def _jobs(values: Mapping[str, str], args: argparse.Namespace) -> int:
    if getattr(args, "jobs", None) is not None:
        return args.jobs
    return int(values.get("jobs", "1"))


# -- io helpers ----------------------------------------------------------------------


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: str, text: str) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        _write(out, text)
    else:
        sys.stdout.write(text)


def _load_model(path: str):
    text = _read(path)
    model, diags = parse_lp_diagnostics(text)
    if model is None or count_errors(diags):
        raise LPForgeError("PARSE_ERROR", f"{path} does not parse", diags)
    return model


def _report(diags: Sequence[Diagnostic], source: str = "") -> None:
    for d in diags:
        print(f"{source}:{d}" if source else str(d), file=sys.stderr)


def _digest(path: str) -> Optional[str]:
    if os.path.isfile(path):
        with open(path, "rb") as fh:
            return hashlib.sha256(fh.read()).hexdigest()
    return None


class RunManifest:
    """Command, effective settings, inputs and outputs (with content hashes) of one run."""

    def __init__(self, command: str, argv: Sequence[str], config: Mapping[str, object]):
        self.command = command
        self.argv = list(argv)
        self.config = dict(config)
        self.inputs: List[str] = []
        self.outputs: List[str] = []
        self.seeds: List[int] = []
        self.started = time.perf_counter()

    def to_dict(self) -> Dict[str, object]:
        return {
            "tool": "lpforge",
            "version": __version__,
            "command": self.command,
            "argv": self.argv,
            "config": self.config,
            "seeds": self.seeds,
            "inputs": [{"path": p, "sha256": _digest(p)} for p in self.inputs],
            "outputs": [{"path": p, "sha256": _digest(p)} for p in self.outputs],
            "wall_time_s": round(time.perf_counter() - self.started, 3),
        }

    def write(self, explicit: Optional[str]) -> Optional[str]:
        if explicit:
            path = explicit
        elif self.outputs:
            first = self.outputs[0]
            path = os.path.join(first, RUN_MANIFEST_DIR_NAME) if os.path.isdir(first) else first + ".manifest.json"
        else:
            return None
        _write(path, json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path


# -- subcommands ---------------------------------------------------------------------


def cmd_parse(args, values, run: RunManifest) -> int:
    run.inputs.append(args.file)
    model = _load_model(args.file)
    _emit(serialize_lp(model), args.out)
    return 0


def cmd_validate(args, values, run: RunManifest) -> int:
    run.inputs.append(args.file)
    model, diags = parse_lp_diagnostics(_read(args.file))
    if model is not None:
        diags = list(diags) + list(validate(model))
    _report(diags, args.file)
    return 1 if count_errors(diags) else 0


def cmd_repair(args, values, run: RunManifest) -> int:
    run.inputs.append(args.file)
    fixed, report = repair(_read(args.file))
    _emit(fixed, args.out)
    if args.report:
        _write(args.report, report.to_text())
        run.outputs.append(args.report)
    else:
        sys.stderr.write(report.to_text())
    _report([d for d in report.residual_diagnostics if d.is_error], args.file)
    return 0 if report.ok else 1


def cmd_inject(args, values, run: RunManifest) -> int:
    run.inputs += [args.input, args.spec]
    model = _load_model(args.input)
    spec = spec_from_config(parse_config_text(_read(args.spec)), model)
    augmented, diags = inject_with_report(model, spec)
    _report(diags, args.input)
    _emit(serialize_lp(augmented), args.out)
    if args.describe:
        _write(args.describe, describe_spec(spec, args.text_seed))
        run.outputs.append(args.describe)
    return 0


def _format_solution(sol, show_all: bool) -> str:
    lines = [sol.status]
    if sol.objective is not None:
        lines.append(f"objective = {format_number(float(sol.objective))}")
    for k, v in sol.stats.items():
        lines.append(f"# {k} = {v}")
    for name, value in sol.assignment.items():
        if show_all or value != 0:
            lines.append(f"{name} = {format_number(float(value))}")
    return "\n".join(lines) + "\n"


def cmd_solve(args, values, run: RunManifest) -> int:
    run.inputs.append(args.file)
    model = _load_model(args.file)
    cfg = solve_config(values, args, run)
    sol = brute_force_solve(model, cfg) if args.brute_force else solve(model, cfg)
    _report(sol.diagnostics, args.file)
    _emit(_format_solution(sol, args.all), args.out)
    return 0


def cmd_gen_base(args, values, run: RunManifest) -> int:
    cfg = gen_config(values, args)
    run.config["gen"] = cfg.to_dict()
    run.seeds.append(cfg.seed)
    _emit(serialize_lp(generate_base_model(cfg)), args.out)
    return 0


def cmd_gen_dataset(args, values, run: RunManifest) -> int:
    jobs = _jobs(values, args)
    if args.from_manifest:
        run.inputs.append(args.from_manifest)
        manifest = json.loads(_read(args.from_manifest))
        cfg = GenConfig.from_dict(manifest["config"])
        pairs = regenerate_from_manifest(manifest, jobs)
    else:
        if args.n is None:
            raise _Usage("gen-dataset needs -n or --from-manifest")
        cfg = gen_config(values, args)
        pairs = generate_dataset(cfg, args.n, jobs)
    run.config["gen"] = cfg.to_dict()
    run.seeds.append(cfg.seed)
    write_dataset(args.out, cfg, pairs)
    print(f"{len(pairs)} pairs written to {args.out}")
    return 0


def cmd_downscale(args, values, run: RunManifest) -> int:
    run.inputs.append(args.input)
    run.seeds.append(args.seed)
    model = _load_model(args.input)
    small, name_map = downscale_instance(model, args.keep, args.seed)
    _emit(serialize_lp(small), args.out)
    if args.map:
        _write(args.map, "".join(f"{k}\t{v}\n" for k, v in name_map.items()))
        run.outputs.append(args.map)
    if args.labels:
        run.inputs.append(args.labels)
        moved = transfer_labels(PruneLabelSet.from_text(_read(args.labels)), name_map)
        target = args.labels_out or (args.out + ".labels" if args.out else None)
        if target is None:
            raise _Usage("--labels needs --labels-out or --out")
        _write(target, moved.to_text())
        run.outputs.append(target)
    return 0


def cmd_label_prune(args, values, run: RunManifest) -> int:
    run.inputs.append(args.input)
    model = _load_model(args.input)
    model_id = args.model_id or os.path.splitext(os.path.basename(args.input))[0]
    labels = label_prunable(model, solve_config(values, args, run), model_id)
    _report(labels.diagnostics, args.input)
    _emit(labels.to_text(), args.out)
    return 0


def cmd_prune(args, values, run: RunManifest) -> int:
    run.inputs.append(args.input)
    model = _load_model(args.input)
    if args.labels:
        run.inputs.append(args.labels)
        names = sorted(PruneLabelSet.from_text(_read(args.labels)).prunable)
    else:
        run.inputs.append(args.predictions)
        names = read_predictions(_read(args.predictions))
    _emit(serialize_lp(apply_pruning(model, names)), args.out)
    return 0


def _line_count(path: str) -> int:
    return len(_read(path).splitlines())


def cmd_score_prune(args, values, run: RunManifest) -> int:
    if args.corpus:
        scores = []
        for name in sorted(os.listdir(args.corpus)):
            stem, ext = os.path.splitext(name)
            if ext != ".lp":
                continue
            base = os.path.join(args.corpus, stem)
            if not os.path.isfile(base + ".pred"):
                continue
            run.inputs += [base + ".lp", base + ".labels", base + ".pred"]
            truth = PruneLabelSet.from_text(_read(base + ".labels"))
            preds = read_predictions(_read(base + ".pred"))
            scores.append(score_predictions(preds, truth, _line_count(base + ".lp")))
        if not scores:
            raise LPForgeError("EMPTY_CORPUS", f"no <id>.lp/<id>.labels/<id>.pred triples in {args.corpus}")
        _emit(curve_csv(curve_report(scores)), args.out)
        return 0
    if not (args.truth and args.predictions and args.lp):
        raise _Usage("score-prune needs --corpus or all of --truth, --predictions, --lp")
    run.inputs += [args.truth, args.predictions, args.lp]
    truth = PruneLabelSet.from_text(_read(args.truth))
    s = score_predictions(read_predictions(_read(args.predictions)), truth, _line_count(args.lp))
    hi = "inf" if s.size_bin[1] == float("inf") else s.size_bin[1]
    text = (
        f"tp = {s.true_positives}\nfp = {s.false_positives}\nfn = {s.false_negatives}\n"
        f"precision = {float(s.precision):.6f}\nrecall = {float(s.recall):.6f}\nf1 = {float(s.f1):.6f}\n"
        f"size_bin = {s.size_bin[0]}-{hi}\n"
    )
    _emit(text, args.out)
    return 0


def cmd_evaluate(args, values, run: RunManifest) -> int:
    run.inputs.append(args.corpus)
    entries = judge_corpus(load_corpus(args.corpus), solve_config(values, args, run), _jobs(values, args))
    _emit(corpus_metrics(entries).to_text(), args.out)
    return 0


def cmd_subsample_curve(args, values, run: RunManifest) -> int:
    run.inputs.append(args.corpus)
    run.seeds.append(args.seed)
    fractions = [float(f) for f in args.fractions.split(",") if f.strip()]
    entries = judge_corpus(load_corpus(args.corpus), solve_config(values, args, run), _jobs(values, args))
    _emit(curve_rows(subsample_curve(entries, fractions, args.seed)), args.out)
    return 0


# -- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _ArgParser(prog="lpforge", description="LP model tooling: injection, repair, pruning, evaluation.")
    p.add_argument("--version", action="version", version=f"lpforge {__version__}")
    p.add_argument("--config", help=f"key/value config file (default: ${CONFIG_ENV})")
    p.add_argument("--manifest", help="explicit path for the run manifest")
    sub = p.add_subparsers(dest="command", parser_class=_ArgParser)

    def add(name: str, func, help_text: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(func=func)
        return sp

    def gen_flags(sp):
        sp.add_argument("--seed", type=int)
        sp.add_argument("--items", type=int)
        sp.add_argument("--machines", type=int)
        sp.add_argument("--periods", type=int)

    sp = add("parse", cmd_parse, "parse a file and print it in canonical form")
    sp.add_argument("file")
    sp.add_argument("--out")

    sp = add("validate", cmd_validate, "report parse and validation diagnostics")
    sp.add_argument("file")

    sp = add("repair", cmd_repair, "apply the syntactic repair stages")
    sp.add_argument("file")
    sp.add_argument("--out")
    sp.add_argument("--report", help="write the fix list here instead of stderr")

    sp = add("inject", cmd_inject, "append constraint families described by a spec file")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--spec", required=True)
    sp.add_argument("--out")
    sp.add_argument("--describe", help="also write the English description here")
    sp.add_argument("--text-seed", type=int, default=0)

    sp = add("solve", cmd_solve, "solve a model and print the verdict")
    sp.add_argument("file")
    sp.add_argument("--out")
    sp.add_argument("--node-limit", type=int)
    sp.add_argument("--brute-force", action="store_true", help="use lattice enumeration instead of branch and bound")
    sp.add_argument("--all", action="store_true", help="print zero-valued variables too")

    sp = add("gen-base", cmd_gen_base, "generate one base scheduling model")
    gen_flags(sp)
    sp.add_argument("--out")

    sp = add("gen-dataset", cmd_gen_dataset, "generate a directory of training pairs")
    gen_flags(sp)
    sp.add_argument("-n", type=int)
    sp.add_argument("--out", required=True)
    sp.add_argument("--jobs", type=int)
    sp.add_argument("--from-manifest", help="regenerate the pairs listed in a dataset manifest")

    sp = add("downscale", cmd_downscale, "keep a demand-weighted subset of items")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--keep", type=float, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.add_argument("--map", help="write the surviving-name map here")
    sp.add_argument("--labels", help="label file to carry over to the smaller model")
    sp.add_argument("--labels-out")

    sp = add("label-prune", cmd_label_prune, "certify which variables are zero in every optimum")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--out")
    sp.add_argument("--model-id")
    sp.add_argument("--node-limit", type=int)

    sp = add("prune", cmd_prune, "fix the given variables to zero and simplify")
    sp.add_argument("--in", dest="input", required=True)
    group = sp.add_mutually_exclusive_group(required=True)
    group.add_argument("--labels")
    group.add_argument("--predictions")
    sp.add_argument("--out")

    sp = add("score-prune", cmd_score_prune, "precision/recall/F1 of prunability predictions")
    sp.add_argument("--truth")
    sp.add_argument("--predictions")
    sp.add_argument("--lp", help="source model, for its line count")
    sp.add_argument("--corpus", help="directory of <id>.lp, <id>.labels, <id>.pred")
    sp.add_argument("--out")

    sp = add("evaluate", cmd_evaluate, "generation / executability / accuracy rates of a corpus")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--out")
    sp.add_argument("--jobs", type=int)
    sp.add_argument("--node-limit", type=int)

    sp = add("subsample-curve", cmd_subsample_curve, "metrics on seeded subsamples of a corpus")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--fractions", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.add_argument("--jobs", type=int)
    sp.add_argument("--node-limit", type=int)
    return p


def _outputs(args) -> List[str]:
    return [getattr(args, "out")] if getattr(args, "out", None) else []


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise _Usage("a subcommand is required")
        values = load_config(args.config)
        run = RunManifest(args.command, argv, values)
        code = args.func(args, values, run)
    except _Usage as exc:
        print(f"lpforge: usage error: {exc}", file=sys.stderr)
        return 2
    except LPForgeError as exc:
        _report(exc.diagnostics)
        print(f"lpforge: error {exc.code}: {exc.message}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"lpforge: error NOT_FOUND: {exc.filename}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"lpforge: error INVALID_VALUE: {exc}", file=sys.stderr)
        return 1
    run.outputs = _outputs(args) + run.outputs
    run.write(args.manifest)
    return code


if __name__ == "__main__":
    sys.exit(main())
