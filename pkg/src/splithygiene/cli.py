"""Command-line interface.

Stages are exposed as subcommands (extract, generate, attribute, partition,
memorize, lm, eval, report) plus `run` for the exp1/exp2/exp3 presets. Every
subcommand accepts --rng-seed, --config, and --workdir; the workdir defaults
to $SPLITHYGIENE_WORKDIR or the current directory. Exit codes: 0 success,
2 validation/usage error, 1 runtime error.
"""

from __future__ import annotations

import dataclasses
import functools
import json
import os
import sys
from pathlib import Path

import click

from . import experiments, qlang, rng as rng_mod
from .attribution import build_index, write_attribution
from .baselines import lm_perplexity, memorizer_predict, score_sentence, train_memorizer, train_ngram_lm
from .corpus import (
    LEAKY,
    SANITIZED,
    dedup,
    file_digest,
    make_manifest,
    read_parallel,
    read_seeds,
    write_split,
)
from .errors import SplitHygieneError
from .kgstore import load_ntriples
from .metrics import corpus_bleu, perplexity
from .partitioner import diagnostics, leaky_partition, sanitized_partition, split_templates
from .synthesis import extract_template, generate_instances, read_templates, write_templates

_WORKDIR_ENV = "SPLITHYGIENE_WORKDIR"


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def common_options(fn):
    @click.option("--rng-seed", type=int, default=0, show_default=True, help="Seed for every shuffle.")
    @click.option("--config", "config_path", type=click.Path(), default=None, help="Flat key=value config file.")
    @click.option("--workdir", type=click.Path(), default=None,
                  help=f"Working directory (default: ${_WORKDIR_ENV} or '.').")
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (SplitHygieneError, FileNotFoundError, ValueError) as exc:
            _fail(2, str(exc))
        except OSError as exc:
            _fail(1, str(exc))

    return wrapper


def _load_config(config_path, workdir, rng_seed=None) -> experiments.RunConfig:
    cfg = experiments.load_config(config_path) if config_path else experiments.RunConfig()
    if workdir is None:
        workdir = os.environ.get(_WORKDIR_ENV, cfg.workdir)
    updates = {"workdir": str(workdir)}
    if rng_seed is not None:
        updates["rng_seeds"] = (rng_seed,) + tuple(s for s in cfg.rng_seeds if s != rng_seed)
    return dataclasses.replace(cfg, **updates)


@click.group()
def main():
    """Template-generated corpora, split hygiene, and leakage metrics."""


@main.command()
@click.option("--seeds", "seeds_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True, help="templates.jsonl output.")
@common_options
def extract(seeds_path, out_path, rng_seed, config_path, workdir):
    """Extract templates from a seeds.jsonl file."""
    from .synthesis import dedup_templates
    seeds, _ = dedup(read_seeds(seeds_path))
    templates, removed = dedup_templates(extract_template(s) for s in seeds)
    write_templates(out_path, templates)
    click.echo(f"extracted {len(templates)} templates ({removed} duplicates dropped)")


@main.command()
@click.option("--templates", "templates_path", type=click.Path(exists=True), required=True)
@click.option("--kg", "kg_path", type=click.Path(exists=True), required=True)
@click.option("--limit", type=int, default=100, show_default=True, help="Instances per template.")
@click.option("--out-dir", type=click.Path(), required=True)
@common_options
def generate(templates_path, kg_path, limit, out_dir, rng_seed, config_path, workdir):
    """Instantiate templates against an N-Triples graph."""
    templates = read_templates(templates_path)
    graph = load_ntriples(kg_path)
    if graph.load_report.malformed_lines:
        click.echo(f"warning: {len(graph.load_report.malformed_lines)} malformed KG lines skipped", err=True)
    if graph.load_report.skipped_literals:
        click.echo(f"warning: {graph.load_report.skipped_literals} literal-object KG lines skipped", err=True)
    instances = []
    for t in templates:
        instances.extend(generate_instances(t, graph, limit, rng_seed))
    instances, removed = dedup(instances)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    nlq_lines = [i.pair.nlq_text() for i in instances]
    ql_lines = [i.pair.query_text for i in instances]
    (out / "instances.nlq").write_text("".join(l + "\n" for l in nlq_lines), encoding="utf-8", newline="\n")
    (out / "instances.ql").write_text("".join(l + "\n" for l in ql_lines), encoding="utf-8", newline="\n")
    doc = {
        "ids": [i.id for i in instances],
        "origins": {i.id: i.origin_template_id for i in instances if i.origin_template_id},
    }
    (out / "instances.manifest.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8", newline="\n")
    click.echo(f"generated {len(instances)} instances ({removed} duplicates dropped)")


@main.command()
@click.option("--nlq", "nlq_path", type=click.Path(exists=True), required=True)
@click.option("--ql", "ql_path", type=click.Path(exists=True), required=True)
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), default=None)
@click.option("--templates", "templates_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True, help="attribution.tsv output.")
@common_options
def attribute(nlq_path, ql_path, manifest_path, templates_path, out_path, rng_seed, config_path, workdir):
    """Attribute each instance to the templates that could have generated it."""
    instances = read_parallel(nlq_path, ql_path, manifest_path)
    templates = read_templates(templates_path)
    index = build_index(instances, templates)
    write_attribution(out_path, instances, index)
    ambiguous = len(index.ambiguous_ids)
    unattributed = sum(1 for i in instances if not index.attributed(i.id))
    click.echo(f"attributed {len(instances)} instances ({ambiguous} ambiguous, {unattributed} unattributed)")


@main.command()
@click.option("--scheme", type=click.Choice([LEAKY, SANITIZED]), required=True)
@click.option("--nlq", "nlq_path", type=click.Path(exists=True), required=True)
@click.option("--ql", "ql_path", type=click.Path(exists=True), required=True)
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), default=None)
@click.option("--ratios", default="0.8,0.1,0.1", show_default=True)
@click.option("--templates", "templates_path", type=click.Path(exists=True), default=None,
              help="Required for the sanitized scheme.")
@click.option("--seeds", "seeds_path", type=click.Path(exists=True), default=None,
              help="Required for the sanitized scheme.")
@click.option("--seed-test-fraction", type=float, default=0.2, show_default=True)
@click.option("--out-dir", type=click.Path(), required=True)
@common_options
def partition(scheme, nlq_path, ql_path, manifest_path, ratios, templates_path,
              seeds_path, seed_test_fraction, out_dir, rng_seed, config_path, workdir):
    """Split a parallel corpus into train/valid/test."""
    ratio_tuple = tuple(float(r) for r in ratios.split(","))
    instances = read_parallel(nlq_path, ql_path, manifest_path)
    digest = file_digest([nlq_path, ql_path])
    if scheme == LEAKY:
        split = leaky_partition(instances, ratio_tuple, rng_seed)
        tsplit = None
        index = None
    else:
        if not templates_path or not seeds_path:
            _fail(2, "sanitized partitioning needs --templates and --seeds")
        templates = read_templates(templates_path)
        seeds = read_seeds(seeds_path)
        index = build_index(instances, templates)
        seed_ids = [s.id for s in seeds]
        order = rng_mod.permutation(len(seed_ids), rng_seed, "seed-split")
        n_test = round(len(seed_ids) * seed_test_fraction)
        seed_test_ids = sorted(seed_ids[i] for i in order[:n_test])
        tsplit = split_templates(templates, seeds, seed_test_ids)
        split = sanitized_partition(instances, tsplit, index, rng_seed)
    manifest = make_manifest(split, scheme, rng_seed, ratio_tuple, digest)
    write_split(out_dir, split, manifest)
    if index is not None:
        diag = diagnostics(split, index, tsplit)
        (Path(out_dir) / "diagnostics.json").write_text(
            json.dumps(diag, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n")
    click.echo(f"split counts: train={split.counts[0]} valid={split.counts[1]} test={split.counts[2]}")


@main.command()
@click.option("--train-nlq", type=click.Path(exists=True), required=True)
@click.option("--train-ql", type=click.Path(exists=True), required=True)
@click.option("--train-manifest", type=click.Path(exists=True), default=None)
@click.option("--templates", "templates_path", type=click.Path(exists=True), required=True)
@click.option("--input", "input_path", type=click.Path(exists=True), required=True,
              help="NLQ file to predict queries for.")
@click.option("--out", "out_path", type=click.Path(), required=True, help="pred.ql output.")
@common_options
def memorize(train_nlq, train_ql, train_manifest, templates_path, input_path, out_path,
             rng_seed, config_path, workdir):
    """Train the template memorizer and predict queries for an NLQ file."""
    train = read_parallel(train_nlq, train_ql, train_manifest)
    templates = read_templates(templates_path)
    index = build_index(train, templates)
    model = train_memorizer(train, templates, index)
    lines = Path(input_path).read_text(encoding="utf-8").splitlines()
    preds = [" ".join(memorizer_predict(model, qlang.tokenize_nlq(line))) for line in lines]
    Path(out_path).write_text("".join(p + "\n" for p in preds), encoding="utf-8", newline="\n")
    click.echo(f"wrote {len(preds)} predictions")


@main.command()
@click.option("--train-ql", type=click.Path(exists=True), required=True)
@click.option("--eval-ql", type=click.Path(exists=True), required=True)
@click.option("--order", type=int, default=5, show_default=True)
@click.option("--k", type=float, default=0.1, show_default=True)
@click.option("--out-logp", type=click.Path(), default=None, help="Optional pred.logp output.")
@common_options
def lm(train_ql, eval_ql, order, k, out_logp, rng_seed, config_path, workdir):
    """Train the n-gram query LM and report perplexity on an evaluation file."""
    train = [line.split() for line in Path(train_ql).read_text(encoding="utf-8").splitlines()]
    eval_sents = [line.split() for line in Path(eval_ql).read_text(encoding="utf-8").splitlines()]
    model = train_ngram_lm(train, order=order, k=k)
    if out_logp:
        scored = [score_sentence(model, sent) for sent in eval_sents]
        lines = [" ".join(repr(lp) for lp in sent) for sent in scored]
        Path(out_logp).write_text("".join(l + "\n" for l in lines), encoding="utf-8", newline="\n")
    value = lm_perplexity(model, eval_sents)
    click.echo(json.dumps({"metric": "lm_perplexity", "value": value}))


@main.command("eval")
@click.option("--pred", "pred_path", type=click.Path(exists=True), required=True)
@click.option("--test", "test_path", type=click.Path(exists=True), required=True)
@click.option("--logp", "logp_path", type=click.Path(exists=True), default=None,
              help="Optional per-token natural-log probabilities, one line per sentence.")
@click.option("--out", "out_path", type=click.Path(), default=None, help="Write the report JSON here.")
@common_options
def eval_cmd(pred_path, test_path, logp_path, out_path, rng_seed, config_path, workdir):
    """Score predictions against references: BLEU, and perplexity from --logp."""
    preds = [line.split() for line in Path(pred_path).read_text(encoding="utf-8").splitlines()]
    refs = [line.split() for line in Path(test_path).read_text(encoding="utf-8").splitlines()]
    report = corpus_bleu(preds, refs)
    doc = {
        "bleu": report.bleu,
        "precisions": list(report.precisions),
        "brevity_penalty": report.brevity_penalty,
        "candidate_len": report.candidate_len,
        "reference_len": report.reference_len,
    }
    if logp_path:
        sents = [[float(x) for x in line.split()]
                 for line in Path(logp_path).read_text(encoding="utf-8").splitlines()]
        doc["perplexity"] = perplexity(sents)
    text = json.dumps(doc, indent=2) + "\n"
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8", newline="\n")
    click.echo(text, nl=False)


@main.command()
@common_options
def report(rng_seed, config_path, workdir):
    """Consolidate every preset report under the workdir into one CSV."""
    cfg = _load_config(config_path, workdir)
    consolidated = experiments.consolidate_reports(cfg.workdir)
    out = Path(cfg.workdir) / "consolidated.csv"
    out.write_text(consolidated, encoding="utf-8", newline="\n")
    click.echo(str(out))


@main.command()
@click.argument("preset", type=click.Choice(list(experiments.PRESETS)))
@click.option("--seeds", "seeds_path", type=click.Path(exists=True), default=None,
              help="seeds.jsonl (default: bundled toy seeds).")
@click.option("--kg", "kg_path", type=click.Path(exists=True), default=None,
              help="N-Triples graph (default: bundled toy graph).")
@common_options
def run(preset, seeds_path, kg_path, rng_seed, config_path, workdir):
    """Run an experiment preset end to end."""
    cfg = _load_config(config_path, workdir)
    overrides = {}
    if seeds_path:
        overrides["seeds_path"] = seeds_path
    if kg_path:
        overrides["kg_path"] = kg_path
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    rows = experiments.run_experiment(preset, cfg)
    click.echo(f"{preset}: wrote {len(rows)} report rows under {Path(cfg.workdir) / preset}")


if __name__ == "__main__":
    main()
