"""One binary, per-module subcommands: sampling, crawling, extraction,
cleaning, dataset assembly, training, prediction, evaluation, and the
HTTP service."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import cleaner, crawler, dataset as dataset_mod, evaluation, extractor, registry, sampler
from .classifier import NativeBackend, TrainConfig, load_model, predict_proba, save_model, train
from .registry import topic_by_id


@click.group()
def main():
    """News-publisher trustworthiness pipeline."""


@main.command("sample-sources")
@click.option("--topic", "topic_id", required=True)
@click.option("--n", "total", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--registry", "registry_path", required=True, type=click.Path(exists=True))
def sample_sources(topic_id, total, seed, registry_path):
    """Stratified sample of sources for one topic."""
    sources = registry.load_registry(registry_path)
    admitted = [s for s in sources if registry.admit_source(s).accepted]
    topic = topic_by_id(topic_id)
    dist = sampler.compute_distribution(admitted, topic)
    plan = sampler.make_plan(dist, total, seed)
    chosen = sampler.stratified_sample(admitted, plan)
    click.echo(
        json.dumps(
            {
                "plan": {
                    "topic": topic.id,
                    "total": plan.total,
                    "seed": plan.seed,
                    "allocation": {lv.name: n for lv, n in plan.allocation.items()},
                },
                "sources": [registry.source_to_dict(s) for s in chosen],
            },
            indent=2,
        )
    )


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--max-pages", type=int, default=None)
@click.option("--ignore-robots", is_flag=True)
def crawl(config_path, out_dir, max_pages, ignore_robots):
    """Crawl one source's history pages into a WARC archive."""
    with open(config_path, encoding="utf-8") as fh:
        data = json.load(fh)
    if max_pages is not None:
        data["max_pages"] = max_pages
    if ignore_robots:
        data["ignore_robots"] = True
    config = crawler.CrawlConfig.from_dict(data)
    job = crawler.run_crawl(config, out_dir)
    click.echo(json.dumps(job.snapshot(), indent=2))
    if job.state != "done":
        sys.exit(1)


@main.command()
@click.option("--warc", "warc_path", required=True, type=click.Path(exists=True))
@click.option("--rules", "rules_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def extract(warc_path, rules_path, out_path):
    """Extract article text from a WARC archive into JSONL."""
    rules = extractor.ExtractionRules.load(rules_path)
    articles, report = extractor.extract_all(warc_path, rules)
    extractor.write_jsonl(articles, out_path)
    click.echo(
        f"extracted {report.extracted}/{report.records} records "
        f"({len(report.misses)} misses)"
    )


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--report", "report_path", type=click.Path())
@click.option("--min-words", type=int, default=200, show_default=True)
def clean(in_path, out_path, report_path, min_words):
    """Remove per-source boilerplate and apply the word-count filter."""
    config = cleaner.CleaningConfig(min_words=min_words)
    articles = extractor.read_jsonl(in_path)
    kept, report = cleaner.clean_corpus(articles, config)
    extractor.write_jsonl(kept, out_path)
    if report_path:
        Path(report_path).write_text(json.dumps(report.to_dict(), indent=2))
    click.echo(
        f"kept {report.articles_out}/{report.articles_in} articles "
        f"({report.articles_dropped_short} below {min_words} words)"
    )


@main.command("build-dataset")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--registry", "registry_path", required=True, type=click.Path(exists=True))
@click.option("--labels", "label_kind", required=True,
              type=click.Choice(dataset_mod.LABEL_KINDS))
@click.option("--out", "out_dir", required=True, type=click.Path())
def build_dataset(in_path, registry_path, label_kind, out_dir):
    """Assemble a labeled dataset from cleaned article JSONL."""
    articles = extractor.read_jsonl(in_path)
    sources = registry.load_registry(registry_path)
    ds = dataset_mod.build_dataset(articles, sources, label_kind)
    dataset_mod.save_dataset(ds, out_dir)
    click.echo(f"wrote {len(ds.articles)} articles to {out_dir} ({ds.dataset_id})")


@main.command()
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(exists=True))
def stats(dataset_dir):
    """Print the trust-level x topic cross-tabulation."""
    ds = dataset_mod.load_dataset(dataset_dir)
    click.echo(dataset_mod.format_stats_table(dataset_mod.stats(ds)))


@main.command("train")
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(exists=True))
@click.option("--labels", "label_kind", type=click.Choice(dataset_mod.LABEL_KINDS))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--epochs", type=int, default=10, show_default=True)
@click.option("--lr", type=float, default=0.1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def train_cmd(dataset_dir, label_kind, out_path, epochs, lr, seed):
    """Train the baseline classifier on a dataset."""
    ds = dataset_mod.load_dataset(dataset_dir)
    if label_kind and label_kind != ds.label_kind:
        raise click.ClickException(
            f"dataset is labeled {ds.label_kind!r}, not {label_kind!r}"
        )
    config = TrainConfig(learning_rate=lr, epochs=epochs, seed=seed)
    model = train(ds.texts(), ds.labels(), config, classes=ds.classes)
    save_model(model, out_path)
    click.echo(f"trained on {len(ds.articles)} articles, loss {model.final_loss:.4f}")


@main.command("predict")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--text-file", required=True, type=click.Path(exists=True))
def predict_cmd(model_path, text_file):
    """Classify one text file; prints label and probabilities as JSON."""
    model = load_model(model_path)
    text = Path(text_file).read_text(encoding="utf-8")
    probs = predict_proba(model, text)
    best = int(probs.argmax())
    click.echo(
        json.dumps(
            {
                "label": model.classes[best],
                "probabilities": {c: float(p) for c, p in zip(model.classes, probs)},
            },
            indent=2,
        )
    )


@main.command()
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(exists=True))
@click.option("--folds", "folds_path", type=click.Path(exists=True))
@click.option("--k", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--backend", default="native", type=click.Choice(["native"]))
@click.option("--train-config", "train_config_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
def evaluate(dataset_dir, folds_path, k, seed, backend, train_config_path, out_dir):
    """Cross-validated evaluation; writes summary.json and per-fold reports."""
    ds = dataset_mod.load_dataset(dataset_dir)
    if folds_path:
        folds = dataset_mod.load_folds(folds_path)
    else:
        folds = dataset_mod.stratified_kfold(ds, k, seed)
    config = TrainConfig(seed=seed)
    if train_config_path:
        with open(train_config_path, encoding="utf-8") as fh:
            overrides = json.load(fh)
        if "ngram_orders" in overrides:
            overrides["ngram_orders"] = tuple(overrides["ngram_orders"])
        config = TrainConfig(**{**config.__dict__, **overrides})
    summary = evaluation.cross_validate(
        ds, folds, lambda classes: NativeBackend(classes, config)
    )
    evaluation.write_report(summary, out_dir)
    click.echo(json.dumps({"f1_micro": summary.f1_micro, "f1_macro": summary.f1_macro}, indent=2))


@main.command()
@click.option("--workspace", required=True, type=click.Path())
@click.option("--port", type=int, default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(workspace, port, host):
    """Run the HTTP service over a workspace directory."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(workspace), host=host, port=port)


if __name__ == "__main__":
    main()
