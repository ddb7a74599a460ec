"""Command-line interface: parse, corpus gen, run, bench, eval.

Exit codes: 0 success, 2 config error, 3 backend error, 4 parse error,
5 segmentation error.
"""

from __future__ import annotations

import sys

import click

from . import corpus as corpus_mod
from .errors import ConfigError, MosaicError
from .pipeline import (
    PipelineConfig,
    build_backend,
    evaluate_explicit,
    evaluate_run,
    load_config_file,
    run_bench,
    run_pipeline,
)
from .promptseg import Prompt, parse_prompt, serialize_pairs


@click.group()
def cli():
    """Multi-object text-driven stylization pipeline."""


@cli.command("parse")
@click.option("--prompt", required=True, help="Prompt text to segment.")
def parse_cmd(prompt: str):
    """Print the control-token serialization of the parsed prompt."""
    click.echo(serialize_pairs(parse_prompt(Prompt(prompt))))


@cli.group("corpus")
def corpus_group():
    """Corpus synthesis utilities."""


@corpus_group.command("gen")
@click.option("--classes", "classes_file", type=click.Path(), default=None,
              help="Class lexicon file (default: packaged 400-class lexicon).")
@click.option("--styles", "styles_file", type=click.Path(), default=None,
              help="Style lexicon file (default: packaged 150-style lexicon).")
@click.option("--templates", "templates_file", type=click.Path(), default=None,
              help="Template file (default: packaged templates).")
@click.option("--count", type=int, required=True, help="Number of records.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_file", type=click.Path(), required=True, help="Output JSONL file.")
def corpus_gen(classes_file, styles_file, templates_file, count, seed, out_file):
    """Generate a prompt/gold corpus as JSON lines."""
    classes = corpus_mod.load_lexicon(classes_file) if classes_file else corpus_mod.default_classes()
    styles = corpus_mod.load_lexicon(styles_file) if styles_file else corpus_mod.default_styles()
    templates = (corpus_mod.load_templates(templates_file) if templates_file
                 else corpus_mod.default_templates())
    records = corpus_mod.generate_corpus(classes, styles, templates, count, seed)
    corpus_mod.write_corpus_jsonl(records, out_file)
    click.echo(f"wrote {len(records)} records to {out_file}")


def _run_options(fn):
    opts = [
        click.option("--image", "image_path", type=click.Path(), default=None,
                     help="Content image (PNG or anything Pillow reads)."),
        click.option("--prompt", default=None, help="Stylization prompt."),
        click.option("--backend", type=click.Choice(["mock", "http"]), default=None),
        click.option("--endpoint", envvar="MOSAIC_ENDPOINT", default=None,
                     help="HTTP backend base URL (default: $MOSAIC_ENDPOINT)."),
        click.option("--overlap-policy", "overlap", type=click.Choice(["last-wins", "first-wins"]),
                     default=None),
        click.option("--uncovered", default=None,
                     help="'content' or 'background:<style>' for uncovered pixels."),
        click.option("--cache-capacity", type=int, default=None),
        click.option("--no-cache", is_flag=True, default=None,
                     help="Bypass the image-encoding cache entirely."),
        click.option("--seed", type=int, default=None),
        click.option("--out", "out_dir", type=click.Path(), default=None,
                     help="Output directory for artifacts and the manifest."),
        click.option("--timeout", type=float, default=None, help="Per-request timeout, seconds."),
        click.option("--workers", type=int, default=None, help="Worker pool size."),
        click.option("--on-empty-mask", type=click.Choice(["skip", "abort"]), default=None),
        click.option("--config", "config_file", type=click.Path(), default=None,
                     help="Config file with 'key = value' lines; flags override it."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _make_config(config_file, **overrides) -> PipelineConfig:
    file_values = load_config_file(config_file) if config_file else None
    return PipelineConfig.build(file_values, **overrides)


@cli.command("run")
@_run_options
def run_cmd(config_file, **overrides):
    """Run the full pipeline and persist artifacts."""
    cfg = _make_config(config_file, **overrides)
    result = run_pipeline(cfg)
    click.echo(f"pairs: {len(result.pairs)}  skipped: {result.skipped}")
    click.echo(f"coverage: {result.coverage[0]:.4f}  overlap: {result.coverage[1]:.4f}")
    for t in result.timings:
        click.echo(f"  {t.stage:<14}{t.duration_ms:>10.3f} ms  x{t.count}")
    click.echo(f"artifacts written to {result.out_dir}")


@cli.command("bench")
@click.option("--iterations", type=int, default=5, show_default=True)
@_run_options
def bench_cmd(iterations, config_file, **overrides):
    """Benchmark per-stage latencies over repeated runs."""
    cfg = _make_config(config_file, **overrides)
    report = run_bench(cfg, iterations)
    click.echo(report.to_table())


@cli.command("eval")
@click.option("--run", "run_dir", type=click.Path(), default=None,
              help="Score a prior run directory (reads its manifest).")
@click.option("--image", "image_path", type=click.Path(), default=None)
@click.option("--prompt", default=None)
@click.option("--masks", "masks_dir", type=click.Path(), default=None,
              help="Directory of per-object mask PNGs in sorted name order.")
@click.option("--backend", type=click.Choice(["mock", "http"]), default="mock", show_default=True)
@click.option("--endpoint", envvar="MOSAIC_ENDPOINT", default=None)
@click.option("--seed", type=int, default=None,
              help="Crop sampling seed (default: the run manifest's seed, or 0).")
@click.option("--scale", type=float, default=1.0, show_default=True,
              help="Multiplier applied to reported scores.")
@click.option("--timeout", type=float, default=30.0, show_default=True)
@click.option("--out", "out_file", type=click.Path(), default=None, help="Report JSON path.")
def eval_cmd(run_dir, image_path, prompt, masks_dir, backend, endpoint, seed, scale, timeout, out_file):
    """Patch-wise CLIP score for a run directory or an explicit image."""
    cfg = PipelineConfig(image_path=image_path or "unused", prompt=prompt or "unused",
                         backend=backend, endpoint=endpoint, timeout=timeout)
    if backend == "http" and not endpoint:
        raise ConfigError("http backend needs an endpoint (flag or MOSAIC_ENDPOINT)")
    model = build_backend(cfg)
    if run_dir:
        report = evaluate_run(run_dir, model, seed=seed, scale=scale)
    else:
        if not (image_path and prompt and masks_dir):
            raise ConfigError("eval needs either --run or all of --image/--prompt/--masks")
        report = evaluate_explicit(image_path, prompt, masks_dir, model,
                                   seed=0 if seed is None else seed, scale=scale)
    if out_file:
        with open(out_file, "wb") as fh:
            fh.write(report.to_json_bytes())
        click.echo(f"report written to {out_file}")
    agg = "n/a (all objects skipped)" if report.aggregate is None else f"{report.aggregate:.6f}"
    click.echo(f"aggregate: {agg}")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 2
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except MosaicError as exc:
        click.echo(f"error: {exc}", err=True)
        return exc.exit_code
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
