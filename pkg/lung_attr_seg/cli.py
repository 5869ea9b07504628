"""
Command-line interface for lung-attr-seg.

Usage:
  lung-attr-seg gen-data --n <N> [--seed <S>] --out <dir>
  lung-attr-seg parse-attrs <texts.tsv> [-o <attributes.tsv>]
  lung-attr-seg train [--data <dir>] [--mode transductive|inductive] --out <run_dir>
  lung-attr-seg eval (--ckpt <file> | --run <run_dir>) [--data <dir>] [--out <dir>]
  lung-attr-seg sweep [--grid field=v1,v2,...]... [--ladder] [--data <dir>] --out <dir>
  lung-attr-seg --version

Every command accepts --config <file> (key = value), --set key=value
(repeatable, applied last), -v (debug log) and -q (warnings only, no
banner or progress bars).  Relative output paths are placed under
$LUNG_ATTR_SEG_OUTPUT_ROOT when it is set.

Examples:
  # 100 synthetic samples with ground truth
  lung-attr-seg gen-data --n 100 --seed 0 --out data/synth

  # Inductive training on them, 64 px images
  lung-attr-seg train --data data/synth --mode inductive --set height=64 --set width=64 --out runs/ind

  # Re-evaluate the last checkpoint of that run on its held-out split
  lung-attr-seg eval --run runs/ind

  # Threshold sweep
  lung-attr-seg sweep --data data/synth --grid delta=0.5,0.7,0.9 --out runs/delta

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

from lung_attr_seg import __codename__, __version__
from lung_attr_seg.attributes.batch import parse_table, read_text_table, write_attribute_table
from lung_attr_seg.attributes.taxonomy import AttributeTaxonomy
from lung_attr_seg.config import CONFIG_NAME, RunConfig
from lung_attr_seg.data.qata import load_dataset, write_dataset
from lung_attr_seg.data.sample import ImageTextSample
from lung_attr_seg.data.synthetic import synth_generate
from lung_attr_seg.errors import ConfigError, LungSegError
from lung_attr_seg.evaluation.evaluate import evaluate, evaluate_masks, predict_masks
from lung_attr_seg.evaluation.report import (
    plot_history,
    plot_overlay,
    plot_sweep,
    sweep_markdown,
    write_metrics_tsv,
    write_sweep_tsv,
)
from lung_attr_seg.evaluation.sweep import expand_grid, ladder_cells, ablation_sweep
from lung_attr_seg.io.json_io import load_json_output, save_json_output
from lung_attr_seg.io.kv_config import load_kv_file, parse_assignment
from lung_attr_seg.model.checkpoint import load_checkpoint
from lung_attr_seg.model.config import ModelConfig
from lung_attr_seg.training.trainer import BEST_NAME, LAST_NAME, fit

logger = logging.getLogger("lung_attr_seg")

OUTPUT_ROOT_ENV = "LUNG_ATTR_SEG_OUTPUT_ROOT"
EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2
SPLIT_NAME = "split.json"

BANNER = f"""\
 ╔══════════════════════════════════════════════════════╗
 ║  lung-attr-seg v{__version__} ("{__codename__}")                    ║
 ║  Text-attribute guided lung infection segmentation   ║
 ║  Coarse masks + attribute heads + self-training      ║
 ╚══════════════════════════════════════════════════════╝
"""

#: argparse dest -> config key for flags that shadow config fields.
FLAG_KEYS = {
    "n": "run.n_samples",
    "seed": "seed",
    "mode": "run.mode",
    "data": "run.data_dir",
    "workers": "run.workers",
    "epochs": "train.epochs",
    "lr": "train.lr",
    "batch_size": "train.batch_size",
    "alpha": "weights.alpha",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file", default=None)
    common.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE",
        help="Override a configuration field (repeatable)",
    )
    common.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    common.add_argument("--quiet", "-q", action="store_true", help="Warnings only; no banner")

    parser = argparse.ArgumentParser(
        prog="lung-attr-seg",
        description="Text-attribute guided lung infection segmentation from coarse masks",
    )
    parser.add_argument("--version", action="version", version=f"lung-attr-seg {__version__}")
    subparsers = parser.add_subparsers(dest="command")

    # --- gen-data ---
    gen = subparsers.add_parser("gen-data", parents=[common], help="Write a synthetic dataset")
    gen.add_argument("--n", type=int, default=None, help="Number of samples")
    gen.add_argument("--seed", type=int, default=None, help="Generator seed")
    gen.add_argument("--out", default=None, help="Output dataset directory")
    gen.set_defaults(handler=cmd_gen_data)

    # --- parse-attrs ---
    pa = subparsers.add_parser("parse-attrs", parents=[common], help="Extract attributes from a text table")
    pa.add_argument("input_file", help="TSV of sample_id<TAB>raw_text")
    pa.add_argument("-o", "--output", default=None, help="Output TSV (default: <input>_attributes.tsv)")
    pa.add_argument("--taxonomy", default=None, help="Attribute taxonomy file")
    pa.set_defaults(handler=cmd_parse_attrs)

    # --- train ---
    tr = subparsers.add_parser("train", parents=[common], help="Train a model")
    _add_data_flags(tr)
    tr.add_argument("--mode", choices=["transductive", "inductive"], default=None)
    tr.add_argument("--epochs", type=int, default=None)
    tr.add_argument("--lr", type=float, default=None)
    tr.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    tr.add_argument("--out", default=None, help="Run directory")
    tr.set_defaults(handler=cmd_train)

    # --- eval ---
    ev = subparsers.add_parser("eval", parents=[common], help="Evaluate a checkpoint")
    _add_data_flags(ev)
    ev.add_argument("--ckpt", default=None, help="Checkpoint file")
    ev.add_argument("--run", default=None, help="Run directory written by 'train'")
    ev.add_argument("--which", choices=["last", "best"], default="last", help="Checkpoint of --run")
    ev.add_argument("--alpha", type=float, default=None, help="Binarisation threshold")
    ev.add_argument("--overlays", type=int, default=0, help="Write overlay figures for N samples")
    ev.add_argument("--out", default=None, help="Output directory")
    ev.set_defaults(handler=cmd_eval)

    # --- sweep ---
    sw = subparsers.add_parser("sweep", parents=[common], help="Ablation sweep")
    _add_data_flags(sw)
    sw.add_argument("--mode", choices=["transductive", "inductive"], default=None)
    sw.add_argument("--grid", action="append", default=[], metavar="FIELD=V1,V2,...")
    sw.add_argument("--ladder", action="store_true", help="Component ladder preset")
    sw.add_argument("--epochs", type=int, default=None)
    sw.add_argument("--out", default=None, help="Output directory")
    sw.set_defaults(handler=cmd_sweep)

    return parser


def _add_data_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--data", default=None, help="Dataset directory (default: synthetic, in memory)")
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--workers", type=int, default=None, help="Ingestion threads")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.command is None:
        parser.print_help()
        return EXIT_OK

    _configure_logging(args)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LungSegError, OSError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def _configure_logging(args) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg, file=sys.stderr)


# ----------------------------------------------------------------------
# Configuration and paths
# ----------------------------------------------------------------------

def resolve_config(args, base_file: Optional[Path] = None) -> RunConfig:
    """Defaults < run directory config < --config file < flags < --set."""
    values: Dict[str, str] = {}
    if base_file is not None:
        values.update(load_kv_file(base_file))
    if args.config:
        values.update(load_kv_file(args.config))
    for dest, key in FLAG_KEYS.items():
        val = getattr(args, dest, None)
        if val is not None:
            values[key] = str(val)
    for item in args.set:
        key, val = parse_assignment(item)
        values[key] = val
    return RunConfig().with_values(values)


def output_dir(path: Optional[str], default: str) -> Path:
    out = Path(path or default)
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root and not out.is_absolute():
        out = Path(root) / out
    out.mkdir(parents=True, exist_ok=True)
    return out


def load_samples(config: RunConfig, model_config: Optional[ModelConfig] = None) -> List[ImageTextSample]:
    """Samples from ``run.data_dir``, or a synthetic set generated in memory."""
    model_config = model_config or config.model
    if config.run.data_dir:
        samples = load_dataset(
            config.run.data_dir,
            size=(model_config.height, model_config.width),
            tau=config.weights.tau,
            workers=config.run.workers,
        )
        if not samples:
            raise FileNotFoundError(f"no samples found in {config.run.data_dir}")
        return samples
    generator = dataclasses.replace(config.generator, height=model_config.height, width=model_config.width)
    return synth_generate(generator.seed, config.run.n_samples, generator)


# ----------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------

def cmd_gen_data(args) -> int:
    """Write N synthetic samples: images, masks, texts.tsv, attributes.tsv."""
    config = resolve_config(args)
    _say(args, BANNER)
    out = output_dir(args.out, "data/synthetic")
    n = config.run.n_samples

    _say(args, f"Generating {n} synthetic samples (seed {config.generator.seed})...")
    t0 = time.perf_counter()
    samples = synth_generate(config.generator.seed, n, config.generator)
    write_dataset(samples, out)

    result = parse_table([(s.sample_id, s.raw_text) for s in samples])
    write_attribute_table(result.rows, out / "attributes.tsv")
    baseline = evaluate_masks(samples)
    write_metrics_tsv(baseline, out / "coarse_baseline.tsv")
    config.save(out)

    _say(args, f"  Completed in {time.perf_counter() - t0:.3f}s")
    _say(args, f"  Coarse-mask Dice: {baseline.dice:.4f}  Jaccard: {baseline.jaccard:.4f}")
    _say(args, f"  Dataset written to: {out}")
    return EXIT_OK


def cmd_parse_attrs(args) -> int:
    """Parse a text table into category columns; exit 1 if any row fails."""
    taxonomy = AttributeTaxonomy.from_file(args.taxonomy) if args.taxonomy else AttributeTaxonomy.default()
    src = Path(args.input_file)
    pairs = read_text_table(src)
    result = parse_table(pairs, taxonomy)

    output = Path(args.output) if args.output else src.with_name(f"{src.stem}_attributes.tsv")
    write_attribute_table(result.rows, output, taxonomy)
    _say(args, f"Parsed {len(result.rows)} of {len(pairs)} rows -> {output}")

    for failure in result.failures:
        print(f"Error: row {failure.sample_id}: {failure.cause}", file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_FAILURE


def cmd_train(args) -> int:
    """Train; the run directory gets config, log, checkpoints, history, metrics."""
    config = resolve_config(args)
    _say(args, BANNER)
    run_dir = output_dir(args.out, "runs/train")
    config.save(run_dir)
    samples = load_samples(config)

    _say(args, f"Training ({config.run.mode}) on {len(samples)} samples...")
    _say(args, f"  Epochs: {config.train.epochs}  lr: {config.train.lr}  batch: {config.train.batch_size}")
    t0 = time.perf_counter()
    result = fit(
        samples,
        config.train,
        config.run.mode,
        model_config=config.model,
        run_dir=run_dir,
        hyperparameters=config.hyperparameters(),
        progress=not args.quiet,
    )
    elapsed = time.perf_counter() - t0

    history = [r.to_dict() for r in result.history]
    save_json_output(
        {"train": result.train_ids, "val": result.val_ids, "eval": result.eval_ids},
        run_dir / SPLIT_NAME, command="train", deterministic=True,
    )
    save_json_output(
        {"history": history, "summary": result.summary(), "parameters": result.model.parameter_counts()},
        run_dir / "history.json", command="train", config=config.flat(), deterministic=True,
    )
    if history:
        plot_history(history, run_dir / "history.png")
    if result.last_eval is not None:
        write_metrics_tsv(result.last_eval, run_dir / "metrics.tsv")
        save_json_output(
            result.summary(), run_dir / "metrics.json",
            command="train", config=config.flat(), deterministic=True,
        )

    _say(args, f"  Completed in {elapsed:.3f}s ({len(history)} epochs)")
    if result.last_eval is not None:
        _say(args, f"  Last epoch Dice: {result.last_eval.dice:.4f}  Jaccard: {result.last_eval.jaccard:.4f}")
    if result.best_eval is not None:
        _say(args, f"  Best epoch {result.best_epoch} Dice: {result.best_eval.dice:.4f}")
    _say(args, f"  Run written to: {run_dir}")
    return EXIT_OK


def cmd_eval(args) -> int:
    """Evaluate a checkpoint; metrics TSV/JSON and optional overlays."""
    run_dir = Path(args.run) if args.run else None
    if run_dir is not None:
        config = resolve_config(args, base_file=run_dir / CONFIG_NAME)
        ckpt = Path(args.ckpt) if args.ckpt else run_dir / "checkpoints" / (BEST_NAME if args.which == "best" else LAST_NAME)
    elif args.ckpt:
        config = resolve_config(args)
        ckpt = Path(args.ckpt)
    else:
        raise ConfigError("eval needs --ckpt or --run")
    _say(args, BANNER)

    checkpoint = load_checkpoint(ckpt)
    model = checkpoint.model
    samples = load_samples(config, model.config)
    if run_dir is not None and args.data is None and (run_dir / SPLIT_NAME).exists():
        by_id = {s.sample_id: s for s in samples}
        ids = load_json_output(run_dir / SPLIT_NAME)["results"]["eval"]
        samples = [by_id[i] for i in ids if i in by_id]

    _say(args, f"Evaluating {ckpt} on {len(samples)} samples...")
    result = evaluate(model, samples, config.weights.alpha, config.train.batch_size)
    out = output_dir(args.out, str(run_dir / "eval") if run_dir else "runs/eval")
    write_metrics_tsv(result, out / "metrics.tsv")
    save_json_output(
        result.to_dict(per_sample=True), out / "metrics.json",
        command="eval", config=config.flat(), deterministic=True,
    )
    if args.overlays > 0:
        _write_overlays(model, samples[: args.overlays], config.weights.alpha, out / "overlays")

    _say(args, f"  Dice: {result.dice:.4f}  Jaccard: {result.jaccard:.4f}")
    _say(args, f"  Results written to: {out}")
    return EXIT_OK


def _write_overlays(model, samples: List[ImageTextSample], alpha: float, directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    predictions = predict_masks(model, samples, alpha)
    for s in samples:
        plot_overlay(
            s.image, directory / f"{s.sample_id}.png",
            prediction=predictions[s.sample_id], gt=s.gt_mask, coarse=s.coarse_mask,
            title=s.attr_description.text,
        )


def cmd_sweep(args) -> int:
    """One training run per grid cell (or ladder rung); table, Markdown and plot."""
    config = resolve_config(args)
    if args.ladder and args.grid:
        raise ConfigError("--ladder and --grid are exclusive")
    _say(args, BANNER)
    out = output_dir(args.out, "runs/sweep")
    config.save(out)

    if args.ladder:
        keys: List[str] = []
        cells: List[Any] = ladder_cells()
    else:
        keys, cells = expand_grid(args.grid)
    samples = load_samples(config)

    _say(args, f"Sweeping {len(cells)} configurations ({config.run.mode}) on {len(samples)} samples...")
    t0 = time.perf_counter()
    table = ablation_sweep(samples, config, cells, keys, out_dir=out / "cells", progress=not args.quiet)

    write_sweep_tsv(table, out / "sweep.tsv")
    (out / "sweep.md").write_text(sweep_markdown(table), encoding="utf-8")
    plot_sweep(table, out / "sweep.png")
    save_json_output(table.to_dict(), out / "sweep.json", command="sweep", config=config.flat(), deterministic=True)

    _say(args, f"  Completed in {time.perf_counter() - t0:.3f}s")
    for row in table.rows:
        _say(args, f"  {row.label:<40s} Dice {row.result.dice:.4f}  Jaccard {row.result.jaccard:.4f}")
    _say(args, f"  Results written to: {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
