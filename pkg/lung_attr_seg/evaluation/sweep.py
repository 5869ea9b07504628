"""
Ablation sweeps.

A sweep is a list of cells; each cell is a set of RunConfig overrides.
Every cell is trained with the same seed and data split and evaluated on
the same evaluation set.

Grids come from ``field=v1,v2,...`` specs (``|`` separates values when a
value itself contains commas, e.g. ``attribute_heads=1,2,3|1,2``);
several specs form their Cartesian product.  The ``ladder`` preset adds
the model components one at a time, starting from the coarse masks
themselves.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from lung_attr_seg.config import RunConfig
from lung_attr_seg.data.sample import ImageTextSample
from lung_attr_seg.errors import ConfigError
from lung_attr_seg.evaluation.evaluate import EvalResult, evaluate_masks
from lung_attr_seg.training.trainer import fit, split_pool

logger = logging.getLogger(__name__)

#: Cell key that skips training and scores the coarse masks.
COARSE_ONLY = "coarse_only"

LADDER: List[Tuple[str, Dict[str, str]]] = [
    ("coarse mask only", {COARSE_ONLY: "true"}),
    ("+L_c", {"lambda_a": "0", "lambda_st": "0", "use_aica": "false"}),
    ("+L_a", {"lambda_st": "0", "use_aica": "false"}),
    ("+AICA (text)", {"lambda_st": "0", "use_aica": "true", "text_input": "raw"}),
    ("+attributes", {"lambda_st": "0", "use_aica": "true", "text_input": "attributes"}),
    ("-L_a +L_st", {"lambda_a": "0", "use_aica": "true", "text_input": "attributes"}),
    ("full", {}),
]


@dataclass
class SweepRow:
    label: str
    values: Dict[str, str]
    result: EvalResult
    best: Optional[EvalResult] = None
    best_epoch: Optional[int] = None
    trainable_parameters: int = 0

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "values": dict(self.values),
            "dice": self.result.dice,
            "jaccard": self.result.jaccard,
            "n_samples": self.result.n_samples,
            "best_dice": self.best.dice if self.best else None,
            "best_jaccard": self.best.jaccard if self.best else None,
            "best_epoch": self.best_epoch,
            "trainable_parameters": self.trainable_parameters,
        }


@dataclass
class SweepTable:
    """One row per cell; ``keys`` are the swept fields in grid order."""

    keys: List[str]
    rows: List[SweepRow] = field(default_factory=list)
    mode: str = "transductive"

    def to_dict(self) -> dict:
        return {"keys": list(self.keys), "mode": self.mode, "rows": [r.to_dict() for r in self.rows]}


def parse_grid_spec(spec: str) -> Tuple[str, List[str]]:
    """``"delta=0.5,0.7,0.9"`` -> ``("delta", ["0.5", "0.7", "0.9"])``."""
    if "=" not in spec:
        raise ConfigError(f"grid spec must look like field=v1,v2,..., got {spec!r}")
    key, raw = spec.split("=", 1)
    key = key.strip().lower().replace("-", "_")
    sep = "|" if "|" in raw else ","
    values = [v.strip() for v in raw.split(sep) if v.strip()]
    if not key or not values:
        raise ConfigError(f"grid spec {spec!r} has no field or no values")
    return key, values


def expand_grid(specs: Sequence[str]) -> Tuple[List[str], List[Dict[str, str]]]:
    """Cartesian product of the grid specs, as ``(keys, cells)``."""
    parsed = [parse_grid_spec(s) for s in specs]
    keys = [k for k, _ in parsed]
    if len(set(keys)) != len(keys):
        raise ConfigError(f"field swept twice: {keys}")
    cells = [dict(zip(keys, combo)) for combo in itertools.product(*(v for _, v in parsed))]
    return keys, cells or [{}]


def ladder_cells() -> List[Tuple[str, Dict[str, str]]]:
    return [(label, dict(cell)) for label, cell in LADDER]


def _label(cell: Mapping[str, str]) -> str:
    return ", ".join(f"{k}={v}" for k, v in cell.items()) or "base"


def ablation_sweep(
    samples: Sequence[ImageTextSample],
    base: RunConfig,
    cells: Sequence[Mapping[str, str] | Tuple[str, Mapping[str, str]]],
    keys: Optional[Sequence[str]] = None,
    out_dir: Optional[str | Path] = None,
    progress: bool = False,
) -> SweepTable:
    """Train and evaluate one run per cell.

    ``cells`` are override mappings, or ``(label, overrides)`` pairs.
    Rows report the last-epoch evaluation plus the best epoch's.  Each
    cell's run directory is ``out_dir/cell_XX`` when ``out_dir`` is given.
    """
    samples = list(samples)
    mode = base.run.mode
    table = SweepTable(keys=list(keys or []), mode=mode)
    for index, cell in enumerate(cells):
        label, overrides = cell if isinstance(cell, tuple) else (_label(cell), cell)
        values = dict(overrides)
        overrides = dict(overrides)
        coarse_only = overrides.pop(COARSE_ONLY, "false").lower() in ("1", "true", "yes", "on")
        config = base.with_values(overrides)
        logger.info("sweep cell %d/%d: %s", index + 1, len(cells), label)

        if coarse_only:
            _, _, eval_set = split_pool(samples, mode, config.train)
            table.rows.append(SweepRow(label, values, evaluate_masks(eval_set)))
            continue

        run_dir = Path(out_dir) / f"cell_{index:02d}" if out_dir is not None else None
        if run_dir is not None:
            run_dir.mkdir(parents=True, exist_ok=True)
            config.save(run_dir)
        fitted = fit(
            samples,
            config.train,
            mode,
            model_config=config.model,
            run_dir=run_dir,
            hyperparameters=config.hyperparameters(),
            progress=progress,
        )
        if fitted.last_eval is None:
            raise ConfigError("sweep needs ground-truth masks on the evaluation set and epochs >= 1")
        table.rows.append(
            SweepRow(
                label=label,
                values=values,
                result=fitted.last_eval,
                best=fitted.best_eval,
                best_epoch=fitted.best_epoch,
                trainable_parameters=fitted.model.parameter_counts()["trainable"],
            )
        )
    return table
