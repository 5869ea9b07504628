"""Tests for ablation sweeps and the report emitters."""

import csv

import numpy as np
import pytest

from lung_attr_seg.config import CONFIG_NAME, RunConfig
from lung_attr_seg.data.synthetic import synth_generate
from lung_attr_seg.errors import ConfigError
from lung_attr_seg.evaluation import EvalResult, SampleScore, evaluate, evaluate_masks
from lung_attr_seg.evaluation.report import (
    plot_history,
    plot_overlay,
    plot_sweep,
    read_metrics_tsv,
    sweep_markdown,
    write_metrics_tsv,
    write_sweep_tsv,
)
from lung_attr_seg.evaluation.sweep import (
    COARSE_ONLY,
    SweepRow,
    SweepTable,
    ablation_sweep,
    expand_grid,
    ladder_cells,
    parse_grid_spec,
)
from lung_attr_seg.io.kv_config import load_kv_file
from lung_attr_seg.training import fit

TINY = {
    "height": "64",
    "width": "64",
    "depth": "2",
    "base_width": "8",
    "channels": "16",
    "embed_dim": "8",
    "max_tokens": "12",
    "epochs": "1",
    "batch_size": "4",
    "lr": "1e-3",
    "warmup_epochs": "0",
}


@pytest.fixture
def base():
    return RunConfig().with_values(TINY)


def table_of(*rows, keys=("delta",)):
    return SweepTable(keys=list(keys), rows=list(rows))


class TestGridSpecs:
    def test_simple(self):
        assert parse_grid_spec("delta=0.5,0.7,0.9") == ("delta", ["0.5", "0.7", "0.9"])

    def test_pipe_separator(self):
        assert parse_grid_spec("attribute_heads=1,2,3|1,2") == ("attribute_heads", ["1,2,3", "1,2"])

    def test_key_normalised(self):
        assert parse_grid_spec("Lambda-A = 0, 0.9")[0] == "lambda_a"

    @pytest.mark.parametrize("spec", ["delta", "delta=", "=0.5"])
    def test_malformed(self, spec):
        with pytest.raises(ConfigError):
            parse_grid_spec(spec)

    def test_cartesian_product(self):
        keys, cells = expand_grid(["lambda_a=0,0.9", "delta=0.5,0.7,0.9"])
        assert keys == ["lambda_a", "delta"]
        assert len(cells) == 6
        assert cells[0] == {"lambda_a": "0", "delta": "0.5"}
        assert cells[-1] == {"lambda_a": "0.9", "delta": "0.9"}

    def test_duplicate_field(self):
        with pytest.raises(ConfigError):
            expand_grid(["delta=0.5", "delta=0.7"])

    def test_empty_grid_is_one_base_cell(self):
        assert expand_grid([]) == ([], [{}])

    def test_ladder(self):
        ladder = ladder_cells()
        assert len(ladder) == 7
        assert ladder[0][1] == {COARSE_ONLY: "true"}
        assert ladder[-1] == ("full", {})
        for _, cell in ladder[1:]:
            RunConfig().with_values(cell)


class TestAblationSweep:
    def test_single_cell_matches_direct_run(self, base, small_samples):
        table = ablation_sweep(small_samples, base, [{"delta": "0.7"}], keys=["delta"])
        direct = fit(small_samples, base.train, base.run.mode, model_config=base.model)
        assert len(table.rows) == 1
        row = table.rows[0]
        assert row.result.dice == direct.last_eval.dice
        assert row.result.jaccard == direct.last_eval.jaccard
        again = evaluate(direct.model, small_samples, base.weights.alpha, base.train.batch_size)
        assert again.dice == row.result.dice

    def test_delta_sweep(self, tmp_path, base, small_samples):
        keys, cells = expand_grid(["delta=0.5,0.6,0.7,0.8,0.9"])
        table = ablation_sweep(small_samples, base, cells, keys, out_dir=tmp_path)
        assert [r.values["delta"] for r in table.rows] == ["0.5", "0.6", "0.7", "0.8", "0.9"]
        assert all(0.0 <= r.result.dice <= 1.0 for r in table.rows)
        assert load_kv_file(tmp_path / "cell_00" / CONFIG_NAME)["weights.delta"] == "0.5"
        assert (tmp_path / "cell_04" / "checkpoints" / "last.pt").exists()
        plot = plot_sweep(table, tmp_path / "sweep.png")
        assert plot.exists() and plot.stat().st_size > 0

    def test_ladder_rows(self, base, small_samples):
        ladder = ladder_cells()
        table = ablation_sweep(small_samples, base, [ladder[0], ladder[1], ladder[-1]])
        coarse, no_aica, full = table.rows
        assert coarse.label == "coarse mask only"
        assert coarse.result.dice == evaluate_masks(small_samples).dice
        assert coarse.trainable_parameters == 0
        assert 0 < no_aica.trainable_parameters < full.trainable_parameters

    def test_needs_ground_truth(self, base, small_samples):
        unlabeled = [s.replace(gt_mask=None) for s in small_samples]
        with pytest.raises(ConfigError):
            ablation_sweep(unlabeled, base, [{}])


@pytest.mark.slow
class TestDirectionalLadder:
    """Seeded 500 / 200 inductive benchmark over three ladder rungs."""

    RUNGS = ("coarse mask only", "+L_c", "+attributes")
    SEEDS = (0, 1, 2)

    def test_ordering(self):
        cells = [(label, cell) for label, cell in ladder_cells() if label in self.RUNGS]
        assert [label for label, _ in cells] == list(self.RUNGS)
        dice = {label: [] for label in self.RUNGS}
        for seed in self.SEEDS:
            base = RunConfig().with_values({
                "height": "64", "width": "64", "seed": str(seed), "mode": "inductive",
                "n_samples": "700", "train_fraction": str(500 / 700), "epochs": "15",
            })
            samples = synth_generate(seed, 700, base.generator)
            table = ablation_sweep(samples, base, cells)
            for row in table.rows:
                assert row.result.n_samples == 200
                dice[row.label].append(row.result.dice)
        coarse, lc, full = (float(np.mean(dice[label])) for label in self.RUNGS)
        assert lc - coarse >= 0.02
        assert full - lc >= 0.02


class TestReports:
    def test_metrics_tsv(self, tmp_path):
        result = EvalResult(0.5, 0.4, 2, [SampleScore("a", 0.25, 0.2), SampleScore("b", 0.75, 0.6)])
        path = tmp_path / "metrics.tsv"
        write_metrics_tsv(result, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "sample_id\tdice\tjaccard"
        assert lines[1] == "mean\t0.500000\t0.400000"
        back = read_metrics_tsv(path)
        assert back["dice"] == 0.5
        assert back["per_sample"] == {"a": (0.25, 0.2), "b": (0.75, 0.6)}

    def test_sweep_tsv_and_markdown(self, tmp_path):
        row = SweepRow("delta=0.5", {"delta": "0.5"}, EvalResult(0.4, 0.25, 2), EvalResult(0.5, 0.3, 2), 3, 10)
        table = table_of(row)
        write_sweep_tsv(table, tmp_path / "s.tsv")
        with open(tmp_path / "s.tsv", newline="") as f:
            rows = list(csv.reader(f, delimiter="\t"))
        assert rows[0] == ["label", "delta", "dice", "jaccard", "best_dice", "best_jaccard", "best_epoch", "trainable_parameters"]
        assert rows[1] == ["delta=0.5", "0.5", "0.400000", "0.250000", "0.500000", "0.300000", "3", "10"]
        md = sweep_markdown(table)
        assert md.startswith("Mode: transductive\n")
        assert "| label | delta | dice |" in md
        assert "| delta=0.5 | 0.5 | 0.400000 |" in md

    def test_plot_sweep_with_labels(self, tmp_path):
        rows = [SweepRow(label, {}, EvalResult(0.3, 0.2, 1)) for label, _ in ladder_cells()[:3]]
        path = plot_sweep(table_of(*rows, keys=()), tmp_path / "ladder.png")
        assert path.stat().st_size > 0

    def test_plot_history(self, tmp_path):
        history = [
            {"epoch": 0, "l_c": 0.6, "l_a": 5.0, "l_st": 0.0, "l_total": 5.1},
            {"epoch": 1, "l_c": 0.5, "l_a": 4.0, "l_st": 0.4, "l_total": 4.5, "eval": {"dice": 0.3}},
        ]
        assert plot_history(history, tmp_path / "h.png").stat().st_size > 0

    def test_plot_overlay(self, tmp_path, small_samples):
        s = small_samples[0]
        path = plot_overlay(s.image, tmp_path / "o.png", prediction=s.coarse_mask, gt=s.gt_mask, title=s.sample_id)
        assert path.stat().st_size > 0
        empty = np.zeros_like(s.gt_mask)
        assert plot_overlay(s.image, tmp_path / "e.png", prediction=empty).exists()
