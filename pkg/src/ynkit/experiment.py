"""
Module for the data-size ablation: training-data amount x tokenization level x seed.

Grid values are minutes of speech, read against a reference corpus of
``reference_minutes`` and scaled to the size of the training side of the
actual corpus ("all" is the whole training side). Every seed fixes one
train/validation split; the subsets of a seed are nested and share the
validation set.
"""

import itertools
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import pandas as pd

from ynkit.corpus import (
    apply_exclusions,
    load_manifest,
    split,
    subset_by_minutes,
    total_minutes,
)
from ynkit.evaluation import Recognizer, evaluate_model
from ynkit.model import ModelConfig, save_checkpoint
from ynkit.phonology import default_inventory
from ynkit.synthetic import MANIFEST_NAME
from ynkit.trainer import TrainConfig, train
from ynkit.vocabulary import build_vocab

ALL = "all"
LEVELS = ("grapheme", "phoneme")
CSV_COLUMNS = ["minutes", "level", "seed", "cer", "wer", "best_epoch", "stopped_early"]
THREADS_ENV = "YNKIT_THREADS"

# Training recipe of every cell, on top of the TrainConfig defaults
ABLATION_TRAINING = {"lr_init": 0.02, "batch_size": 1}

_log = logging.getLogger(__name__)


# pylint: disable=too-many-instance-attributes
@dataclass
class ExperimentConfig:
    """Settings of an ablation run."""

    corpus_dir: str = ""
    output_dir: str = "ablation"
    levels: tuple = LEVELS
    minutes: tuple = (10, 30, 60, 90, 120, ALL)
    seeds: tuple = (1, 2, 3)
    reference_minutes: float = 156
    train_frac: float = 0.8
    context: int = 2
    hidden_dim: int = 64
    training: TrainConfig = field(
        default_factory=lambda: TrainConfig(**ABLATION_TRAINING)
    )
    threads: Optional[int] = None

    def __post_init__(self):
        self.levels = tuple(self.levels)
        self.minutes = tuple(self.minutes)
        self.seeds = tuple(self.seeds)
        if isinstance(self.training, dict):
            self.training = TrainConfig.from_dict(
                {**ABLATION_TRAINING, **self.training}
            )

        for level in self.levels:
            if level not in LEVELS:
                raise ValueError(f"Unknown tokenization level: {level}.")
        if not self.levels or not self.minutes or not self.seeds:
            raise ValueError("Levels, minutes and seeds must not be empty.")

        numeric = [m for m in self.minutes if m != ALL]
        if ALL in self.minutes and self.minutes.index(ALL) != len(self.minutes) - 1:
            raise ValueError(f"'{ALL}' must be the last grid value.")
        if any(not m > 0 for m in numeric) or list(numeric) != sorted(set(numeric)):
            raise ValueError(
                f"Grid values must be positive and ascending, got {self.minutes}."
            )
        if self.reference_minutes < 0:
            raise ValueError("reference_minutes must be non-negative.")

    def to_dict(self):
        """Returns the config as a JSON-friendly dict."""

        data = asdict(self)
        for key in ("levels", "minutes", "seeds"):
            data[key] = list(data[key])
        return data

    @classmethod
    def from_dict(cls, data):
        """Builds a config from a dict, ignoring unknown keys."""

        return cls(**{k: v for k, v in data.items() if k in cls.__dataclass_fields__})


def parse_grid(text):
    """Parses a comma-separated grid such as "10,30,all"."""

    values = []
    for item in text.split(","):
        item = item.strip()
        if item == ALL:
            values.append(ALL)
        else:
            number = float(item)
            values.append(int(number) if number.is_integer() else number)
    return tuple(values)


def worker_count(config):
    """Number of worker threads: config, then YNKIT_THREADS, then CPU count."""

    if config.threads:
        return config.threads
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(int(env), 1)
    return os.cpu_count() or 1


def scaled_minutes(value, available, reference):
    """Real minutes for a grid value."""

    if value == ALL:
        return available
    if reference:
        return value * available / reference
    return value


def cell_name(level, minutes, seed):
    """Directory name of one cell."""

    return f"{level}-{minutes}-seed{seed}"


# pylint: disable=too-many-arguments,too-many-locals
def run_cell(train_utts, valid_utts, vocab, minutes, seed, config, inv=None):
    """
    Trains and evaluates one grid cell.

    Outputs (checkpoint, vocabulary, training report, evaluation report and
    error tables) land in their own directory under ``config.output_dir``.

    Returns
    -------
    dict
        One row of the ablation CSV.
    """

    inv = inv or default_inventory()
    cell_dir = os.path.join(
        config.output_dir, "cells", cell_name(vocab.level, minutes, seed)
    )
    os.makedirs(cell_dir, exist_ok=True)

    available = total_minutes(train_utts)
    target = scaled_minutes(minutes, available, config.reference_minutes)
    if minutes == ALL:
        subset = train_utts
    else:
        subset = subset_by_minutes(train_utts, target, seed)
    _log.info(
        "Cell %s: %d utterances, %.2f minutes",
        cell_name(vocab.level, minutes, seed),
        len(subset),
        total_minutes(subset),
    )

    model_config = ModelConfig(
        input_dim=subset[0].load_features().dim,
        vocab_size=len(vocab),
        context=config.context,
        hidden_dim=config.hidden_dim,
        seed=seed,
    )
    train_config = replace(config.training, seed=seed)
    params, report = train(subset, valid_utts, vocab, model_config, train_config, inv)

    save_checkpoint(params, model_config, vocab, os.path.join(cell_dir, "model.json"))
    vocab.save(os.path.join(cell_dir, "vocab.json"))
    report.save(os.path.join(cell_dir, "train_report.json"))

    evaluation = evaluate_model(Recognizer(params, vocab, inv=inv), valid_utts, inv)
    evaluation.save(
        os.path.join(cell_dir, "eval_report.json"), os.path.join(cell_dir, "errors.csv")
    )

    return {
        "minutes": str(minutes),
        "level": vocab.level,
        "seed": seed,
        "cer": evaluation.cer,
        "wer": evaluation.wer,
        "best_epoch": report.best_epoch,
        "stopped_early": report.stopped_early,
    }


def run_ablation(config, utts=None, inv=None):
    """
    Runs every cell of the grid and writes ``ablation.csv``.

    Parameters
    ----------
    config : ExperimentConfig
        Grid and training settings.
    utts : Optional[Sequence[Utterance]]
        Utterances to use; loaded from ``corpus_dir`` when omitted.
    inv : Optional[PhonemeInventory]
        Phoneme inventory.

    Returns
    -------
    pandas.DataFrame
        One row per cell, sorted by level, grid position and seed.
    """

    inv = inv or default_inventory()
    if utts is None:
        utts = load_manifest(os.path.join(config.corpus_dir, MANIFEST_NAME))
    utts = apply_exclusions(utts)
    os.makedirs(config.output_dir, exist_ok=True)

    texts = [u.orth for u in utts]
    vocabs = {level: build_vocab(texts, level, inv) for level in config.levels}
    splits = {seed: split(utts, seed, config.train_frac) for seed in config.seeds}

    cells = list(itertools.product(config.levels, config.minutes, config.seeds))
    threads = min(worker_count(config), len(cells))
    _log.info("Running %d cells on %d threads", len(cells), threads)

    def run(cell):
        level, minutes, seed = cell
        return run_cell(
            splits[seed].select(utts, "train"),
            splits[seed].select(utts, "valid"),
            vocabs[level],
            minutes,
            seed,
            config,
            inv,
        )

    with ThreadPoolExecutor(max_workers=threads) as pool:
        rows = list(pool.map(run, cells))

    position = {str(m): index for index, m in enumerate(config.minutes)}
    df = pd.DataFrame(rows, columns=CSV_COLUMNS)
    df = df.sort_values(
        ["level", "minutes", "seed"],
        key=lambda col: col.map(position) if col.name == "minutes" else col,
    ).reset_index(drop=True)

    csv_path = os.path.join(config.output_dir, "ablation.csv")
    df.to_csv(csv_path, index=False, lineterminator="\n")
    return df


def load_ablation(path):
    """Reads an ablation CSV, keeping grid values as strings."""

    return pd.read_csv(path, dtype={"minutes": str})


def ablation_medians(df):
    """
    Median CER and WER over seeds.

    Returns
    -------
    pandas.DataFrame
        Indexed by grid value (in grid order), one CER and one WER column per
        level.
    """

    order = list(dict.fromkeys(df["minutes"]))
    medians = df.groupby(["minutes", "level"], sort=False)[["cer", "wer"]].median()
    table = medians.unstack("level")
    table.columns = [f"{metric}_{level}" for metric, level in table.columns]
    return table.reindex(order)
