"""Experiment harness: dataset x sampler x classifier x seeded runs.

Every cell seed is a stable SHA-256 hash of the master seed and the cell
coordinates, so the whole benchmark is a pure function of (config, input
files) and adding a sampler never perturbs the other cells. Cells may run
concurrently; results land in a dict keyed by coordinates and assembly
sorts, so scheduling order cannot change the report.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import gan as gan_mod
from .classifiers import (
    ForestSpec,
    GBTSpec,
    LogRegSpec,
    MLPSpec,
    predict_labels,
    train_classifier,
)
from .data import Dataset, minmax_fit, minmax_transform, stratified_split
from .errors import (
    ConfigInvalidError,
    DimensionMismatchError,
    GanDivergenceError,
    IncompleteTableError,
)
from .oversamplers import adasyn, borderline_smote, random_oversample, smote

SAMPLERS = ("none", "ros", "smote", "b-smote", "adasyn", "cgan", "sdg-gan")
CLASSIFIERS = ("logreg", "rf", "gbt", "mlp")
METRICS = ("recall", "precision", "f1")


def compute_metrics(y_true, y_pred) -> tuple[float, float, float]:
    """(recall, precision, f1) with class 1 positive; 0/0 counts as 0."""
    t = np.asarray(y_true).astype(np.int64)
    p = np.asarray(y_pred).astype(np.int64)
    if t.shape != p.shape:
        raise DimensionMismatchError(f"y_true shape {t.shape} != y_pred shape {p.shape}")
    tp = int(np.sum((t == 1) & (p == 1)))
    fp = int(np.sum((t == 0) & (p == 1)))
    fn = int(np.sum((t == 1) & (p == 0)))
    recall = tp / (tp + fn) if tp + fn else 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    # harmonic mean written on raw counts so hand values come out exact
    f1 = 2 * tp / (2 * tp + fp + fn) if 2 * tp + fp + fn else 0.0
    return recall, precision, f1


def stable_seed(*parts) -> int:
    """Platform-independent 63-bit seed from arbitrary coordinate parts."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple[tuple[str, str, str], ...]  # (name, csv path, label column)
    samplers: tuple[str, ...] = SAMPLERS
    classifiers: tuple[str, ...] = CLASSIFIERS
    runs: int = 10
    test_fraction: float = 0.2
    master_seed: int = 0
    gan_config: gan_mod.TrainingConfig = field(default_factory=gan_mod.TrainingConfig)

    def validate(self) -> None:
        if self.runs < 1:
            raise ConfigInvalidError("runs must be >= 1")
        if not self.samplers or not self.classifiers:
            raise ConfigInvalidError("need at least one sampler and one classifier")
        for s in self.samplers:
            if s not in SAMPLERS:
                raise ConfigInvalidError(f"unknown sampler {s!r}; choose from {SAMPLERS}")
        for c in self.classifiers:
            if c not in CLASSIFIERS:
                raise ConfigInvalidError(f"unknown classifier {c!r}; choose from {CLASSIFIERS}")
        if not self.datasets:
            raise ConfigInvalidError("need at least one dataset")


@dataclass(frozen=True)
class CellStats:
    mean: dict[str, float]  # metric -> mean over runs
    std: dict[str, float]
    n_runs: int


@dataclass(frozen=True)
class MetricsReport:
    # (dataset, sampler, classifier) -> CellStats
    cells: dict[tuple[str, str, str], CellStats]
    failures: dict[tuple[str, str, str], str]
    runs: int


@dataclass(frozen=True)
class RankTable:
    samplers: tuple[str, ...]
    overall: dict[str, float]  # sampler -> mean rank over all cells
    per_classifier: dict[str, dict[str, float]]  # classifier -> sampler -> mean rank


def _classifier_spec(name: str, seed: int):
    if name == "logreg":
        return LogRegSpec(seed=seed)
    if name == "rf":
        return ForestSpec(seed=seed)
    if name == "gbt":
        return GBTSpec(seed=seed)
    if name == "mlp":
        return MLPSpec(seed=seed)
    raise ValueError(f"unknown classifier {name!r}")


def _train_gan_with_retry(kind: str, train: Dataset, config, seed: int):
    """GAN training is occasionally unstable; retry once with seed+1 before
    declaring the cell failed."""
    trainer = gan_mod.train_sdg_gan if kind == "sdg-gan" else gan_mod.train_cgan
    for attempt_seed in (seed, seed + 1):
        model = trainer(train, config, seed=attempt_seed)
        hist = np.asarray(model.loss_history, dtype=np.float64)
        if hist.size == 0 or np.all(np.isfinite(hist)):
            return model
    raise GanDivergenceError(f"{kind}: non-finite losses for seeds {seed} and {seed + 1}")


def _apply_sampler(name: str, train: Dataset, seed: int, gan_config) -> Dataset:
    if name == "none":
        return train
    if name == "ros":
        return random_oversample(train, seed=seed).data
    if name == "smote":
        return smote(train, seed=seed).data
    if name == "b-smote":
        return borderline_smote(train, seed=seed).data
    if name == "adasyn":
        return adasyn(train, seed=seed).data
    if name in ("cgan", "sdg-gan"):
        model = _train_gan_with_retry(name, train, gan_config, seed)
        return gan_mod.oversample_to_balance(model, train, seed=stable_seed(seed, "sample")).data
    raise ValueError(f"unknown sampler {name!r}")


def run_cell(
    dataset: Dataset,
    sampler: str,
    classifier: str,
    run_seed: int,
    test_fraction: float = 0.2,
    gan_config: gan_mod.TrainingConfig | None = None,
) -> tuple[float, float, float]:
    """One experiment cell: split, scale on train, balance train, fit,
    score the held-out split. Deterministic given run_seed."""
    gan_config = gan_config or gan_mod.TrainingConfig()
    split = stratified_split(dataset, test_fraction, stable_seed(run_seed, "split"))
    scaler = minmax_fit(split.train)
    train_s = minmax_transform(scaler, split.train)
    test_s = minmax_transform(scaler, split.test)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # tiny fixtures cap k noisily
        balanced = _apply_sampler(sampler, train_s, stable_seed(run_seed, "sampler"), gan_config)
    spec = _classifier_spec(classifier, stable_seed(run_seed, "classifier"))
    model = train_classifier(balanced, spec)
    y_pred = predict_labels(model, test_s.features)
    return compute_metrics(test_s.labels, y_pred)


def _run_one(args):
    name, dataset, sampler, classifier, run_idx, cfg = args
    run_seed = stable_seed(cfg.master_seed, name, sampler, classifier, run_idx)
    return run_cell(dataset, sampler, classifier, run_seed, cfg.test_fraction, cfg.gan_config)


def run_benchmark(
    config: ExperimentConfig,
    loaded: dict[str, Dataset] | None = None,
    max_workers: int = 1,
) -> MetricsReport:
    """Execute the full grid and average metrics over runs.

    ``loaded`` short-circuits CSV loading for datasets already in memory
    (keyed by config dataset name). A failing cell is recorded in
    report.failures; the rest of the grid still completes.
    """
    from .data import load_csv

    config.validate()
    datasets: dict[str, Dataset] = {}
    for name, path, label_col in config.datasets:
        if loaded and name in loaded:
            datasets[name] = loaded[name]
        else:
            datasets[name], _ = load_csv(path, label_col)

    tasks = []
    for name, _, _ in config.datasets:
        for sampler in config.samplers:
            for classifier in config.classifiers:
                for run_idx in range(config.runs):
                    tasks.append((name, datasets[name], sampler, classifier, run_idx, config))

    results: dict[tuple, tuple | Exception] = {}

    def record(task, outcome):
        name, _, sampler, classifier, run_idx, _ = task
        results[(name, sampler, classifier, run_idx)] = outcome

    if max_workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as pool:
            futures = {pool.submit(_run_one, t): t for t in tasks}
            for fut in concurrent.futures.as_completed(futures):
                task = futures[fut]
                try:
                    record(task, fut.result())
                except Exception as exc:  # noqa: BLE001 - cell isolation is the contract
                    record(task, exc)
    else:
        for task in tasks:
            try:
                record(task, _run_one(task))
            except Exception as exc:  # noqa: BLE001
                record(task, exc)

    cells: dict[tuple[str, str, str], CellStats] = {}
    failures: dict[tuple[str, str, str], str] = {}
    for name, _, _ in config.datasets:
        for sampler in config.samplers:
            for classifier in config.classifiers:
                runs = [results[(name, sampler, classifier, r)] for r in range(config.runs)]
                errs = [r for r in runs if isinstance(r, Exception)]
                if errs:
                    failures[(name, sampler, classifier)] = f"{type(errs[0]).__name__}: {errs[0]}"
                    continue
                arr = np.asarray(runs, dtype=np.float64)  # runs x 3
                mean = arr.mean(axis=0)
                std = arr.std(axis=0)
                cells[(name, sampler, classifier)] = CellStats(
                    dict(zip(METRICS, mean.tolist())),
                    dict(zip(METRICS, std.tolist())),
                    config.runs,
                )
    return MetricsReport(cells, failures, config.runs)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Rank descending, 1 = best; tied values share the mean of their
    positions."""
    order = np.argsort(-values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    pos = 0
    while pos < values.size:
        end = pos
        while end + 1 < values.size and values[order[end + 1]] == values[order[pos]]:
            end += 1
        avg = (pos + end) / 2.0 + 1.0
        for j in range(pos, end + 1):
            ranks[order[j]] = avg
        pos = end + 1
    return ranks


def mean_rank(f1_table: dict[tuple[str, str, str], float]) -> RankTable:
    """Cross-dataset mean ranks from a complete
    {(dataset, classifier, sampler): f1} table."""
    datasets = sorted({k[0] for k in f1_table})
    classifiers = sorted({k[1] for k in f1_table})
    samplers = tuple(sorted({k[2] for k in f1_table}))
    if len(samplers) < 2:
        raise IncompleteTableError("ranking needs at least two samplers")
    for d in datasets:
        for c in classifiers:
            for s in samplers:
                if (d, c, s) not in f1_table:
                    raise IncompleteTableError(f"missing F1 for {(d, c, s)}")
    per_classifier: dict[str, dict[str, float]] = {}
    all_ranks: dict[str, list[float]] = {s: [] for s in samplers}
    for c in classifiers:
        acc = {s: [] for s in samplers}
        for d in datasets:
            vals = np.array([f1_table[(d, c, s)] for s in samplers])
            ranks = _average_ranks(vals)
            for s, r in zip(samplers, ranks):
                acc[s].append(r)
                all_ranks[s].append(r)
        per_classifier[c] = {s: float(np.mean(acc[s])) for s in samplers}
    overall = {s: float(np.mean(all_ranks[s])) for s in samplers}
    return RankTable(samplers, overall, per_classifier)


def report_to_f1_table(report: MetricsReport) -> dict[tuple[str, str, str], float]:
    """Reshape a MetricsReport into the mean_rank input format."""
    return {
        (d, c, s): stats.mean["f1"] for (d, s, c), stats in report.cells.items()
    }


def synth_dataset(
    n_minority: int, n_majority: int, n_features: int, separation: float, seed: int = 0
) -> Dataset:
    """Two spherical Gaussians clipped to [0,1]: majority at 0.35, minority
    at 0.35 + separation, both with sigma 0.1 per coordinate."""
    if n_minority < 1 or n_majority < 1 or n_features < 1:
        raise ValueError("counts and feature dimension must be positive")
    rng = np.random.default_rng(seed)
    maj = rng.normal(0.35, 0.1, size=(n_majority, n_features))
    mino = rng.normal(0.35 + separation, 0.1, size=(n_minority, n_features))
    feats = np.clip(np.vstack([maj, mino]), 0.0, 1.0)
    labels = np.concatenate([np.zeros(n_majority, dtype=np.int64), np.ones(n_minority, dtype=np.int64)])
    names = tuple(f"f{i}" for i in range(n_features))
    return Dataset(feats, labels, names)


def emit_report(
    report: MetricsReport,
    rank: RankTable | None,
    out_dir: str | os.PathLike,
    fmt: str = "csv",
) -> list[str]:
    """Write the report (and optional rank table); returns written paths.

    CSV columns are exactly dataset,sampler,classifier,metric,mean,std with
    float values repr-formatted so a re-parse round-trips bit-exactly.
    """
    if not report.cells and not report.failures:
        raise ValueError("refusing to write an empty report")
    if fmt not in ("csv", "markdown"):
        raise ValueError(f"format must be csv or markdown, got {fmt!r}")
    os.makedirs(out_dir, exist_ok=True)
    written = []
    if fmt == "csv":
        path = os.path.join(out_dir, "metrics.csv")
        lines = ["dataset,sampler,classifier,metric,mean,std"]
        for (d, s, c) in sorted(report.cells):
            stats = report.cells[(d, s, c)]
            for m in METRICS:
                lines.append(f"{d},{s},{c},{m},{stats.mean[m]!r},{stats.std[m]!r}")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        written.append(path)
        if rank is not None:
            rpath = os.path.join(out_dir, "ranks.csv")
            rlines = ["classifier,sampler,mean_rank"]
            for s in rank.samplers:
                rlines.append(f"overall,{s},{rank.overall[s]!r}")
            for c in sorted(rank.per_classifier):
                for s in rank.samplers:
                    rlines.append(f"{c},{s},{rank.per_classifier[c][s]!r}")
            with open(rpath, "w", encoding="utf-8") as fh:
                fh.write("\n".join(rlines) + "\n")
            written.append(rpath)
    else:
        path = os.path.join(out_dir, "report.md")
        lines = []
        datasets = sorted({d for d, _, _ in report.cells})
        for d in datasets:
            lines.append(f"## {d}\n")
            samplers = sorted({s for dd, s, _ in report.cells if dd == d})
            classifiers = sorted({c for dd, _, c in report.cells if dd == d})
            lines.append("| Algorithm | Metric | " + " | ".join(samplers) + " |")
            lines.append("|---|---|" + "---|" * len(samplers))
            for c in classifiers:
                for m in METRICS:
                    row = [f"{report.cells[(d, s, c)].mean[m]:.4f}" if (d, s, c) in report.cells else "-" for s in samplers]
                    lines.append(f"| {c} | {m} | " + " | ".join(row) + " |")
            lines.append("")
        if rank is not None:
            lines.append("## Mean rank (F1, lower is better)\n")
            classifiers = sorted(rank.per_classifier)
            lines.append("| Method | Overall | " + " | ".join(classifiers) + " |")
            lines.append("|---|---|" + "---|" * len(classifiers))
            for s in sorted(rank.samplers, key=lambda s: rank.overall[s]):
                cols = " | ".join(f"{rank.per_classifier[c][s]:.2f}" for c in classifiers)
                lines.append(f"| {s} | {rank.overall[s]:.2f} | {cols} |")
            lines.append("")
        if report.failures:
            lines.append("## Failed cells\n")
            for key in sorted(report.failures):
                lines.append(f"- {key}: {report.failures[key]}")
            lines.append("")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines))
        written.append(path)
    return written


def parse_metrics_csv(path) -> dict[tuple[str, str, str, str], tuple[float, float]]:
    """Inverse of the CSV writer: (dataset, sampler, classifier, metric) ->
    (mean, std)."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "dataset,sampler,classifier,metric,mean,std":
            raise ValueError(f"unexpected header {header!r}")
        for line in fh:
            d, s, c, m, mean, std = line.strip().split(",")
            out[(d, s, c, m)] = (float(mean), float(std))
    return out
