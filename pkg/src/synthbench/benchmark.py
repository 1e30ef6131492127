"""Benchmark matrix: assemble problems, run detectors, score against ideal rankings, persist."""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy

from .dataset import LabeledDataset, downsample_outliers, jitter_matrix, load_csv, preprocess
from .detectors import DETECTORS, run_detector
from .generators import PAIR_IDS, FittedPair, GeneratorPair, fit_pair
from .ideal import IdealScores, ideal_scores
from .metrics import auc_pr_adjusted, kendall_tau_b
from .realness import PROBLEMS as REALNESS_PROBLEMS
from .realness import classify_protocol, random_guess_kappa

log = logging.getLogger(__name__)

BENCH_PROBLEMS = ("Real", "Synth")
REAL_PAIR = "real"
IDEALS = ("rd", "od", "c")
MIN_REGULARS = 30

RESULT_COLUMNS = (
    "dataset", "problem", "pair", "detector", "repeat", "seed", "status", "error",
    "n", "n_outliers", "auc_pr_adj", "auc_pr_raw", "auc_roc",
    *(f"kendall_tau_vs_{k}" for k in IDEALS),
    *(f"ideal_{k}_{m}" for k in IDEALS for m in ("auc_pr_adj", "auc_pr_raw", "auc_roc")),
    "tau_rd_od", "tau_rd_c", "wall_time",
)
REALNESS_COLUMNS = ("dataset", "problem", "generator", "outlier_variant", "seed",
                    "kappa", "kappa_drop", "status", "reason")


@dataclass(frozen=True)
class DatasetSpec:
    path: str
    label_column: str
    outlier_value: str
    name: str = ""

    @property
    def id(self) -> str:
        return self.name or Path(self.path).stem


@dataclass(frozen=True)
class BenchmarkConfig:
    datasets: tuple = ()
    pairs: tuple = ("gauss_gauss",)
    detectors: tuple = tuple(DETECTORS)
    xi: float = 0.05
    repeats: int = 1
    alpha: float = 5.0
    expansion: float = 0.10
    master_seed: int = 0
    problems: tuple = BENCH_PROBLEMS
    n_synth: int | None = None
    subtraction_only: bool = False
    raw_orientation_tau: bool = False
    outlier_variants: tuple = ("characterizable", "fitted")
    realness_problems: tuple = REALNESS_PROBLEMS

    def __post_init__(self):
        if not 0.0 < self.xi < 1.0:
            raise ValueError("xi must lie in (0, 1)")
        if self.repeats < 1:
            raise ValueError("repeats must be positive")
        for p in self.pairs:
            if p not in PAIR_IDS:
                raise ValueError(f"unknown pair {p!r}")
        for det in self.detectors:
            if det not in DETECTORS:
                raise ValueError(f"unknown detector {det!r}")
        for prob in self.problems:
            if prob not in BENCH_PROBLEMS:
                raise ValueError(f"unknown benchmark problem {prob!r}")
        if not self.detectors or not self.pairs:
            raise ValueError("need at least one detector and one pair")

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path | None = None) -> "BenchmarkConfig":
        raw = dict(raw)
        specs = []
        for ds in raw.pop("datasets", []):
            path = Path(ds["path"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            specs.append(DatasetSpec(str(path), ds["label_column"], str(ds["outlier_value"]),
                                     ds.get("name", "")))
        tuples = {k: tuple(v) for k, v in raw.items() if isinstance(v, list)}
        raw.update(tuples)
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(datasets=tuple(specs), **raw)

    @classmethod
    def load(cls, path) -> "BenchmarkConfig":
        path = Path(path)
        with path.open() as fh:
            return cls.from_dict(json.load(fh), base_dir=path.parent)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["datasets"] = [asdict(d) for d in self.datasets]
        return out


def cell_seed(master_seed: int, *coords) -> int:
    """Stable 63-bit seed from the cell coordinates."""
    key = json.dumps([int(master_seed), *[str(c) for c in coords]]).encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big") >> 1


def _seed_children(seed: int, names) -> dict:
    kids = np.random.SeedSequence(seed).spawn(len(names))
    return {k: int(c.generate_state(1)[0]) for k, c in zip(names, kids)}


@dataclass(frozen=True)
class SynthProblem:
    data: LabeledDataset
    ideal: IdealScores
    fitted: FittedPair


def build_problem(data: LabeledDataset, pair: GeneratorPair, xi: float, seed: int,
                  n: int | None = None) -> SynthProblem:
    """Fit the pair on jittered genuine regulars and generate a labelled synthetic dataset."""
    if not 0.0 < xi < 1.0:
        raise ValueError("xi must lie in (0, 1)")
    regulars = data.regulars
    if len(regulars) < MIN_REGULARS:
        raise ValueError(f"need at least {MIN_REGULARS} regular instances, got {len(regulars)}")
    n = data.n if n is None else int(n)
    n_reg = int(round((1.0 - xi) * n))
    n_out = max(1, int(round(xi * n)))
    s = _seed_children(seed, ("jitter", "fit", "gen_regular", "gen_outlier"))
    fitted = fit_pair(pair, jitter_matrix(regulars, s["jitter"]), s["fit"])
    reg = fitted.gen_regular(n_reg, s["gen_regular"])
    out = fitted.gen_outlier(n_out, s["gen_outlier"])
    synth = LabeledDataset.from_parts(reg, out, data.attribute_names, {
        "source": data.provenance.get("source", ""), "synthetic": True, "pair": pair.id,
        "seed": seed, "xi": xi,
    })
    X = synth.instances
    ideal = ideal_scores(fitted.logdens_regular(X), fitted.logdens_outlier(X), xi)
    return SynthProblem(synth, ideal, fitted)


def _metric_fields(prefix: str, scores, labels, subtraction_only: bool) -> dict:
    rep = auc_pr_adjusted(scores, labels, subtraction_only=subtraction_only)
    return {f"{prefix}auc_pr_adj": rep.auc_pr_adjusted, f"{prefix}auc_pr_raw": rep.auc_pr_raw,
            f"{prefix}auc_roc": rep.auc_roc}


def _oriented(sv, raw: bool) -> np.ndarray:
    return sv.scores if raw else sv.aligned()


@dataclass(frozen=True)
class _Job:
    dataset_id: str
    problem: str
    pair: str
    repeat: int


def _empty_row(job: _Job, detector: str, seed: int) -> dict:
    row = {c: "" for c in RESULT_COLUMNS}
    row.update(dataset=job.dataset_id, problem=job.problem, pair=job.pair, detector=detector,
               repeat=job.repeat, seed=seed)
    return row


def _run_job(job: _Job, data: LabeledDataset, config: BenchmarkConfig) -> list[dict]:
    data_seed = cell_seed(config.master_seed, job.dataset_id, job.problem, job.pair, "data",
                          job.repeat)
    det_seeds = {d: cell_seed(config.master_seed, job.dataset_id, job.problem, job.pair, d,
                              job.repeat) for d in config.detectors}
    base = {}
    ideal = None
    try:
        if job.problem == "Real":
            instance = downsample_outliers(data, config.xi, data_seed)
        else:
            pair = GeneratorPair.parse(job.pair, config.alpha, config.expansion)
            problem = build_problem(data, pair, config.xi, data_seed, config.n_synth)
            instance, ideal = problem.data, problem.ideal
            raw = config.raw_orientation_tau
            for k, sv in ideal.by_name().items():
                base.update(_metric_fields(f"ideal_{k}_", sv, instance.labels,
                                           config.subtraction_only))
            rd = _oriented(ideal.rd, raw)
            base["tau_rd_od"] = kendall_tau_b(rd, _oriented(ideal.od, raw))
            base["tau_rd_c"] = kendall_tau_b(rd, _oriented(ideal.c, raw))
        base.update(n=instance.n, n_outliers=instance.n_outliers)
    except Exception as exc:  # one failed problem must not stop the run
        log.warning("problem %s failed: %s", job, exc)
        rows = []
        for det in config.detectors:
            row = _empty_row(job, det, det_seeds[det])
            row.update(status="failed", error=f"{type(exc).__name__}: {exc}", wall_time=0.0)
            rows.append(row)
        return rows

    rows = []
    for det in config.detectors:
        row = _empty_row(job, det, det_seeds[det])
        row.update(base)
        start = time.perf_counter()
        try:
            sv = run_detector(det, instance.instances, det_seeds[det])
            row.update(_metric_fields("", sv, instance.labels, config.subtraction_only))
            if ideal is not None:
                mine = _oriented(sv, config.raw_orientation_tau)
                for k, isv in ideal.by_name().items():
                    row[f"kendall_tau_vs_{k}"] = kendall_tau_b(
                        mine, _oriented(isv, config.raw_orientation_tau))
            row["status"] = "ok"
        except Exception as exc:
            log.warning("detector %s on %s failed: %s", det, job, exc)
            row.update(status="failed", error=f"{type(exc).__name__}: {exc}")
        row["wall_time"] = time.perf_counter() - start
        rows.append(row)
    return rows


def load_datasets(config: BenchmarkConfig) -> dict:
    out = {}
    for spec in config.datasets:
        data = load_csv(spec.path, spec.label_column, spec.outlier_value)
        out[spec.id] = preprocess(data)
    return out


def _jobs(config: BenchmarkConfig, dataset_ids) -> list[_Job]:
    jobs = []
    for ds in dataset_ids:
        for problem in config.problems:
            pairs = (REAL_PAIR,) if problem == "Real" else config.pairs
            for pair in pairs:
                for r in range(config.repeats):
                    jobs.append(_Job(ds, problem, pair, r))
    return jobs


def _sort_key(row: dict):
    return (row["dataset"], row["problem"], row["pair"], row["detector"], int(row["repeat"]))


def run_benchmark(config: BenchmarkConfig, datasets: dict | None = None,
                  workers: int = 1) -> list[dict]:
    """Run every (dataset, problem, pair, detector, repeat) cell; rows sorted by coordinates.

    ``datasets`` maps ids to preprocessed data and overrides the config paths.
    """
    if datasets is None:
        datasets = load_datasets(config)
    if not datasets:
        raise ValueError("no datasets configured")
    jobs = _jobs(config, sorted(datasets))
    rows = []
    if workers <= 1:
        for job in jobs:
            rows.extend(_run_job(job, datasets[job.dataset_id], config))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_job, j, datasets[j.dataset_id], config) for j in jobs]
            for fut in futures:
                rows.extend(fut.result())
    rows.sort(key=_sort_key)
    return rows


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else repr(float(v))
    return str(v)


def write_rows(rows: list[dict], path, columns=RESULT_COLUMNS) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({c: _fmt(row.get(c, "")) for c in columns})
    return path


def read_rows(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def versions() -> dict:
    from . import __version__
    return {"synthbench": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__}


def write_manifest(config: BenchmarkConfig, rows: list[dict], path) -> Path:
    path = Path(path)
    failures = [r for r in rows if r.get("status") != "ok"]
    manifest = {
        "config": config.to_dict(),
        "versions": versions(),
        "n_rows": len(rows),
        "n_failed": len(failures),
        "seeds": {f"{r['dataset']}/{r['problem']}/{r['pair']}/{r['detector']}/{r['repeat']}":
                  int(r["seed"]) for r in rows},
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _float(v) -> float:
    try:
        return float(v)
    except (TypeError, ValueError):
        return math.nan


def _summary(values) -> tuple:
    arr = np.array([v for v in values if not math.isnan(v)])
    if arr.size == 0:
        return 0, math.nan, math.nan
    return arr.size, float(arr.mean()), float(np.median(arr))


def emit_report(rows: list[dict], out_dir=None) -> dict:
    """Aggregate result rows into detector, ideal-score and rank-correlation tables.

    Tables are returned as lists of dicts and, when ``out_dir`` is given,
    written there as CSV files plus one plain-text ``report.txt``.
    """
    ok = [r for r in rows if r.get("status") == "ok"]
    n_failed = len(rows) - len(ok)

    groups: dict = {}
    for r in ok:
        groups.setdefault((r["pair"], r["detector"]), []).append(r)
    detectors = []
    taus = []
    for (pair, det), rs in sorted(groups.items()):
        n, mean, median = _summary(_float(r["auc_pr_adj"]) for r in rs)
        detectors.append({"pair": pair, "detector": det, "n": n,
                          "mean_auc_pr_adj": mean, "median_auc_pr_adj": median})
        if pair != REAL_PAIR:
            entry = {"pair": pair, "method": det}
            for k in IDEALS:
                entry[f"tau_vs_{k}"] = _summary(_float(r[f"kendall_tau_vs_{k}"]) for r in rs)[1]
            taus.append(entry)

    # ideal metrics repeat across detectors of one problem; count each problem once
    problems: dict = {}
    for r in ok:
        if r["pair"] != REAL_PAIR:
            problems.setdefault(r["pair"], {})[(r["dataset"], r["repeat"])] = r
    ideals = []
    for pair, by_problem in sorted(problems.items()):
        rs = list(by_problem.values())
        for k in IDEALS:
            n, mean, median = _summary(_float(r[f"ideal_{k}_auc_pr_adj"]) for r in rs)
            ideals.append({"pair": pair, "ideal": k, "n": n,
                           "mean_auc_pr_adj": mean, "median_auc_pr_adj": median})
        taus.append({"pair": pair, "method": "ideal_rd", "tau_vs_rd": 1.0,
                     "tau_vs_od": _summary(_float(r["tau_rd_od"]) for r in rs)[1],
                     "tau_vs_c": _summary(_float(r["tau_rd_c"]) for r in rs)[1]})

    report = {"detectors": detectors, "ideals": ideals, "kendall": taus, "n_failed": n_failed,
              "n_rows": len(rows)}
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_rows(detectors, out / "summary_detectors.csv",
                   ("pair", "detector", "n", "mean_auc_pr_adj", "median_auc_pr_adj"))
        write_rows(ideals, out / "summary_ideals.csv",
                   ("pair", "ideal", "n", "mean_auc_pr_adj", "median_auc_pr_adj"))
        write_rows(taus, out / "summary_kendall.csv",
                   ("pair", "method", "tau_vs_rd", "tau_vs_od", "tau_vs_c"))
        (out / "report.txt").write_text(format_report(report))
    return report


def _table(rows: list[dict], columns) -> str:
    cells = [[c for c in columns]] + [
        [f"{r[c]:.4f}" if isinstance(r[c], float) else str(r[c]) for c in columns] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    lines = ["  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def format_report(report: dict) -> str:
    parts = []
    if not report["detectors"]:
        parts.append("WARNING: no successful cells; all tables are empty.")
    if report["n_failed"]:
        parts.append(f"{report['n_failed']} of {report['n_rows']} cells failed.")
    parts.append("Adjusted AUC PR by pair and detector\n" + _table(
        report["detectors"], ("pair", "detector", "n", "mean_auc_pr_adj", "median_auc_pr_adj")))
    parts.append("Adjusted AUC PR of ideal scorings\n" + _table(
        report["ideals"], ("pair", "ideal", "n", "mean_auc_pr_adj", "median_auc_pr_adj")))
    parts.append("Mean Kendall tau against ideal scorings\n" + _table(
        report["kendall"], ("pair", "method", "tau_vs_rd", "tau_vs_od", "tau_vs_c")))
    return "\n\n".join(parts) + "\n"


def run_realness(config: BenchmarkConfig, datasets: dict | None = None,
                 ntrees: int = 100) -> list[dict]:
    """Realness protocol rows for every dataset, pair, problem, outlier variant and repeat.

    One ``RandomGuess`` row per dataset and repeat records the chance baseline.
    """
    if datasets is None:
        datasets = load_datasets(config)
    rows = []
    for ds in sorted(datasets):
        data = datasets[ds]
        for r in range(config.repeats):
            seed = cell_seed(config.master_seed, ds, "realness", r)
            real = classify_protocol(data, "Real", None, seed, ntrees=ntrees)
            guess = random_guess_kappa(data, seed)
            rows.append(_realness_row(ds, real))
            rows.append({"dataset": ds, "problem": "RandomGuess", "generator": "none",
                         "outlier_variant": "", "seed": seed, "kappa": guess,
                         "kappa_drop": real.kappa - guess, "status": "ok", "reason": ""})
            for pair_id in config.pairs:
                pair = GeneratorPair.parse(pair_id, config.alpha, config.expansion)
                for problem in config.realness_problems:
                    if problem == "Real":
                        continue
                    variants = (config.outlier_variants if problem != "SynthRegular"
                                else config.outlier_variants[:1])
                    for variant in variants:
                        res = classify_protocol(data, problem, pair, seed, variant,
                                                ntrees=ntrees, kappa_real=real.kappa)
                        rows.append(_realness_row(ds, res))
    return rows


def _realness_row(ds: str, res) -> dict:
    return {"dataset": ds, "problem": res.problem, "generator": res.generator_id,
            "outlier_variant": res.outlier_variant if res.problem in ("SynthOutliers", "Synth")
            else "", "seed": res.seed, "kappa": res.kappa, "kappa_drop": res.kappa_drop,
            "status": res.status, "reason": res.reason}
