"""Simulation-study harness: replicate scenarios, run the local test, score
rejections against the known feature labels."""
from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .rltest import LocalTestConfig, local_random_labelling_test
from .simulate import ScenarioSpec, sim_scenario, table1_scenario


@dataclass(frozen=True)
class ExperimentSpec:
    scenario: ScenarioSpec
    replicates: int = 20
    test: LocalTestConfig = LocalTestConfig()
    output_dir: str | None = None

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")

    def to_dict(self) -> dict:
        test = asdict(self.test)
        test.pop("threads")
        return {"scenario": self.scenario.to_dict(), "replicates": self.replicates,
                "test": test, "output_dir": self.output_dir}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        return cls(ScenarioSpec.from_dict(d["scenario"]), int(d.get("replicates", 20)),
                   LocalTestConfig(**d.get("test", {})), d.get("output_dir"))

    def fingerprint(self) -> str:
        blob = json.dumps({k: v for k, v in self.to_dict().items() if k != "output_dir"},
                          sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def confusion(rejected: np.ndarray, labels: np.ndarray) -> dict:
    rejected = np.asarray(rejected, dtype=bool)
    pos = np.asarray(labels) == 1
    tp = int(np.sum(rejected & pos))
    fn = int(np.sum(~rejected & pos))
    fp = int(np.sum(rejected & ~pos))
    tn = int(np.sum(~rejected & ~pos))
    return {"tp": tp, "fp": fp, "tn": tn, "fn": fn}


def rates(c: dict) -> dict:
    """TPR = TP/(TP+FN), FPR = FP/(FP+TN), ACC = (TP+TN)/total; NaN when undefined."""
    p = c["tp"] + c["fn"]
    n = c["fp"] + c["tn"]
    tot = p + n
    return {"tpr": c["tp"] / p if p else math.nan,
            "fpr": c["fp"] / n if n else math.nan,
            "acc": (c["tp"] + c["tn"]) / tot if tot else math.nan}


def _nanmean(vals):
    vals = [v for v in vals if not math.isnan(v)]
    return float(np.mean(vals)) if vals else math.nan


@dataclass
class ClassificationReport:
    rows: list
    spec: dict

    @property
    def totals(self) -> dict:
        return {k: int(sum(r[k] for r in self.rows)) for k in ("tp", "fp", "tn", "fn")}

    @property
    def tpr(self) -> float:
        return _nanmean([r["tpr"] for r in self.rows])

    @property
    def fpr(self) -> float:
        return _nanmean([r["fpr"] for r in self.rows])

    @property
    def acc(self) -> float:
        return _nanmean([r["acc"] for r in self.rows])

    def to_dict(self) -> dict:
        def na(v):
            return None if math.isnan(v) else v
        return {"version": __version__, "spec": self.spec,
                "tpr": na(self.tpr), "fpr": na(self.fpr), "acc": na(self.acc),
                "totals": self.totals, "pooled": {k: na(v) for k, v in rates(self.totals).items()},
                "replicates": [{k: (na(v) if isinstance(v, float) else v) for k, v in r.items()}
                               for r in self.rows]}

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    def write_csv(self, path) -> None:
        cols = ["replicate", "n", "tp", "fp", "tn", "fn", "tpr", "fpr", "acc"]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for r in self.rows:
                w.writerow(["NA" if isinstance(r[c], float) and math.isnan(r[c]) else r[c]
                            for c in cols])


def replicate_seed(seed: int, rep: int) -> int:
    """Seed of replicate ``rep``, derived from the base seed and the index."""
    return int(np.random.SeedSequence(int(seed), spawn_key=(int(rep),)).generate_state(1)[0])


def run_replicate(spec: ExperimentSpec, rep: int) -> dict:
    seed = replicate_seed(spec.scenario.seed, rep)
    t0 = time.perf_counter()
    pattern, labels = sim_scenario(replace(spec.scenario, seed=seed))
    t1 = time.perf_counter()
    test = replace(spec.test, seed=replicate_seed(spec.test.seed, rep), threads=1)
    report = local_random_labelling_test(pattern, test)
    c = confusion(report.rejected, labels)
    row = {"replicate": rep, "n": len(pattern), **c, **rates(c)}
    row["_timings"] = {"simulate": t1 - t0, **report.timings}
    return row


def run_experiment(spec: ExperimentSpec, threads: int = 1,
                   progress=None) -> ClassificationReport:
    """Run all replicates; per-replicate results under ``output_dir/replicates``
    are reused when present (same spec fingerprint)."""
    rep_dir = None
    fp = spec.fingerprint()
    if spec.output_dir:
        rep_dir = Path(spec.output_dir) / "replicates"
        rep_dir.mkdir(parents=True, exist_ok=True)

    def one(rep):
        path = rep_dir / f"rep_{rep:04d}.json" if rep_dir else None
        if path is not None and path.exists():
            with open(path, encoding="utf-8") as fh:
                saved = json.load(fh)
            if saved.get("fingerprint") == fp:
                return _restore(saved["row"])
        row = run_replicate(spec, rep)
        timings = row.pop("_timings")
        if path is not None:
            tmp = path.with_suffix(".tmp")
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump({"fingerprint": fp, "row": _jsonable(row), "timings": timings}, fh)
            tmp.replace(path)
        if progress:
            progress(rep, row)
        return row

    reps = range(spec.replicates)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            rows = list(ex.map(one, reps))
    else:
        rows = [one(r) for r in reps]
    return ClassificationReport(rows, spec.to_dict())


def _jsonable(row: dict) -> dict:
    return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in row.items()}


def _restore(row: dict) -> dict:
    return {k: (math.nan if v is None else v) for k, v in row.items()}


def table1_spec(ground: str, marking: int | None, replicates: int = 20, seed: int = 0,
                test: LocalTestConfig | None = None,
                output_dir: str | None = None) -> ExperimentSpec:
    return ExperimentSpec(table1_scenario(ground, marking, seed), replicates,
                          test or LocalTestConfig(seed=seed), output_dir)
