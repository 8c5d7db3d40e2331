"""Experiment orchestration: wires generation, models and metrics files.

Each experiment writes a manifest (seed, config fingerprint, versions,
wall time) plus metrics and plot-ready CSV files into its output
directory. Everything except the manifest's timing fields is a pure
function of the config and seed, so reruns are byte-identical.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .backends import (QueryContext, TargetSimilarityBackend,
                       UniformRandomBackend, context_features, knn_baseline)
from .counterfactual import (SETTING_A_RESTRICTIONS, SETTING_B_RESTRICTIONS,
                             AllOptionsRestricted, CfgSettings, apply_restrictions,
                             cfg_rank, emit_counterfactuals, score_options)
from .cre import cre_options
from .errors import ValidationError
from .jsonutil import fingerprint, write_json
from .lifelog import EventStream, default_profiles, generate, load_profiles
from .mining import EventPattern, EventPredicate, generate_hypotheses, verify_hypothesis
from .personal import personal_vector
from .preference import (CONTEXT_MODES, DEFAULT_VOLUME_SIZES, build_profiles,
                         evaluate, meal_samples, volume_sweep)
from .taste import TASTE_DIMENSIONS, TasteDataset, bundled_taste_dataset

EXPERIMENTS = ("rq1", "rq2", "rq3", "cfg_eval", "mine_demo")

DEFAULT_SETTINGS_CLASSES = {
    "A_meat_restricted": CfgSettings(nutrition_level=3, preference_level=3,
                                     restriction_list=SETTING_A_RESTRICTIONS),
    "B_nut_restricted": CfgSettings(nutrition_level=3, preference_level=3,
                                    restriction_list=SETTING_B_RESTRICTIONS),
    "nutrition_heavy": CfgSettings(nutrition_level=5, preference_level=1),
    "preference_heavy": CfgSettings(nutrition_level=1, preference_level=5),
}

HEAVIER_DINNER_PATTERN = EventPattern(
    input=EventPredicate("stress_report", {"informational.stress_level": "high"}),
    outcome=EventPredicate("meal", {"structural.meal_type": "dinner"}),
    window_hours=16.5,
    outcome_value={"field": "informational.weight_class", "equals": "heavy"},
    confounders=("temperature_level",),
)


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = 42
    days: int = 500
    profiles_path: str | None = None
    taste_path: str | None = None
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValidationError(f"unknown experiment {self.experiment!r}; "
                                  f"choose from {EXPERIMENTS}")
        for path in (self.profiles_path, self.taste_path):
            if path is not None and not Path(path).exists():
                raise ValidationError(f"config references missing file: {path}")

    def to_record(self) -> dict:
        return {"experiment": self.experiment, "seed": self.seed, "days": self.days,
                "profiles_path": self.profiles_path, "taste_path": self.taste_path,
                "overrides": dict(self.overrides)}


def _load_inputs(config: ExperimentConfig):
    taste = (TasteDataset.from_json(config.taste_path)
             if config.taste_path else bundled_taste_dataset())
    profiles = (load_profiles(config.profiles_path)
                if config.profiles_path else default_profiles())
    return profiles, taste


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    def fmt(value):
        if isinstance(value, float):
            return repr(value)
        return "" if value is None else str(value)
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# individual experiments -----------------------------------------------------

def run_rq1(stream: EventStream, taste: TasteDataset, out: Path) -> dict:
    """Contextual preference vectors: one row per (person, meal, bin)."""
    from .lifelog import STRESS_LEVELS, TEMPERATURE_LEVELS
    from .taste import MEAL_TYPES

    rows = []
    n_nonempty = 0
    for pid in stream.person_ids():
        profile = build_profiles(meal_samples(stream, taste, pid),
                                 "stress_and_temperature")
        for meal in MEAL_TYPES:
            for stress in STRESS_LEVELS:
                for temp in TEMPERATURE_LEVELS:
                    entry = profile.bins.get((meal, stress, temp))
                    if entry is None:
                        rows.append([pid, meal, stress, temp, 0] + [None] * 6)
                        continue
                    mean, count = entry
                    n_nonempty += 1
                    rows.append([pid, meal, stress, temp, count]
                                + [float(x) for x in mean])
    _write_csv(out / "rq1_bins.csv",
               ["person", "meal_type", "stress_level", "temperature_level",
                "count"] + list(TASTE_DIMENSIONS), rows)
    return {"n_rows": len(rows), "n_nonempty_bins": n_nonempty,
            "persons": stream.person_ids()}


def run_rq2(stream: EventStream, taste: TasteDataset, out: Path,
            k: int = 5, split: float = 0.8) -> dict:
    reports = {mode: evaluate(stream, taste, mode, k=k, split=split)
               for mode in CONTEXT_MODES}
    rows = []
    for mode, rep in reports.items():
        for pid, acc in sorted(rep.per_person.items()):
            rows.append([mode, pid, acc])
        rows.append([mode, "ALL", rep.accuracy])
    _write_csv(out / "rq2_accuracy.csv", ["context_mode", "person", "top5_accuracy"],
               rows)
    return {mode: rep.to_record() for mode, rep in reports.items()}


def run_rq3(stream: EventStream, taste: TasteDataset, out: Path,
            sizes=DEFAULT_VOLUME_SIZES, test_days: int = 100, k: int = 5) -> dict:
    curve = volume_sweep(stream, taste, sizes=sizes, test_days=test_days, k=k)
    rows = [[r["size"], r["context_mode"], r["accuracy"], r["n_test"]] for r in curve]
    _write_csv(out / "rq3_curve.csv",
               ["train_days", "context_mode", "top5_accuracy", "n_test"], rows)
    return {"sizes": list(sizes), "test_days": test_days,
            "curve": [{k2: v for k2, v in r.items() if k2 != "per_person"}
                      for r in curve]}


def _train_stream(stream: EventStream, cut: datetime) -> EventStream:
    events = [e for e in stream.events if e.start < cut]
    return EventStream(events=events, day_contexts=stream.day_contexts,
                       seed=stream.seed, config_fingerprint=stream.config_fingerprint)


@dataclass
class CfgEvalReport:
    per_class: dict
    n_queries: int
    person_id: str

    def to_record(self) -> dict:
        return {"per_class": self.per_class, "n_queries": self.n_queries,
                "person_id": self.person_id}


def cfg_eval(stream: EventStream, taste: TasteDataset,
             settings_classes: dict | None = None,
             backend_factory=None,
             baseline_k: int = 15, person_id: str | None = None,
             n_train_samples: int = 400, n_queries: int = 500,
             n_options: int = 20, seed: int = 0) -> CfgEvalReport:
    """Backend-vs-baseline deviation/error against counterfactual rankings.

    ``backend_factory(settings, personal)`` builds the backend evaluated
    for each settings class (default: a fresh nearest-neighbor
    target-similarity backend). Deviation is the 0-based rank of a pick
    in the counterfactual-sorted list (a baseline prediction absent from
    the list counts as one past the end); error is the fraction of
    queries whose pick differs from the top choice.
    """
    settings_classes = settings_classes or DEFAULT_SETTINGS_CLASSES
    person_id = person_id or stream.person_ids()[0]
    meals = stream.meals(person_id)
    if len(meals) < 20:
        raise ValidationError("need at least 20 meals for cfg evaluation")
    n_train = int(0.8 * len(meals))
    cut = meals[n_train].start
    train_stream = _train_stream(stream, cut)
    test_meals = meals[n_train:]
    personal = personal_vector(stream, person_id, cut, taste)
    train_obs = [s for s in meal_samples(stream, taste, person_id) if s.start < cut]
    baseline = knn_baseline(
        [(context_features(QueryContext(s.meal_type, s.stress_level,
                                        s.temperature_level)), s.dish_id)
         for s in train_obs], baseline_k)

    per_class = {}
    for name in sorted(settings_classes):
        settings = settings_classes[name]

        def cre(label, _name=name):
            return cre_options(personal, None, n=n_options, mode="random_sample",
                               taste_dataset=taste, seed=seed,
                               query_label=f"{_name}-{label}")

        dataset = emit_counterfactuals(train_stream, cre, settings, personal,
                                       n_train_samples, seed)
        cls_backend = (backend_factory(settings, personal) if backend_factory
                       else TargetSimilarityBackend())
        cls_backend.fit(dataset.samples)
        random_backend = UniformRandomBackend(seed=seed)

        sums = {"backend": [0.0, 0], "random": [0.0, 0], "knn_baseline": [0.0, 0]}
        n_effective = 0
        skipped = 0
        for i in range(n_queries):
            meal = test_meals[i % len(test_meals)]
            ctx = stream.context_for(person_id, meal.date)
            query = QueryContext(meal_type=meal.structural["meal_type"],
                                 stress_level=ctx.stress_level,
                                 temperature_level=ctx.temperature_level)
            option_list = cre(f"query-{i}")
            try:
                kept = apply_restrictions(option_list.options,
                                          settings.restriction_list)
            except AllOptionsRestricted:
                skipped += 1
                continue
            ranking = cfg_rank(score_options(kept, personal, settings), settings)
            truth = ranking.ordered_ids()
            n_effective += 1

            picks = {
                "backend": cls_backend.pick(kept, query),
                "random": random_backend.pick(kept, query),
                "knn_baseline": baseline.predict(context_features(query)),
            }
            for key, pick in picks.items():
                deviation = truth.index(pick) if pick in truth else len(truth)
                sums[key][0] += deviation
                sums[key][1] += 0 if deviation == 0 else 1
        per_class[name] = {
            key: {"mean_deviation": sums[key][0] / n_effective,
                  "error_rate": sums[key][1] / n_effective}
            for key in sums}
        per_class[name]["n_effective"] = n_effective
        per_class[name]["skipped_all_restricted"] = skipped
    return CfgEvalReport(per_class=per_class, n_queries=n_queries,
                         person_id=person_id)


def run_cfg_eval(stream: EventStream, taste: TasteDataset, out: Path,
                 seed: int, n_queries: int = 500,
                 n_train_samples: int = 400) -> dict:
    report = cfg_eval(stream, taste, seed=seed, n_queries=n_queries,
                      n_train_samples=n_train_samples)
    rows = []
    for name, stats in sorted(report.per_class.items()):
        for key in ("backend", "random", "knn_baseline"):
            rows.append([name, key, stats[key]["mean_deviation"],
                         stats[key]["error_rate"], stats["n_effective"]])
    _write_csv(out / "cfg_eval.csv",
               ["settings_class", "model", "mean_deviation", "error_rate",
                "n_queries"], rows)
    return report.to_record()


def run_mine_demo(stream: EventStream, taste: TasteDataset, out: Path) -> dict:
    heatmap = generate_hypotheses(
        stream, input_kinds=("stress_report", "weather_report"),
        outcome_kinds=("meal",), window_hours=16.5,
        split_fields={"stress_report": "informational.stress_level",
                      "weather_report": "informational.temperature_level",
                      "meal": "structural.meal_type"})
    heatmap.to_csv(out / "cooccurrence_heatmap.csv")
    rule = verify_hypothesis(stream, HEAVIER_DINNER_PATTERN)
    return {"heatmap_cells": len(heatmap.cells), "verified_rule": rule.to_record()}


def run(config: ExperimentConfig, out_dir: Path | str) -> dict:
    """Execute one experiment; returns the metrics written to disk."""
    started = time.time()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    profiles, taste = _load_inputs(config)
    stream = generate(profiles, config.days, taste, config.seed)

    ov = config.overrides
    if config.experiment == "rq1":
        metrics = run_rq1(stream, taste, out)
    elif config.experiment == "rq2":
        metrics = run_rq2(stream, taste, out, k=ov.get("k", 5),
                          split=ov.get("split", 0.8))
    elif config.experiment == "rq3":
        metrics = run_rq3(stream, taste, out,
                          sizes=tuple(ov.get("sizes", DEFAULT_VOLUME_SIZES)),
                          test_days=ov.get("test_days", 100), k=ov.get("k", 5))
    elif config.experiment == "cfg_eval":
        metrics = run_cfg_eval(stream, taste, out, seed=config.seed,
                               n_queries=ov.get("n_queries", 500),
                               n_train_samples=ov.get("n_train_samples", 400))
    else:
        metrics = run_mine_demo(stream, taste, out)

    write_json(out / "metrics.json", metrics)
    write_json(out / "manifest.json", {
        "experiment": config.experiment,
        "seed": config.seed,
        "config_fingerprint": fingerprint(config.to_record()),
        "stream_fingerprint": stream.config_fingerprint,
        "versions": {"pfmlab": __version__},
        "wall_time_s": round(time.time() - started, 3),
        "created_utc": datetime.now(timezone.utc).isoformat(),
    })
    return metrics
