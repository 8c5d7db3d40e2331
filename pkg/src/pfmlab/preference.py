"""Contextual taste-preference profiles and top-k dish prediction.

A profile is the arithmetic mean taste vector of a person's training
meals, grouped into context bins: meal type crossed with whichever of
stress level / temperature level the context mode keeps (up to 3 x 3 x 3
= 27 bins, 9 per meal). Prediction ranks a meal type's candidate dishes
by cosine similarity to the profile vector for the meal's context; empty
bins fall back to the per-meal global mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientData, NoTrainingData, ValidationError
from .taste import MEAL_TYPES, TasteDataset
from .lifelog import STRESS_LEVELS, TEMPERATURE_LEVELS, EventStream

CONTEXT_MODES = ("none", "stress_only", "temperature_only", "stress_and_temperature")

DEFAULT_VOLUME_SIZES = (4, 8, 16, 32, 64, 128, 256, 400)


@dataclass(frozen=True)
class ContextBin:
    meal_type: str
    temperature_level: str
    stress_level: str

    def __post_init__(self):
        if self.meal_type not in MEAL_TYPES:
            raise ValidationError(f"bad meal_type {self.meal_type!r}")
        if self.temperature_level not in TEMPERATURE_LEVELS:
            raise ValidationError(f"bad temperature_level {self.temperature_level!r}")
        if self.stress_level not in STRESS_LEVELS:
            raise ValidationError(f"bad stress_level {self.stress_level!r}")


@dataclass(frozen=True)
class MealSample:
    """A meal joined with its day context, ready for profile building."""

    person_id: str
    dish_id: str
    meal_type: str
    stress_level: str
    temperature_level: str
    taste: tuple
    start: object  # datetime, kept opaque for chronological sorting


def meal_samples(stream: EventStream, taste_dataset: TasteDataset,
                 person_id: str | None = None) -> list[MealSample]:
    """Extract (meal, context) samples in chronological order."""
    samples = []
    for ev in stream.meals(person_id):
        ctx = stream.context_for(ev.person_id, ev.date)
        if ctx is None:
            raise ValidationError(
                f"meal {ev.event_id} has no day context for {ev.date}")
        dish = taste_dataset.by_id(ev.informational["dish_id"])
        samples.append(MealSample(
            person_id=ev.person_id, dish_id=dish.dish_id, meal_type=dish.meal_type,
            stress_level=ctx.stress_level, temperature_level=ctx.temperature_level,
            taste=tuple(dish.taste.as_list()), start=ev.start))
    samples.sort(key=lambda s: (s.start, s.person_id))
    return samples


def bin_key(mode: str, meal_type: str, stress: str, temperature: str) -> tuple:
    if mode == "none":
        return (meal_type,)
    if mode == "stress_only":
        return (meal_type, stress)
    if mode == "temperature_only":
        return (meal_type, temperature)
    if mode == "stress_and_temperature":
        return (meal_type, stress, temperature)
    raise ValidationError(f"unknown context mode {mode!r}")


@dataclass
class PreferenceProfile:
    """Per-bin mean taste vectors plus the per-meal global means."""

    context_mode: str
    bins: dict = field(default_factory=dict)     # key tuple -> (mean array, count)
    global_means: dict = field(default_factory=dict)  # meal_type -> (mean, count)

    def vector_for(self, meal_type: str, stress: str, temperature: str):
        """Profile vector for a context, with empty-bin fallback.

        Returns (vector, source) where source is "bin", "global" (bin
        empty or all-zero) or "none" (no usable vector at all).
        """
        key = bin_key(self.context_mode, meal_type, stress, temperature)
        entry = self.bins.get(key)
        if entry is not None and entry[1] > 0 and np.any(entry[0] != 0):
            return np.asarray(entry[0]), "bin"
        glob = self.global_means.get(meal_type)
        if glob is not None and glob[1] > 0 and np.any(glob[0] != 0):
            return np.asarray(glob[0]), "global"
        return None, "none"


def build_profiles(samples: list[MealSample], context_mode: str) -> PreferenceProfile:
    """Average training meals' taste vectors per active context bin."""
    if context_mode not in CONTEXT_MODES:
        raise ValidationError(f"unknown context mode {context_mode!r}")
    if not samples:
        raise NoTrainingData("no training meals")
    sums: dict[tuple, np.ndarray] = {}
    counts: dict[tuple, int] = {}
    gsums: dict[str, np.ndarray] = {}
    gcounts: dict[str, int] = {}
    for s in samples:
        key = bin_key(context_mode, s.meal_type, s.stress_level, s.temperature_level)
        vec = np.asarray(s.taste, dtype=float)
        if key not in sums:
            sums[key] = np.zeros_like(vec)
            counts[key] = 0
        sums[key] += vec
        counts[key] += 1
        if s.meal_type not in gsums:
            gsums[s.meal_type] = np.zeros_like(vec)
            gcounts[s.meal_type] = 0
        gsums[s.meal_type] += vec
        gcounts[s.meal_type] += 1
    bins = {k: (sums[k] / counts[k], counts[k]) for k in sums}
    global_means = {m: (gsums[m] / gcounts[m], gcounts[m]) for m in gsums}
    return PreferenceProfile(context_mode=context_mode, bins=bins,
                             global_means=global_means)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


@dataclass
class Prediction:
    ranked: list          # dish ids, best first (full ranking)
    fallback: str         # "bin", "global" or "none"
    id_order_warning: bool

    def top(self, k: int) -> list:
        return self.ranked[:k]


def predict_top_k(profile: PreferenceProfile, context: ContextBin,
                  candidates, k: int) -> Prediction:
    """Rank candidate dishes by cosine similarity to the context's profile
    vector; deterministic ties broken by ascending dish_id."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    if not candidates:
        raise ValidationError("candidate set is empty")
    vec, source = profile.vector_for(context.meal_type, context.stress_level,
                                     context.temperature_level)
    ordered_ids = sorted(d.dish_id for d in candidates)
    if vec is None:
        return Prediction(ranked=ordered_ids, fallback="none", id_order_warning=True)
    scored = sorted(((-cosine(vec, d.taste.as_array()), d.dish_id) for d in candidates))
    return Prediction(ranked=[dish_id for _, dish_id in scored],
                      fallback=source, id_order_warning=False)


@dataclass
class EvalReport:
    context_mode: str
    top_k: int
    accuracy: float
    n_test: int
    split: str
    per_person: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {"context_mode": self.context_mode, "top_k": self.top_k,
                "accuracy": self.accuracy, "n_test": self.n_test,
                "split": self.split, "per_person": dict(self.per_person)}


def _evaluate_person(samples: list[MealSample], taste_dataset: TasteDataset,
                     context_mode: str, k: int, split: float):
    n = len(samples)
    if n < 10:
        raise InsufficientData(f"need >= 10 meals, have {n}")
    n_train = math.ceil(split * n)
    train, test = samples[:n_train], samples[n_train:]
    profile = build_profiles(train, context_mode)
    hits = 0
    for s in test:
        candidates = taste_dataset.of_meal_type(s.meal_type)
        pred = predict_top_k(profile, ContextBin(s.meal_type, s.temperature_level,
                                                 s.stress_level), candidates, k)
        if s.dish_id in pred.top(k):
            hits += 1
    return hits, len(test)


def evaluate(stream: EventStream, taste_dataset: TasteDataset, context_mode: str,
             k: int = 5, split: float = 0.8,
             person_id: str | None = None) -> EvalReport:
    """Chronological train/test evaluation of top-k dish prediction.

    The first ceil(split * n) of each person's meals train their profile;
    a test meal is a hit when its dish appears in the model's top k for
    the meal's context.
    """
    persons = [person_id] if person_id else stream.person_ids()
    total_hits = 0
    total_test = 0
    per_person = {}
    for pid in persons:
        samples = meal_samples(stream, taste_dataset, pid)
        hits, n_test = _evaluate_person(samples, taste_dataset, context_mode, k, split)
        per_person[pid] = hits / n_test if n_test else 0.0
        total_hits += hits
        total_test += n_test
    if total_test == 0:
        raise InsufficientData("no test meals")
    return EvalReport(context_mode=context_mode, top_k=k,
                      accuracy=total_hits / total_test, n_test=total_test,
                      split=f"chronological {split:.0%}/{1 - split:.0%} per person",
                      per_person=per_person)


def volume_sweep(stream: EventStream, taste_dataset: TasteDataset,
                 sizes=DEFAULT_VOLUME_SIZES, test_days: int = 100,
                 context_modes=CONTEXT_MODES, k: int = 5) -> list[dict]:
    """Accuracy as a function of training-window length.

    The test window is fixed to the stream's final ``test_days`` calendar
    days; each training window of ``size`` days ends immediately before
    it, keeping recency comparable across sizes.
    """
    all_days = sorted({c.date for c in stream.day_contexts})
    if len(all_days) < test_days + max(sizes):
        raise InsufficientData(
            f"stream has {len(all_days)} days; need {test_days + max(sizes)}")
    day_number = {d: i for i, d in enumerate(all_days)}
    test_start = len(all_days) - test_days

    persons = stream.person_ids()
    samples_by_person = {pid: meal_samples(stream, taste_dataset, pid)
                         for pid in persons}

    rows = []
    for size in sizes:
        train_start = test_start - size
        for mode in context_modes:
            hits = 0
            n_test = 0
            per_person = {}
            for pid in persons:
                p_hits = 0
                p_test = 0
                train = [s for s in samples_by_person[pid]
                         if train_start <= day_number[s.start.date().isoformat()] < test_start]
                test = [s for s in samples_by_person[pid]
                        if day_number[s.start.date().isoformat()] >= test_start]
                if not train or not test:
                    per_person[pid] = None
                    continue
                profile = build_profiles(train, mode)
                for s in test:
                    candidates = taste_dataset.of_meal_type(s.meal_type)
                    pred = predict_top_k(
                        profile, ContextBin(s.meal_type, s.temperature_level,
                                            s.stress_level), candidates, k)
                    if s.dish_id in pred.top(k):
                        p_hits += 1
                    p_test += 1
                per_person[pid] = p_hits / p_test
                hits += p_hits
                n_test += p_test
            rows.append({"size": size, "context_mode": mode,
                         "accuracy": hits / n_test if n_test else None,
                         "n_test": n_test, "per_person": per_person})
    return rows
