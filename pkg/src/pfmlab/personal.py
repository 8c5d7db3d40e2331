"""Windowed personal summary vectors: biological and preferential.

The biological vector aggregates recent intake (nutrient sums) and
biometrics (mean sleep score, activity minutes, heart rate) over a short
same-day window and the three calendar days before it, and carries
expert directives verbatim. The preferential vector summarizes a longer
history into a favored-ingredient ranking (consumption counts normalized
by the maximum) and a mean taste centroid, over a short and a long
window: (30, 365) days by default, (90, 365) for the habit-formation
preset.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, time, timedelta, timezone

import numpy as np

from .errors import UnknownPerson, ValidationError
from .lifelog import EventStream
from .taste import TASTE_DIMENSIONS, NUTRITION_FIELDS, TasteDataset

DIRECTIVE_VERBS = ("require", "avoid", "limit")

WINDOW_PRESETS = {
    "cfg_study": (30, 365),
    "habit": (90, 365),
}


def validate_directives(directives: list[dict]) -> list[dict]:
    for d in directives:
        if d.get("verb") not in DIRECTIVE_VERBS:
            raise ValidationError(f"directive verb must be one of {DIRECTIVE_VERBS}: {d}")
        if not d.get("subject"):
            raise ValidationError(f"directive needs a subject: {d}")
        if d["verb"] == "limit" and d.get("quantity") is None:
            raise ValidationError(f"'limit' directive needs a quantity: {d}")
    return [dict(d) for d in directives]


def _mean_or_none(values: list[float]):
    return float(np.mean(values)) if values else None


@dataclass
class WindowAggregate:
    nutrient_sums: dict
    mean_sleep_score: float | None
    mean_activity_minutes: float | None
    mean_heart_rate: float | None
    n_meals: int

    def to_record(self) -> dict:
        return {"nutrient_sums": dict(self.nutrient_sums),
                "mean_sleep_score": self.mean_sleep_score,
                "mean_activity_minutes": self.mean_activity_minutes,
                "mean_heart_rate": self.mean_heart_rate,
                "n_meals": self.n_meals}

    @classmethod
    def from_record(cls, rec: dict) -> "WindowAggregate":
        return cls(nutrient_sums=dict(rec["nutrient_sums"]),
                   mean_sleep_score=rec["mean_sleep_score"],
                   mean_activity_minutes=rec["mean_activity_minutes"],
                   mean_heart_rate=rec["mean_heart_rate"],
                   n_meals=int(rec["n_meals"]))


@dataclass
class BiologicalVector:
    person_id: str
    at: str
    window_same_day: WindowAggregate
    window_3_day: WindowAggregate
    directives: list = field(default_factory=list)

    def to_record(self) -> dict:
        return {"person_id": self.person_id, "at": self.at,
                "window_same_day": self.window_same_day.to_record(),
                "window_3_day": self.window_3_day.to_record(),
                "directives": list(self.directives)}

    @classmethod
    def from_record(cls, rec: dict) -> "BiologicalVector":
        return cls(person_id=rec["person_id"], at=rec["at"],
                   window_same_day=WindowAggregate.from_record(rec["window_same_day"]),
                   window_3_day=WindowAggregate.from_record(rec["window_3_day"]),
                   directives=list(rec.get("directives", [])))


@dataclass
class PreferentialVector:
    person_id: str
    at: str
    window_days: tuple
    short_ranking: list   # (ingredient_id, affinity), non-increasing affinity
    long_ranking: list
    short_centroid: list  # six taste components
    long_centroid: list
    short_empty: bool
    long_empty: bool

    def favored_ingredients(self, window: str = "short") -> list[str]:
        ranking = self.short_ranking if window == "short" else self.long_ranking
        return [ingredient for ingredient, _ in ranking]

    def to_record(self) -> dict:
        return {"person_id": self.person_id, "at": self.at,
                "window_days": list(self.window_days),
                "short_ranking": [[i, a] for i, a in self.short_ranking],
                "long_ranking": [[i, a] for i, a in self.long_ranking],
                "short_centroid": list(self.short_centroid),
                "long_centroid": list(self.long_centroid),
                "short_empty": self.short_empty, "long_empty": self.long_empty}

    @classmethod
    def from_record(cls, rec: dict) -> "PreferentialVector":
        return cls(person_id=rec["person_id"], at=rec["at"],
                   window_days=tuple(rec["window_days"]),
                   short_ranking=[(i, float(a)) for i, a in rec["short_ranking"]],
                   long_ranking=[(i, float(a)) for i, a in rec["long_ranking"]],
                   short_centroid=[float(x) for x in rec["short_centroid"]],
                   long_centroid=[float(x) for x in rec["long_centroid"]],
                   short_empty=bool(rec["short_empty"]),
                   long_empty=bool(rec["long_empty"]))


def _person_events(stream: EventStream, person_id: str):
    events = stream.events_for(person_id)
    if not events:
        raise UnknownPerson(f"no events for person {person_id!r}")
    return events


def _aggregate(events, lo: datetime, hi: datetime) -> WindowAggregate:
    sums = dict.fromkeys(NUTRITION_FIELDS, 0.0)
    sleep_scores: list[float] = []
    activity_minutes: list[float] = []
    heart_rates: list[float] = []
    n_meals = 0
    for ev in events:
        if not (lo <= ev.start <= hi):
            continue
        if ev.kind == "meal":
            n_meals += 1
            servings = ev.informational.get("servings", 1)
            for key, val in ev.informational.get("nutrition", {}).items():
                if key in sums:
                    sums[key] += float(val) * servings
        elif ev.kind == "sleep":
            if "sleep_score" in ev.informational:
                sleep_scores.append(float(ev.informational["sleep_score"]))
        elif ev.kind == "activity":
            if "duration_min" in ev.informational:
                activity_minutes.append(float(ev.informational["duration_min"]))
            if "heart_rate" in ev.informational:
                heart_rates.append(float(ev.informational["heart_rate"]))
    return WindowAggregate(nutrient_sums=sums,
                           mean_sleep_score=_mean_or_none(sleep_scores),
                           mean_activity_minutes=_mean_or_none(activity_minutes),
                           mean_heart_rate=_mean_or_none(heart_rates),
                           n_meals=n_meals)


def biological_vector(stream: EventStream, person_id: str, at: datetime,
                      directives: list[dict] | None = None,
                      short_window: str = "same_day") -> BiologicalVector:
    """Short-horizon intake/biometric aggregates plus directives.

    ``short_window`` is "same_day" (midnight of `at` through `at`) or
    "previous_day" (the full prior calendar day). The 3-day window always
    covers the three full calendar days before `at`'s date. Missing
    biometrics stay absent (None), never zero-filled.
    """
    if at.tzinfo is None:
        at = at.replace(tzinfo=timezone.utc)
    events = _person_events(stream, person_id)
    midnight = datetime.combine(at.date(), time(0, 0), tzinfo=timezone.utc)
    if short_window == "same_day":
        short = _aggregate(events, midnight, at)
    elif short_window == "previous_day":
        short = _aggregate(events, midnight - timedelta(days=1),
                           midnight - timedelta(microseconds=1))
    else:
        raise ValidationError(f"unknown short_window {short_window!r}")
    three_day = _aggregate(events, midnight - timedelta(days=3),
                           midnight - timedelta(microseconds=1))
    return BiologicalVector(person_id=person_id, at=at.isoformat(),
                            window_same_day=short, window_3_day=three_day,
                            directives=validate_directives(directives or []))


def _window_meals(events, at: datetime, days: int):
    lo = at - timedelta(days=days)
    return [ev for ev in events
            if ev.kind == "meal" and lo < ev.start <= at]


def _ranking_and_centroid(meals, taste_dataset: TasteDataset):
    counts: dict[str, int] = {}
    centroid = np.zeros(len(TASTE_DIMENSIONS))
    for ev in meals:
        dish = taste_dataset.by_id(ev.informational["dish_id"])
        for ingredient in dish.ingredients:
            counts[ingredient] = counts.get(ingredient, 0) + 1
        centroid += dish.taste.as_array()
    if not meals:
        return [], [0.0] * len(TASTE_DIMENSIONS), True
    centroid /= len(meals)
    max_count = max(counts.values())
    ranking = sorted(((ing, n / max_count) for ing, n in counts.items()),
                     key=lambda item: (-item[1], item[0]))
    return ranking, [float(x) for x in centroid], False


def preferential_vector(stream: EventStream, person_id: str, at: datetime,
                        taste_dataset: TasteDataset,
                        windows: tuple[int, int] = WINDOW_PRESETS["cfg_study"],
                        ) -> PreferentialVector:
    """Favored-ingredient ranking and taste centroid over two windows."""
    if at.tzinfo is None:
        at = at.replace(tzinfo=timezone.utc)
    events = _person_events(stream, person_id)
    short_days, long_days = windows
    short_rank, short_centroid, short_empty = _ranking_and_centroid(
        _window_meals(events, at, short_days), taste_dataset)
    long_rank, long_centroid, long_empty = _ranking_and_centroid(
        _window_meals(events, at, long_days), taste_dataset)
    return PreferentialVector(person_id=person_id, at=at.isoformat(),
                              window_days=(short_days, long_days),
                              short_ranking=short_rank, long_ranking=long_rank,
                              short_centroid=short_centroid,
                              long_centroid=long_centroid,
                              short_empty=short_empty, long_empty=long_empty)


@dataclass
class PersonalVector:
    """The biological + preferential pair consumed by option ranking."""

    biological: BiologicalVector | None
    preferential: PreferentialVector

    def to_record(self) -> dict:
        return {"biological": self.biological.to_record() if self.biological else None,
                "preferential": self.preferential.to_record()}

    @classmethod
    def from_record(cls, rec: dict) -> "PersonalVector":
        bio = rec.get("biological")
        return cls(biological=BiologicalVector.from_record(bio) if bio else None,
                   preferential=PreferentialVector.from_record(rec["preferential"]))

    @property
    def taste_centroid(self) -> np.ndarray:
        return np.array(self.preferential.short_centroid, dtype=float)

    @property
    def favored(self) -> set[str]:
        return set(self.preferential.favored_ingredients("short"))

    def avoid_terms(self) -> list[str]:
        if self.biological is None:
            return []
        return [d["subject"] for d in self.biological.directives
                if d["verb"] == "avoid"]


def personal_vector(stream: EventStream, person_id: str, at: datetime,
                    taste_dataset: TasteDataset,
                    directives: list[dict] | None = None,
                    windows: tuple[int, int] = WINDOW_PRESETS["cfg_study"],
                    ) -> PersonalVector:
    return PersonalVector(
        biological=biological_vector(stream, person_id, at, directives),
        preferential=preferential_vector(stream, person_id, at, taste_dataset,
                                         windows))
