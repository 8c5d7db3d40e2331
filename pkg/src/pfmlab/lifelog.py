"""Randomized Markov-chain lifelog generator with planted context effects.

Each synthetic person is described by a ``LifestyleProfile``: a
row-stochastic transition matrix over event kinds, a daily meal rate,
priors for stress and seasonal temperature, and a set of context-effect
rules that reweight dish choice per (stress level, temperature level,
meal type). Generation is a pure function of (profiles, days, taste
dataset, seed): every (person, day) pair gets its own derived random
stream, so per-person output is independent of profile-list order and
parallel generation is safe.

A generated day follows a fixed template: a morning weather report and
stress report carry the day's context, the waking window is walked in
``steps_per_day`` Markov steps emitting activity/meal/report events, and
a nightly sleep event closes the day. Meal events link the day's context
reports through their causal aspect.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date as date_cls
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .errors import EmptyCandidateSet, InvalidProfile, ValidationError
from .jsonutil import (fingerprint, read_json, read_jsonl, write_json,
                       write_jsonl)
from .rng import categorical, person_day_stream
from .taste import TASTE_DIMENSIONS, TasteDataset, bundled_data_path

EVENT_KINDS = ("meal", "activity", "sleep", "stress_report", "weather_report")
CHAIN_KINDS = ("activity", "meal", "stress_report", "weather_report")
STRESS_LEVELS = ("low", "medium", "high")
TEMPERATURE_LEVELS = ("cool", "mild", "hot")

COOL_BELOW_C = 15.0
HOT_ABOVE_C = 25.0

EPOCH = datetime(2024, 1, 1, tzinfo=timezone.utc)


def temperature_level(raw_c: float) -> str:
    if raw_c < COOL_BELOW_C:
        return "cool"
    if raw_c <= HOT_ABOVE_C:
        return "mild"
    return "hot"


@dataclass(frozen=True)
class DayContext:
    person_id: str
    date: str  # ISO calendar date
    stress_level: str
    temperature_level: str
    raw_temperature: float

    def to_record(self) -> dict:
        return {"person_id": self.person_id, "date": self.date,
                "stress_level": self.stress_level,
                "temperature_level": self.temperature_level,
                "raw_temperature": float(self.raw_temperature)}

    @classmethod
    def from_record(cls, rec: dict) -> "DayContext":
        return cls(rec["person_id"], rec["date"], rec["stress_level"],
                   rec["temperature_level"], float(rec["raw_temperature"]))


@dataclass
class ContextEffectRule:
    """Multiplicative reweighting applied when the rule matches a context.

    ``stress``, ``temperature`` and ``meal_type`` are level names or "*".
    ``class_weights`` multiplies dish weights per weight class;
    ``taste_bias`` multiplies them via the dish's taste-share profile.
    """

    stress: str = "*"
    temperature: str = "*"
    meal_type: str = "*"
    class_weights: dict = field(default_factory=dict)
    taste_bias: dict = field(default_factory=dict)

    def matches(self, stress: str, temperature: str, meal_type: str) -> bool:
        return ((self.stress in ("*", stress))
                and (self.temperature in ("*", temperature))
                and (self.meal_type in ("*", meal_type)))

    def to_record(self) -> dict:
        return {"stress": self.stress, "temperature": self.temperature,
                "meal_type": self.meal_type,
                "class_weights": dict(self.class_weights),
                "taste_bias": dict(self.taste_bias)}

    @classmethod
    def from_record(cls, rec: dict) -> "ContextEffectRule":
        return cls(stress=rec.get("stress", "*"),
                   temperature=rec.get("temperature", "*"),
                   meal_type=rec.get("meal_type", "*"),
                   class_weights=dict(rec.get("class_weights", {})),
                   taste_bias=dict(rec.get("taste_bias", {})))


@dataclass
class LifestyleProfile:
    person_id: str
    transition_matrix: dict  # kind -> {kind -> prob}, rows over CHAIN_KINDS
    meal_rate: float
    stress_prior: dict  # level -> prob
    temperature_model: dict  # mean_c, amplitude_c, noise_sd_c, phase_day
    context_effect: list  # list[ContextEffectRule]
    stress_response_mode: str = "palatable_seeking"
    skip_probability: float = 0.4
    home: dict = field(default_factory=lambda: {"lat": 33.68, "lon": -117.82})
    steps_per_day: int = 12
    wake_hour: int = 7
    sleep_hour: int = 23

    def __post_init__(self):
        self.validate()
        self._effect_cache: dict = {}
        self._rows = {k: np.array([self.transition_matrix[k].get(j, 0.0)
                                   for j in CHAIN_KINDS], dtype=float)
                      for k in CHAIN_KINDS}
        self._row_cdfs = {k: np.cumsum(v) for k, v in self._rows.items()}

    def validate(self) -> None:
        if self.meal_rate <= 0:
            raise InvalidProfile(f"{self.person_id}: meal_rate must be > 0")
        if self.stress_response_mode not in ("palatable_seeking", "appetite_suppressing"):
            raise InvalidProfile(f"{self.person_id}: bad stress_response_mode")
        if not 0.0 <= self.skip_probability <= 1.0:
            raise InvalidProfile(f"{self.person_id}: skip_probability outside [0,1]")
        for kind in CHAIN_KINDS:
            if kind not in self.transition_matrix:
                raise InvalidProfile(f"{self.person_id}: missing matrix row {kind!r}")
            row = self.transition_matrix[kind]
            unknown = set(row) - set(CHAIN_KINDS)
            if unknown:
                raise InvalidProfile(
                    f"{self.person_id}: unknown kinds in matrix row {kind!r}: {sorted(unknown)}")
            vals = list(row.values())
            if any(v < 0 for v in vals):
                raise InvalidProfile(f"{self.person_id}: negative probability in row {kind!r}")
            if abs(sum(vals) - 1.0) > 1e-9:
                raise InvalidProfile(
                    f"{self.person_id}: matrix row {kind!r} sums to {sum(vals)}, not 1")
        prior_sum = sum(self.stress_prior.get(lv, 0.0) for lv in STRESS_LEVELS)
        if abs(prior_sum - 1.0) > 1e-9 or any(self.stress_prior.get(lv, 0.0) < 0
                                              for lv in STRESS_LEVELS):
            raise InvalidProfile(f"{self.person_id}: stress_prior is not a distribution")
        for rule in self.context_effect:
            for w in list(rule.class_weights.values()) + list(rule.taste_bias.values()):
                if w <= 0:
                    raise InvalidProfile(
                        f"{self.person_id}: reweighting factors must be > 0")
        if not 0 <= self.wake_hour < self.sleep_hour <= 24:
            raise InvalidProfile(f"{self.person_id}: bad waking window")
        if self.steps_per_day < 1:
            raise InvalidProfile(f"{self.person_id}: steps_per_day must be >= 1")

    def effect_for(self, stress: str, temperature: str, meal_type: str):
        """Combined (class weights, taste bias vector) for a context triple."""
        key = (stress, temperature, meal_type)
        if key not in self._effect_cache:
            class_w = {"heavy": 1.0, "light": 1.0}
            bias = np.ones(len(TASTE_DIMENSIONS))
            for rule in self.context_effect:
                if rule.matches(stress, temperature, meal_type):
                    for cls, w in rule.class_weights.items():
                        class_w[cls] = class_w.get(cls, 1.0) * float(w)
                    for dim, w in rule.taste_bias.items():
                        bias[TASTE_DIMENSIONS.index(dim)] *= float(w)
            self._effect_cache[key] = (class_w, bias)
        return self._effect_cache[key]

    def to_record(self) -> dict:
        return {
            "person_id": self.person_id,
            "transition_matrix": {k: dict(v) for k, v in self.transition_matrix.items()},
            "meal_rate": self.meal_rate,
            "stress_prior": dict(self.stress_prior),
            "temperature_model": dict(self.temperature_model),
            "context_effect": [r.to_record() for r in self.context_effect],
            "stress_response_mode": self.stress_response_mode,
            "skip_probability": self.skip_probability,
            "home": dict(self.home),
            "steps_per_day": self.steps_per_day,
            "wake_hour": self.wake_hour,
            "sleep_hour": self.sleep_hour,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "LifestyleProfile":
        return cls(
            person_id=rec["person_id"],
            transition_matrix={k: dict(v) for k, v in rec["transition_matrix"].items()},
            meal_rate=float(rec["meal_rate"]),
            stress_prior=dict(rec["stress_prior"]),
            temperature_model=dict(rec["temperature_model"]),
            context_effect=[ContextEffectRule.from_record(r)
                            for r in rec.get("context_effect", [])],
            stress_response_mode=rec.get("stress_response_mode", "palatable_seeking"),
            skip_probability=float(rec.get("skip_probability", 0.4)),
            home=dict(rec.get("home", {"lat": 33.68, "lon": -117.82})),
            steps_per_day=int(rec.get("steps_per_day", 12)),
            wake_hour=int(rec.get("wake_hour", 7)),
            sleep_hour=int(rec.get("sleep_hour", 23)),
        )


def make_transition_matrix(meal_prob: float, report_prob: float = 0.05) -> dict:
    """Uniform-meal-column matrix: every row enters the meal state with the
    same probability, so expected meals/day is exactly steps * meal_prob."""
    if not 0 <= meal_prob <= 1:
        raise InvalidProfile(f"meal probability {meal_prob} outside [0,1]")
    rest = 1.0 - meal_prob
    row = {"meal": meal_prob,
           "activity": rest * (1.0 - 2 * report_prob),
           "stress_report": rest * report_prob,
           "weather_report": rest * report_prob}
    return {kind: dict(row) for kind in CHAIN_KINDS}


def make_profile(person_id: str, meal_rate: float = 2.95, steps_per_day: int = 12,
                 **kwargs) -> LifestyleProfile:
    """Convenience constructor calibrating the chain to ``meal_rate``."""
    matrix = kwargs.pop("transition_matrix", None)
    if matrix is None:
        matrix = make_transition_matrix(meal_rate / steps_per_day)
    defaults = dict(
        stress_prior={"low": 0.45, "medium": 0.3, "high": 0.25},
        temperature_model={"mean_c": 18.0, "amplitude_c": 9.0,
                           "noise_sd_c": 3.5, "phase_day": 91.0},
        context_effect=[],
    )
    defaults.update(kwargs)
    return LifestyleProfile(person_id=person_id, transition_matrix=matrix,
                            meal_rate=meal_rate, steps_per_day=steps_per_day,
                            **defaults)


class Skip:
    """Sentinel: the meal opportunity was deliberately skipped."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Skip"


SKIP = Skip()


def sample_context(profile: LifestyleProfile, date: date_cls,
                   rng: np.random.Generator) -> DayContext:
    """Draw one day's stress level and temperature for a person."""
    stress = categorical(rng, STRESS_LEVELS,
                         [profile.stress_prior.get(lv, 0.0) for lv in STRESS_LEVELS])
    tm = profile.temperature_model
    doy = date.timetuple().tm_yday
    seasonal = tm["mean_c"] + tm["amplitude_c"] * np.sin(
        2 * np.pi * (doy - tm["phase_day"]) / 365.25)
    raw = float(seasonal + rng.normal(0.0, tm["noise_sd_c"]))
    return DayContext(person_id=profile.person_id, date=date.isoformat(),
                      stress_level=stress, temperature_level=temperature_level(raw),
                      raw_temperature=round(raw, 2))


def meal_type_for_hour(hour: float) -> str:
    if hour < 11:
        return "breakfast"
    if hour < 16:
        return "lunch"
    return "dinner"


def _dish_weights(profile: LifestyleProfile, meal_type: str, context: DayContext,
                  taste_dataset: TasteDataset) -> tuple[list, np.ndarray]:
    dishes, _taste, shares = taste_dataset.meal_candidates(meal_type)
    class_w, bias = profile.effect_for(context.stress_level,
                                       context.temperature_level, meal_type)
    weights = np.exp(shares @ np.log(bias))
    weights *= np.array([class_w.get(d.weight_class, 1.0) for d in dishes])
    return dishes, weights


def select_dish(meal_type: str, context: DayContext, profile: LifestyleProfile,
                taste_dataset: TasteDataset, rng: np.random.Generator):
    """Sample one dish of the meal type under the context reweighting.

    Appetite-suppressing profiles under high stress skip the meal with
    ``profile.skip_probability``; the function then returns ``SKIP``.
    """
    dishes, weights = _dish_weights(profile, meal_type, context, taste_dataset)
    if not dishes:
        raise EmptyCandidateSet(f"no dishes of meal type {meal_type!r}")
    if (profile.stress_response_mode == "appetite_suppressing"
            and context.stress_level == "high"
            and rng.random() < profile.skip_probability):
        return SKIP
    cdf = np.cumsum(weights)
    idx = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return dishes[min(idx, len(dishes) - 1)].dish_id


@dataclass
class LifelogEvent:
    """One lifelog event carrying the six aspect groups.

    Every aspect group is always serialized, possibly as an empty map;
    ``causal`` holds the ids of contextual events linked to this one.
    """

    event_id: str
    person_id: str
    kind: str
    start: datetime
    end: datetime
    spatial: dict = field(default_factory=dict)
    informational: dict = field(default_factory=dict)
    experiential: dict = field(default_factory=dict)
    structural: dict = field(default_factory=dict)
    causal: list = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValidationError(f"unknown event kind {self.kind!r}")
        if self.start > self.end:
            raise ValidationError(f"event {self.event_id}: start after end")

    @property
    def date(self) -> str:
        return self.start.date().isoformat()

    def to_record(self) -> dict:
        return {
            "event_id": self.event_id,
            "person_id": self.person_id,
            "kind": self.kind,
            "temporal": {"start": self.start.isoformat(), "end": self.end.isoformat()},
            "spatial": self.spatial,
            "informational": self.informational,
            "experiential": self.experiential,
            "structural": self.structural,
            "causal": {"linked_event_ids": list(self.causal)},
        }

    @classmethod
    def from_record(cls, rec: dict) -> "LifelogEvent":
        return cls(event_id=rec["event_id"], person_id=rec["person_id"],
                   kind=rec["kind"],
                   start=datetime.fromisoformat(rec["temporal"]["start"]),
                   end=datetime.fromisoformat(rec["temporal"]["end"]),
                   spatial=dict(rec.get("spatial", {})),
                   informational=dict(rec.get("informational", {})),
                   experiential=dict(rec.get("experiential", {})),
                   structural=dict(rec.get("structural", {})),
                   causal=list(rec.get("causal", {}).get("linked_event_ids", [])))


@dataclass
class EventStream:
    events: list
    day_contexts: list
    seed: int
    config_fingerprint: str

    def person_ids(self) -> list[str]:
        return sorted({e.person_id for e in self.events})

    def meals(self, person_id: str | None = None) -> list[LifelogEvent]:
        return [e for e in self.events
                if e.kind == "meal" and (person_id is None or e.person_id == person_id)]

    def events_for(self, person_id: str) -> list[LifelogEvent]:
        return [e for e in self.events if e.person_id == person_id]

    def context_for(self, person_id: str, date: str) -> DayContext | None:
        if not hasattr(self, "_ctx_index"):
            self._ctx_index = {(c.person_id, c.date): c for c in self.day_contexts}
        return self._ctx_index.get((person_id, date))

    def write(self, out_dir: Path | str) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_jsonl(out / "events.jsonl", (e.to_record() for e in self.events))
        write_jsonl(out / "day_contexts.jsonl", (c.to_record() for c in self.day_contexts))
        write_json(out / "manifest.json", {
            "seed": self.seed,
            "config_fingerprint": self.config_fingerprint,
            "n_events": len(self.events),
            "n_meals": sum(1 for e in self.events if e.kind == "meal"),
            "persons": self.person_ids(),
        })

    @classmethod
    def read(cls, in_dir: Path | str) -> "EventStream":
        src = Path(in_dir)
        manifest = read_json(src / "manifest.json")
        events = [LifelogEvent.from_record(r) for r in read_jsonl(src / "events.jsonl")]
        contexts = [DayContext.from_record(r)
                    for r in read_jsonl(src / "day_contexts.jsonl")]
        return cls(events=events, day_contexts=contexts, seed=manifest["seed"],
                   config_fingerprint=manifest["config_fingerprint"])


_ACTIVITY_TYPES = ("walk", "run", "gym", "cycling", "yoga", "chores")
_ENJOYMENT_WEIGHTS = (0.05, 0.10, 0.20, 0.40, 0.25)
_COMPANION_WEIGHTS = (0.50, 0.25, 0.15, 0.10)


def _generate_person_day(profile: LifestyleProfile, day_index: int, seed: int,
                         taste_dataset: TasteDataset):
    rng = person_day_stream(seed, profile.person_id, day_index)
    day_start = EPOCH + timedelta(days=day_index)
    context = sample_context(profile, day_start.date(), rng)

    events = []
    seq = 0

    def next_id():
        nonlocal seq
        eid = f"{profile.person_id}-d{day_index:04d}-e{seq:02d}"
        seq += 1
        return eid

    def at(minutes: float) -> datetime:
        return day_start + timedelta(minutes=float(minutes))

    weather_id = next_id()
    events.append(LifelogEvent(
        event_id=weather_id, person_id=profile.person_id, kind="weather_report",
        start=at(390), end=at(391),
        informational={"raw_temperature_c": context.raw_temperature,
                       "temperature_level": context.temperature_level}))
    stress_id = next_id()
    events.append(LifelogEvent(
        event_id=stress_id, person_id=profile.person_id, kind="stress_report",
        start=at(420), end=at(421),
        informational={"stress_level": context.stress_level}))

    wake_min = profile.wake_hour * 60
    sleep_min = profile.sleep_hour * 60
    slot_len = (sleep_min - wake_min) / profile.steps_per_day
    state = "activity"
    home = profile.home
    for step in range(profile.steps_per_day):
        cdf = profile._row_cdfs[state]
        state = CHAIN_KINDS[int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))]
        start_min = wake_min + step * slot_len + 1 + rng.random() * min(47.0, slot_len * 0.6)
        if state == "meal":
            hour = start_min / 60.0
            meal_type = meal_type_for_hour(hour)
            dish_id = select_dish(meal_type, context, profile, taste_dataset, rng)
            if dish_id is SKIP:
                continue
            dish = taste_dataset.by_id(dish_id)
            servings = 1
            eat_out = rng.random() < 0.25
            events.append(LifelogEvent(
                event_id=next_id(), person_id=profile.person_id, kind="meal",
                start=at(start_min), end=at(min(start_min + 25, sleep_min)),
                spatial={"lat": round(home["lat"] + rng.uniform(-0.02, 0.02), 5),
                         "lon": round(home["lon"] + rng.uniform(-0.02, 0.02), 5),
                         "place_tag": "restaurant" if eat_out else "home"},
                informational={"dish_id": dish_id, "servings": servings,
                               "weight_class": dish.weight_class,
                               "nutrition": {k: float(v) * servings
                                             for k, v in dish.nutrition.items()}},
                experiential={"enjoyment": 1 + int(categorical(
                    rng, (0, 1, 2, 3, 4), _ENJOYMENT_WEIGHTS))},
                structural={"meal_type": meal_type,
                            "companions": int(categorical(
                                rng, (0, 1, 2, 3), _COMPANION_WEIGHTS))},
                causal=[weather_id, stress_id]))
        elif state == "activity":
            duration = float(int(20 + rng.random() * 70))
            events.append(LifelogEvent(
                event_id=next_id(), person_id=profile.person_id, kind="activity",
                start=at(start_min), end=at(min(start_min + duration, sleep_min)),
                spatial={"lat": round(home["lat"] + rng.uniform(-0.05, 0.05), 5),
                         "lon": round(home["lon"] + rng.uniform(-0.05, 0.05), 5),
                         "place_tag": "outdoors"},
                informational={"activity_type": _ACTIVITY_TYPES[
                                   int(rng.integers(0, len(_ACTIVITY_TYPES)))],
                               "duration_min": duration,
                               "heart_rate": int(75 + rng.random() * 60)}))
        elif state == "stress_report":
            events.append(LifelogEvent(
                event_id=next_id(), person_id=profile.person_id, kind="stress_report",
                start=at(start_min), end=at(start_min + 1),
                informational={"stress_level": context.stress_level}))
        else:  # weather_report
            events.append(LifelogEvent(
                event_id=next_id(), person_id=profile.person_id, kind="weather_report",
                start=at(start_min), end=at(start_min + 1),
                informational={"raw_temperature_c": context.raw_temperature,
                               "temperature_level": context.temperature_level}))

    stress_penalty = {"low": 0, "medium": 4, "high": 8}[context.stress_level]
    score = int(np.clip(round(rng.normal(78 - stress_penalty, 8)), 40, 100))
    events.append(LifelogEvent(
        event_id=next_id(), person_id=profile.person_id, kind="sleep",
        start=at(sleep_min), end=at(sleep_min + (24 * 60 - sleep_min) + wake_min),
        informational={"sleep_score": score}))
    return events, context


def generate(profiles: list[LifestyleProfile], days: int,
             taste_dataset: TasteDataset, seed: int) -> EventStream:
    """Produce a deterministic multi-person event stream."""
    if not profiles:
        raise InvalidProfile("at least one profile is required")
    if days < 1:
        raise ValidationError("days must be >= 1")
    ids = [p.person_id for p in profiles]
    if len(set(ids)) != len(ids):
        raise InvalidProfile("duplicate person_id in profiles")
    for p in profiles:
        p.validate()

    config_fp = fingerprint({
        "profiles": [p.to_record() for p in sorted(profiles, key=lambda p: p.person_id)],
        "days": days,
        "taste": fingerprint({"dishes": [d.to_record() for d in taste_dataset.dishes]}),
    })

    events: list[LifelogEvent] = []
    contexts: list[DayContext] = []
    for profile in profiles:
        for day in range(days):
            day_events, ctx = _generate_person_day(profile, day, seed, taste_dataset)
            events.extend(day_events)
            contexts.append(ctx)
    events.sort(key=lambda e: (e.start, e.person_id, e.event_id))
    contexts.sort(key=lambda c: (c.date, c.person_id))
    return EventStream(events=events, day_contexts=contexts, seed=seed,
                       config_fingerprint=config_fp)


def load_profiles(path: Path | str) -> list[LifestyleProfile]:
    doc = read_json(path)
    recs = doc["profiles"] if isinstance(doc, dict) else doc
    return [LifestyleProfile.from_record(r) for r in recs]


def default_profiles() -> list[LifestyleProfile]:
    return load_profiles(bundled_data_path("profiles.json"))
