"""Counterfactual option ranking and training-sample emission.

Ranking uses batch division over the two graded factors (nutrition,
preference): sort by the higher-level factor, keep the top ceil(n/level)
batch, re-sort that batch by the other factor, and take its head as the
improvement-oriented choice. Levels run 0..5; level 1 keeps the whole
list, level 0 disables a factor. Distance is handled upstream by the
option generator and restrictions are a hard filter applied before
scoring.

Emission replays meal contexts from a stream: each sample records the
option list, the context, recent history, the full counterfactual
ordering and its top choice as the training target. The module also
provides compact ID assignment and the three fine-tuning template
families (sequential, star rating, health-effect yes/no).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cre import Option, OptionList
from .errors import (AllOptionsRestricted, DuplicateKey, EmptyOptions,
                     UnknownCategory, ValidationError)
from .jsonutil import read_json, write_json
from .personal import PersonalVector
from .preference import cosine
from .rng import derive_stream

DEFAULT_NUTRITION_WEIGHTS = {
    "protein_g": 1.0,
    "fiber_g": 2.0,
    "sugar_g": -1.0,
    "saturated_fat_g": -2.0,
    "calories": -0.005,
}

SETTING_A_RESTRICTIONS = ("Beef", "Ham", "Cow", "Lamb", "Chicken", "Steak",
                          "Burger", "Hotdog", "Goat", "Turkey", "Sausage", "Rib")
SETTING_B_RESTRICTIONS = ("Nuts", "Seeds", "Pecans", "Almonds", "Pistachios")

TIEBREAK_ORDERS = ("nutrition_first", "preference_first")


@dataclass(frozen=True)
class CfgSettings:
    """Four-factor sensitivity configuration for option ranking."""

    nutrition_level: int
    preference_level: int
    restriction_list: tuple = ()
    distance_enabled: bool = True
    nutrition_weights: tuple = tuple(sorted(DEFAULT_NUTRITION_WEIGHTS.items()))
    priority_tiebreak: str = "nutrition_first"

    def __post_init__(self):
        for name, level in (("nutrition_level", self.nutrition_level),
                            ("preference_level", self.preference_level)):
            if not isinstance(level, int) or not 0 <= level <= 5:
                raise ValidationError(f"{name} must be an integer in 0..5")
        if self.nutrition_level == 0 and self.preference_level == 0:
            raise ValidationError("at least one graded factor level must be >= 1")
        if self.priority_tiebreak not in TIEBREAK_ORDERS:
            raise ValidationError(f"priority_tiebreak must be one of {TIEBREAK_ORDERS}")
        for key, weight in self.nutrition_weights:
            if not math.isfinite(weight):
                raise ValidationError(f"non-finite nutrition weight for {key!r}")

    @property
    def weights(self) -> dict:
        return dict(self.nutrition_weights)

    def to_record(self) -> dict:
        return {"nutrition_level": self.nutrition_level,
                "preference_level": self.preference_level,
                "restriction_list": list(self.restriction_list),
                "distance_enabled": self.distance_enabled,
                "nutrition_weights": dict(self.nutrition_weights),
                "priority_tiebreak": self.priority_tiebreak}

    @classmethod
    def from_record(cls, rec: dict) -> "CfgSettings":
        weights = rec.get("nutrition_weights", DEFAULT_NUTRITION_WEIGHTS)
        return cls(nutrition_level=int(rec["nutrition_level"]),
                   preference_level=int(rec["preference_level"]),
                   restriction_list=tuple(rec.get("restriction_list", ())),
                   distance_enabled=bool(rec.get("distance_enabled", True)),
                   nutrition_weights=tuple(sorted(weights.items())),
                   priority_tiebreak=rec.get("priority_tiebreak", "nutrition_first"))

    @classmethod
    def from_json(cls, path: Path | str) -> "CfgSettings":
        return cls.from_record(read_json(path))


def apply_restrictions(options: list[Option], restriction_list) -> list[Option]:
    """Drop options whose ingredient names contain any restriction term
    (case-insensitive substring)."""
    terms = [t.lower() for t in restriction_list]
    if not terms:
        return list(options)
    kept = []
    for option in options:
        names = [n.lower() for n in option.ingredient_names]
        if not any(term in name for term in terms for name in names):
            kept.append(option)
    if options and not kept:
        raise AllOptionsRestricted(
            "every option contains a restricted ingredient; widen the query")
    return kept


@dataclass(frozen=True)
class ScoredOption:
    option: Option
    nutrition_score: float
    preference_score: float


def nutrition_score(nutrition: dict, weights: dict | None = None) -> float:
    weights = weights or DEFAULT_NUTRITION_WEIGHTS
    return float(sum(w * float(nutrition.get(key, 0.0)) for key, w in weights.items()))


def _favored_names(personal: PersonalVector) -> set[str]:
    return {ing.replace("_", " ").lower() for ing in personal.favored}


def preference_score(option: Option, personal: PersonalVector) -> float:
    """0.7 x taste-centroid cosine + 0.3 x favored-ingredient overlap."""
    taste_term = cosine(option.taste_array(), personal.taste_centroid)
    names = [n.lower() for n in option.ingredient_names]
    favored = _favored_names(personal)
    overlap = (sum(1 for n in names if n in favored) / len(names)) if names else 0.0
    return 0.7 * taste_term + 0.3 * overlap


def score_options(options: list[Option], personal: PersonalVector,
                  settings: CfgSettings) -> list[ScoredOption]:
    weights = settings.weights
    return [ScoredOption(option=o,
                         nutrition_score=nutrition_score(o.nutrition, weights),
                         preference_score=preference_score(o, personal))
            for o in options]


@dataclass
class CfgRanking:
    ordered: list            # ScoredOption, best first
    batch_size: int
    primary: str             # "nutrition" or "preference"
    secondary: str

    @property
    def top(self) -> ScoredOption:
        return self.ordered[0]

    def ordered_ids(self) -> list[str]:
        return [s.option.option_id for s in self.ordered]


def _factor_order(settings: CfgSettings) -> tuple[tuple[str, int], tuple[str, int]]:
    nutrition = ("nutrition", settings.nutrition_level)
    preference = ("preference", settings.preference_level)
    if nutrition[1] > preference[1]:
        return nutrition, preference
    if preference[1] > nutrition[1]:
        return preference, nutrition
    if settings.priority_tiebreak == "nutrition_first":
        return nutrition, preference
    return preference, nutrition


def _score_of(scored: ScoredOption, factor: str) -> float:
    return scored.nutrition_score if factor == "nutrition" else scored.preference_score


def cfg_rank(scored: list[ScoredOption], settings: CfgSettings) -> CfgRanking:
    """Batch-division ranking over restriction-filtered, scored options.

    Sort descending by the primary factor (ties by ascending option id),
    keep the top ceil(n / primary level) batch, re-sort it by the
    secondary factor (skipped when that factor's level is 0), and append
    the remainder in primary order.
    """
    if not scored:
        raise EmptyOptions("cannot rank an empty option list")
    (p1, level1), (p2, level2) = _factor_order(settings)
    by_primary = sorted(scored,
                        key=lambda s: (-_score_of(s, p1), s.option.option_id))
    n = len(by_primary)
    batch_size = n if level1 <= 1 else max(1, math.ceil(n / level1))
    batch, rest = by_primary[:batch_size], by_primary[batch_size:]
    if level2 >= 1:
        batch = sorted(batch, key=lambda s: (-_score_of(s, p2), s.option.option_id))
    return CfgRanking(ordered=batch + rest, batch_size=batch_size,
                      primary=p1, secondary=p2)


# counterfactual sample emission ----------------------------------------------

@dataclass
class CounterfactualSample:
    sample_id: str
    person_id: str
    context: dict            # meal_type, stress_level, temperature_level
    history: list            # up to 3 preceding dish ids, oldest first
    options: OptionList
    target_id: str
    cfg_sorted_ids: list
    target_nutrition_score: float

    def to_record(self) -> dict:
        return {"sample_id": self.sample_id, "person_id": self.person_id,
                "context": dict(self.context), "history": list(self.history),
                "options": self.options.to_record(), "target_id": self.target_id,
                "cfg_sorted_ids": list(self.cfg_sorted_ids),
                "target_nutrition_score": self.target_nutrition_score}

    @classmethod
    def from_record(cls, rec: dict) -> "CounterfactualSample":
        return cls(sample_id=rec["sample_id"], person_id=rec["person_id"],
                   context=dict(rec["context"]), history=list(rec["history"]),
                   options=OptionList.from_record(rec["options"]),
                   target_id=rec["target_id"],
                   cfg_sorted_ids=list(rec["cfg_sorted_ids"]),
                   target_nutrition_score=float(rec["target_nutrition_score"]))

    def target_option(self) -> Option:
        for option in self.options.options:
            if option.option_id == self.target_id:
                return option
        raise ValidationError(f"sample {self.sample_id}: target not among options")


@dataclass
class CounterfactualDataset:
    samples: list
    personal: dict           # rendered PersonalVector shared by all samples
    settings: dict
    seed: int
    skipped_all_restricted: int = 0

    def to_record(self) -> dict:
        return {"samples": [s.to_record() for s in self.samples],
                "personal": self.personal, "settings": self.settings,
                "seed": self.seed,
                "skipped_all_restricted": self.skipped_all_restricted}

    def write(self, path: Path | str) -> None:
        write_json(path, self.to_record())

    @classmethod
    def read(cls, path: Path | str) -> "CounterfactualDataset":
        rec = read_json(path)
        return cls(samples=[CounterfactualSample.from_record(r) for r in rec["samples"]],
                   personal=rec["personal"], settings=rec["settings"],
                   seed=rec["seed"],
                   skipped_all_restricted=rec["skipped_all_restricted"])


def emit_counterfactuals(stream, cre, settings: CfgSettings,
                         personal: PersonalVector, n_samples: int,
                         seed: int) -> CounterfactualDataset:
    """Sample meal contexts and emit (options, context) -> top-choice pairs.

    ``cre`` is a callable mapping a query label to an OptionList (see
    ``pfmlab.cre.cre_options``); queries whose whole option list is
    restricted are counted and skipped. Deterministic given the seed.
    """
    person_id = personal.preferential.person_id
    meals = stream.meals(person_id)
    if n_samples > 0 and not meals:
        raise ValidationError(f"no meals for person {person_id!r}")
    rng = derive_stream(seed, "cfg-emit", person_id)
    samples = []
    skipped = 0
    for i in range(n_samples):
        meal_idx = int(rng.integers(0, len(meals)))
        meal = meals[meal_idx]
        ctx = stream.context_for(meal.person_id, meal.date)
        context = {"meal_type": meal.structural.get("meal_type"),
                   "stress_level": ctx.stress_level if ctx else None,
                   "temperature_level": ctx.temperature_level if ctx else None}
        history = [m.informational["dish_id"] for m in meals[:meal_idx]][-3:]
        option_list = cre(f"sample-{i}")
        try:
            kept = apply_restrictions(option_list.options, settings.restriction_list)
        except AllOptionsRestricted:
            skipped += 1
            continue
        ranking = cfg_rank(score_options(kept, personal, settings), settings)
        samples.append(CounterfactualSample(
            sample_id=f"cf-{i:06d}", person_id=person_id, context=context,
            history=history,
            options=OptionList(options=kept, provenance=option_list.provenance,
                               requested_n=option_list.requested_n,
                               short=option_list.short),
            target_id=ranking.top.option.option_id,
            cfg_sorted_ids=ranking.ordered_ids(),
            target_nutrition_score=ranking.top.nutrition_score))
    return CounterfactualDataset(samples=samples, personal=personal.to_record(),
                                 settings=settings.to_record(), seed=seed,
                                 skipped_all_restricted=skipped)


# compact ID mapping -----------------------------------------------------------

@dataclass
class IdMap:
    """Stable bijection between natural keys and compact IDs."""

    item_to_id: dict
    user_to_id: dict

    def item_id(self, key: str) -> str:
        return self.item_to_id[key]

    def user_id(self, key: str) -> str:
        return self.user_to_id[key]

    def invert(self) -> dict:
        return {"items": {v: k for k, v in self.item_to_id.items()},
                "users": {v: k for k, v in self.user_to_id.items()}}

    def to_record(self) -> dict:
        return {"items": dict(self.item_to_id), "users": dict(self.user_to_id)}

    @classmethod
    def from_record(cls, rec: dict) -> "IdMap":
        return cls(item_to_id=dict(rec["items"]), user_to_id=dict(rec["users"]))


def assign_ids(items, users) -> IdMap:
    """Assign item_N / user_N by sorted natural key; keys must be unique."""
    out = {}
    for label, keys in (("item", items), ("user", users)):
        keys = list(keys)
        if len(set(keys)) != len(keys):
            seen, dupes = set(), set()
            for k in keys:
                (dupes if k in seen else seen).add(k)
            raise DuplicateKey(f"duplicate {label} keys: {sorted(dupes)}")
        out[label] = {key: f"{label}_{i}" for i, key in enumerate(sorted(keys), start=1)}
    return IdMap(item_to_id=out["item"], user_to_id=out["user"])


def idmap_for_dataset(dataset: CounterfactualDataset) -> IdMap:
    items = set()
    users = set()
    for s in dataset.samples:
        users.add(s.person_id)
        items.update(s.history)
        items.update(o.option_id for o in s.options.options)
    return assign_ids(sorted(items), sorted(users))


# fine-tuning templates --------------------------------------------------------

TEMPLATE_CATEGORIES = ("sequential", "star_rating", "yes_no")

_SEQ_TEMPLATES = (
    "{user} recently ate {history}. From the options {options}, which item "
    "will they pick next?",
    "Given {user}'s meal history {history}, choose the next item out of "
    "{options}.",
    "Predict the next choice for {user} after {history}; the candidates are "
    "{options}.",
)
_STAR_TEMPLATES = (
    "Rate the healthiness of {item} from 1 to 5 stars.",
    "How many healthiness stars (1-5) does {item} deserve?",
    "Assign a 1 to 5 star health score to {item}.",
)
_YESNO_TEMPLATES = (
    "Does {item} provide the effect {effect}? Answer yes or no.",
    "Is {effect} an expected effect of {item}? Answer yes or no.",
    "Answer yes or no: eating {item} helps with {effect}.",
)


def star_rating_for(scores: list[float], score: float) -> int:
    """1-5 stars by quintile of the dataset's target nutrition scores."""
    edges = np.quantile(np.asarray(scores, dtype=float), [0.2, 0.4, 0.6, 0.8])
    return 1 + int(sum(score >= e for e in edges))


def emit_templates(samples: list[CounterfactualSample], category: str,
                   id_map: IdMap, effect_tag: str = "improves_sleep_quality",
                   ) -> list[str]:
    """Render each sample through all phrasing variants of one category.

    Records are ``input<TAB>target`` lines with items referenced by
    compact IDs.
    """
    if category not in TEMPLATE_CATEGORIES:
        raise UnknownCategory(f"unknown template category {category!r}")
    records = []
    scores = [s.target_nutrition_score for s in samples]
    for sample in samples:
        user = id_map.user_id(sample.person_id)
        target_item = id_map.item_id(sample.target_id)
        if category == "sequential":
            history = ", ".join(id_map.item_id(h) for h in sample.history) or "nothing"
            options = ", ".join(sorted(id_map.item_id(o.option_id)
                                       for o in sample.options.options))
            for tpl in _SEQ_TEMPLATES:
                text = tpl.format(user=user, history=history, options=options)
                records.append(f"{text}\t{target_item}")
        elif category == "star_rating":
            stars = star_rating_for(scores, sample.target_nutrition_score)
            for tpl in _STAR_TEMPLATES:
                records.append(f"{tpl.format(item=target_item)}\t{stars}")
        else:
            has_effect = effect_tag in sample.target_option().health_effects
            answer = "yes" if has_effect else "no"
            for tpl in _YESNO_TEMPLATES:
                text = tpl.format(item=target_item, effect=effect_tag.replace("_", " "))
                records.append(f"{text}\t{answer}")
    return records


def parse_template_record(category: str, record: str) -> dict:
    """Recover the referenced item ID and the answer from one record."""
    import re
    if category not in TEMPLATE_CATEGORIES:
        raise UnknownCategory(f"unknown template category {category!r}")
    text, answer = record.rsplit("\t", 1)
    if category == "sequential":
        return {"item_id": answer, "answer": answer}
    match = re.search(r"\bitem_\d+\b", text)
    if not match:
        raise ValidationError(f"no item reference in record: {record!r}")
    return {"item_id": match.group(0), "answer": answer}
