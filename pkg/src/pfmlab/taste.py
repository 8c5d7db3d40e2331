"""Six-dimensional additive taste vectors for ingredients and dishes.

An ingredient's taste vector counts its taste-tagged molecules per
dimension; a dish's vector is the componentwise sum over its ingredients.
The canonical component order is (umami, salty, sweet, sour, spicy,
bitter) and is used everywhere a vector is serialized as an array.

The experimental dish dataset is fixed at 60 dishes: 20 per meal type,
and within each meal type 10 heavy and 10 light options.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import (MissingIngredientVector, StructureViolation,
                     UnknownIngredient, ValidationError)
from .jsonutil import read_json, write_json

TASTE_DIMENSIONS = ("umami", "salty", "sweet", "sour", "spicy", "bitter")
MEAL_TYPES = ("breakfast", "lunch", "dinner")
WEIGHT_CLASSES = ("heavy", "light")

NUTRITION_FIELDS = ("calories", "protein_g", "fat_g", "saturated_fat_g",
                    "sugar_g", "fiber_g", "carbohydrate_g")


@dataclass(frozen=True)
class TasteVector:
    """Non-negative weights over the six taste dimensions."""

    umami: float = 0.0
    salty: float = 0.0
    sweet: float = 0.0
    sour: float = 0.0
    spicy: float = 0.0
    bitter: float = 0.0

    def __post_init__(self):
        for dim in TASTE_DIMENSIONS:
            if getattr(self, dim) < 0:
                raise ValidationError(f"taste component {dim!r} must be >= 0")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, d) for d in TASTE_DIMENSIONS], dtype=float)

    def as_list(self) -> list[float]:
        return [float(getattr(self, d)) for d in TASTE_DIMENSIONS]

    @classmethod
    def from_array(cls, values) -> "TasteVector":
        values = list(values)
        if len(values) != len(TASTE_DIMENSIONS):
            raise ValidationError("taste vector needs exactly 6 components")
        return cls(**{d: float(v) for d, v in zip(TASTE_DIMENSIONS, values)})

    def __add__(self, other: "TasteVector") -> "TasteVector":
        return TasteVector.from_array(self.as_array() + other.as_array())

    @classmethod
    def zero(cls) -> "TasteVector":
        return cls()


class MoleculeTable:
    """Rows of (ingredient, molecule, taste attributes).

    A (ingredient_id, molecule_id) pair may appear at most once; the
    attribute set may be empty (the molecule contributes nothing).
    """

    def __init__(self, entries):
        seen = set()
        self._by_ingredient: dict[str, list[tuple[str, frozenset]]] = {}
        for ingredient_id, molecule_id, attrs in entries:
            attrs = frozenset(attrs)
            unknown = attrs - set(TASTE_DIMENSIONS)
            if unknown:
                raise ValidationError(
                    f"unknown taste attributes {sorted(unknown)} for "
                    f"({ingredient_id}, {molecule_id})")
            key = (ingredient_id, molecule_id)
            if key in seen:
                raise ValidationError(f"duplicate molecule row {key}")
            seen.add(key)
            self._by_ingredient.setdefault(ingredient_id, []).append(
                (molecule_id, attrs))

    @property
    def ingredient_ids(self) -> set[str]:
        return set(self._by_ingredient)

    def molecules_for(self, ingredient_id: str):
        return list(self._by_ingredient.get(ingredient_id, []))

    def __len__(self) -> int:
        return sum(len(v) for v in self._by_ingredient.values())

    @classmethod
    def from_csv(cls, source) -> "MoleculeTable":
        """Parse a CSV with header ``ingredient_id,molecule_id,taste_attributes``.

        ``taste_attributes`` is a ``|``-separated subset of the six
        dimension names; an empty field means no attributes.
        """
        if isinstance(source, (str, Path)) and "\n" not in str(source):
            text = Path(source).read_text(encoding="utf-8")
        else:
            text = str(source)
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        expected = ["ingredient_id", "molecule_id", "taste_attributes"]
        if header != expected:
            raise ValidationError(f"molecule CSV header must be {expected}, got {header}")
        entries = []
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ValidationError(f"malformed molecule CSV row: {row}")
            ingredient_id, molecule_id, attr_field = (c.strip() for c in row)
            attrs = [a for a in attr_field.split("|") if a]
            entries.append((ingredient_id, molecule_id, attrs))
        return cls(entries)


def ingredient_taste_vector(table: MoleculeTable, ingredient_id: str,
                            molecule_weight: float = 1.0) -> TasteVector:
    """Count the ingredient's molecules carrying each taste attribute.

    Intensity is not modeled; every tagged molecule contributes
    ``molecule_weight`` (default 1.0) to each of its attributes.
    """
    if molecule_weight <= 0:
        raise ValidationError("molecule_weight must be > 0")
    if ingredient_id not in table.ingredient_ids:
        raise UnknownIngredient(f"ingredient {ingredient_id!r} not in molecule table")
    counts = dict.fromkeys(TASTE_DIMENSIONS, 0.0)
    for _molecule_id, attrs in table.molecules_for(ingredient_id):
        for attr in attrs:
            counts[attr] += molecule_weight
    return TasteVector(**counts)


def ingredient_vectors(table: MoleculeTable,
                       molecule_weight: float = 1.0) -> dict[str, TasteVector]:
    return {iid: ingredient_taste_vector(table, iid, molecule_weight)
            for iid in sorted(table.ingredient_ids)}


def dish_taste_vector(dish: "Dish", vectors: dict[str, TasteVector]) -> TasteVector:
    """Componentwise sum of the dish's ingredient vectors."""
    total = np.zeros(len(TASTE_DIMENSIONS))
    for ingredient_id in dish.ingredients:
        if ingredient_id not in vectors:
            raise MissingIngredientVector(
                f"no taste vector for ingredient {ingredient_id!r} "
                f"(dish {dish.dish_id!r})")
        total += vectors[ingredient_id].as_array()
    return TasteVector.from_array(total)


@dataclass(frozen=True)
class Dish:
    dish_id: str
    name: str
    meal_type: str
    weight_class: str
    ingredients: tuple[str, ...]
    nutrition: dict[str, float]
    taste: TasteVector | None = None

    def __post_init__(self):
        if self.meal_type not in MEAL_TYPES:
            raise ValidationError(f"bad meal_type {self.meal_type!r}")
        if self.weight_class not in WEIGHT_CLASSES:
            raise ValidationError(f"bad weight_class {self.weight_class!r}")
        missing = [f for f in NUTRITION_FIELDS if f not in self.nutrition]
        if missing:
            raise ValidationError(f"dish {self.dish_id!r} missing nutrition {missing}")

    def to_record(self) -> dict:
        return {
            "dish_id": self.dish_id,
            "name": self.name,
            "meal_type": self.meal_type,
            "weight_class": self.weight_class,
            "ingredients": list(self.ingredients),
            "nutrition": {k: float(self.nutrition[k]) for k in NUTRITION_FIELDS},
            "taste": self.taste.as_list() if self.taste is not None else None,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Dish":
        taste = rec.get("taste")
        return cls(dish_id=rec["dish_id"], name=rec["name"],
                   meal_type=rec["meal_type"], weight_class=rec["weight_class"],
                   ingredients=tuple(rec["ingredients"]),
                   nutrition=dict(rec["nutrition"]),
                   taste=None if taste is None else TasteVector.from_array(taste))


@dataclass
class TasteDataset:
    """The 60-dish experimental dataset with computed taste vectors."""

    dishes: list[Dish]
    _by_id: dict = field(init=False, repr=False)

    def __post_init__(self):
        self._by_id = {d.dish_id: d for d in self.dishes}

    def by_id(self, dish_id: str) -> Dish:
        if dish_id not in self._by_id:
            raise ValidationError(f"unknown dish {dish_id!r}")
        return self._by_id[dish_id]

    def of_meal_type(self, meal_type: str) -> list[Dish]:
        return [d for d in self.dishes if d.meal_type == meal_type]

    def meal_candidates(self, meal_type: str):
        """Cached (dishes sorted by id, taste matrix, taste-share matrix).

        Rows with an all-zero taste vector get uniform shares. Values are
        immutable once built; safe to share across workers.
        """
        if not hasattr(self, "_meal_cache"):
            self._meal_cache = {}
        if meal_type not in self._meal_cache:
            dishes = sorted(self.of_meal_type(meal_type), key=lambda d: d.dish_id)
            taste = np.array([d.taste.as_array() for d in dishes]) \
                if dishes else np.zeros((0, len(TASTE_DIMENSIONS)))
            sums = taste.sum(axis=1, keepdims=True)
            shares = np.where(sums > 0, taste / np.where(sums == 0, 1.0, sums),
                              1.0 / len(TASTE_DIMENSIONS))
            taste.setflags(write=False)
            shares.setflags(write=False)
            self._meal_cache[meal_type] = (dishes, taste, shares)
        return self._meal_cache[meal_type]

    def to_json(self, path: Path | str) -> None:
        write_json(path, {"dishes": [d.to_record() for d in self.dishes]})

    @classmethod
    def from_json(cls, path: Path | str) -> "TasteDataset":
        doc = read_json(path)
        return cls([Dish.from_record(r) for r in doc["dishes"]])


def check_structure(dishes: list[Dish], total: int = 60, per_meal: int = 20,
                    per_class: int = 10) -> None:
    """Raise StructureViolation if the 60/20/10-10 layout is broken."""
    if len(dishes) != total:
        raise StructureViolation(f"expected {total} dishes, got {len(dishes)}")
    ids = [d.dish_id for d in dishes]
    if len(set(ids)) != len(ids):
        raise StructureViolation("duplicate dish_id in dataset")
    for meal in MEAL_TYPES:
        meal_dishes = [d for d in dishes if d.meal_type == meal]
        if len(meal_dishes) != per_meal:
            raise StructureViolation(
                f"meal type {meal!r}: expected {per_meal} dishes, got {len(meal_dishes)}")
        for wclass in WEIGHT_CLASSES:
            n = sum(1 for d in meal_dishes if d.weight_class == wclass)
            if n != per_class:
                raise StructureViolation(
                    f"meal type {meal!r}, class {wclass!r}: expected "
                    f"{per_class} dishes, got {n}")


def build_taste_dataset(recipes, assignments, table: MoleculeTable) -> TasteDataset:
    """Assemble the experimental dataset and compute all dish vectors.

    ``recipes`` are dicts with dish_id, name, ingredients and nutrition;
    ``assignments`` maps dish_id -> (meal_type, weight_class).
    """
    vectors = ingredient_vectors(table)
    dishes = []
    for rec in recipes:
        dish_id = rec["dish_id"]
        if dish_id not in assignments:
            raise ValidationError(f"no meal/class assignment for dish {dish_id!r}")
        meal_type, weight_class = assignments[dish_id]
        if not rec["ingredients"]:
            raise ValidationError(f"dish {dish_id!r} has no ingredients")
        dish = Dish(dish_id=dish_id, name=rec["name"], meal_type=meal_type,
                    weight_class=weight_class,
                    ingredients=tuple(rec["ingredients"]),
                    nutrition=dict(rec["nutrition"]))
        dishes.append(replace(dish, taste=dish_taste_vector(dish, vectors)))
    check_structure(dishes)
    return TasteDataset(dishes)


# bundled synthetic data ----------------------------------------------------

def bundled_data_path(name: str) -> Path:
    return Path(str(resources.files("pfmlab.data").joinpath(name)))


def _data_text(name: str) -> str:
    return resources.files("pfmlab.data").joinpath(name).read_text(encoding="utf-8")


def bundled_molecule_table() -> MoleculeTable:
    return MoleculeTable.from_csv(_data_text("molecules.csv"))


def bundled_taste_dataset() -> TasteDataset:
    """Build the bundled 60-dish dataset from the shipped molecule table."""
    doc = json.loads(_data_text("recipes.json"))
    recipes = doc["recipes"]
    assignments = {r["dish_id"]: (r["meal_type"], r["weight_class"]) for r in recipes}
    return build_taste_dataset(recipes, assignments, bundled_molecule_table())
