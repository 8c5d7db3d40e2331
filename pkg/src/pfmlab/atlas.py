"""Library-scale food atlas: schema-validated entities, geo index, queries.

Entity classes (Eatery, Store, Recipe, MenuItem, FoodItem,
DietarySupplement, Ingredient, Compound, HealthEffect, Nutrition) are
validated against per-class schemas: every mandatory field must be
present, unknown keys are rejected, link fields must reference the right
class. Located classes (Eatery, Store) are indexed on a lat/lon grid;
radius queries gather candidate cells and verify with exact great-circle
(haversine) distances, so results match a brute-force scan.

Health-effect matching is an exact tag match: a HealthEffect entity's id
is its controlled-vocabulary tag.

Concurrency: ingestion takes an exclusive lock; queries are pure reads
over the ingested snapshot and may run concurrently once ingestion is
done.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ValidationError
from .jsonutil import read_jsonl, write_jsonl

EARTH_RADIUS_KM = 6371.0


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance between two WGS84-ish points, in km."""
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = math.radians(lat2 - lat1)
    dlam = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(a)))


# schema ---------------------------------------------------------------------

@dataclass(frozen=True)
class LinkSpec:
    target_class: str
    min_count: int = 0


@dataclass(frozen=True)
class ClassSchema:
    name: str
    mandatory: frozenset
    optional: frozenset
    links: dict          # field name -> LinkSpec (link fields are mandatory)
    located: bool = False

    @property
    def all_fields(self) -> frozenset:
        return self.mandatory | self.optional | frozenset(self.links)


def _schema(name, mandatory, optional, links, located=False):
    return ClassSchema(name=name, mandatory=frozenset(mandatory),
                       optional=frozenset(optional), links=dict(links),
                       located=located)


_EATERY_STORE_COMMON = [
    "Address", "Description", "Drive Thru", "Email", "Item Price", "lat", "lon",
    "Logo", "Name", "Open Hours", "Payment Method", "Phone", "Photo",
    "Price Range", "Review", "Star Rating", "Website",
]
_EATERY_STORE_WEB = [
    "Curbside Pickup", "Deals/Offers", "Dine-in", "Events",
    "Non-Contact Delivery", "Online Order", "Popular Times",
    "Question and Answers", "Serves Alcohol", "Smoking Allowed",
    "Social Media", "Take Out", "Videos",
]

CLASS_SCHEMAS = {
    "Eatery": _schema(
        "Eatery",
        _EATERY_STORE_COMMON + ["Cuisine", "Reservation"],
        _EATERY_STORE_WEB,
        {"Menu Item": LinkSpec("MenuItem", 1)},
        located=True),
    "Store": _schema(
        "Store",
        _EATERY_STORE_COMMON,
        _EATERY_STORE_WEB + ["Pharmacy", "Product Categories"],
        {"Food Item": LinkSpec("FoodItem", 1),
         "Dietary Supplement": LinkSpec("DietarySupplement", 0)},
        located=True),
    "Recipe": _schema(
        "Recipe",
        ["Category", "Cook Time", "Cooking Method", "Copyright Holder",
         "Copyright Notice", "Copyright Year", "Cuisine", "Date Created",
         "Date Modified", "Description", "Instructions", "Name", "Photos",
         "Prep Time", "Reviews", "Star Rating", "Steps", "Suitable for Diet",
         "Total Time", "Website", "Yield"],
        ["Videos", "Cost", "Tools/Utensils"],
        {"Ingredient": LinkSpec("Ingredient", 1),
         "Nutrition": LinkSpec("Nutrition", 1)}),
    "MenuItem": _schema(
        "MenuItem",
        ["Category", "Description", "Name", "Serving Size", "Suitable for Diet"],
        ["Deals/Offers", "Allergens", "Cost", "Taste"],
        {"Ingredient": LinkSpec("Ingredient", 1),
         "Health Effect": LinkSpec("HealthEffect", 0),
         "Nutrition": LinkSpec("Nutrition", 1)}),
    "FoodItem": _schema(
        "FoodItem",
        ["Category", "Description", "Distributor", "Name", "Net Weight",
         "Serving Size", "Suitable for Diet"],
        ["Taste", "Allergens", "Cost", "Shelf Life", "Deals/Offers",
         "Growing Location", "Origin City", "Origin Country"],
        {"Ingredient": LinkSpec("Ingredient", 1),
         "Health Effect": LinkSpec("HealthEffect", 0),
         "Nutrition": LinkSpec("Nutrition", 1)}),
    "DietarySupplement": _schema(
        "DietarySupplement",
        ["Active Ingredients", "Category", "Cost", "Description", "Guidelines",
         "Legal Status", "Manufacturer", "Maximum Intake", "Mechanism of Action",
         "Medicine System", "Name", "Proprietary Name", "Recognizing Authority",
         "Recommended Intake", "Safety Consideration", "Suitable for Diet",
         "Target Population"],
        ["Deals/Offers", "Allergens", "Shelf Life", "Taste"],
        {"Ingredient": LinkSpec("Ingredient", 1),
         "Health Effect": LinkSpec("HealthEffect", 0),
         "Nutrition": LinkSpec("Nutrition", 1)}),
    "Ingredient": _schema(
        "Ingredient",
        ["Category", "Cost", "Description", "Name", "Suitable for Diet"],
        ["Deals/Offers", "Allergens", "Glycemic Index", "Insulin Index",
         "Shelf Life", "Taste"],
        {"Compound": LinkSpec("Compound", 0),
         "Health Effect": LinkSpec("HealthEffect", 0),
         "Nutrition": LinkSpec("Nutrition", 0)}),
    "Compound": _schema(
        "Compound",
        ["BioChem Interaction", "BioChem Similarity", "Chemical Role",
         "Composition", "Description", "Genetic Expression", "inChI",
         "inChIKey", "IUPAC Name", "Molecular Formula", "Molecular Function",
         "Molecular Weight", "Name", "Potential Use", "Proprietary Name",
         "Smiles", "Subcellular Location", "Taxonomic Range"],
        ["Taste"],
        {"Health Effect": LinkSpec("HealthEffect", 0)}),
    "HealthEffect": _schema(
        "HealthEffect",
        ["Health Benefits", "Misconceptions", "Symptoms"],
        ["Allergen Effect", "Effect on blood glucose level",
         "Effect on cardio-metabolic health", "Effect on Pregnancy",
         "Effect on triglycerides", "Fatty acid profile",
         "Pre-, pro-, post- biotic content", "Side Effects"],
        {}),
    "Nutrition": _schema(
        "Nutrition",
        ["Calories", "Carbohydrate", "Cholesterol", "Fat", "Fiber", "Protein",
         "Saturated Fat", "Serving Size", "Sugar", "Trans Fat",
         "Unsaturated Fat"],
        ["% Daily Value", "Electrolytes", "Minerals", "Vitamins"],
        {}),
}

_NUMERIC_FIELDS = {
    ("Eatery", "Star Rating"), ("Store", "Star Rating"), ("Recipe", "Star Rating"),
    ("Compound", "Molecular Weight"),
    ("Ingredient", "Glycemic Index"), ("Ingredient", "Insulin Index"),
}
_NUTRITION_NUMERIC = ("Calories", "Carbohydrate", "Cholesterol", "Fat", "Fiber",
                      "Protein", "Saturated Fat", "Sugar", "Trans Fat",
                      "Unsaturated Fat")

EFFECT_VOCABULARY = (
    "improves_sleep_quality", "relieves_stress", "lowers_blood_glucose",
    "improves_heart_health", "reduces_inflammation", "boosts_immunity",
    "raises_triglycerides", "allergen_risk", "improves_digestion",
    "increases_energy",
)


@dataclass
class AtlasEntity:
    entity_id: str
    entity_class: str
    contributor_id: str
    attributes: dict

    def to_record(self) -> dict:
        return {"entity_id": self.entity_id, "entity_class": self.entity_class,
                "contributor_id": self.contributor_id,
                "attributes": dict(self.attributes)}

    @property
    def location(self) -> tuple[float, float] | None:
        if "lat" in self.attributes and "lon" in self.attributes:
            return float(self.attributes["lat"]), float(self.attributes["lon"])
        return None

    def links(self, field_name: str) -> list[str]:
        value = self.attributes.get(field_name, [])
        return list(value) if isinstance(value, list) else [value]


def validate_record(rec: dict) -> list[str]:
    """Field-level validation reasons; empty list means the record is valid."""
    reasons = []
    for key in ("entity_id", "entity_class", "contributor_id", "attributes"):
        if key not in rec:
            reasons.append(f"missing top-level field {key!r}")
    if reasons:
        return reasons
    cls = rec["entity_class"]
    schema = CLASS_SCHEMAS.get(cls)
    if schema is None:
        return [f"unknown entity_class {cls!r}"]
    attrs = rec["attributes"]
    if not isinstance(attrs, dict):
        return ["attributes must be a map"]
    for name in sorted(schema.mandatory):
        if name not in attrs:
            reasons.append(f"missing mandatory field {name!r}")
    for name in sorted(schema.links):
        if name not in attrs:
            reasons.append(f"missing mandatory field {name!r}")
        else:
            value = attrs[name]
            if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
                reasons.append(f"link field {name!r} must be a list of entity ids")
            elif len(value) < schema.links[name].min_count:
                reasons.append(f"link field {name!r} needs >= "
                               f"{schema.links[name].min_count} target(s)")
    for name in sorted(attrs):
        if name not in schema.all_fields:
            reasons.append(f"unknown field {name!r}")
    if schema.located:
        for axis, lo, hi in (("lat", -90.0, 90.0), ("lon", -180.0, 180.0)):
            if axis in attrs:
                try:
                    v = float(attrs[axis])
                except (TypeError, ValueError):
                    reasons.append(f"{axis} must be a number")
                    continue
                if not lo <= v <= hi:
                    reasons.append(f"{axis} {v} outside [{lo}, {hi}]")
    for fname in _NUTRITION_NUMERIC if cls == "Nutrition" else ():
        if fname in attrs and not isinstance(attrs[fname], (int, float)):
            reasons.append(f"{fname!r} must be a number")
    for cls_name, fname in _NUMERIC_FIELDS:
        if cls == cls_name and fname in attrs and not isinstance(attrs[fname], (int, float)):
            reasons.append(f"{fname!r} must be a number")
    if "Taste" in attrs:
        taste = attrs["Taste"]
        if (not isinstance(taste, list) or len(taste) != 6
                or not all(isinstance(x, (int, float)) and x >= 0 for x in taste)):
            reasons.append("'Taste' must be a list of 6 non-negative numbers")
    return reasons


# store ------------------------------------------------------------------

_GRID_DEG = 0.25


@dataclass
class RejectionReport:
    rejected: list = field(default_factory=list)  # {"entity_id","entity_class","reasons"}

    def add(self, rec: dict, reasons: list[str]) -> None:
        self.rejected.append({"entity_id": rec.get("entity_id"),
                              "entity_class": rec.get("entity_class"),
                              "reasons": reasons})

    def __len__(self) -> int:
        return len(self.rejected)


class AtlasStore:
    """In-process indexed entity collection with file persistence."""

    def __init__(self):
        self._entities: dict[str, AtlasEntity] = {}
        self._by_class: dict[str, list[str]] = {}
        self._grid: dict[tuple[int, int], list[str]] = {}
        self._write_lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._entities)

    def ingest(self, records) -> RejectionReport:
        """Validate and index records; invalid ones go to the report."""
        report = RejectionReport()
        with self._write_lock:
            for rec in records:
                reasons = validate_record(rec)
                if not reasons and rec["entity_id"] in self._entities:
                    reasons = [f"duplicate entity_id {rec['entity_id']!r}"]
                if reasons:
                    report.add(rec, reasons)
                    continue
                entity = AtlasEntity(entity_id=rec["entity_id"],
                                     entity_class=rec["entity_class"],
                                     contributor_id=rec["contributor_id"],
                                     attributes=dict(rec["attributes"]))
                self._entities[entity.entity_id] = entity
                self._by_class.setdefault(entity.entity_class, []).append(entity.entity_id)
                loc = entity.location if CLASS_SCHEMAS[entity.entity_class].located else None
                if loc is not None:
                    cell = (int(math.floor(loc[0] / _GRID_DEG)),
                            int(math.floor(loc[1] / _GRID_DEG)))
                    self._grid.setdefault(cell, []).append(entity.entity_id)
        return report

    def get(self, entity_id: str) -> AtlasEntity | None:
        return self._entities.get(entity_id)

    def of_class(self, entity_class: str) -> list[AtlasEntity]:
        return [self._entities[eid] for eid in sorted(self._by_class.get(entity_class, []))]

    def dangling_links(self) -> list[dict]:
        issues = []
        for eid in sorted(self._entities):
            entity = self._entities[eid]
            schema = CLASS_SCHEMAS[entity.entity_class]
            for fname, spec in schema.links.items():
                for target in entity.links(fname):
                    resolved = self._entities.get(target)
                    if resolved is None:
                        issues.append({"entity_id": eid, "field": fname,
                                       "target": target, "problem": "missing"})
                    elif resolved.entity_class != spec.target_class:
                        issues.append({"entity_id": eid, "field": fname,
                                       "target": target, "problem":
                                       f"wrong class {resolved.entity_class}"})
        return issues

    # spatial queries ----------------------------------------------------

    def radius_query(self, lat: float, lon: float, radius_km: float,
                     entity_class: str | None = None) -> list[tuple[AtlasEntity, float]]:
        """Located entities within radius, sorted by (distance, id).

        Grid cells overlapping the bounding box are gathered as
        candidates and verified with exact haversine distances.
        """
        if radius_km <= 0:
            raise ValidationError("radius_km must be > 0")
        dlat = math.degrees(radius_km / EARTH_RADIUS_KM)
        cos_phi = max(math.cos(math.radians(lat)), 1e-9)
        dlon = min(180.0, math.degrees(radius_km / (EARTH_RADIUS_KM * cos_phi)))
        lat_cells = range(int(math.floor((lat - dlat) / _GRID_DEG)),
                          int(math.floor((lat + dlat) / _GRID_DEG)) + 1)
        lon_cells = range(int(math.floor((lon - dlon) / _GRID_DEG)),
                          int(math.floor((lon + dlon) / _GRID_DEG)) + 1)
        hits = []
        for ci in lat_cells:
            for cj in lon_cells:
                for eid in self._grid.get((ci, cj), ()):
                    entity = self._entities[eid]
                    if entity_class and entity.entity_class != entity_class:
                        continue
                    elat, elon = entity.location
                    dist = haversine_km(lat, lon, elat, elon)
                    if dist <= radius_km:
                        hits.append((entity, dist))
        hits.sort(key=lambda pair: (pair[1], pair[0].entity_id))
        return hits

    # persistence --------------------------------------------------------

    def export(self, out_dir: Path | str) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for cls in sorted(CLASS_SCHEMAS):
            entities = self.of_class(cls)
            if entities:
                write_jsonl(out / f"{cls}.jsonl", (e.to_record() for e in entities))

    @classmethod
    def read(cls, in_dir: Path | str) -> tuple["AtlasStore", RejectionReport]:
        store = cls()
        report = RejectionReport()
        for path in sorted(Path(in_dir).glob("*.jsonl")):
            sub = store.ingest(read_jsonl(path))
            report.rejected.extend(sub.rejected)
        return store, report


def ingest(records, store: AtlasStore | None = None) -> tuple[AtlasStore, RejectionReport]:
    """Build (or extend) a store from records; returns it with the report."""
    store = store or AtlasStore()
    report = store.ingest(records)
    return store, report


# context + requirements ---------------------------------------------------

@dataclass(frozen=True)
class ContextVector:
    lat: float
    lon: float
    radius_km: float
    time_of_day: str | None = None
    meal_type: str | None = None
    deny_ingredients: tuple = ()
    diet_tags: tuple = ()
    budget: float | None = None

    def __post_init__(self):
        if self.radius_km <= 0:
            raise ValidationError("radius_km must be > 0")


@dataclass(frozen=True)
class RequirementVector:
    exclude_ingredients: tuple = ()
    max_nutrients: tuple = ()   # pairs (nutrition field, maximum)
    diet_tags: tuple = ()

    @classmethod
    def from_record(cls, rec: dict) -> "RequirementVector":
        return cls(exclude_ingredients=tuple(rec.get("exclude_ingredients", ())),
                   max_nutrients=tuple((k, float(v)) for k, v in
                                       dict(rec.get("max_nutrients", {})).items()),
                   diet_tags=tuple(rec.get("diet_tags", ())))


def _ingredient_names(store: AtlasStore, entity: AtlasEntity) -> list[str]:
    names = []
    for iid in entity.links("Ingredient"):
        ing = store.get(iid)
        if ing is not None:
            names.append(str(ing.attributes.get("Name", iid)))
    return names


def _contains_term(names: list[str], terms) -> bool:
    lowered = [n.lower() for n in names]
    return any(term.lower() in name for term in terms for name in lowered)


def reachable_effects(store: AtlasStore, entity: AtlasEntity) -> set[str]:
    """Effect tags linked directly or via ingredients and their compounds."""
    tags = set(entity.links("Health Effect"))
    for iid in entity.links("Ingredient"):
        ing = store.get(iid)
        if ing is None:
            continue
        tags.update(ing.links("Health Effect"))
        for cid in ing.links("Compound"):
            compound = store.get(cid)
            if compound is not None:
                tags.update(compound.links("Health Effect"))
    return tags


def _nutrition_of(store: AtlasStore, entity: AtlasEntity) -> dict:
    links = entity.links("Nutrition")
    if not links:
        return {}
    nut = store.get(links[0])
    return dict(nut.attributes) if nut is not None else {}


def _satisfies(store: AtlasStore, entity: AtlasEntity, req: RequirementVector,
               deny_extra=(), diet_extra=(), budget: float | None = None) -> bool:
    names = _ingredient_names(store, entity)
    if _contains_term(names, tuple(req.exclude_ingredients) + tuple(deny_extra)):
        return False
    diets = set(entity.attributes.get("Suitable for Diet", []))
    if not set(req.diet_tags) <= diets or not set(diet_extra) <= diets:
        return False
    if req.max_nutrients:
        nutrition = _nutrition_of(store, entity)
        for fname, maximum in req.max_nutrients:
            value = nutrition.get(fname)
            if value is None or float(value) > maximum:
                return False
    if budget is not None:
        cost = entity.attributes.get("Cost")
        if cost is not None and float(cost) > budget:
            return False
    return True


# the four query classes -----------------------------------------------------

def query_food_by_effect(store: AtlasStore, effect_tag: str,
                         context: ContextVector) -> list[dict]:
    """Foods within reach linked (directly or transitively) to the effect."""
    results = []
    for host_class, food_field in (("Eatery", "Menu Item"), ("Store", "Food Item")):
        for host, dist in store.radius_query(context.lat, context.lon,
                                             context.radius_km, host_class):
            for fid in host.links(food_field):
                food = store.get(fid)
                if food is None:
                    continue
                if effect_tag not in reachable_effects(store, food):
                    continue
                if not _satisfies(store, food, RequirementVector(),
                                  deny_extra=context.deny_ingredients,
                                  diet_extra=context.diet_tags,
                                  budget=context.budget):
                    continue
                results.append({"food_id": fid, "host_id": host.entity_id,
                                "distance_km": dist})
    results.sort(key=lambda r: (r["distance_km"], r["food_id"], r["host_id"]))
    return results


def query_effect_by_food(store: AtlasStore, food_id: str,
                         context: ContextVector | None = None) -> list[str]:
    """All effect tags reachable from a food's ingredient/compound links."""
    food = store.get(food_id)
    if food is None:
        raise ValidationError(f"unknown food entity {food_id!r}")
    return sorted(reachable_effects(store, food))


def query_recipes_by_requirements(store: AtlasStore,
                                  req: RequirementVector) -> list[str]:
    """Recipes satisfying every requirement, sorted by id."""
    out = []
    for recipe in store.of_class("Recipe"):
        if _satisfies(store, recipe, req):
            out.append(recipe.entity_id)
    return out


def query_eateries(store: AtlasStore, req: RequirementVector,
                   context: ContextVector) -> list[dict]:
    """Eateries within radius with at least one qualifying menu item,
    sorted by distance."""
    results = []
    for eatery, dist in store.radius_query(context.lat, context.lon,
                                           context.radius_km, "Eatery"):
        qualifying = [mid for mid in eatery.links("Menu Item")
                      if (menu := store.get(mid)) is not None
                      and _satisfies(store, menu, req,
                                     deny_extra=context.deny_ingredients,
                                     diet_extra=context.diet_tags,
                                     budget=context.budget)]
        if qualifying:
            results.append({"eatery_id": eatery.entity_id, "distance_km": dist,
                            "menu_item_ids": sorted(qualifying)})
    results.sort(key=lambda r: (r["distance_km"], r["eatery_id"]))
    return results
