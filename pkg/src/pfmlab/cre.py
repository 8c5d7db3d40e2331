"""Context Recognition Engine: contextual food-option lists.

Two modes. ``random_sample`` draws n dishes uniformly without
replacement from the recipe dataset (seeded, deterministic); this is the
desk-scale stand-in for a full geospatial lookup. ``geospatial`` returns
the n nearest qualifying menu items from an atlas, all within the
context radius. Options are enriched with nutrition, ingredients, a
taste vector and the distance (0 in random mode).

Personal "avoid" directives and the context deny-list both exclude
candidates before sampling/ranking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .atlas import AtlasStore, ContextVector, EFFECT_VOCABULARY, reachable_effects
from .errors import ValidationError
from .personal import PersonalVector
from .rng import derive_stream
from .taste import TasteDataset

_ATLAS_NUTRITION_MAP = {
    "Calories": "calories", "Protein": "protein_g", "Fat": "fat_g",
    "Saturated Fat": "saturated_fat_g", "Sugar": "sugar_g", "Fiber": "fiber_g",
    "Carbohydrate": "carbohydrate_g",
}


@dataclass(frozen=True)
class Option:
    option_id: str
    name: str
    source: str                 # "recipe_dataset" or the hosting entity id
    distance_km: float
    nutrition: dict
    ingredient_ids: tuple
    ingredient_names: tuple
    taste: tuple                # six components, canonical order
    health_effects: tuple = ()

    def taste_array(self) -> np.ndarray:
        return np.array(self.taste, dtype=float)

    def to_record(self) -> dict:
        return {"option_id": self.option_id, "name": self.name,
                "source": self.source, "distance_km": self.distance_km,
                "nutrition": dict(self.nutrition),
                "ingredient_ids": list(self.ingredient_ids),
                "ingredient_names": list(self.ingredient_names),
                "taste": list(self.taste),
                "health_effects": list(self.health_effects)}

    @classmethod
    def from_record(cls, rec: dict) -> "Option":
        return cls(option_id=rec["option_id"], name=rec["name"],
                   source=rec["source"], distance_km=float(rec["distance_km"]),
                   nutrition=dict(rec["nutrition"]),
                   ingredient_ids=tuple(rec["ingredient_ids"]),
                   ingredient_names=tuple(rec["ingredient_names"]),
                   taste=tuple(float(x) for x in rec["taste"]),
                   health_effects=tuple(rec.get("health_effects", ())))


@dataclass
class OptionList:
    options: list
    provenance: str             # "random_sample" or "geospatial"
    requested_n: int
    short: bool = False         # fewer candidates existed than requested

    def ids(self) -> list[str]:
        return [o.option_id for o in self.options]

    def to_record(self) -> dict:
        return {"provenance": self.provenance, "requested_n": self.requested_n,
                "short": self.short,
                "options": [o.to_record() for o in self.options]}

    @classmethod
    def from_record(cls, rec: dict) -> "OptionList":
        return cls(options=[Option.from_record(r) for r in rec["options"]],
                   provenance=rec["provenance"],
                   requested_n=int(rec["requested_n"]), short=bool(rec["short"]))


def _dish_option(dish, effects=()) -> Option:
    return Option(option_id=dish.dish_id, name=dish.name, source="recipe_dataset",
                  distance_km=0.0, nutrition=dict(dish.nutrition),
                  ingredient_ids=tuple(dish.ingredients),
                  ingredient_names=tuple(i.replace("_", " ") for i in dish.ingredients),
                  taste=tuple(dish.taste.as_list()), health_effects=tuple(effects))


def _blocked(names, terms) -> bool:
    lowered = [n.lower() for n in names]
    return any(t.lower() in name for t in terms for name in lowered)


def cre_options(personal: PersonalVector | None, context: ContextVector | None,
                n: int = 20, mode: str = "random_sample",
                taste_dataset: TasteDataset | None = None,
                atlas: AtlasStore | None = None,
                seed: int = 0, query_label: str = "") -> OptionList:
    """Produce the option list for one recommendation query.

    ``query_label`` keys the derived random stream so repeated queries
    with the same (seed, label) are identical.
    """
    if mode not in ("random_sample", "geospatial"):
        raise ValidationError(f"unknown CRE mode {mode!r}")
    deny = list(context.deny_ingredients) if context else []
    if personal is not None:
        deny.extend(personal.avoid_terms())

    if mode == "random_sample":
        if taste_dataset is None:
            raise ValidationError("random_sample mode needs a taste dataset")
        pool = [d for d in sorted(taste_dataset.dishes, key=lambda d: d.dish_id)
                if not _blocked([i.replace("_", " ") for i in d.ingredients], deny)]
        rng = derive_stream(seed, "cre", query_label)
        take = min(n, len(pool))
        idx = rng.choice(len(pool), size=take, replace=False) if pool else []
        options = [_dish_option(pool[int(i)]) for i in idx]
        return OptionList(options=options, provenance="random_sample",
                          requested_n=n, short=take < n)

    if atlas is None or context is None:
        raise ValidationError("geospatial mode needs an atlas and a context")
    candidates = []
    for eatery, dist in atlas.radius_query(context.lat, context.lon,
                                           context.radius_km, "Eatery"):
        for mid in eatery.links("Menu Item"):
            menu = atlas.get(mid)
            if menu is None:
                continue
            names = []
            ing_ids = menu.links("Ingredient")
            for iid in ing_ids:
                ing = atlas.get(iid)
                names.append(str(ing.attributes.get("Name", iid)) if ing else iid)
            if _blocked(names, deny):
                continue
            diets = set(menu.attributes.get("Suitable for Diet", []))
            if context.diet_tags and not set(context.diet_tags) <= diets:
                continue
            cost = menu.attributes.get("Cost")
            if (context.budget is not None and cost is not None
                    and float(cost) > context.budget):
                continue
            candidates.append((dist, mid, menu, eatery, tuple(names), tuple(ing_ids)))
    candidates.sort(key=lambda c: (c[0], c[1]))
    options = []
    for dist, mid, menu, eatery, names, ing_ids in candidates[:n]:
        raw_nut = {}
        link = menu.links("Nutrition")
        if link:
            nut = atlas.get(link[0])
            if nut is not None:
                raw_nut = nut.attributes
        nutrition = {canon: float(raw_nut.get(src, 0.0))
                     for src, canon in _ATLAS_NUTRITION_MAP.items()}
        taste = menu.attributes.get("Taste", [0.0] * 6)
        options.append(Option(
            option_id=mid, name=str(menu.attributes.get("Name", mid)),
            source=eatery.entity_id, distance_km=dist, nutrition=nutrition,
            ingredient_ids=ing_ids, ingredient_names=names,
            taste=tuple(float(x) for x in taste),
            health_effects=tuple(sorted(reachable_effects(atlas, menu)))))
    return OptionList(options=options, provenance="geospatial", requested_n=n,
                      short=len(options) < n)


# synthetic atlas ------------------------------------------------------------

_MEATY = {"ground_beef", "beef_steak", "chicken_breast", "turkey_breast", "ham",
          "lamb_shoulder", "pork_sausage", "pork_rib", "salmon", "cod", "shrimp",
          "anchovy"}
_ANIMAL = _MEATY | {"egg", "milk", "butter", "yogurt", "feta", "parmesan",
                    "cream_cheese", "honey"}
_GLUTEN = {"bread", "sourdough_bread", "pasta", "tortilla", "oats"}


def _diet_tags(ingredients) -> list[str]:
    tags = []
    ings = set(ingredients)
    if not ings & _MEATY:
        tags.append("vegetarian")
        if not ings & _ANIMAL:
            tags.append("vegan")
    if not ings & _GLUTEN:
        tags.append("gluten_free")
    return tags


def _nutrition_record(nid: str, nutrition: dict, serving: str = "1 serving") -> dict:
    return {"entity_id": nid, "entity_class": "Nutrition",
            "contributor_id": "synthetic",
            "attributes": {
                "Calories": float(nutrition["calories"]),
                "Carbohydrate": float(nutrition["carbohydrate_g"]),
                "Cholesterol": 0.0,
                "Fat": float(nutrition["fat_g"]),
                "Fiber": float(nutrition["fiber_g"]),
                "Protein": float(nutrition["protein_g"]),
                "Saturated Fat": float(nutrition["saturated_fat_g"]),
                "Serving Size": serving,
                "Sugar": float(nutrition["sugar_g"]),
                "Trans Fat": 0.0,
                "Unsaturated Fat": round(float(nutrition["fat_g"])
                                         - float(nutrition["saturated_fat_g"]), 2),
            }}


def build_synthetic_atlas(taste_dataset: TasteDataset, seed: int = 0,
                          n_eateries: int = 40, menu_per_eatery: int = 3,
                          n_stores: int = 15, food_per_store: int = 2,
                          n_recipes: int = 30, n_supplements: int = 5,
                          center: tuple[float, float] = (33.68, -117.82),
                          spread_deg: float = 0.45) -> list[dict]:
    """Deterministic valid atlas records derived from the dish dataset."""
    rng = derive_stream(seed, "synthetic-atlas")
    records: list[dict] = []

    for tag in EFFECT_VOCABULARY:
        records.append({"entity_id": tag, "entity_class": "HealthEffect",
                        "contributor_id": "synthetic",
                        "attributes": {"Health Benefits": tag.replace("_", " "),
                                       "Misconceptions": "none recorded",
                                       "Symptoms": "not applicable"}})

    compounds = [f"cmp_{i:02d}" for i in range(1, 21)]
    for cid in compounds:
        effs = sorted(rng.choice(EFFECT_VOCABULARY,
                                 size=int(rng.integers(0, 3)), replace=False).tolist())
        records.append({"entity_id": cid, "entity_class": "Compound",
                        "contributor_id": "synthetic",
                        "attributes": {
                            "BioChem Interaction": "inert", "BioChem Similarity": "low",
                            "Chemical Role": "flavor", "Composition": "organic",
                            "Description": f"synthetic compound {cid}",
                            "Genetic Expression": "none", "inChI": f"InChI=1S/{cid}",
                            "inChIKey": cid.upper(), "IUPAC Name": cid,
                            "Molecular Formula": "C6H12O6",
                            "Molecular Function": "taste carrier",
                            "Molecular Weight": float(rng.integers(80, 400)),
                            "Name": cid, "Potential Use": "research",
                            "Proprietary Name": cid, "Smiles": "C1CCCCC1",
                            "Subcellular Location": "cytosol",
                            "Taxonomic Range": "plants", "Health Effect": effs,
                        }})

    ingredient_ids = sorted({i for d in taste_dataset.dishes for i in d.ingredients})
    for iid in ingredient_ids:
        effs = sorted(rng.choice(EFFECT_VOCABULARY,
                                 size=int(rng.integers(0, 3)), replace=False).tolist())
        comps = sorted(rng.choice(compounds,
                                  size=int(rng.integers(0, 3)), replace=False).tolist())
        records.append({"entity_id": f"ing_{iid}", "entity_class": "Ingredient",
                        "contributor_id": "synthetic",
                        "attributes": {
                            "Category": "staple", "Cost": float(rng.integers(1, 9)),
                            "Description": f"synthetic ingredient {iid}",
                            "Name": iid.replace("_", " "),
                            "Suitable for Diet": _diet_tags([iid]),
                            "Compound": comps, "Health Effect": effs,
                            "Nutrition": [],
                        }})

    dishes = sorted(taste_dataset.dishes, key=lambda d: d.dish_id)

    def place():
        return (round(center[0] + float(rng.uniform(-spread_deg, spread_deg)), 6),
                round(center[1] + float(rng.uniform(-spread_deg, spread_deg)), 6))

    def pick_dishes(k):
        idx = rng.choice(len(dishes), size=k, replace=False)
        return [dishes[int(i)] for i in idx]

    for e in range(1, n_eateries + 1):
        eid = f"eat_{e:03d}"
        lat, lon = place()
        menu_ids = []
        for m, dish in enumerate(pick_dishes(menu_per_eatery), start=1):
            mid = f"menu_{eid}_{m}"
            nid = f"nut_{mid}"
            records.append(_nutrition_record(nid, dish.nutrition))
            effs = sorted(rng.choice(EFFECT_VOCABULARY,
                                     size=int(rng.integers(0, 2)), replace=False).tolist())
            records.append({"entity_id": mid, "entity_class": "MenuItem",
                            "contributor_id": "synthetic",
                            "attributes": {
                                "Category": dish.meal_type, "Description": dish.name,
                                "Name": dish.name, "Serving Size": "1 plate",
                                "Suitable for Diet": _diet_tags(dish.ingredients),
                                "Ingredient": [f"ing_{i}" for i in dish.ingredients],
                                "Health Effect": effs, "Nutrition": [nid],
                                "Cost": float(rng.integers(8, 31)),
                                "Taste": dish.taste.as_list(),
                            }})
            menu_ids.append(mid)
        records.append({"entity_id": eid, "entity_class": "Eatery",
                        "contributor_id": "synthetic",
                        "attributes": {
                            "Address": f"{e} Synthetic Ave", "Cuisine": "fusion",
                            "Description": f"synthetic eatery {e}",
                            "Drive Thru": bool(rng.integers(0, 2)),
                            "Email": f"{eid}@example.test", "Item Price": "$$",
                            "lat": lat, "lon": lon, "Logo": f"{eid}.png",
                            "Name": f"Eatery {e}", "Open Hours": "8-22",
                            "Payment Method": "card", "Phone": f"+1-555-{e:04d}",
                            "Photo": f"{eid}.jpg", "Price Range": "$8-$30",
                            "Reservation": bool(rng.integers(0, 2)),
                            "Review": "solid", "Star Rating": float(rng.integers(2, 6)),
                            "Website": f"https://{eid}.example.test",
                            "Menu Item": menu_ids,
                        }})

    supplement_ids = []
    for s in range(1, n_supplements + 1):
        sid = f"supp_{s:02d}"
        nid = f"nut_{sid}"
        ing = ingredient_ids[int(rng.integers(0, len(ingredient_ids)))]
        records.append(_nutrition_record(nid, {
            "calories": 15.0, "protein_g": 1.0, "fat_g": 0.0,
            "saturated_fat_g": 0.0, "sugar_g": 1.0, "fiber_g": 0.5,
            "carbohydrate_g": 2.0}, serving="1 capsule"))
        records.append({"entity_id": sid, "entity_class": "DietarySupplement",
                        "contributor_id": "synthetic",
                        "attributes": {
                            "Active Ingredients": ing.replace("_", " "),
                            "Category": "supplement", "Cost": 19.0,
                            "Description": f"synthetic supplement {s}",
                            "Guidelines": "take daily", "Legal Status": "otc",
                            "Manufacturer": "SynthCo",
                            "Maximum Intake": "2/day",
                            "Mechanism of Action": "unknown",
                            "Medicine System": "conventional",
                            "Name": f"Supplement {s}", "Proprietary Name": sid,
                            "Recognizing Authority": "none",
                            "Recommended Intake": "1/day",
                            "Safety Consideration": "none",
                            "Suitable for Diet": ["vegetarian"],
                            "Target Population": "adults",
                            "Ingredient": [f"ing_{ing}"],
                            "Health Effect": [], "Nutrition": [nid],
                        }})
        supplement_ids.append(sid)

    for s in range(1, n_stores + 1):
        sid = f"store_{s:03d}"
        lat, lon = place()
        food_ids = []
        for f, dish in enumerate(pick_dishes(food_per_store), start=1):
            fid = f"food_{sid}_{f}"
            nid = f"nut_{fid}"
            records.append(_nutrition_record(nid, dish.nutrition))
            records.append({"entity_id": fid, "entity_class": "FoodItem",
                            "contributor_id": "synthetic",
                            "attributes": {
                                "Category": "packaged", "Description": dish.name,
                                "Distributor": "SynthCo", "Name": dish.name,
                                "Net Weight": "400 g", "Serving Size": "1 pack",
                                "Suitable for Diet": _diet_tags(dish.ingredients),
                                "Ingredient": [f"ing_{i}" for i in dish.ingredients],
                                "Health Effect": [], "Nutrition": [nid],
                                "Taste": dish.taste.as_list(),
                            }})
            food_ids.append(fid)
        supp = ([supplement_ids[int(rng.integers(0, len(supplement_ids)))]]
                if supplement_ids else [])
        records.append({"entity_id": sid, "entity_class": "Store",
                        "contributor_id": "synthetic",
                        "attributes": {
                            "Address": f"{s} Market St",
                            "Description": f"synthetic store {s}",
                            "Drive Thru": False, "Email": f"{sid}@example.test",
                            "Item Price": "$", "lat": lat, "lon": lon,
                            "Logo": f"{sid}.png", "Name": f"Store {s}",
                            "Open Hours": "7-23", "Payment Method": "card",
                            "Phone": f"+1-556-{s:04d}", "Photo": f"{sid}.jpg",
                            "Price Range": "$2-$40", "Review": "fine",
                            "Star Rating": float(rng.integers(2, 6)),
                            "Website": f"https://{sid}.example.test",
                            "Food Item": food_ids,
                            "Dietary Supplement": supp,
                        }})

    for r, dish in enumerate(pick_dishes(min(n_recipes, len(dishes))), start=1):
        rid = f"rcp_{r:03d}"
        nid = f"nut_{rid}"
        records.append(_nutrition_record(nid, dish.nutrition))
        records.append({"entity_id": rid, "entity_class": "Recipe",
                        "contributor_id": "synthetic",
                        "attributes": {
                            "Category": dish.meal_type, "Cook Time": "25 min",
                            "Cooking Method": "stove", "Copyright Holder": "SynthCo",
                            "Copyright Notice": "CC0", "Copyright Year": 2024,
                            "Cuisine": "fusion", "Date Created": "2024-01-01",
                            "Date Modified": "2024-01-02",
                            "Description": dish.name, "Instructions": "combine and cook",
                            "Name": dish.name, "Photos": f"{rid}.jpg",
                            "Prep Time": "10 min", "Reviews": "good",
                            "Star Rating": float(rng.integers(2, 6)),
                            "Steps": "1. combine 2. cook",
                            "Suitable for Diet": _diet_tags(dish.ingredients),
                            "Total Time": "35 min",
                            "Website": f"https://recipes.example.test/{rid}",
                            "Yield": "2 servings",
                            "Ingredient": [f"ing_{i}" for i in dish.ingredients],
                            "Nutrition": [nid],
                        }})
    return records
