#!/usr/bin/env python3
"""Regenerate the bundled synthetic datasets under src/pfmlab/data/.

Emits molecules.csv (ingredient/molecule/taste-attribute rows) and
recipes.json (60 dishes: 20 per meal type, 10 heavy + 10 light each).
The data is synthetic but shaped like a small recipe corpus: ingredient
taste profiles are plausible, dish nutrition is in realistic per-serving
ranges, and each meal type covers all six taste directions.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "pfmlab" / "data"

DIMS = ("umami", "salty", "sweet", "sour", "spicy", "bitter")

# ingredient -> molecule counts per taste dimension (u, s, sw, so, sp, b)
INGREDIENTS = {
    # meats / fish (several names overlap common deny-list terms)
    "ground_beef": (4, 1, 0, 0, 0, 0),
    "beef_steak": (5, 1, 0, 0, 0, 0),
    "chicken_breast": (3, 0, 0, 0, 0, 0),
    "turkey_breast": (2, 1, 0, 0, 0, 0),
    "ham": (3, 3, 0, 0, 0, 0),
    "lamb_shoulder": (4, 1, 0, 0, 0, 0),
    "pork_sausage": (3, 3, 0, 0, 1, 0),
    "pork_rib": (4, 2, 0, 0, 0, 0),
    "salmon": (3, 1, 0, 0, 0, 0),
    "cod": (2, 0, 0, 0, 0, 0),
    "shrimp": (3, 1, 0, 0, 0, 0),
    "anchovy": (5, 5, 0, 0, 0, 0),
    # nuts / seeds
    "almonds": (0, 0, 1, 0, 0, 1),
    "walnuts": (0, 0, 0, 0, 0, 2),
    "pecans": (0, 0, 2, 0, 0, 1),
    "pistachios": (0, 0, 1, 0, 0, 1),
    "peanuts": (1, 0, 1, 0, 0, 1),
    "sesame_seeds": (0, 0, 1, 0, 0, 1),
    "sunflower_seeds": (0, 0, 1, 0, 0, 0),
    # umami-forward
    "parmesan": (5, 3, 0, 0, 0, 0),
    "cheddar": (3, 2, 0, 0, 0, 0),
    "mushroom": (4, 0, 0, 0, 0, 1),
    "soy_sauce": (5, 4, 0, 0, 0, 0),
    "miso_paste": (5, 3, 0, 0, 0, 0),
    "seaweed": (4, 2, 0, 0, 0, 1),
    "tomato": (3, 0, 1, 1, 0, 0),
    "tofu": (2, 0, 0, 0, 0, 0),
    "tempeh": (2, 0, 0, 0, 0, 1),
    "egg": (1, 0, 0, 0, 0, 0),
    # salty-forward
    "sea_salt": (0, 6, 0, 0, 0, 0),
    "feta": (1, 4, 0, 1, 0, 0),
    "olives": (0, 3, 0, 0, 0, 2),
    "capers": (0, 4, 0, 2, 0, 0),
    "pickles": (0, 2, 0, 4, 0, 0),
    # sweet-forward
    "honey": (0, 0, 6, 0, 0, 0),
    "maple_syrup": (0, 0, 5, 0, 0, 0),
    "banana": (0, 0, 4, 0, 0, 0),
    "mango": (0, 0, 4, 1, 0, 0),
    "raisins": (0, 0, 4, 0, 0, 0),
    "strawberry": (0, 0, 3, 1, 0, 0),
    "blueberries": (0, 0, 3, 1, 0, 0),
    "apple": (0, 0, 3, 1, 0, 0),
    "dark_chocolate": (0, 0, 3, 0, 0, 3),
    "milk": (0, 0, 2, 0, 0, 0),
    # sour-forward
    "lemon": (0, 0, 0, 5, 0, 0),
    "lime": (0, 0, 0, 4, 0, 1),
    "vinegar": (0, 0, 0, 5, 0, 0),
    "yogurt": (0, 0, 1, 3, 0, 0),
    "sauerkraut": (0, 1, 0, 4, 0, 0),
    "sourdough_bread": (0, 1, 1, 2, 0, 0),
    # spicy-forward
    "chili_pepper": (0, 0, 0, 0, 5, 0),
    "cayenne": (0, 0, 0, 0, 5, 0),
    "jalapeno": (0, 0, 0, 0, 4, 0),
    "horseradish": (0, 0, 0, 0, 4, 1),
    "sriracha": (0, 1, 1, 0, 4, 0),
    "black_pepper": (0, 0, 0, 0, 3, 1),
    "ginger": (0, 0, 1, 0, 2, 0),
    # bitter-forward
    "coffee": (0, 0, 0, 0, 0, 5),
    "matcha": (1, 0, 0, 0, 0, 4),
    "cocoa_powder": (0, 0, 1, 0, 0, 4),
    "kale": (0, 0, 0, 0, 0, 3),
    "arugula": (0, 0, 0, 0, 1, 3),
    "brussels_sprouts": (0, 0, 1, 0, 0, 3),
    "grapefruit": (0, 0, 1, 2, 0, 3),
    "spinach": (0, 0, 0, 0, 0, 2),
    # bases
    "rice": (0, 0, 1, 0, 0, 0),
    "pasta": (0, 0, 1, 0, 0, 0),
    "quinoa": (0, 0, 0, 0, 0, 1),
    "oats": (0, 0, 1, 0, 0, 0),
    "bread": (0, 1, 1, 0, 0, 0),
    "tortilla": (0, 1, 1, 0, 0, 0),
    "potato": (1, 0, 0, 0, 0, 0),
    "butter": (0, 1, 1, 0, 0, 0),
    "cream_cheese": (0, 1, 1, 1, 0, 0),
    "olive_oil": (0, 0, 0, 0, 1, 1),
    "onion": (1, 0, 2, 0, 1, 0),
    "garlic": (1, 0, 0, 0, 1, 0),
    "avocado": (1, 0, 0, 0, 0, 0),
    "cucumber": (0, 0, 1, 0, 0, 0),
    "lettuce": (0, 0, 0, 0, 0, 1),
    "bell_pepper": (0, 0, 2, 0, 1, 0),
    "zucchini": (1, 0, 1, 0, 0, 0),
    "black_beans": (1, 0, 0, 0, 0, 0),
    "chickpeas": (1, 0, 1, 0, 0, 0),
    "lentils": (1, 0, 0, 0, 0, 1),
}

# ingredients whose first molecule carries two attributes (the counts
# above are preserved; one molecule just covers two dimensions at once)
PAIRED = {
    "tomato": ("umami", "sweet"),
    "feta": ("salty", "sour"),
    "grapefruit": ("bitter", "sour"),
    "sriracha": ("spicy", "sweet"),
    "sourdough_bread": ("sour", "salty"),
}

# ingredients that also list one attribute-free molecule
WITH_BLANK = ["rice", "potato", "cucumber", "milk", "oats", "lettuce", "egg", "tofu"]

# (dish name, weight_class, ingredients); 10 heavy then 10 light per meal.
# Each meal type covers all six taste directions with strongly dominant
# dishes so that planted context effects are recoverable from the stream.
DISHES = {
    "breakfast": [
        ("mushroom parmesan omelette", "heavy", ["mushroom", "egg", "parmesan"]),
        ("steak and eggs", "heavy", ["beef_steak", "egg", "mushroom"]),
        ("ham feta scramble", "heavy", ["ham", "feta", "egg", "sea_salt"]),
        ("savory olive bake", "heavy", ["olives", "feta", "bread", "sea_salt"]),
        ("buttermilk pancakes", "heavy", ["bread", "maple_syrup", "honey", "milk"]),
        ("banana french toast", "heavy", ["bread", "banana", "honey", "milk"]),
        ("lemon yogurt crepes", "heavy", ["sourdough_bread", "yogurt", "lemon", "egg"]),
        ("chorizo scramble", "heavy", ["pork_sausage", "egg", "jalapeno", "cayenne"]),
        ("fiery huevos rancheros", "heavy", ["egg", "chili_pepper", "sriracha", "tortilla"]),
        ("mocha waffles", "heavy", ["bread", "coffee", "dark_chocolate", "cocoa_powder"]),
        ("morning miso soup", "light", ["miso_paste", "tofu", "seaweed"]),
        ("tomato mushroom egg cup", "light", ["tomato", "egg", "mushroom"]),
        ("salted caper toast", "light", ["capers", "cream_cheese", "bread", "sea_salt"]),
        ("oatmeal with raisins", "light", ["oats", "raisins", "almonds", "milk"]),
        ("orchard fruit plate", "light", ["mango", "apple", "strawberry"]),
        ("lemon yogurt parfait", "light", ["yogurt", "lemon", "blueberries"]),
        ("tangy kraut toast", "light", ["sauerkraut", "bread", "lime"]),
        ("jalapeno ginger juice", "light", ["ginger", "jalapeno", "apple"]),
        ("matcha kale smoothie", "light", ["matcha", "kale", "banana"]),
        ("grapefruit kale bowl", "light", ["grapefruit", "kale", "walnuts"]),
    ],
    "lunch": [
        ("mushroom swiss burger", "heavy", ["ground_beef", "bread", "mushroom", "parmesan"]),
        ("chicken parm sandwich", "heavy", ["chicken_breast", "parmesan", "tomato", "bread"]),
        ("turkey reuben", "heavy", ["turkey_breast", "sauerkraut", "bread", "sea_salt"]),
        ("fish and chips", "heavy", ["cod", "potato", "sea_salt", "capers"]),
        ("peanut banana melt", "heavy", ["peanuts", "banana", "honey", "bread"]),
        ("mango pecan rice", "heavy", ["rice", "mango", "pecans", "honey"]),
        ("sour kraut sandwich", "heavy", ["pickles", "sauerkraut", "bread", "lemon"]),
        ("spicy miso ramen", "heavy", ["pasta", "miso_paste", "chili_pepper", "cayenne"]),
        ("jalapeno popper melt", "heavy", ["jalapeno", "cayenne", "cream_cheese", "tortilla"]),
        ("coffee rubbed pork ribs", "heavy", ["pork_rib", "coffee", "cocoa_powder"]),
        ("salmon sushi rolls", "light", ["rice", "seaweed", "salmon", "soy_sauce"]),
        ("miso tofu bowl", "light", ["tofu", "miso_paste", "mushroom"]),
        ("greek salad", "light", ["lettuce", "feta", "olives", "capers"]),
        ("salted anchovy plate", "light", ["anchovy", "olives", "sea_salt", "lettuce"]),
        ("orchard fruit cup", "light", ["mango", "apple", "banana"]),
        ("cucumber lemon gazpacho", "light", ["cucumber", "yogurt", "lemon", "vinegar"]),
        ("lime ceviche", "light", ["cod", "lime", "lemon", "onion"]),
        ("spicy chickpea wrap", "light", ["chickpeas", "tortilla", "sriracha", "jalapeno"]),
        ("bitter greens salad", "light", ["kale", "arugula", "walnuts", "olive_oil"]),
        ("arugula citrus salad", "light", ["arugula", "grapefruit", "quinoa", "sunflower_seeds", "spinach"]),
    ],
    "dinner": [
        ("hearty beef stew", "heavy", ["ground_beef", "potato", "mushroom", "soy_sauce"]),
        ("ribeye steak dinner", "heavy", ["beef_steak", "butter", "mushroom", "parmesan"]),
        ("spaghetti bolognese", "heavy", ["pasta", "ground_beef", "tomato", "parmesan"]),
        ("salt crusted ham roast", "heavy", ["ham", "sea_salt", "capers", "potato"]),
        ("anchovy butter pasta", "heavy", ["anchovy", "pasta", "butter", "sea_salt"]),
        ("honey glazed pork ribs", "heavy", ["pork_rib", "honey", "maple_syrup"]),
        ("maple glazed chicken", "heavy", ["chicken_breast", "maple_syrup", "honey", "rice"]),
        ("vinegar pot roast", "heavy", ["ground_beef", "vinegar", "sauerkraut", "potato"]),
        ("five alarm chili", "heavy", ["ground_beef", "black_beans", "chili_pepper", "cayenne", "jalapeno"]),
        ("lamb curry", "heavy", ["lamb_shoulder", "chili_pepper", "cayenne", "rice"]),
        ("miso glazed cod", "light", ["cod", "miso_paste", "seaweed", "mushroom"]),
        ("sesame tofu stir fry", "light", ["tofu", "soy_sauce", "mushroom", "sesame_seeds"]),
        ("mediterranean plate", "light", ["feta", "olives", "capers", "cucumber"]),
        ("honey berry bowl", "light", ["quinoa", "blueberries", "banana", "honey", "pistachios"]),
        ("lemon herb salmon", "light", ["salmon", "lemon", "yogurt"]),
        ("lime tempeh tacos", "light", ["tempeh", "tortilla", "lime", "vinegar"]),
        ("green curry vegetables", "light", ["zucchini", "chili_pepper", "jalapeno", "rice"]),
        ("sriracha tofu cups", "light", ["tofu", "black_pepper", "sriracha", "lettuce"]),
        ("roasted brussels bowl", "light", ["brussels_sprouts", "kale", "quinoa", "walnuts"]),
        ("spinach grapefruit salad", "light", ["spinach", "grapefruit", "arugula", "olive_oil"]),
    ],
}

CAL_RANGES = {
    ("breakfast", "heavy"): (520, 780), ("breakfast", "light"): (240, 420),
    ("lunch", "heavy"): (620, 920), ("lunch", "light"): (330, 520),
    ("dinner", "heavy"): (650, 1000), ("dinner", "light"): (380, 560),
}


def molecule_rows():
    rows = []
    for ingredient in sorted(INGREDIENTS):
        counts = dict(zip(DIMS, INGREDIENTS[ingredient]))
        seq = 0
        if ingredient in PAIRED:
            a, b = PAIRED[ingredient]
            assert counts[a] >= 1 and counts[b] >= 1
            counts[a] -= 1
            counts[b] -= 1
            seq += 1
            rows.append((ingredient, f"{ingredient}_m{seq:02d}", f"{a}|{b}"))
        for dim in DIMS:
            for _ in range(counts[dim]):
                seq += 1
                rows.append((ingredient, f"{ingredient}_m{seq:02d}", dim))
        if ingredient in WITH_BLANK:
            seq += 1
            rows.append((ingredient, f"{ingredient}_m{seq:02d}", ""))
    return rows


def nutrition_for(meal, wclass, ingredients, rng):
    lo, hi = CAL_RANGES[(meal, wclass)]
    calories = float(rng.integers(lo, hi + 1))
    meaty = any(i in ingredients for i in (
        "ground_beef", "beef_steak", "chicken_breast", "turkey_breast", "ham",
        "lamb_shoulder", "pork_sausage", "pork_rib", "salmon", "cod", "shrimp",
        "anchovy", "egg", "tofu", "tempeh", "lentils", "black_beans", "chickpeas"))
    sweet = any(i in ingredients for i in (
        "honey", "maple_syrup", "banana", "mango", "raisins", "strawberry",
        "blueberries", "apple", "dark_chocolate"))
    protein = round(calories * (0.055 if meaty else 0.022) * rng.uniform(0.8, 1.2), 1)
    fat = round(calories * 0.04 * rng.uniform(0.6, 1.3), 1)
    sat_fat = round(fat * rng.uniform(0.2, 0.45), 1)
    sugar = round((28 if sweet else 6) * rng.uniform(0.6, 1.4), 1)
    fiber = round(rng.uniform(1.5, 11.0), 1)
    carbs = round(max(calories - 4 * protein - 9 * fat, 40.0) / 4.0, 1)
    return {
        "calories": calories, "protein_g": protein, "fat_g": fat,
        "saturated_fat_g": sat_fat, "sugar_g": sugar, "fiber_g": fiber,
        "carbohydrate_g": carbs,
    }


def default_profiles():
    """Five lifestyle profiles with distinct planted context effects.

    Temperature levels bias taste directions (weight 3, rotating per
    person so all six directions appear); stress level biases the
    heavy/light dish mix, toward indulgence for palatable seekers and
    toward lighter/skipped meals for appetite suppressors.
    """
    dims = list(DIMS)
    homes = [(33.684, -117.826), (33.702, -117.789), (33.655, -117.843),
             (33.669, -117.801), (33.721, -117.812)]
    stress_priors = [
        {"low": 0.45, "medium": 0.30, "high": 0.25},
        {"low": 0.30, "medium": 0.30, "high": 0.40},
        {"low": 0.50, "medium": 0.30, "high": 0.20},
        {"low": 0.35, "medium": 0.30, "high": 0.35},
        {"low": 0.55, "medium": 0.30, "high": 0.15},
    ]
    modes = ["palatable_seeking", "palatable_seeking", "appetite_suppressing",
             "appetite_suppressing", "palatable_seeking"]
    profiles = []
    meal_rate, steps = 2.95, 12
    meal_prob = meal_rate / steps
    rest = 1.0 - meal_prob
    row = {"meal": meal_prob, "activity": rest * 0.9,
           "stress_report": rest * 0.05, "weather_report": rest * 0.05}
    for p in range(5):
        rules = []
        for si, stress in enumerate(("low", "medium", "high")):
            for ti, temp in enumerate(("cool", "mild", "hot")):
                direction = dims[(4 * si + ti + p) % 6]
                rules.append({"stress": stress, "temperature": temp, "meal_type": "*",
                              "class_weights": {}, "taste_bias": {direction: 6.0}})
        if modes[p] == "palatable_seeking":
            rules.append({"stress": "medium", "temperature": "*", "meal_type": "*",
                          "class_weights": {"heavy": 1.5}, "taste_bias": {}})
            rules.append({"stress": "high", "temperature": "*", "meal_type": "*",
                          "class_weights": {"heavy": 3.0}, "taste_bias": {}})
        else:
            rules.append({"stress": "medium", "temperature": "*", "meal_type": "*",
                          "class_weights": {"light": 1.5}, "taste_bias": {}})
            rules.append({"stress": "high", "temperature": "*", "meal_type": "*",
                          "class_weights": {"light": 2.0}, "taste_bias": {}})
        profiles.append({
            "person_id": f"user{p + 1}",
            "transition_matrix": {k: dict(row) for k in
                                  ("activity", "meal", "stress_report", "weather_report")},
            "meal_rate": meal_rate,
            "stress_prior": stress_priors[p],
            "temperature_model": {"mean_c": 19.0, "amplitude_c": 10.0,
                                  "noise_sd_c": 3.5, "phase_day": 91.0},
            "context_effect": rules,
            "stress_response_mode": modes[p],
            "skip_probability": 0.4 if modes[p] == "appetite_suppressing" else 0.0,
            "home": {"lat": homes[p][0], "lon": homes[p][1]},
            "steps_per_day": steps,
            "wake_hour": 7,
            "sleep_hour": 23,
        })
    return profiles


def main():
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    rows = molecule_rows()
    lines = ["ingredient_id,molecule_id,taste_attributes"]
    lines += [f"{a},{b},{c}" for a, b, c in rows]
    (DATA_DIR / "molecules.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    used = {i for dishes in DISHES.values() for _, _, ings in dishes for i in ings}
    unknown = used - set(INGREDIENTS)
    if unknown:
        raise SystemExit(f"dishes reference unknown ingredients: {sorted(unknown)}")

    rng = np.random.Generator(np.random.PCG64(20240601))
    recipes = []
    for meal in ("breakfast", "lunch", "dinner"):
        specs = DISHES[meal]
        assert len(specs) == 20
        assert sum(1 for _, c, _ in specs if c == "heavy") == 10
        for idx, (name, wclass, ingredients) in enumerate(specs, start=1):
            recipes.append({
                "dish_id": f"{meal[:2]}_{idx:02d}_{name.replace(' ', '_')}",
                "name": name,
                "meal_type": meal,
                "weight_class": wclass,
                "ingredients": ingredients,
                "nutrition": nutrition_for(meal, wclass, ingredients, rng),
            })
    (DATA_DIR / "recipes.json").write_text(
        json.dumps({"recipes": recipes}, indent=1, sort_keys=True) + "\n",
        encoding="utf-8")
    (DATA_DIR / "profiles.json").write_text(
        json.dumps({"profiles": default_profiles()}, indent=1, sort_keys=True) + "\n",
        encoding="utf-8")
    print(f"wrote {len(rows)} molecule rows, {len(recipes)} recipes, 5 profiles")


if __name__ == "__main__":
    main()
