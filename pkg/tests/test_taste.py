"""Taste vector construction: unit cases, oracles, and properties."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfmlab.errors import (StructureViolation, UnknownIngredient,
                           ValidationError)
from pfmlab.taste import (TASTE_DIMENSIONS, Dish, MoleculeTable, TasteDataset,
                          TasteVector, build_taste_dataset, check_structure,
                          dish_taste_vector, ingredient_taste_vector,
                          ingredient_vectors)


def brute_force_tally(rows, ingredient_ids):
    """Independent oracle: tally (molecule, attribute) pairs reachable from
    the ingredient multiset, with multiplicity."""
    counts = dict.fromkeys(TASTE_DIMENSIONS, 0.0)
    for wanted in ingredient_ids:
        for iid, _mid, attrs in rows:
            if iid == wanted:
                for attr in attrs:
                    counts[attr] += 1.0
    return [counts[d] for d in TASTE_DIMENSIONS]


TOY_ROWS = [
    ("A", "m1", ["sweet", "sour"]),
    ("A", "m2", ["sweet"]),
    ("A", "m3", []),
    ("B", "m1", ["umami"]),
    ("B", "m2", ["salty"]),
    ("C", "m1", ["spicy"]),
    ("D", "m1", ["bitter"]),
    ("D", "m2", ["bitter"]),
]


def toy_table():
    return MoleculeTable(TOY_ROWS)


class TestIngredientVector:
    def test_unknown_ingredient_raises(self):
        with pytest.raises(UnknownIngredient):
            ingredient_taste_vector(toy_table(), "missing")

    def test_single_sweet_molecule(self):
        table = MoleculeTable([("x", "m1", ["sweet"])])
        assert ingredient_taste_vector(table, "x").as_list() == [0, 0, 1, 0, 0, 0]

    def test_toy_table_hand_count(self):
        # A has m1{sweet,sour}, m2{sweet}, m3{} -> (0,0,2,1,0,0)
        vec = ingredient_taste_vector(toy_table(), "A")
        assert vec.as_list() == [0, 0, 2, 1, 0, 0]
        assert vec.as_list() == brute_force_tally(TOY_ROWS, ["A"])

    def test_molecule_weight_hook_scales_counts(self):
        vec = ingredient_taste_vector(toy_table(), "A", molecule_weight=0.5)
        assert vec.as_list() == [0, 0, 1.0, 0.5, 0, 0]
        with pytest.raises(ValidationError):
            ingredient_taste_vector(toy_table(), "A", molecule_weight=0.0)


class TestDishVector:
    def _dish(self, ingredients):
        nutrition = {k: 0.0 for k in ("calories", "protein_g", "fat_g",
                                      "saturated_fat_g", "sugar_g", "fiber_g",
                                      "carbohydrate_g")}
        return Dish(dish_id="d", name="d", meal_type="lunch",
                    weight_class="light", ingredients=tuple(ingredients),
                    nutrition=nutrition)

    def test_single_ingredient_identity(self):
        vectors = ingredient_vectors(toy_table())
        got = dish_taste_vector(self._dish(["A"]), vectors)
        assert got.as_list() == vectors["A"].as_list()

    def test_additivity(self):
        vectors = {"X": TasteVector(umami=1), "Y": TasteVector(salty=2)}
        got = dish_taste_vector(self._dish(["X", "Y"]), vectors)
        assert got.as_list() == [1, 2, 0, 0, 0, 0]

    def test_missing_vector_names_ingredient(self):
        from pfmlab.errors import MissingIngredientVector
        with pytest.raises(MissingIngredientVector, match="Y"):
            dish_taste_vector(self._dish(["Y"]), {"X": TasteVector()})

    def test_four_ingredient_molecule_oracle(self):
        vectors = ingredient_vectors(toy_table())
        ingredients = ["A", "B", "C", "D"]
        got = dish_taste_vector(self._dish(ingredients), vectors)
        assert got.as_list() == brute_force_tally(TOY_ROWS, ingredients)

    def test_multiset_oracle_with_repeats(self):
        vectors = ingredient_vectors(toy_table())
        ingredients = ["A", "A", "D"]
        got = dish_taste_vector(self._dish(ingredients), vectors)
        assert got.as_list() == brute_force_tally(TOY_ROWS, ingredients)


class TestMoleculeTable:
    def test_duplicate_row_rejected(self):
        with pytest.raises(ValidationError, match="duplicate"):
            MoleculeTable([("a", "m1", ["sweet"]), ("a", "m1", ["sour"])])

    def test_unknown_attribute_rejected(self):
        with pytest.raises(ValidationError, match="unknown taste"):
            MoleculeTable([("a", "m1", ["savory"])])

    def test_csv_round_trip(self):
        text = ("ingredient_id,molecule_id,taste_attributes\n"
                "a,m1,sweet|sour\n"
                "a,m2,\n"
                "b,m1,umami\n")
        table = MoleculeTable.from_csv(text)
        assert ingredient_taste_vector(table, "a").as_list() == [0, 0, 1, 1, 0, 0]
        assert ingredient_taste_vector(table, "b").as_list() == [1, 0, 0, 0, 0, 0]

    def test_csv_bad_header(self):
        with pytest.raises(ValidationError, match="header"):
            MoleculeTable.from_csv("foo,bar,baz\na,m,sweet\n")

    def test_negative_component_rejected(self):
        with pytest.raises(ValidationError):
            TasteVector(sweet=-1.0)


def _recipes_for(n_per_bin=10):
    nutrition = {k: 1.0 for k in ("calories", "protein_g", "fat_g",
                                  "saturated_fat_g", "sugar_g", "fiber_g",
                                  "carbohydrate_g")}
    recipes, assignments = [], {}
    i = 0
    for meal in ("breakfast", "lunch", "dinner"):
        for wclass in ("heavy", "light"):
            for _ in range(n_per_bin):
                dish_id = f"d{i:02d}"
                recipes.append({"dish_id": dish_id, "name": dish_id,
                                "ingredients": ["A"], "nutrition": nutrition})
                assignments[dish_id] = (meal, wclass)
                i += 1
    return recipes, assignments


class TestDatasetStructure:
    def test_valid_structure_builds(self):
        recipes, assignments = _recipes_for()
        ds = build_taste_dataset(recipes, assignments, toy_table())
        assert len(ds.dishes) == 60
        for meal in ("breakfast", "lunch", "dinner"):
            meal_dishes = ds.of_meal_type(meal)
            assert len(meal_dishes) == 20
            assert sum(1 for d in meal_dishes if d.weight_class == "heavy") == 10

    def test_59_dishes_rejected(self):
        recipes, assignments = _recipes_for()
        with pytest.raises(StructureViolation, match="60"):
            build_taste_dataset(recipes[:-1], assignments, toy_table())

    def test_11_heavy_breakfasts_names_bin(self):
        recipes, assignments = _recipes_for()
        # flip one light breakfast to heavy: 11 heavy / 9 light
        light_bkfast = next(d for d, (m, c) in assignments.items()
                            if m == "breakfast" and c == "light")
        assignments[light_bkfast] = ("breakfast", "heavy")
        with pytest.raises(StructureViolation, match="breakfast.*heavy"):
            build_taste_dataset(recipes, assignments, toy_table())

    def test_bundled_dataset_structure(self, taste_dataset):
        check_structure(taste_dataset.dishes)

    def test_json_round_trip(self, taste_dataset, tmp_path):
        path = tmp_path / "taste.json"
        taste_dataset.to_json(path)
        again = TasteDataset.from_json(path)
        assert [d.to_record() for d in again.dishes] == \
            [d.to_record() for d in taste_dataset.dishes]


# property-based checks -------------------------------------------------------

@st.composite
def molecule_tables(draw):
    n_ingredients = draw(st.integers(1, 6))
    rows = []
    for i in range(n_ingredients):
        n_molecules = draw(st.integers(0, 6))
        for m in range(n_molecules):
            attrs = draw(st.lists(st.sampled_from(TASTE_DIMENSIONS),
                                  max_size=3, unique=True))
            rows.append((f"ing{i}", f"m{m}", attrs))
    return rows


@given(molecule_tables())
@settings(max_examples=60, deadline=None)
def test_nonnegativity_property(rows):
    table = MoleculeTable(rows)
    for iid in table.ingredient_ids:
        assert all(c >= 0 for c in ingredient_taste_vector(table, iid).as_list())


@given(molecule_tables(), st.data())
@settings(max_examples=60, deadline=None)
def test_molecule_oracle_property(rows, data):
    """Dish vectors equal the direct per-molecule tally for any toy table."""
    table = MoleculeTable(rows)
    ids = sorted(table.ingredient_ids)
    if not ids:
        return
    chosen = data.draw(st.lists(st.sampled_from(ids), min_size=1, max_size=5))
    vectors = ingredient_vectors(table)
    total = np.zeros(6)
    for iid in chosen:
        total += vectors[iid].as_array()
    assert total.tolist() == brute_force_tally(rows, chosen)


@given(molecule_tables(), st.data())
@settings(max_examples=40, deadline=None)
def test_permutation_invariance(rows, data):
    table = MoleculeTable(rows)
    ids = sorted(table.ingredient_ids)
    if not ids:
        return
    chosen = data.draw(st.lists(st.sampled_from(ids), min_size=1, max_size=5))
    perm = data.draw(st.permutations(chosen))
    assert brute_force_tally(rows, chosen) == brute_force_tally(rows, perm)


@given(molecule_tables(), st.data())
@settings(max_examples=40, deadline=None)
def test_additivity_over_disjoint_multisets(rows, data):
    table = MoleculeTable(rows)
    ids = sorted(table.ingredient_ids)
    if not ids:
        return
    s1 = data.draw(st.lists(st.sampled_from(ids), max_size=4))
    s2 = data.draw(st.lists(st.sampled_from(ids), max_size=4))
    combined = np.array(brute_force_tally(rows, s1 + s2))
    parts = np.array(brute_force_tally(rows, s1)) + np.array(brute_force_tally(rows, s2))
    assert np.array_equal(combined, parts)
