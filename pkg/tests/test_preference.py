"""Preference profiles, top-k prediction, and the evaluation harness."""

import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfmlab.errors import InsufficientData, NoTrainingData
from pfmlab.lifelog import default_profiles, generate
from pfmlab.preference import (CONTEXT_MODES, ContextBin, MealSample,
                               build_profiles, cosine, evaluate, meal_samples,
                               predict_top_k, volume_sweep)
from pfmlab.taste import Dish, NUTRITION_FIELDS


def sample(dish_id, taste, meal="lunch", stress="low", temp="mild", t=0):
    return MealSample(person_id="p", dish_id=dish_id, meal_type=meal,
                      stress_level=stress, temperature_level=temp,
                      taste=tuple(taste), start=t)


def dish(dish_id, taste, meal="lunch"):
    from pfmlab.taste import TasteVector
    return Dish(dish_id=dish_id, name=dish_id, meal_type=meal,
                weight_class="light", ingredients=("x",),
                nutrition={k: 0.0 for k in NUTRITION_FIELDS},
                taste=TasteVector.from_array(taste))


class TestBuildProfiles:
    def test_no_training_data(self):
        with pytest.raises(NoTrainingData):
            build_profiles([], "none")

    def test_single_bin_equals_global(self):
        samples = [sample("a", [2, 0, 0, 0, 0, 0]), sample("b", [0, 2, 0, 0, 0, 0])]
        profile = build_profiles(samples, "stress_and_temperature")
        bin_mean = profile.bins[("lunch", "low", "mild")][0]
        global_mean = profile.global_means["lunch"][0]
        assert np.allclose(bin_mean, global_mean)

    def test_arithmetic_mean(self):
        samples = [sample("a", [2, 0, 0, 0, 0, 0]), sample("b", [0, 2, 0, 0, 0, 0])]
        profile = build_profiles(samples, "none")
        assert profile.bins[("lunch",)][0].tolist() == [1, 1, 0, 0, 0, 0]

    def test_groupby_oracle_on_stream(self, full_stream, taste_dataset):
        """Bin means equal an independent pandas groupby recomputation."""
        samples = meal_samples(full_stream, taste_dataset, "user1")
        profile = build_profiles(samples, "stress_and_temperature")
        frame = pd.DataFrame([{
            "meal": s.meal_type, "stress": s.stress_level,
            "temp": s.temperature_level,
            **{f"c{i}": s.taste[i] for i in range(6)}} for s in samples])
        grouped = frame.groupby(["meal", "stress", "temp"]).agg(
            **{f"c{i}": (f"c{i}", "mean") for i in range(6)},
            n=("c0", "size"))
        assert len(grouped) == len(profile.bins)
        for key, row in grouped.iterrows():
            mean, count = profile.bins[key]
            assert count == row["n"]
            assert np.allclose(mean, [row[f"c{i}"] for i in range(6)], atol=1e-9)


class TestPredictTopK:
    def test_exact_match_ranks_first(self):
        profile = build_profiles([sample("a", [1, 2, 3, 0, 0, 0])], "none")
        candidates = [dish("a", [1, 2, 3, 0, 0, 0]), dish("b", [3, 0, 0, 1, 0, 0])]
        pred = predict_top_k(profile, ContextBin("lunch", "mild", "low"),
                             candidates, k=1)
        assert pred.top(1) == ["a"]

    def test_orthogonal_ordering(self):
        profile = build_profiles([sample("z", [1, 0, 0, 0, 0, 0])], "none")
        candidates = [dish("first", [2, 0, 0, 0, 0, 0]), dish("second", [0, 1, 0, 0, 0, 0])]
        pred = predict_top_k(profile, ContextBin("lunch", "mild", "low"),
                             candidates, k=2)
        assert pred.ranked == ["first", "second"]

    def test_brute_force_cosine_sort_oracle(self):
        rng = np.random.default_rng(5)
        vec = rng.uniform(0, 4, size=6)
        profile = build_profiles([sample("s", vec.tolist())], "none")
        candidates = [dish(f"d{i:02d}", rng.uniform(0, 4, size=6).tolist())
                      for i in range(20)]
        pred = predict_top_k(profile, ContextBin("lunch", "mild", "low"),
                             candidates, k=20)
        expected = sorted(
            ((-(cosine(vec, d.taste.as_array())), d.dish_id) for d in candidates))
        assert pred.ranked == [d for _, d in expected]

    def test_zero_bin_falls_back_to_global(self):
        samples = [sample("a", [0, 0, 0, 0, 0, 0], stress="low"),
                   sample("b", [1, 0, 0, 0, 0, 0], stress="high")]
        profile = build_profiles(samples, "stress_only")
        candidates = [dish("u", [1, 0, 0, 0, 0, 0]), dish("v", [0, 1, 0, 0, 0, 0])]
        pred = predict_top_k(profile, ContextBin("lunch", "mild", "low"),
                             candidates, k=1)
        assert pred.fallback == "global"
        assert pred.top(1) == ["u"]

    def test_all_zero_returns_id_order_with_warning(self):
        profile = build_profiles([sample("a", [0] * 6)], "none")
        candidates = [dish("b", [1, 0, 0, 0, 0, 0]), dish("a", [0, 1, 0, 0, 0, 0])]
        pred = predict_top_k(profile, ContextBin("lunch", "mild", "low"),
                             candidates, k=2)
        assert pred.id_order_warning
        assert pred.ranked == ["a", "b"]

    def test_scale_invariance(self):
        rng = np.random.default_rng(11)
        vec = rng.uniform(0, 3, size=6)
        profile = build_profiles([sample("s", vec.tolist())], "none")
        base = [rng.uniform(0, 3, size=6) for _ in range(10)]
        c1 = [dish(f"d{i}", b.tolist()) for i, b in enumerate(base)]
        c2 = [dish(f"d{i}", (7.3 * b).tolist()) for i, b in enumerate(base)]
        bin_ctx = ContextBin("lunch", "mild", "low")
        assert predict_top_k(profile, bin_ctx, c1, 10).ranked == \
            predict_top_k(profile, bin_ctx, c2, 10).ranked


class TestEvaluate:
    def test_insufficient_data(self, taste_dataset):
        stream = generate(default_profiles()[:1], 2, taste_dataset, seed=0)
        with pytest.raises(InsufficientData):
            evaluate(stream, taste_dataset, "none")

    def test_accuracy_one_when_k_covers_candidates(self, small_stream, taste_dataset):
        rep = evaluate(small_stream, taste_dataset, "none", k=20)
        assert rep.accuracy == 1.0

    def test_accuracy_monotone_in_k(self, small_stream, taste_dataset):
        accs = [evaluate(small_stream, taste_dataset,
                         "stress_and_temperature", k=k).accuracy
                for k in (1, 3, 5, 10, 20)]
        assert all(a <= b + 1e-12 for a, b in zip(accs, accs[1:]))

    def test_chronological_split(self, small_stream, taste_dataset):
        samples = meal_samples(small_stream, taste_dataset, "user1")
        n_train = math.ceil(0.8 * len(samples))
        assert max(s.start for s in samples[:n_train]) < \
            min(s.start for s in samples[n_train:])

    def test_accuracy_bounds(self, small_stream, taste_dataset):
        for mode in CONTEXT_MODES:
            rep = evaluate(small_stream, taste_dataset, mode)
            assert 0.0 <= rep.accuracy <= 1.0
            assert rep.n_test > 0


class TestVolumeSweep:
    def test_default_sizes_reported(self, full_stream, taste_dataset):
        rows = volume_sweep(full_stream, taste_dataset,
                            context_modes=("none",))
        assert [r["size"] for r in rows] == [4, 8, 16, 32, 64, 128, 256, 400]

    def test_insufficient_stream(self, small_stream, taste_dataset):
        with pytest.raises(InsufficientData):
            volume_sweep(small_stream, taste_dataset)

    def test_small_window_no_crash(self, full_stream, taste_dataset):
        rows = volume_sweep(full_stream, taste_dataset, sizes=(4,),
                            context_modes=("stress_and_temperature",))
        assert rows[0]["accuracy"] is not None


@given(st.integers(1, 20))
@settings(max_examples=20, deadline=None)
def test_topk_prefix_property(k):
    """top(k) is always a prefix of the full ranking."""
    rng = np.random.default_rng(k)
    profile = build_profiles([sample("s", rng.uniform(0, 2, 6).tolist())], "none")
    candidates = [dish(f"d{i:02d}", rng.uniform(0, 2, 6).tolist())
                  for i in range(20)]
    pred = predict_top_k(profile, ContextBin("lunch", "mild", "low"),
                         candidates, k=k)
    assert pred.top(k) == pred.ranked[:k]
    assert len(pred.ranked) == 20
