"""Recommender backends and the KNN dish baseline."""

import numpy as np
import pytest

from pfmlab.backends import (CfgReplayBackend, KnnDishPredictor, QueryContext,
                             TargetSimilarityBackend, UniformRandomBackend,
                             context_features, knn_baseline)
from pfmlab.counterfactual import CfgSettings, cfg_rank, score_options
from pfmlab.errors import ValidationError
from pfmlab.rng import derive_stream
from tests.test_counterfactual import option, personal_with


class TestKnnBaseline:
    def test_k1_exact_training_point(self):
        rng = derive_stream(0, "knn1")
        feats = [rng.normal(size=5) for _ in range(30)]
        dishes = [f"d{i % 7}" for i in range(30)]
        predictor = knn_baseline(list(zip(feats, dishes)), k=1)
        for f, d in zip(feats, dishes):
            assert predictor.predict(f) == d

    def test_all_targets_identical(self):
        rng = derive_stream(1, "knn2")
        samples = [(rng.normal(size=5), "always") for _ in range(20)]
        predictor = knn_baseline(samples, k=5)
        assert predictor.predict(rng.normal(size=5)) == "always"

    def test_brute_force_nearest_neighbor_oracle(self):
        rng = derive_stream(2, "knn3")
        feats = np.array([rng.normal(size=5) for _ in range(120)])
        dishes = [f"dish{int(rng.integers(0, 12)):02d}" for _ in range(120)]
        k = 7
        predictor = knn_baseline(list(zip(feats, dishes)), k=k)
        mu, sigma = feats.mean(axis=0), feats.std(axis=0)
        sigma[sigma == 0] = 1.0
        standardized = (feats - mu) / sigma
        for _ in range(40):
            q = rng.normal(size=5)
            qs = (q - mu) / sigma
            dists = np.linalg.norm(standardized - qs, axis=1)
            order = sorted(range(120), key=lambda i: (dists[i], i))[:k]
            votes = {}
            for i in order:
                votes[dishes[i]] = votes.get(dishes[i], 0) + 1
            top = max(votes.values())
            expected = min(d for d, c in votes.items() if c == top)
            assert predictor.predict(q) == expected

    def test_validation(self):
        with pytest.raises(ValidationError):
            knn_baseline([], k=3)
        with pytest.raises(ValidationError):
            KnnDishPredictor(np.zeros((3, 2)), ["a", "b", "c"], k=0)


class TestBackends:
    def _options(self, rng, n=20):
        return [option(f"o{i:02d}", taste=rng.uniform(0, 4, 6).tolist(),
                       nutrition={"protein_g": float(rng.integers(0, 40)),
                                  "calories": float(rng.integers(100, 800))})
                for i in range(n)]

    def test_cfg_replay_matches_ranking(self):
        rng = derive_stream(3, "replay")
        personal = personal_with(centroid=(1, 1, 0, 0, 0, 0))
        settings = CfgSettings(nutrition_level=4, preference_level=2)
        backend = CfgReplayBackend(settings, personal)
        query = QueryContext("lunch", "low", "mild")
        for _ in range(20):
            options = self._options(rng)
            expected = cfg_rank(score_options(options, personal, settings),
                                settings).top.option.option_id
            assert backend.pick(options, query) == expected

    def test_uniform_random_is_seed_deterministic(self):
        rng = derive_stream(4, "uni")
        options = self._options(rng)
        query = QueryContext("dinner", "high", "hot")
        a = UniformRandomBackend(seed=5)
        b = UniformRandomBackend(seed=5)
        assert [a.pick(options, query) for _ in range(50)] == \
            [b.pick(options, query) for _ in range(50)]

    def test_target_similarity_requires_fit(self):
        backend = TargetSimilarityBackend()
        with pytest.raises(ValidationError):
            backend.pick([option("a")], QueryContext("lunch", "low", "mild"))

    def test_context_features_shape(self):
        f = context_features(QueryContext("breakfast", "medium", "hot"))
        assert f.tolist() == [1.0, 0.0, 0.0, 1.0, 2.0]
