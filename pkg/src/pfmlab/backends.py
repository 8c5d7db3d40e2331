"""Pluggable recommender backends and the KNN dish baseline.

A backend picks one option from an option list given the query context;
it may first be fit on counterfactual training samples. The built-in
learning backend is nearest-neighbor over counterfactual targets: it
finds training queries with similar context and picks the option most
similar to those queries' targets (taste and nutrition-score space).
Heavier model backends can implement the same interface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .counterfactual import (CfgSettings, CounterfactualSample, cfg_rank,
                             nutrition_score, score_options)
from .cre import Option
from .errors import ValidationError
from .lifelog import STRESS_LEVELS, TEMPERATURE_LEVELS
from .personal import PersonalVector
from .rng import derive_stream
from .taste import MEAL_TYPES


@dataclass(frozen=True)
class QueryContext:
    meal_type: str
    stress_level: str
    temperature_level: str


def context_features(query: QueryContext) -> np.ndarray:
    """Meal one-hot plus ordinal stress/temperature levels."""
    feats = [1.0 if query.meal_type == m else 0.0 for m in MEAL_TYPES]
    feats.append(float(STRESS_LEVELS.index(query.stress_level)))
    feats.append(float(TEMPERATURE_LEVELS.index(query.temperature_level)))
    return np.array(feats, dtype=float)


class RecommenderBackend:
    """Interface: optional fit on counterfactual samples, then pick."""

    name = "backend"

    def fit(self, samples: list[CounterfactualSample]) -> None:
        return None

    def pick(self, options: list[Option], query: QueryContext) -> str:
        raise NotImplementedError


class CfgReplayBackend(RecommenderBackend):
    """Oracle that re-runs the counterfactual ranking itself."""

    name = "cfg_replay"

    def __init__(self, settings: CfgSettings, personal: PersonalVector):
        self.settings = settings
        self.personal = personal

    def pick(self, options: list[Option], query: QueryContext) -> str:
        ranking = cfg_rank(score_options(options, self.personal, self.settings),
                           self.settings)
        return ranking.top.option.option_id


class UniformRandomBackend(RecommenderBackend):
    """Seeded uniform pick; the no-knowledge floor."""

    name = "uniform_random"

    def __init__(self, seed: int = 0):
        self._rng = derive_stream(seed, "uniform-random-backend")

    def pick(self, options: list[Option], query: QueryContext) -> str:
        return options[int(self._rng.integers(0, len(options)))].option_id


class TargetSimilarityBackend(RecommenderBackend):
    """Nearest-neighbor over counterfactual targets.

    For a query, the k most context-similar training samples vote with
    their targets' mean taste vector and mean nutrition score; the
    candidate option closest to that profile wins.
    """

    name = "target_similarity"

    def __init__(self, k: int = 25):
        if k < 1:
            raise ValidationError("k must be >= 1")
        self.k = k
        self._features: np.ndarray | None = None
        self._target_taste: np.ndarray | None = None
        self._target_nscore: np.ndarray | None = None
        self._mu = None
        self._sigma = None

    def fit(self, samples: list[CounterfactualSample]) -> None:
        if not samples:
            raise ValidationError("cannot fit on zero samples")
        feats, tastes, nscores = [], [], []
        for s in samples:
            feats.append(context_features(QueryContext(**s.context)))
            target = s.target_option()
            tastes.append(target.taste_array())
            nscores.append(s.target_nutrition_score)
        self._features = np.array(feats)
        self._mu = self._features.mean(axis=0)
        self._sigma = self._features.std(axis=0)
        self._sigma[self._sigma == 0.0] = 1.0
        self._features = (self._features - self._mu) / self._sigma
        self._target_taste = np.array(tastes)
        self._target_nscore = np.array(nscores)

    def pick(self, options: list[Option], query: QueryContext) -> str:
        if self._features is None:
            raise ValidationError("backend not fitted")
        q = (context_features(query) - self._mu) / self._sigma
        dists = np.linalg.norm(self._features - q, axis=1)
        order = np.lexsort((np.arange(len(dists)), dists))[:self.k]
        mean_taste = self._target_taste[order].mean(axis=0)
        mean_nscore = float(self._target_nscore[order].mean())

        cand_scores = np.array([nutrition_score(o.nutrition) for o in options])
        span = float(cand_scores.max() - cand_scores.min()) or 1.0
        norm_taste = np.linalg.norm(mean_taste)
        best = None
        for option, cscore in zip(options, cand_scores):
            taste = option.taste_array()
            denom = np.linalg.norm(taste) * norm_taste
            taste_sim = float(taste @ mean_taste / denom) if denom > 0 else 0.0
            fit = 0.5 * taste_sim + 0.5 * (1.0 - abs(cscore - mean_nscore) / span)
            key = (-fit, option.option_id)
            if best is None or key < best[0]:
                best = (key, option.option_id)
        return best[1]


# KNN dish classifier baseline -------------------------------------------------

class KnnDishPredictor:
    """Majority dish among the k nearest training contexts."""

    def __init__(self, features: np.ndarray, dishes: list[str], k: int):
        if k < 1:
            raise ValidationError("k must be >= 1")
        if len(features) != len(dishes) or len(dishes) == 0:
            raise ValidationError("features and dishes must align and be non-empty")
        self.k = k
        self._mu = features.mean(axis=0)
        self._sigma = features.std(axis=0)
        self._sigma[self._sigma == 0.0] = 1.0
        self._features = (features - self._mu) / self._sigma
        self._dishes = list(dishes)

    def predict(self, raw_features: np.ndarray) -> str:
        q = (np.asarray(raw_features, dtype=float) - self._mu) / self._sigma
        dists = np.linalg.norm(self._features - q, axis=1)
        order = np.lexsort((np.arange(len(dists)), dists))[:self.k]
        votes: dict[str, int] = {}
        for i in order:
            votes[self._dishes[int(i)]] = votes.get(self._dishes[int(i)], 0) + 1
        best = max(votes.items(), key=lambda kv: (kv[1], ), default=None)
        top_count = best[1]
        return min(d for d, c in votes.items() if c == top_count)


def knn_baseline(train_samples: list[tuple[np.ndarray, str]], k: int) -> KnnDishPredictor:
    """Build the baseline from (context features, chosen dish) pairs."""
    if not train_samples:
        raise ValidationError("no training samples for the KNN baseline")
    features = np.array([f for f, _ in train_samples], dtype=float)
    dishes = [d for _, d in train_samples]
    return KnnDishPredictor(features, dishes, k)
