"""pfmlab: a deterministic lab for contextual food-recommendation studies.

Synthesizes multi-person lifelogs with planted causal structure, builds
taste-space representations and contextual preference models, mines
event-relationship rules, serves location-aware option lists from a
schema-validated food atlas, and ranks options with a counterfactual
batch-division algorithm -- all reproducible from a single seed.
"""

__version__ = "0.1.0"

from .taste import (TASTE_DIMENSIONS, Dish, MoleculeTable, TasteDataset,
                    TasteVector, build_taste_dataset, bundled_molecule_table,
                    bundled_taste_dataset, dish_taste_vector,
                    ingredient_taste_vector)
from .lifelog import (SKIP, DayContext, EventStream, LifelogEvent,
                      LifestyleProfile, default_profiles, generate,
                      sample_context, select_dish)
from .mining import (CooccurrenceHeatmap, EventPattern, EventPredicate,
                     VerifiedRule, generate_hypotheses, match_contexts,
                     verify_hypothesis)
from .preference import (ContextBin, EvalReport, PreferenceProfile,
                         build_profiles, evaluate, predict_top_k, volume_sweep)
from .personal import (BiologicalVector, PersonalVector, PreferentialVector,
                       biological_vector, personal_vector, preferential_vector)
from .atlas import (AtlasEntity, AtlasStore, ContextVector, RequirementVector,
                    haversine_km, ingest, query_eateries, query_effect_by_food,
                    query_food_by_effect, query_recipes_by_requirements)
from .cre import Option, OptionList, build_synthetic_atlas, cre_options
from .counterfactual import (CfgSettings, CounterfactualDataset,
                             CounterfactualSample, IdMap, apply_restrictions,
                             assign_ids, cfg_rank, emit_counterfactuals,
                             emit_templates, score_options)
from .backends import (CfgReplayBackend, QueryContext, RecommenderBackend,
                       TargetSimilarityBackend, UniformRandomBackend,
                       knn_baseline)
from .experiments import ExperimentConfig, cfg_eval, run
