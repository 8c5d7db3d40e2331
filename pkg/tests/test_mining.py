"""Co-occurrence mining and rule verification."""

from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from pfmlab.errors import (EmptyStream, MissingConfounder, NoOccurrences,
                           ValidationError)
from pfmlab.lifelog import (ContextEffectRule, EventStream, LifelogEvent,
                            make_profile, generate)
from pfmlab.mining import (EventPattern, EventPredicate, extract_units,
                           generate_hypotheses, match_contexts,
                           verify_hypothesis)

T0 = datetime(2024, 1, 1, tzinfo=timezone.utc)


def event(kind, hours, person="p", seq=[0], **informational):
    seq[0] += 1
    start = T0 + timedelta(hours=hours)
    return LifelogEvent(event_id=f"e{seq[0]:05d}", person_id=person, kind=kind,
                        start=start, end=start + timedelta(minutes=10),
                        informational=dict(informational))


def stream_of(events):
    events = sorted(events, key=lambda e: (e.start, e.person_id, e.event_id))
    return EventStream(events=events, day_contexts=[], seed=0,
                       config_fingerprint="test")


HEAVY_DINNER_PATTERN = EventPattern(
    input=EventPredicate("stress_report", {"informational.stress_level": "high"}),
    outcome=EventPredicate("meal", {"structural.meal_type": "dinner"}),
    window_hours=16.5,
    outcome_value={"field": "informational.weight_class", "equals": "heavy"},
    confounders=("temperature_level",))


class TestHeatmap:
    def test_empty_stream(self):
        with pytest.raises(EmptyStream):
            generate_hypotheses(stream_of([]), ("activity",), ("meal",), 2.0)

    def test_perfect_cooccurrence_dominates_row(self):
        events = []
        for i in range(120):
            events.append(event("activity", i * 24.0))
            events.append(event("meal", i * 24.0 + 1.0))           # always follows A
            events.append(event("sleep", i * 24.0 + (i % 13) + 2)) # unrelated
        heatmap = generate_hypotheses(stream_of(events), ("activity",),
                                      ("meal", "sleep"), window_hours=2.0)
        lift_ab = heatmap.lift("activity", "meal")
        assert lift_ab is not None and lift_ab > 1.0
        row = [heatmap.lift("activity", ov) for ov in heatmap.outcome_variants]
        assert lift_ab == max(v for v in row if v is not None)

    def test_independent_poisson_lift_near_one(self):
        rng = np.random.default_rng(12)
        horizon = 500 * 24.0
        events = [event("activity", 0.0), event("activity", horizon)]
        for kind, rate in (("activity", 0.12), ("meal", 0.15)):
            t = 0.0
            while True:
                t += rng.exponential(1.0 / rate)
                if t >= horizon:
                    break
                events.append(event(kind, t))
        heatmap = generate_hypotheses(stream_of(events), ("activity",), ("meal",),
                                      window_hours=6.0)
        assert abs(heatmap.lift("activity", "meal") - 1.0) < 0.1

    def test_absent_cell_reports_none(self):
        events = [event("activity", h) for h in range(10)]
        heatmap = generate_hypotheses(stream_of(events), ("activity",), ("meal",),
                                      window_hours=2.0)
        assert heatmap.outcome_variants == []

    def test_csv_emission(self, tmp_path, small_stream):
        heatmap = generate_hypotheses(small_stream, ("stress_report",), ("meal",),
                                      window_hours=16.5)
        heatmap.to_csv(tmp_path / "h.csv")
        lines = (tmp_path / "h.csv").read_text().strip().splitlines()
        assert lines[0].startswith("input,outcome")
        assert len(lines) == 1 + len(heatmap.cells)


class TestMatchContexts:
    def _units(self, values, name="c"):
        return [{"unit_id": f"u{i}", "treated": False, "value": 0.0,
                 "confounders": {name: v}} for i, v in enumerate(values)]

    def test_single_confounder_partition(self):
        units = self._units(["a", "b", "c", "a", "b", "a"])
        groups = match_contexts(units, ("c",))
        assert len(groups.groups) <= 3
        all_idx = sorted(i for idx in groups.groups.values() for i in idx)
        assert all_idx == list(range(6))

    def test_two_confounders_product_structure(self):
        units = [{"unit_id": f"u{i}", "confounders": {"a": i % 3, "b": (i // 3) % 3}}
                 for i in range(60)]
        groups = match_contexts(units, ("a", "b"))
        assert len(groups.groups) <= 9

    def test_terciles_balanced(self):
        rng = np.random.default_rng(3)
        units = self._units(rng.normal(size=300).tolist())
        groups = match_contexts(units, ("c",), scheme={"c": "terciles"})
        sizes = sorted(len(v) for v in groups.groups.values())
        assert len(sizes) == 3
        assert all(abs(s - 100) <= 1 for s in sizes)

    def test_missing_confounder_names_unit_and_variable(self):
        units = self._units(["a", None, "b"])
        with pytest.raises(MissingConfounder, match="u1.*'c'"):
            match_contexts(units, ("c",))

    def test_partition_disjoint_exhaustive(self):
        rng = np.random.default_rng(9)
        units = self._units(rng.integers(0, 5, size=200).tolist())
        groups = match_contexts(units, ("c",))
        seen = [i for idx in groups.groups.values() for i in idx]
        assert sorted(seen) == list(range(200))
        assert len(seen) == len(set(seen))


def planted_profile(weight, skew=0.4):
    rules = ([ContextEffectRule(stress="high", class_weights={"heavy": weight})]
             if weight else [])
    return make_profile("subj", context_effect=rules,
                        stress_prior={"low": 1 - 0.3 - skew, "medium": 0.3,
                                      "high": skew})


class TestVerify:
    def test_min_group_size_gates_everything(self, taste_dataset):
        stream = generate([planted_profile(3.0)], 60, taste_dataset, seed=0)
        rule = verify_hypothesis(stream, HEAVY_DINNER_PATTERN,
                                 min_group_size=10_000)
        assert rule.verdict == "inconclusive"
        assert all(g.status == "inconclusive" for g in rule.groups)

    def test_no_occurrences(self, taste_dataset):
        pattern = EventPattern(
            input=EventPredicate("stress_report",
                                 {"informational.stress_level": "impossible"}),
            outcome=EventPredicate("meal", {}),
            window_hours=4.0,
            outcome_value={"field": "informational.nutrition.calories"})
        stream = generate([planted_profile(0.0)], 20, taste_dataset, seed=0)
        with pytest.raises(NoOccurrences):
            verify_hypothesis(stream, pattern)

    def test_planted_effect_supported(self, taste_dataset):
        supported = 0
        for seed in range(5):
            stream = generate([planted_profile(3.0)], 700, taste_dataset, seed=seed)
            rule = verify_hypothesis(stream, HEAVY_DINNER_PATTERN)
            if rule.verdict == "supported" and rule.direction == "positive":
                supported += 1
        assert supported >= 4

    def test_continuous_outcome_units(self, taste_dataset):
        pattern = EventPattern(
            input=EventPredicate("stress_report",
                                 {"informational.stress_level": "high"}),
            outcome=EventPredicate("meal", {"structural.meal_type": "dinner"}),
            window_hours=16.5,
            outcome_value={"field": "informational.nutrition.calories"},
            confounders=("temperature_level",))
        stream = generate([planted_profile(3.0)], 300, taste_dataset, seed=3)
        units = extract_units(stream, pattern)
        dinners = [m for m in stream.meals()
                   if m.structural["meal_type"] == "dinner"]
        assert len(units) == len(dinners)
        # treated units are exactly the dinners on high-stress days: the
        # morning report precedes every dinner within the window
        for unit, meal in zip(units, dinners):
            day_ctx = stream.context_for("subj", meal.date)
            assert unit["treated"] == (day_ctx.stress_level == "high")

    def test_monotone_power(self, taste_dataset):
        """Stronger planted effects never recover worse (one inversion
        allowed across the weight ladder)."""
        recovery = []
        for weight in (1.5, 2.0, 3.0):
            supported = 0
            for seed in range(20):
                stream = generate([planted_profile(weight)], 400, taste_dataset,
                                  seed=100 + seed)
                rule = verify_hypothesis(stream, HEAVY_DINNER_PATTERN)
                if rule.verdict == "supported" and rule.direction == "positive":
                    supported += 1
            recovery.append(supported)
        inversions = sum(1 for a, b in zip(recovery, recovery[1:]) if b < a)
        assert inversions <= 1, recovery

    def test_invalid_pattern_window(self):
        with pytest.raises(ValidationError):
            EventPattern(input=EventPredicate("meal", {}),
                         outcome=EventPredicate("meal", {}),
                         window_hours=0.0,
                         outcome_value={"field": "informational.servings"})

    def test_pattern_record_round_trip(self):
        rec = HEAVY_DINNER_PATTERN.to_record()
        assert EventPattern.from_record(rec).to_record() == rec
