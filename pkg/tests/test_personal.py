"""Biological and preferential personal vectors."""

from datetime import timedelta

import numpy as np
import pytest

from pfmlab.errors import UnknownPerson, ValidationError
from pfmlab.personal import (biological_vector, personal_vector,
                             preferential_vector, validate_directives)
from pfmlab.taste import NUTRITION_FIELDS


def anchor(stream, person):
    return stream.events_for(person)[-1].start


class TestBiologicalVector:
    def test_unknown_person(self, small_stream):
        with pytest.raises(UnknownPerson):
            biological_vector(small_stream, "ghost", anchor(small_stream, "user1"))

    def test_empty_window_absent_biometrics(self, small_stream):
        first = small_stream.events_for("user1")[0].start
        at = first.replace(hour=0, minute=5)
        vec = biological_vector(small_stream, "user1", at)
        assert all(v == 0.0 for v in vec.window_same_day.nutrient_sums.values())
        assert vec.window_same_day.mean_sleep_score is None
        assert vec.window_same_day.mean_heart_rate is None

    def test_same_day_calorie_sum(self, small_stream):
        meals = [m for m in small_stream.meals("user1")]
        by_date = {}
        for m in meals:
            by_date.setdefault(m.date, []).append(m)
        date, day_meals = next((d, ms) for d, ms in by_date.items() if len(ms) >= 2)
        at = day_meals[-1].end + timedelta(minutes=1)
        vec = biological_vector(small_stream, "user1", at)
        expected = sum(m.informational["nutrition"]["calories"] for m in day_meals)
        assert vec.window_same_day.nutrient_sums["calories"] == pytest.approx(expected)

    def test_three_day_window_matches_raw_recomputation(self, small_stream):
        """Oracle: a direct date-filtered pass over the raw event records."""
        at = anchor(small_stream, "user2")
        vec = biological_vector(small_stream, "user2", at)

        dates = {(at.date() - timedelta(days=d)).isoformat() for d in (1, 2, 3)}
        sums = dict.fromkeys(NUTRITION_FIELDS, 0.0)
        sleep, minutes, hr = [], [], []
        for rec in (e.to_record() for e in small_stream.events):
            if rec["person_id"] != "user2":
                continue
            if rec["temporal"]["start"][:10] not in dates:
                continue
            info = rec["informational"]
            if rec["kind"] == "meal":
                for key in NUTRITION_FIELDS:
                    sums[key] += info["nutrition"][key] * info["servings"]
            elif rec["kind"] == "sleep":
                sleep.append(info["sleep_score"])
            elif rec["kind"] == "activity":
                minutes.append(info["duration_min"])
                hr.append(info["heart_rate"])
        for key in NUTRITION_FIELDS:
            assert vec.window_3_day.nutrient_sums[key] == pytest.approx(sums[key])
        assert vec.window_3_day.mean_sleep_score == pytest.approx(np.mean(sleep))
        assert vec.window_3_day.mean_activity_minutes == pytest.approx(np.mean(minutes))
        assert vec.window_3_day.mean_heart_rate == pytest.approx(np.mean(hr))

    def test_previous_day_config(self, small_stream):
        at = anchor(small_stream, "user1")
        prev = biological_vector(small_stream, "user1", at,
                                 short_window="previous_day")
        date_prev = (at.date() - timedelta(days=1)).isoformat()
        expected = sum(m.informational["nutrition"]["calories"]
                       for m in small_stream.meals("user1") if m.date == date_prev)
        assert prev.window_same_day.nutrient_sums["calories"] == pytest.approx(expected)

    def test_directive_validation(self):
        with pytest.raises(ValidationError, match="quantity"):
            validate_directives([{"verb": "limit", "subject": "sugar"}])
        with pytest.raises(ValidationError, match="verb"):
            validate_directives([{"verb": "forbid", "subject": "salt"}])

    def test_directives_carried_verbatim(self, small_stream):
        directives = [{"verb": "require", "subject": "protein_g",
                       "quantity": 60, "units": "g/day", "source": "nutritionist"},
                      {"verb": "avoid", "subject": "peanuts", "source": "allergy"}]
        vec = biological_vector(small_stream, "user1",
                                anchor(small_stream, "user1"), directives)
        assert vec.directives == directives


class TestPreferentialVector:
    def test_tally_oracle_30d(self, small_stream, taste_dataset):
        at = anchor(small_stream, "user1")
        vec = preferential_vector(small_stream, "user1", at, taste_dataset)
        lo = at - timedelta(days=30)
        counts = {}
        vectors = []
        for m in small_stream.meals("user1"):
            if lo < m.start <= at:
                d = taste_dataset.by_id(m.informational["dish_id"])
                vectors.append(d.taste.as_array())
                for ing in d.ingredients:
                    counts[ing] = counts.get(ing, 0) + 1
        top = max(counts.values())
        expected = sorted(((i, c / top) for i, c in counts.items()),
                          key=lambda t: (-t[1], t[0]))
        assert vec.short_ranking == [(i, pytest.approx(a)) for i, a in expected]
        assert np.allclose(vec.short_centroid, np.mean(vectors, axis=0))

    def test_affinities_non_increasing(self, small_stream, taste_dataset):
        vec = preferential_vector(small_stream, "user1",
                                  anchor(small_stream, "user1"), taste_dataset)
        affinities = [a for _, a in vec.short_ranking]
        assert affinities == sorted(affinities, reverse=True)
        assert affinities[0] == 1.0

    def test_empty_window_flagged(self, small_stream, taste_dataset):
        first = small_stream.events_for("user1")[0].start
        at = first - timedelta(days=1)
        with pytest.raises(UnknownPerson):
            preferential_vector(small_stream, "nobody", at, taste_dataset)
        vec = preferential_vector(small_stream, "user1", at, taste_dataset)
        assert vec.short_empty and vec.long_empty
        assert vec.short_ranking == []
        assert vec.short_centroid == [0.0] * 6

    def test_window_containment(self, small_stream, taste_dataset):
        """Shrinking a window never increases any ingredient count."""
        at = anchor(small_stream, "user2")
        wide = preferential_vector(small_stream, "user2", at, taste_dataset,
                                   windows=(60, 365))
        narrow = preferential_vector(small_stream, "user2", at, taste_dataset,
                                     windows=(10, 365))

        def raw_counts(days):
            lo = at - timedelta(days=days)
            counts = {}
            for m in small_stream.meals("user2"):
                if lo < m.start <= at:
                    d = taste_dataset.by_id(m.informational["dish_id"])
                    for ing in d.ingredients:
                        counts[ing] = counts.get(ing, 0) + 1
            return counts

        wide_counts, narrow_counts = raw_counts(60), raw_counts(10)
        for ing, n in narrow_counts.items():
            assert n <= wide_counts.get(ing, 0)
        assert set(i for i, _ in narrow.short_ranking) <= \
            set(i for i, _ in wide.short_ranking)

    def test_habit_preset(self, small_stream, taste_dataset):
        vec = preferential_vector(small_stream, "user1",
                                  anchor(small_stream, "user1"), taste_dataset,
                                  windows=(90, 365))
        assert vec.window_days == (90, 365)


class TestPersonalVector:
    def test_round_trip(self, small_stream, taste_dataset):
        from pfmlab.personal import PersonalVector
        pv = personal_vector(small_stream, "user1",
                             anchor(small_stream, "user1"), taste_dataset,
                             directives=[{"verb": "avoid", "subject": "ham"}])
        again = PersonalVector.from_record(pv.to_record())
        assert again.to_record() == pv.to_record()
        assert again.avoid_terms() == ["ham"]
