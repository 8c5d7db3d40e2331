"""Event-relationship mining: hypothesis generation and verification.

Hypothesis generation scans a stream for input->outcome co-occurrence
within a time window and reports lift against an independence baseline
(the probability of seeing at least one outcome in a window of that
length under the outcome's marginal Poisson rate).

Hypothesis verification treats each outcome-pattern occurrence as a unit
in a treated/control comparison: treated iff a matching input event
occurred within the window before it. Units are grouped by confounder
levels (contextual matching) and the treated/control outcome difference
is tested per group: Welch's t-test for continuous outcomes, a
two-proportion z-test for binary ones. A rule is "supported" when at
least half of the adequately sized groups are significant in the same
direction.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import (EmptyStream, MissingConfounder, NoOccurrences,
                     ValidationError)
from .lifelog import EventStream, LifelogEvent

_ASPECT_ROOTS = ("kind", "person_id", "spatial", "informational",
                 "experiential", "structural", "temporal", "causal")


def _resolve(event: LifelogEvent, path: str):
    """Look up a dot path like ``informational.nutrition.calories``."""
    parts = path.split(".")
    if parts[0] not in _ASPECT_ROOTS:
        raise ValidationError(f"field path {path!r} does not start with an event aspect")
    node = getattr(event, parts[0])
    for part in parts[1:]:
        if not isinstance(node, dict) or part not in node:
            return None
        node = node[part]
    return node


@dataclass(frozen=True)
class EventPredicate:
    kind: str
    filters: dict = field(default_factory=dict)

    def __post_init__(self):
        for path in self.filters:
            if path.split(".")[0] not in _ASPECT_ROOTS:
                raise ValidationError(f"filter path {path!r} not an event field")

    def matches(self, event: LifelogEvent) -> bool:
        if event.kind != self.kind:
            return False
        return all(_resolve(event, path) == want for path, want in self.filters.items())


@dataclass(frozen=True)
class EventPattern:
    """input ->(confounders, window) outcome, with an outcome value spec.

    ``outcome_value`` is {"field": <dot path>} for a continuous outcome or
    {"field": ..., "equals": <value>} for a binary one.
    """

    input: EventPredicate
    outcome: EventPredicate
    window_hours: float
    outcome_value: dict
    confounders: tuple = ()

    def __post_init__(self):
        if self.window_hours <= 0:
            raise ValidationError("window_hours must be > 0")
        if "field" not in self.outcome_value:
            raise ValidationError("outcome_value needs a 'field'")

    @property
    def binary_outcome(self) -> bool:
        return "equals" in self.outcome_value

    def to_record(self) -> dict:
        return {
            "input": {"kind": self.input.kind, "filters": dict(self.input.filters)},
            "outcome": {"kind": self.outcome.kind, "filters": dict(self.outcome.filters),
                        "value": dict(self.outcome_value)},
            "window_hours": self.window_hours,
            "confounders": list(self.confounders),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "EventPattern":
        return cls(
            input=EventPredicate(rec["input"]["kind"],
                                 dict(rec["input"].get("filters", {}))),
            outcome=EventPredicate(rec["outcome"]["kind"],
                                   dict(rec["outcome"].get("filters", {}))),
            window_hours=float(rec["window_hours"]),
            outcome_value=dict(rec["outcome"]["value"]),
            confounders=tuple(rec.get("confounders", ())),
        )


# hypothesis generation ------------------------------------------------------

@dataclass
class CooccurrenceHeatmap:
    input_variants: list
    outcome_variants: list
    window_hours: float
    cells: dict  # (input variant, outcome variant) -> stats dict

    def lift(self, input_variant: str, outcome_variant: str):
        return self.cells[(input_variant, outcome_variant)]["lift"]

    def to_records(self) -> list[dict]:
        return [{"input": iv, "outcome": ov, **self.cells[(iv, ov)]}
                for iv in self.input_variants for ov in self.outcome_variants]

    def to_csv(self, path) -> None:
        lines = ["input,outcome,n_inputs,n_outcomes,joint,joint_rate,lift"]
        for rec in self.to_records():
            lift = "" if rec["lift"] is None else repr(rec["lift"])
            rate = "" if rec["joint_rate"] is None else repr(rec["joint_rate"])
            lines.append(f"{rec['input']},{rec['outcome']},{rec['n_inputs']},"
                         f"{rec['n_outcomes']},{rec['joint']},{rate},{lift}")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")


def _variant_label(event: LifelogEvent, split_fields: dict | None) -> str:
    if split_fields and event.kind in split_fields:
        value = _resolve(event, split_fields[event.kind])
        return f"{event.kind}:{value}"
    return event.kind


def generate_hypotheses(stream: EventStream, input_kinds, outcome_kinds,
                        window_hours: float,
                        split_fields: dict | None = None) -> CooccurrenceHeatmap:
    """Count outcome-within-window-after-input for all variant pairs.

    ``split_fields`` optionally refines a kind into per-value variants,
    e.g. ``{"stress_report": "informational.stress_level"}``. Lift is the
    observed follow rate over the rate expected if outcomes were an
    independent Poisson process; a cell with no inputs or no outcomes
    reports lift None (absent), never 0.
    """
    if not stream.events:
        raise EmptyStream("cannot mine an empty stream")
    if window_hours <= 0:
        raise ValidationError("window_hours must be > 0")
    input_kinds = tuple(input_kinds)
    outcome_kinds = tuple(outcome_kinds)

    by_person: dict[str, dict[str, list[float]]] = {}
    spans: dict[str, tuple[float, float]] = {}
    variants_in: set[str] = set()
    variants_out: set[str] = set()
    for ev in stream.events:
        t = ev.start.timestamp() / 3600.0
        lo, hi = spans.get(ev.person_id, (t, t))
        spans[ev.person_id] = (min(lo, t), max(hi, t))
        if ev.kind in input_kinds:
            label = _variant_label(ev, split_fields)
            variants_in.add(label)
            by_person.setdefault(ev.person_id, {}).setdefault(label, []).append(t)
        if ev.kind in outcome_kinds:
            label = _variant_label(ev, split_fields)
            variants_out.add(label)
            by_person.setdefault(ev.person_id, {}).setdefault("out:" + label, []).append(t)

    cells = {}
    for iv in sorted(variants_in):
        for ov in sorted(variants_out):
            joint = 0
            n_inputs = 0
            n_outcomes = 0
            expected = 0.0
            for person, (lo, hi) in spans.items():
                times_in = by_person.get(person, {}).get(iv, [])
                times_out = by_person.get(person, {}).get("out:" + ov, [])
                n_outcomes += len(times_out)
                duration = hi - lo
                if duration <= 0:
                    continue
                rate = len(times_out) / duration
                p_null = 1.0 - math.exp(-rate * window_hours)
                cutoff = hi - window_hours
                for t in times_in:
                    if t > cutoff:
                        continue
                    n_inputs += 1
                    expected += p_null
                    j = bisect_right(times_out, t)
                    if j < len(times_out) and times_out[j] <= t + window_hours:
                        joint += 1
            if n_inputs == 0 or n_outcomes == 0 or expected == 0.0:
                joint_rate = None
                lift = None
            else:
                joint_rate = joint / n_inputs
                lift = joint / expected
            cells[(iv, ov)] = {"joint": joint, "n_inputs": n_inputs,
                               "n_outcomes": n_outcomes,
                               "joint_rate": joint_rate, "lift": lift}
    return CooccurrenceHeatmap(input_variants=sorted(variants_in),
                               outcome_variants=sorted(variants_out),
                               window_hours=window_hours, cells=cells)


# contextual matching --------------------------------------------------------

@dataclass
class ContextGroups:
    groups: dict        # key tuple -> list of unit indices
    confounders: tuple
    bin_edges: dict     # confounder -> quantile edges (continuous only)


def _quantile_bin(value: float, edges: np.ndarray) -> int:
    return int(np.searchsorted(edges, value, side="left"))


def match_contexts(units: list[dict], confounders, scheme: dict | None = None) -> ContextGroups:
    """Partition units by exact confounder levels (default) or by
    quantile bins for confounders marked continuous in ``scheme``.

    ``scheme`` maps confounder name to "exact", "terciles" or
    ("quantiles", k). Units must carry every confounder; otherwise
    MissingConfounder names the unit and the variable.
    """
    confounders = tuple(confounders)
    scheme = scheme or {}
    for i, unit in enumerate(units):
        for name in confounders:
            if unit.get("confounders", {}).get(name) is None:
                unit_id = unit.get("unit_id", f"#{i}")
                raise MissingConfounder(f"unit {unit_id} lacks confounder {name!r}")

    bin_edges = {}
    for name in confounders:
        rule = scheme.get(name, "exact")
        if rule == "exact":
            continue
        if rule == "terciles":
            q = 3
        elif isinstance(rule, (tuple, list)) and rule[0] == "quantiles":
            q = int(rule[1])
        else:
            raise ValidationError(f"unknown matching scheme {rule!r} for {name!r}")
        values = np.array([float(u["confounders"][name]) for u in units])
        edges = np.quantile(values, [i / q for i in range(1, q)])
        bin_edges[name] = edges

    groups: dict[tuple, list[int]] = {}
    for i, unit in enumerate(units):
        key = []
        for name in confounders:
            value = unit["confounders"][name]
            if name in bin_edges:
                key.append(f"{name}_bin{_quantile_bin(float(value), bin_edges[name])}")
            else:
                key.append(f"{name}={value}")
        groups.setdefault(tuple(key), []).append(i)
    return ContextGroups(groups=groups, confounders=confounders,
                         bin_edges={k: v.tolist() for k, v in bin_edges.items()})


# hypothesis verification ----------------------------------------------------

@dataclass
class GroupResult:
    key: tuple
    n_treated: int
    n_control: int
    effect: float | None
    p_value: float | None
    status: str  # "significant", "not_significant", "inconclusive"


@dataclass
class VerifiedRule:
    pattern: EventPattern
    groups: list
    verdict: str    # "supported", "rejected", "inconclusive"
    direction: str  # "positive", "negative" or "none"
    alpha: float

    def to_record(self) -> dict:
        return {
            "pattern": self.pattern.to_record(),
            "verdict": self.verdict,
            "direction": self.direction,
            "alpha": self.alpha,
            "groups": [{"key": list(g.key), "n_treated": g.n_treated,
                        "n_control": g.n_control, "effect": g.effect,
                        "p_value": g.p_value, "status": g.status}
                       for g in self.groups],
        }


def _two_proportion_p(x1: int, n1: int, x2: int, n2: int) -> float:
    p1, p2 = x1 / n1, x2 / n2
    pooled = (x1 + x2) / (n1 + n2)
    se = math.sqrt(pooled * (1 - pooled) * (1 / n1 + 1 / n2))
    if se == 0.0:
        return 1.0 if p1 == p2 else 0.0
    z = (p1 - p2) / se
    return float(2.0 * stats.norm.sf(abs(z)))


def _welch_p(a: np.ndarray, b: np.ndarray) -> float:
    if np.std(a) == 0.0 and np.std(b) == 0.0:
        return 1.0 if np.mean(a) == np.mean(b) else 0.0
    return float(stats.ttest_ind(a, b, equal_var=False).pvalue)


def extract_units(stream: EventStream, pattern: EventPattern) -> list[dict]:
    """One unit per outcome occurrence: treated flag, outcome value and
    confounder values (day-context names or event field paths)."""
    input_times: dict[str, list[float]] = {}
    n_input_events = 0
    for ev in stream.events:
        if pattern.input.matches(ev):
            input_times.setdefault(ev.person_id, []).append(ev.start.timestamp() / 3600.0)
            n_input_events += 1
    if n_input_events == 0:
        raise NoOccurrences("treatment pattern never matches the stream")
    for times in input_times.values():
        times.sort()

    units = []
    for ev in stream.events:
        if not pattern.outcome.matches(ev):
            continue
        t = ev.start.timestamp() / 3600.0
        times = input_times.get(ev.person_id, [])
        lo = bisect_left(times, t - pattern.window_hours)
        treated = lo < bisect_left(times, t)
        raw = _resolve(ev, pattern.outcome_value["field"])
        if raw is None:
            continue
        if pattern.binary_outcome:
            value = 1.0 if raw == pattern.outcome_value["equals"] else 0.0
        else:
            value = float(raw)
        confs = {}
        for name in pattern.confounders:
            if name in ("stress_level", "temperature_level", "raw_temperature"):
                ctx = stream.context_for(ev.person_id, ev.date)
                confs[name] = getattr(ctx, name) if ctx is not None else None
            else:
                confs[name] = _resolve(ev, name)
        units.append({"unit_id": ev.event_id, "treated": treated, "value": value,
                      "confounders": confs})
    return units


def verify_hypothesis(stream: EventStream, pattern: EventPattern,
                      min_group_size: int = 5, alpha: float = 0.05,
                      bonferroni: bool = False,
                      scheme: dict | None = None) -> VerifiedRule:
    """Test the pattern's treated-vs-control effect within context groups."""
    if min_group_size < 2:
        raise ValidationError("min_group_size must be >= 2")
    units = extract_units(stream, pattern)
    matched = match_contexts(units, pattern.confounders, scheme)

    adequate = []
    results = []
    for key in sorted(matched.groups):
        idx = matched.groups[key]
        treated = np.array([units[i]["value"] for i in idx if units[i]["treated"]])
        control = np.array([units[i]["value"] for i in idx if not units[i]["treated"]])
        if len(treated) < min_group_size or len(control) < min_group_size:
            results.append(GroupResult(key=key, n_treated=len(treated),
                                       n_control=len(control), effect=None,
                                       p_value=None, status="inconclusive"))
            continue
        effect = float(np.mean(treated) - np.mean(control))
        if pattern.binary_outcome:
            p = _two_proportion_p(int(treated.sum()), len(treated),
                                  int(control.sum()), len(control))
        else:
            p = _welch_p(treated, control)
        results.append(GroupResult(key=key, n_treated=len(treated),
                                   n_control=len(control), effect=effect,
                                   p_value=p, status="pending"))
        adequate.append(results[-1])

    threshold = alpha / len(adequate) if (bonferroni and adequate) else alpha
    pos = neg = 0
    for g in adequate:
        if g.p_value < threshold:
            g.status = "significant"
            if g.effect > 0:
                pos += 1
            elif g.effect < 0:
                neg += 1
        else:
            g.status = "not_significant"

    q = len(adequate)
    if q == 0:
        verdict, direction = "inconclusive", "none"
    elif pos != neg and 2 * max(pos, neg) >= q:
        verdict = "supported"
        direction = "positive" if pos > neg else "negative"
    elif pos == 0 and neg == 0:
        verdict, direction = "rejected", "none"
    else:
        verdict, direction = "inconclusive", "none"
    return VerifiedRule(pattern=pattern, groups=results, verdict=verdict,
                        direction=direction, alpha=alpha)
