"""Seeded, portable random streams with a documented splitting rule.

Every stochastic routine in pfmlab draws from a ``numpy.random.Generator``
backed by PCG64. Sub-streams are derived by hashing the root seed together
with a sequence of string/int labels, so:

* the same ``(seed, labels)`` pair always yields the same stream, on any
  platform;
* streams for different label tuples are independent;
* per-(person, day) generation does not depend on the order in which
  persons are processed, which makes parallel generation safe.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_stream(seed: int, *labels) -> np.random.Generator:
    """Return a Generator for the sub-stream identified by ``labels``.

    Labels may be strings or integers; they are canonicalized into a
    SHA-256 digest that seeds an independent PCG64 instance.
    """
    h = hashlib.sha256()
    h.update(str(int(seed)).encode("utf-8"))
    for label in labels:
        h.update(b"\x1f")
        h.update(str(label).encode("utf-8"))
    words = np.frombuffer(h.digest(), dtype=np.uint32)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(words.tolist())))


def person_day_stream(seed: int, person_id: str, day_index: int) -> np.random.Generator:
    """Stream used to generate one person's events for one day."""
    return derive_stream(seed, "person", person_id, "day", int(day_index))


def categorical(rng: np.random.Generator, labels, probs) -> str:
    """Draw one label from a categorical distribution via inverse CDF."""
    cdf = np.cumsum(np.asarray(probs, dtype=float))
    u = rng.random() * cdf[-1]
    return labels[int(np.searchsorted(cdf, u, side="right"))]
