import pytest

from pfmlab.lifelog import default_profiles, generate
from pfmlab.taste import bundled_molecule_table, bundled_taste_dataset


@pytest.fixture(scope="session")
def taste_dataset():
    return bundled_taste_dataset()


@pytest.fixture(scope="session")
def molecule_table():
    return bundled_molecule_table()


@pytest.fixture(scope="session")
def small_stream(taste_dataset):
    """Two persons, 120 days; enough for most behavioral checks."""
    return generate(default_profiles()[:2], 120, taste_dataset, seed=2024)


@pytest.fixture(scope="session")
def full_stream(taste_dataset):
    """The default five-person, 500-day stream."""
    return generate(default_profiles(), 500, taste_dataset, seed=42)
