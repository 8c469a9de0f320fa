import csv
from pathlib import Path

import pytest
from hypothesis import settings

from tfd_otoc import Temperature

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"


def _rows(name):
    with open(FIXTURES / name) as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="session")
def oracle_table():
    """{(n_sites, Temperature, t): O} frozen from the brute-force oracle."""
    return {
        (int(r["n_sites"]), Temperature.parse(r["temperature"]), float(r["t"])): float(r["O"])
        for r in _rows("otoc_oracle.csv")
    }


@pytest.fixture(scope="session")
def decay_table():
    return {
        (int(r["n_sites"]), Temperature.parse(r["temperature"])): float(r["lambda"])
        for r in _rows("decay_rates.csv")
    }
