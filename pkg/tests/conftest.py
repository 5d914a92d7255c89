import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import settings

from g2wall.novikov import NovikovSeries

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


def random_series(rng: random.Random, cutoff, vmin=Fraction(0), nterms: int = 4, denom: int = 2) -> NovikovSeries:
    terms = []
    for _ in range(rng.randint(0, nterms)):
        e = vmin + Fraction(rng.randint(0, 10), denom)
        terms.append((e, Fraction(rng.randint(-5, 5), rng.randint(1, 4))))
    return NovikovSeries(tuple(terms), cutoff)
