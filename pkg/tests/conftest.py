import numpy as np
import pytest

from stable_debruijn.source_dist import SourceDistribution


@pytest.fixture(scope="session")
def cauchy_sample_source():
    rng = np.random.default_rng(7)
    return SourceDistribution.from_sample(rng.standard_cauchy(100))


@pytest.fixture(scope="session")
def test_sources(cauchy_sample_source):
    return {
        "atom": SourceDistribution.atom(0.0),
        "two_atom": SourceDistribution.from_atoms([(-1.0, 0.5), (1.0, 0.5)]),
        "gaussian": SourceDistribution.gaussian(0.0, 1.0),
        "cauchy_sample": cauchy_sample_source,
    }
