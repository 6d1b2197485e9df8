import pytest

from orckit.curvature import curvature_profile
from orckit.graphs import corpus


@pytest.fixture(scope="session")
def corpus_entries():
    return corpus()


@pytest.fixture(scope="session")
def corpus_profiles(corpus_entries):
    # computed once; several suites reuse the exact per-edge reports
    return {name: curvature_profile(g) for name, g in corpus_entries}
