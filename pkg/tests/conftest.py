import pytest

from stopgo import synthgen
from stopgo.recognition import load_seed_corpus, train


@pytest.fixture(scope="session")
def scenario_bundles(tmp_path_factory):
    """One generated bundle per scenario, shared across the whole test run."""
    root = tmp_path_factory.mktemp("bundles")
    return {
        name: synthgen.gen_scenario(name, root / name, seed=11)
        for name in synthgen.SCENARIO_NAMES
    }


@pytest.fixture(scope="session")
def seed_classifier():
    return train(load_seed_corpus())
