import numpy as np
import pytest

from nltomo.presets import preset_names, run_preset


@pytest.fixture(scope="session")
def preset_results(tmp_path_factory):
    """Run the full preset catalog once; shared by the acceptance tests."""
    root = tmp_path_factory.mktemp("presets")
    results = {}
    for name in preset_names():
        results[name] = run_preset(name, root / name)
    return results


@pytest.fixture()
def rng():
    return np.random.default_rng(20260825)
