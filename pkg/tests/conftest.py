import json
import os

import hypothesis
import pytest

hypothesis.settings.register_profile(
    "suite", deadline=None, max_examples=50,
    suppress_health_check=[hypothesis.HealthCheck.too_slow])
hypothesis.settings.load_profile("suite")

GOLDEN_PATH = os.path.join(os.path.dirname(__file__), "data", "golden.json")


@pytest.fixture(scope="session")
def golden() -> dict:
    with open(GOLDEN_PATH) as fh:
        return json.load(fh)
