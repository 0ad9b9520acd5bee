import pytest

import utils


@pytest.fixture(autouse=True)
def no_config_file(monkeypatch):
    """Keep a developer's $SZILARD_CONFIG out of the test run"""
    monkeypatch.delenv(utils.CONFIG_ENV_VAR, raising=False)
