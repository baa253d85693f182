import logging

import pytest


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: Monte Carlo checks at full size (deselect with -m 'not slow')")


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch, tmp_path):
    """Keeps every test off the user's .env settings and run directory."""
    for name in ("VARHEAT_THREADS", "VARHEAT_U0_MAX_N", "VARHEAT_OUTPUT_DIR", "VARHEAT_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
    yield
    root = logging.getLogger()
    for handler in root.handlers[:]:
        if isinstance(handler, logging.FileHandler):
            root.removeHandler(handler)
            handler.close()
