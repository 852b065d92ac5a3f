import json
import logging

import pytest
from pythonjsonlogger import jsonlogger

from app.core.config import Settings, validate_settings
from app.core.exceptions import BlowUpError, CoherentNSEError, DomainError, SolverError
from app.utils.logger import setup_logging


class TestSettings:
    def test_defaults_are_valid(self):
        assert validate_settings(Settings())

    def test_environment_prefix(self, monkeypatch):
        monkeypatch.setenv("NSE_VERDICT_MARGIN", "0.1")
        monkeypatch.setenv("NSE_LOG_FORMAT", "json")
        cfg = Settings()
        assert cfg.VERDICT_MARGIN == 0.1
        assert cfg.LOG_FORMAT == "json"

    @pytest.mark.parametrize(
        "field, value",
        [("DOMAIN_MARGIN", -1.0), ("REALNESS_TOL", 0.0), ("BLOWUP_FACTOR", 1.0), ("FFT_WORKERS", 0)],
    )
    def test_invalid(self, field, value):
        with pytest.raises(ValueError):
            validate_settings(Settings(**{field: value}))


class TestExceptions:
    def test_hierarchy(self):
        assert issubclass(DomainError, CoherentNSEError)
        assert issubclass(DomainError, ValueError)
        assert issubclass(BlowUpError, SolverError)


class TestLogging:
    def test_json_format(self, capsys):
        root = setup_logging("INFO", "json")
        assert isinstance(root.handlers[0].formatter, jsonlogger.JsonFormatter)
        logging.getLogger("app.test").info("✅ message")
        line = capsys.readouterr().err.strip().splitlines()[-1]
        assert json.loads(line)["message"] == "✅ message"

    def test_single_handler(self):
        setup_logging("DEBUG", "text")
        root = setup_logging("WARNING", "text")
        assert len(root.handlers) == 1
        assert root.level == logging.WARNING
