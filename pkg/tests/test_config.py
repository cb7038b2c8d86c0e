"""
Testes para o módulo config
"""
import logging
import os
from unittest.mock import patch

import pytest

from halfspace_kpz.config import DEFAULT_SEED, load_settings, setup_logging
from halfspace_kpz.errors import ConfigurationError


@pytest.fixture(autouse=True)
def no_dotenv():
    with patch("halfspace_kpz.config.load_dotenv"):
        yield


def test_defaults_without_environment():
    """
    Testa os valores padrão quando nenhuma variável está definida
    """
    with patch.dict(os.environ, {}, clear=True):
        settings = load_settings()
    assert settings.seed == DEFAULT_SEED
    assert settings.workers == 4
    assert settings.output_dir == "results"


def test_environment_overrides():
    """
    Testa se as variáveis HALFSPACE_KPZ_* são lidas
    """
    env = {
        "HALFSPACE_KPZ_SEED": "99",
        "HALFSPACE_KPZ_WORKERS": "2",
        "HALFSPACE_KPZ_MAX_CELLS": "1000",
        "HALFSPACE_KPZ_LOG_LEVEL": "debug",
    }
    with patch.dict(os.environ, env, clear=True):
        settings = load_settings()
    assert settings.seed == 99
    assert settings.workers == 2
    assert settings.max_cells == 1000
    assert settings.log_level == "DEBUG"


def test_non_integer_seed_raises():
    """
    Testa se uma semente não inteira levanta ConfigurationError
    """
    with patch.dict(os.environ, {"HALFSPACE_KPZ_SEED": "abc"}, clear=True):
        with pytest.raises(ConfigurationError, match="HALFSPACE_KPZ_SEED deve ser inteiro"):
            load_settings()


def test_non_positive_workers_raise():
    """
    Testa se workers <= 0 é rejeitado
    """
    with patch.dict(os.environ, {"HALFSPACE_KPZ_WORKERS": "0"}, clear=True):
        with pytest.raises(ConfigurationError):
            load_settings()


def test_env_file_is_forwarded():
    """
    Testa se o caminho do .env é repassado ao load_dotenv
    """
    with patch("halfspace_kpz.config.load_dotenv") as mock_load:
        with patch.dict(os.environ, {}, clear=True):
            load_settings("custom.env")
    mock_load.assert_called_once_with("custom.env")


def test_setup_logging_with_file(tmp_path):
    """
    Testa se o logging grava no arquivo configurado
    """
    log_file = tmp_path / "logs" / "run.log"
    setup_logging("DEBUG", str(log_file))
    logging.getLogger("halfspace_kpz.teste").debug("mensagem de teste")
    for handler in logging.getLogger().handlers:
        handler.flush()
    assert "mensagem de teste" in log_file.read_text(encoding="utf-8")
    setup_logging("WARNING")
