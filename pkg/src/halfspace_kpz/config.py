"""
Módulo de configuração: variáveis de ambiente (.env) e logging
"""
import logging
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field

from .errors import ConfigurationError

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

ENV_PREFIX = "HALFSPACE_KPZ_"

DEFAULT_SEED = 20240601


class Settings(BaseModel):
    """
    Configuração resolvida do ambiente
    """
    seed: int = DEFAULT_SEED
    workers: int = Field(default=4, ge=1)
    batch_size: int = Field(default=64, ge=1)
    max_cells: int = Field(default=50_000_000, ge=1)
    log_level: str = "INFO"
    output_dir: str = "results"


def _read_int(name: str, default: int) -> int:
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw, 0)
    except ValueError:
        raise ConfigurationError(f"{ENV_PREFIX}{name} deve ser inteiro, recebido '{raw}'")


def load_settings(env_file: Optional[str] = None) -> Settings:
    """
    Carrega as configurações a partir das variáveis de ambiente

    Args:
        env_file: Caminho opcional para um arquivo .env

    Returns:
        Configurações validadas
    """
    load_dotenv(env_file)

    workers = _read_int("WORKERS", 4)
    batch_size = _read_int("BATCH_SIZE", 64)
    if workers < 1 or batch_size < 1:
        raise ConfigurationError("WORKERS e BATCH_SIZE devem ser positivos")

    return Settings(
        seed=_read_int("SEED", DEFAULT_SEED),
        workers=workers,
        batch_size=batch_size,
        max_cells=_read_int("MAX_CELLS", 50_000_000),
        log_level=os.environ.get(ENV_PREFIX + "LOG_LEVEL", "INFO").upper(),
        output_dir=os.environ.get(ENV_PREFIX + "OUTPUT_DIR", "results"),
    )


def setup_logging(level: str = "INFO", log_file: Optional[str] = None) -> None:
    """
    Configura o logging do pacote

    Args:
        level: Nível de log (DEBUG, INFO, ...)
        log_file: Arquivo opcional para gravar os logs
    """
    handlers: list[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))

    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )
