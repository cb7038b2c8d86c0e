"""
Módulo core com funções de inicialização
"""
from typing import Optional

from .config import Settings, load_settings
from .env import SeededSource, WeightField, materialize
from .models import EnvironmentSpec, MCConfig
from .runner import ReplicaRunner


def init_settings(env_file: Optional[str] = None) -> Settings:
    """
    Carrega a configuração do ambiente (.env e variáveis HALFSPACE_KPZ_*)

    Args:
        env_file: Caminho opcional para um arquivo .env

    Returns:
        Configurações validadas
    """
    return load_settings(env_file)


def init_source(seed: Optional[int] = None, settings: Optional[Settings] = None) -> SeededSource:
    """
    Inicializa a fonte aleatória mestre

    Args:
        seed: Semente explícita (tem precedência sobre a configuração)
        settings: Configuração com a semente padrão

    Returns:
        Fonte com stream_id 0
    """
    if seed is None:
        seed = (settings or load_settings()).seed
    return SeededSource(master_seed=seed)


def init_runner(mc: Optional[MCConfig] = None, settings: Optional[Settings] = None) -> ReplicaRunner:
    """
    Inicializa o executor de réplicas a partir da configuração de Monte Carlo ou do ambiente
    """
    if mc is not None:
        return ReplicaRunner.from_config(mc)
    settings = settings or load_settings()
    return ReplicaRunner(max_workers=settings.workers, batch_size=settings.batch_size)


def init_field(spec: EnvironmentSpec, source: SeededSource, settings: Optional[Settings] = None) -> WeightField:
    """
    Materializa um campo de pesos respeitando o orçamento de células configurado
    """
    settings = settings or load_settings()
    return materialize(spec, source, settings.max_cells)
