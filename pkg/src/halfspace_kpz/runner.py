"""
Módulo para execução de réplicas de Monte Carlo em lotes paralelos
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, TypeVar

import numpy as np
from tqdm import tqdm

from .env import SeededSource
from .models import MCConfig

T = TypeVar("T")


class ReplicaRunner:
    def __init__(self, max_workers: int = 4, batch_size: int = 64, show_progress: bool = False):
        if max_workers < 1 or batch_size < 1:
            raise ValueError("max_workers e batch_size devem ser positivos")
        self.max_workers = max_workers
        self.batch_size = batch_size
        self.show_progress = show_progress
        self.logger = logging.getLogger(__name__)

    @classmethod
    def from_config(cls, mc: MCConfig) -> "ReplicaRunner":
        return cls(max_workers=mc.workers, batch_size=mc.batch_size, show_progress=mc.show_progress)

    def run(
        self,
        job: Callable[[SeededSource], T],
        source: SeededSource,
        replicas: int,
        label: Optional[str] = None,
    ) -> List[T]:
        """
        Executa job(source.replica(r)) para r = 0..replicas-1.

        Args:
            job: Função pura de uma fonte aleatória
            source: Fonte mestre
            replicas: Número de réplicas
            label: Nome usado nos logs e na barra de progresso

        Returns:
            Resultados na ordem das réplicas (independente do número de workers)
        """
        label = label or getattr(job, "__name__", "job")
        self.logger.info(f"Iniciando {replicas} réplicas de {label} (seed={source.master_seed})")

        # Divide em lotes do tamanho especificado
        batches = [
            range(i, min(i + self.batch_size, replicas))
            for i in range(0, replicas, self.batch_size)
        ]

        all_results: List[T] = []
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            for batch in tqdm(batches, desc=label, disable=not self.show_progress):
                future_to_replica = {
                    executor.submit(job, source.replica(r)): r
                    for r in batch
                }

                # Coleta os resultados mantendo a ordem
                for future in future_to_replica:
                    r = future_to_replica[future]
                    try:
                        all_results.append(future.result())
                    except Exception as e:
                        self.logger.error(f"Erro na réplica {r} de {label}: {e}")
                        raise

        self.logger.info(f"{label}: {replicas} réplicas concluídas")
        return all_results

    def run_array(
        self,
        job: Callable[[SeededSource], object],
        source: SeededSource,
        replicas: int,
        label: Optional[str] = None,
    ) -> np.ndarray:
        """Como run, empilhando os resultados num array (réplica no eixo 0)."""
        return np.asarray(self.run(job, source, replicas, label), dtype=np.float64)
