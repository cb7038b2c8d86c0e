"""
Testes para o módulo runner
"""
import pytest

from halfspace_kpz.models import MCConfig
from halfspace_kpz.runner import ReplicaRunner


def _draw(src):
    return float(src.uniform("job", 0, 0))


def test_results_follow_replica_order(source):
    """
    Testa se os resultados independem do número de workers e do tamanho do lote
    """
    serial = ReplicaRunner(max_workers=1, batch_size=1).run(_draw, source, 25)
    parallel = ReplicaRunner(max_workers=4, batch_size=7).run(_draw, source, 25)
    assert serial == parallel
    assert len(set(serial)) == 25


def test_replica_sources_are_passed(source):
    """
    Testa se cada réplica recebe source.replica(r)
    """
    results = ReplicaRunner(max_workers=2, batch_size=3).run(lambda s: s.stream_id, source, 10)
    assert results == list(range(10))


def test_run_array_stacks_results(source):
    """
    Testa o empilhamento dos resultados num array
    """
    arr = ReplicaRunner(max_workers=2, batch_size=4).run_array(lambda s: [s.stream_id, 1.0], source, 5)
    assert arr.shape == (5, 2)


def test_errors_are_propagated(source):
    """
    Testa se um erro numa réplica é propagado
    """
    def boom(src):
        raise RuntimeError("falhou")

    with pytest.raises(RuntimeError, match="falhou"):
        ReplicaRunner(max_workers=2, batch_size=2).run(boom, source, 3)


def test_from_config():
    """
    Testa a construção a partir de MCConfig
    """
    runner = ReplicaRunner.from_config(MCConfig(workers=3, batch_size=5))
    assert runner.max_workers == 3
    assert runner.batch_size == 5


def test_invalid_sizes():
    """
    Testa se tamanhos não positivos são rejeitados
    """
    with pytest.raises(ValueError):
        ReplicaRunner(max_workers=0)
