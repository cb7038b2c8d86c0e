"""
Testes para o módulo polymer
"""
import math

import numpy as np
import pytest

from halfspace_kpz.env import materialize
from halfspace_kpz.errors import DomainError
from halfspace_kpz.models import Algebra, Constraint, EnvironmentSpec, PassageQuery, WeightKind, Window
from halfspace_kpz.polymer import (
    brute_force_log_partition,
    compare_two_line,
    coupled_swap_sampler,
    log_partition,
    random_two_line,
    rsk_two_line,
    trapezoid_log_partition,
    verify_isometry,
)


@pytest.fixture
def log_gamma_field(source):
    spec = EnvironmentSpec(kind=WeightKind.LOG_GAMMA, alpha=1.0, theta=1.5, window=Window.square(1, 6))
    return materialize(spec, source)


def test_unit_weights_count_paths(make_field):
    """
    Testa se com pesos unitários Z conta os caminhos
    """
    field = make_field(np.ones((3, 3)))
    result = log_partition(field, PassageQuery(start=(1, 1), end=(3, 3)))
    assert result.log_z == pytest.approx(math.log(6.0))


def test_log_partition_without_path(make_field):
    """
    Testa se u > v resulta em log Z = -inf
    """
    field = make_field(np.ones((2, 2)))
    assert log_partition(field, PassageQuery(start=(2, 2), end=(1, 1))).log_z == -math.inf


@pytest.mark.parametrize("constraint", [Constraint.none(), Constraint.diagonal(), Constraint.hit_shifted(1)])
def test_log_partition_matches_brute_force(log_gamma_field, constraint):
    """
    Testa a recursão em espaço logarítmico contra a soma sobre todos os caminhos
    """
    q = PassageQuery(start=(1, 1), end=(5, 4), constraint=constraint)
    expected = brute_force_log_partition(log_gamma_field, q)
    assert log_partition(log_gamma_field, q).log_z == pytest.approx(expected, rel=1e-10)


def test_trapezoid_single_cell(log_gamma_field):
    """
    Testa o trapézio com n = m = 1
    """
    result = trapezoid_log_partition(log_gamma_field, 1, 1)
    assert result.log_z == pytest.approx(math.log(log_gamma_field[(1, 1)]))


def test_trapezoid_requires_n_at_least_m(log_gamma_field):
    """
    Testa a pré-condição do trapézio
    """
    with pytest.raises(DomainError):
        trapezoid_log_partition(log_gamma_field, 1, 2)


def test_rsk_max_plus_example():
    """
    Testa o exemplo A = (1, 4), B = (2, 1) na álgebra (max, +)
    """
    env = rsk_two_line([1.0, 4.0], [2.0, 1.0], Algebra.MAX_PLUS)
    assert env.b_hat == pytest.approx([3.0, 3.0])
    assert env.a_hat == pytest.approx([0.0, 2.0])
    assert verify_isometry(env).passed


def test_rsk_sum_product_single_index():
    """
    Testa A = (2), B = (3) na álgebra (+, x)
    """
    env = rsk_two_line([2.0], [3.0], Algebra.SUM_PRODUCT)
    assert env.b_hat == pytest.approx([6.0])
    assert env.a_hat == pytest.approx([1.0])


def test_rsk_max_plus_single_index():
    """
    Testa n = 1 com entradas unitárias na álgebra (max, +)
    """
    env = rsk_two_line([1.0], [1.0], Algebra.MAX_PLUS)
    assert env.b_hat == pytest.approx([2.0])
    assert env.a_hat == pytest.approx([0.0])


@pytest.mark.parametrize("algebra", [Algebra.MAX_PLUS, Algebra.SUM_PRODUCT])
def test_isometry_on_random_instances(source, algebra):
    """
    Testa as identidades de isometria em instâncias aleatórias
    """
    for r in range(20):
        a, b = random_two_line(source.replica(r), 9, algebra)
        report = verify_isometry(rsk_two_line(a, b, algebra))
        assert report.passed, report.max_violation


def test_rsk_rejects_invalid_input():
    """
    Testa a validação das linhas de entrada
    """
    with pytest.raises(DomainError):
        rsk_two_line([1.0, 2.0], [1.0], Algebra.MAX_PLUS)
    with pytest.raises(DomainError):
        rsk_two_line([0.0], [1.0], Algebra.SUM_PRODUCT)
    with pytest.raises(DomainError):
        rsk_two_line([1.0], [1.0], Algebra.MAX_PLUS, queue_start=-1.0)


def test_infinite_queue_repeats_input():
    """
    Testa se uma fila infinita devolve a própria entrada
    """
    env = rsk_two_line([1.0, 2.0], [3.0, 4.0], Algebra.MAX_PLUS, queue_start=math.inf)
    assert env.a_hat == [1.0, 2.0]
    assert env.b_hat == [3.0, 4.0]


@pytest.mark.parametrize(
    "kind,gamma0,gamma1",
    [(WeightKind.EXPONENTIAL, 0.2, 0.4), (WeightKind.LOG_GAMMA, 0.5, 1.5), (WeightKind.GEOMETRIC, 0.8, 0.5)],
)
def test_coupled_swap_preserves_passages(source, kind, gamma0, gamma1):
    """
    Testa se o acoplamento preserva L(x, y) para todo x <= y
    """
    coupling = coupled_swap_sampler(kind, gamma0, gamma1, [0.6] * 8, source)
    assert coupling.report.passed
    assert len(coupling.c) == len(coupling.d) == 8
    again = compare_two_line(coupling.a, coupling.b, coupling.c, coupling.d, Algebra(
        Algebra.SUM_PRODUCT if kind == WeightKind.LOG_GAMMA else Algebra.MAX_PLUS
    ))
    assert again.passed


def test_coupled_swap_parameter_order(source):
    """
    Testa a ordem exigida entre gamma_0 e gamma_1
    """
    with pytest.raises(DomainError):
        coupled_swap_sampler(WeightKind.EXPONENTIAL, 0.5, 0.2, [0.3], source)
    with pytest.raises(DomainError):
        coupled_swap_sampler(WeightKind.GEOMETRIC, 0.5, 0.8, [0.6], source)
    with pytest.raises(DomainError):
        coupled_swap_sampler(WeightKind.EXPONENTIAL, 0.2, 0.4, [], source)
