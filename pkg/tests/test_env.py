"""
Testes para o módulo env
"""
import math

import numpy as np
import pytest
from scipy import stats

from halfspace_kpz.env import (
    SeededSource,
    exponential_from_uniform,
    geometric_from_uniform,
    inverse_gamma_from_uniform,
    materialize,
    override_cells,
    sample_weight,
    scale_diagonal,
)
from halfspace_kpz.errors import CapacityError, DomainError, ParameterError, RangeError
from halfspace_kpz.models import EnvironmentSpec, WeightKind, Window


def test_uniform_is_pure_function_of_coordinates(source):
    """
    Testa se o sorteio depende apenas da semente, da tag e das coordenadas
    """
    a = source.uniform("weight", np.arange(5), 3)
    b = SeededSource(master_seed=12345).uniform("weight", np.arange(5), 3)
    np.testing.assert_array_equal(a, b)
    assert float(source.uniform("weight", 2, 3)) == a[2]
    assert np.all((a > 0) & (a < 1))


def test_streams_and_children_differ(source):
    """
    Testa se réplicas e filhos produzem sorteios distintos
    """
    base = source.uniform("weight", 1, 1)
    assert source.replica(1).uniform("weight", 1, 1) != base
    assert source.child("outro").uniform("weight", 1, 1) != base
    assert source.uniform("clock", 1, 1) != base


def test_uniform_is_roughly_uniform(source):
    """
    Testa a distribuição das uniformes com um KS contra U(0, 1)
    """
    u = source.uniform("weight", np.arange(4000), 0)
    assert stats.kstest(u, "uniform").pvalue > 1e-4


def test_degenerate_exponential():
    """
    Testa os casos degenerados da exponencial
    """
    u = np.array([0.3, 0.3, 0.3])
    out = exponential_from_uniform(u, np.array([0.0, np.inf, 2.0]))
    assert out[0] == math.inf
    assert out[1] == 0.0
    assert out[2] == pytest.approx(-math.log(0.3) / 2.0)


def test_degenerate_inverse_gamma():
    """
    Testa se forma infinita dá peso zero e forma zero dá +inf
    """
    out = inverse_gamma_from_uniform(np.array([0.5, 0.5]), np.array([np.inf, 0.0]))
    assert out[0] == 0.0
    assert out[1] == math.inf


def test_geometric_edge_cases():
    """
    Testa q = 0, q = 1 e q negativo na geométrica
    """
    out = geometric_from_uniform(np.array([0.5, 0.5]), np.array([0.0, 1.0]))
    assert out[0] == 0.0
    assert out[1] == math.inf
    with pytest.raises(ParameterError):
        geometric_from_uniform(np.array([0.5]), -0.1)


def test_nan_parameter_raises():
    """
    Testa se parâmetro NaN levanta ParameterError
    """
    with pytest.raises(ParameterError):
        exponential_from_uniform(np.array([0.5]), np.nan)


def test_geometric_tail(source):
    """
    Testa a cauda P(X >= k) = q^k
    """
    x = source.geometric(0.5, "geo", np.arange(20000), 0)
    assert np.mean(x >= 2) == pytest.approx(0.25, abs=0.02)


def test_symmetric_field_is_symmetric(symmetric_field):
    """
    Testa se o campo simétrico satisfaz w(i, j) = w(j, i)
    """
    np.testing.assert_array_equal(symmetric_field.values, symmetric_field.values.T)


def test_field_is_read_only(symmetric_field):
    """
    Testa se os valores materializados não podem ser alterados
    """
    with pytest.raises(ValueError):
        symmetric_field.values[0, 0] = 1.0


def test_half_space_field_has_no_cells_above_diagonal(source):
    """
    Testa se o meio-espaço marca i < j como fora da rede
    """
    spec = EnvironmentSpec.half_space(0.7, Window.square(1, 5))
    field = materialize(spec, source)
    assert field[(2, 3)] == -math.inf
    assert math.isfinite(field[(3, 2)])
    assert sample_weight(spec, source, 3, 2) == field[(3, 2)]


def test_sample_weight_outside_window(source):
    """
    Testa se sortear fora da janela levanta RangeError
    """
    spec = EnvironmentSpec.half_space(0.7, Window.square(1, 5))
    with pytest.raises(RangeError):
        sample_weight(spec, source, 6, 1)


def test_diagonal_mean_matches_alpha(source):
    """
    Testa se a diagonal do meio-espaço exponencial tem média 1/alpha
    """
    spec = EnvironmentSpec.half_space(0.5, Window.square(1, 3000))
    diag = np.array([sample_weight(spec, source, i, i) for i in range(1, 2001)])
    assert diag.mean() == pytest.approx(2.0, rel=0.1)


def test_materialize_respects_budget(source):
    """
    Testa se uma janela maior que o orçamento levanta CapacityError
    """
    spec = EnvironmentSpec.half_space(0.7, Window.square(1, 100))
    with pytest.raises(CapacityError):
        materialize(spec, source, max_cells=1000)


def test_override_cells_mirrors_on_symmetric_field(symmetric_field):
    """
    Testa se a substituição de células preserva a simetria
    """
    changed = override_cells(symmetric_field, [((4, 2), 9.0)])
    assert changed[(4, 2)] == 9.0
    assert changed[(2, 4)] == 9.0
    assert symmetric_field[(4, 2)] != 9.0


def test_override_cells_rejects_negative(symmetric_field):
    """
    Testa se pesos negativos são rejeitados
    """
    with pytest.raises(DomainError):
        override_cells(symmetric_field, [((1, 1), -1.0)])


def test_scale_diagonal(symmetric_field):
    """
    Testa se apenas a diagonal é multiplicada pelo fator
    """
    scaled = scale_diagonal(symmetric_field, 0.5)
    assert scaled[(3, 3)] == pytest.approx(0.5 * symmetric_field[(3, 3)])
    assert scaled[(3, 2)] == symmetric_field[(3, 2)]
    with pytest.raises(DomainError):
        scale_diagonal(symmetric_field, -1.0)


def test_boundary_column_layout(source):
    """
    Testa se a coluna i = 1 usa alpha e o restante usa beta
    """
    spec = EnvironmentSpec.boundary_column(0.25, 4.0, Window(i_min=1, i_max=2, j_min=1, j_max=4000))
    field = materialize(spec, source)
    assert field.values[0].mean() == pytest.approx(4.0, rel=0.1)
    assert field.values[1].mean() == pytest.approx(0.25, rel=0.1)
    assert field.kind == WeightKind.EXPONENTIAL
