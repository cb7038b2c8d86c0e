"""
Testes para o módulo lpp
"""
import math

import numpy as np
import pytest

from halfspace_kpz.errors import DomainError, NoPathError, RangeError
from halfspace_kpz.lpp import (
    BoundaryFunction,
    boundary_seeded_passage,
    brute_force_passage,
    constrained_parallelogram,
    extract_geodesic,
    l_point,
    metric_composition_check,
    passage_time,
    path_weight,
    point_to_line_trapezoid,
    quadrangle_check,
)
from halfspace_kpz.env import override_cells
from halfspace_kpz.models import Constraint, PassageQuery, TieBreak


@pytest.fixture
def two_by_two(make_field):
    # w(1,1)=1, w(1,2)=2, w(2,1)=5, w(2,2)=1
    return make_field([[1.0, 2.0], [5.0, 1.0]])


def test_all_ones_passage(make_field):
    """
    Testa se numa grade 3x3 de uns a passagem de (1,1) a (3,3) vale 5
    """
    field = make_field(np.ones((3, 3)))
    result = passage_time(field, PassageQuery(start=(1, 1), end=(3, 3)))
    assert result.value == 5.0


def test_two_by_two_value_and_geodesic(two_by_two):
    """
    Testa o valor e a geodésica do exemplo 2x2
    """
    q = PassageQuery(start=(1, 1), end=(2, 2))
    assert passage_time(two_by_two, q).value == 7.0
    path = extract_geodesic(two_by_two, q)
    assert path == [(1, 1), (2, 1), (2, 2)]
    assert path_weight(two_by_two, path) == 7.0


def test_excluding_start_weight(two_by_two):
    """
    Testa a variante X^- que não soma o peso do ponto inicial
    """
    q = PassageQuery(start=(1, 1), end=(2, 2), include_start_weight=False)
    assert passage_time(two_by_two, q).value == 6.0


def test_unordered_endpoints_give_minus_infinity(two_by_two):
    """
    Testa se u > v coordenada a coordenada resulta em -inf
    """
    result = passage_time(two_by_two, PassageQuery(start=(2, 2), end=(1, 1)))
    assert result.value == -math.inf


def test_out_of_window_raises(two_by_two):
    """
    Testa se pontos fora da janela levantam RangeError
    """
    with pytest.raises(RangeError):
        passage_time(two_by_two, PassageQuery(start=(1, 1), end=(3, 3)))


def test_geodesic_without_path_raises(make_field):
    """
    Testa se não há geodésica quando o destino está fora da rede
    """
    field = make_field([[1.0, -np.inf], [1.0, 1.0]])
    with pytest.raises(NoPathError):
        extract_geodesic(field, PassageQuery(start=(1, 1), end=(1, 2)))


def test_infinite_weight_is_counted(make_field):
    """
    Testa se um peso +inf no caminho torna o valor infinito e é contado
    """
    field = make_field([[1.0, np.inf], [1.0, 1.0]])
    result = passage_time(field, PassageQuery(start=(1, 1), end=(2, 2)))
    assert result.value == math.inf
    assert result.infinite_cells == 1
    assert result.finite_part == 2.0


def test_tie_break_prefers_step_from_previous_i(make_field):
    """
    Testa o desempate padrão da geodésica: passo vindo de (i-1, j)
    """
    field = make_field(np.ones((2, 2)))
    path = extract_geodesic(field, PassageQuery(start=(1, 1), end=(2, 2)))
    assert path == [(1, 1), (1, 2), (2, 2)]


def test_tie_break_is_configurable(make_field):
    """
    Testa o desempate alternativo: passo vindo de (i, j-1)
    """
    field = make_field(np.ones((3, 3)))
    q = PassageQuery(start=(1, 1), end=(3, 3), tie_break=TieBreak.FROM_J)
    assert extract_geodesic(field, q) == [(1, 1), (2, 1), (3, 1), (3, 2), (3, 3)]
    default = extract_geodesic(field, PassageQuery(start=(1, 1), end=(3, 3)))
    assert default == [(1, 1), (1, 2), (1, 3), (2, 3), (3, 3)]


def test_monotone_in_weights(symmetric_field):
    """
    Testa se aumentar um peso não diminui o tempo de passagem
    """
    q = PassageQuery(start=(1, 1), end=(6, 6))
    before = passage_time(symmetric_field, q).value
    bumped = override_cells(symmetric_field, [((3, 2), symmetric_field[(3, 2)] + 1.0)])
    assert passage_time(bumped, q).value >= before


def test_diagonal_condition_is_free_on_symmetric_field(symmetric_field):
    """
    Testa se a condição diagonal não altera o valor num campo simétrico
    """
    free = passage_time(symmetric_field, PassageQuery(start=(1, 1), end=(7, 5))).value
    diag = passage_time(
        symmetric_field, PassageQuery(start=(1, 1), end=(7, 5), constraint=Constraint.diagonal())
    ).value
    assert diag == pytest.approx(free)


@pytest.mark.parametrize(
    "constraint",
    [Constraint.none(), Constraint.diagonal(), Constraint.hit_shifted(1), Constraint.hit_shifted(0)],
)
def test_dynamic_programming_matches_brute_force(symmetric_field, constraint):
    """
    Testa a programação dinâmica contra a enumeração exaustiva
    """
    q = PassageQuery(start=(1, 1), end=(5, 4), constraint=constraint)
    assert passage_time(symmetric_field, q).value == pytest.approx(brute_force_passage(symmetric_field, q))


@pytest.mark.parametrize("j,h,expected", [(0, 4, (4, 4)), (2, 3, (5, 3)), (-2, 3, (3, 5))])
def test_l_point(j, h, expected):
    """
    Testa a parametrização dos pontos do L
    """
    assert l_point(j, h) == expected


def test_trapezoid_requires_n_at_least_m(symmetric_field):
    """
    Testa a pré-condição n >= m >= 1 do trapézio
    """
    with pytest.raises(DomainError):
        point_to_line_trapezoid(symmetric_field, 2, 3)


def test_trapezoid_dominates_corner(symmetric_field):
    """
    Testa se o máximo ponto-a-linha domina o valor no canto (n, m)
    """
    result = point_to_line_trapezoid(symmetric_field, 4, 3)
    corner = passage_time(symmetric_field, PassageQuery(start=(1, 1), end=(4, 3))).value
    assert result.value >= corner - 1e-12
    assert 0 <= result.argmax_index <= 2


def test_trapezoid_single_cell(symmetric_field):
    """
    Testa o caso n = m = 1
    """
    assert point_to_line_trapezoid(symmetric_field, 1, 1).value == symmetric_field[(1, 1)]


def test_boundary_seeded_with_zero_function(symmetric_field):
    """
    Testa se com f = 0 a passagem até [0, 1]_L é o peso de (1, 1)
    """
    result = boundary_seeded_passage(symmetric_field, BoundaryFunction.zero(), (0, 1))
    assert result.value == pytest.approx(symmetric_field[(1, 1)])


def test_boundary_function_outside_support():
    """
    Testa se f sem cauda levanta DomainError fora do suporte
    """
    f = BoundaryFunction.from_arrays([0, 1], [0.0, 2.0])
    assert f(1) == 2.0
    with pytest.raises(DomainError):
        f(5)


def test_metric_composition(symmetric_field):
    """
    Testa a composição métrica através de uma linha intermediária
    """
    assert metric_composition_check(symmetric_field, (1, 1), (6, 7), 4)
    assert metric_composition_check(symmetric_field, (1, 1), (6, 7), 4, Constraint.diagonal())


def test_metric_composition_requires_inner_line(symmetric_field):
    """
    Testa se a linha r precisa estar estritamente entre u e v
    """
    with pytest.raises(DomainError):
        metric_composition_check(symmetric_field, (1, 1), (6, 7), 7)


def test_quadrangle_inequality(symmetric_field):
    """
    Testa a desigualdade do quadrângulo
    """
    assert quadrangle_check(symmetric_field, 1, 2, 5, 7, 1, 6)


def test_quadrangle_requires_order(symmetric_field):
    """
    Testa a validação da ordem dos pontos
    """
    with pytest.raises(DomainError):
        quadrangle_check(symmetric_field, 3, 2, 5, 7, 1, 6)


def test_parallelogram_bounded_by_free_passage(symmetric_field):
    """
    Testa se o corredor limita o valor e um corredor largo não restringe
    """
    free = passage_time(symmetric_field, PassageQuery(start=(1, 1), end=(8, 8))).value
    narrow = constrained_parallelogram(symmetric_field, 8, 0.5).value
    wide = constrained_parallelogram(symmetric_field, 8, 10.0).value
    assert narrow <= free + 1e-12
    assert wide == pytest.approx(free)


def test_parallelogram_accepts_exact_width(symmetric_field):
    """
    Testa a fronteira ell * n^(2/3) = 2 (n = 8, ell = 0.5) e o corredor |i - j| <= 2
    """
    result = constrained_parallelogram(symmetric_field, 8, 0.5, geodesic=True)
    assert result.geodesic[0] == (1, 1)
    assert result.geodesic[-1] == (8, 8)
    assert max(abs(i - j) for i, j in result.geodesic) <= 2


def test_parallelogram_too_thin(symmetric_field):
    """
    Testa a pré-condição ell * n^(2/3) >= 2
    """
    with pytest.raises(DomainError):
        constrained_parallelogram(symmetric_field, 8, 0.1)
