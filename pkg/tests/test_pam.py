"""
Testes para o módulo pam
"""
from unittest.mock import patch

import numpy as np
import pytest
from pydantic import ValidationError

from halfspace_kpz.errors import DomainError, InvariantError
from halfspace_kpz.models import HeightFunction, SpaceTimePoint
from halfspace_kpz.pam import (
    CylinderGraph,
    closed_form_distance,
    event_graph,
    graph_distance,
    level_spread,
    pam_clocks,
    pam_distance,
    pam_distance_reduced,
    pam_geodesic,
    level_matrix,
    rescaled_pam,
    reversed_reduced_distance,
    spread_bound,
    tasep_coupling_check,
)
from halfspace_kpz.tasep import ClockField


@pytest.fixture
def clocks(source):
    return ClockField.sample(0.7, 12, 2.0, source, levels=2)


@pytest.mark.parametrize(
    "levels,u,v,expected",
    [(2, (0, 0), (2, 2), 2), (1, (3, 1), (1, 1), 2), (2, (0, 0), (0, 0), 0), (2, (0, 0), (0, 2), 2)],
)
def test_closed_form_distance(levels, u, v, expected):
    """
    Testa D_d em exemplos conhecidos
    """
    assert closed_form_distance(levels, u, v) == expected


@pytest.mark.parametrize("levels", [1, 2, 3])
def test_graph_distance_matches_closed_form(levels):
    """
    Testa a busca em largura no grafo contra a fórmula fechada
    """
    g = CylinderGraph(levels, 4)
    vertices = [(x, a) for x in range(5) for a in g.levels_at(x)]
    for u in vertices:
        for v in vertices:
            assert graph_distance(g, u, v) == closed_form_distance(levels, u, v)


def test_cylinder_graph_degrees():
    """
    Testa que x = 0 tem apenas a aresta para a direita
    """
    g = CylinderGraph(2, 5)
    assert g.out_degree((0, 0)) == 1
    assert g.out_degree((2, 0)) == 2
    with pytest.raises(DomainError):
        g.check_vertex((1, 0))


def test_empty_clocks_reduce_to_graph_distance():
    """
    Testa se sem relógios H_d coincide com D_d
    """
    empty = ClockField.empty(1.0, 10, 3.0, levels=2)
    p = SpaceTimePoint(x=0, a=0, time=0.0)
    q = SpaceTimePoint(x=2, a=2, time=1.0)
    assert pam_distance(empty, p, q) == 2
    assert pam_distance_reduced(empty, 0, 0.0, 3, 1.0) == 3


def test_ring_blocks_waiting():
    """
    Testa se um anel no vértice de partida obriga a um movimento
    """
    clocks = ClockField.from_events(1.0, 6, 2.0, [(0.5, 0, 0)])
    p = SpaceTimePoint(x=0, a=0, time=0.0)
    q = SpaceTimePoint(x=0, a=0, time=1.0)
    assert pam_distance(clocks, p, q) == 2


def test_time_order_is_required(clocks):
    """
    Testa se p.time < q.time é exigido
    """
    p = SpaceTimePoint(x=0, a=0, time=1.0)
    with pytest.raises(DomainError):
        pam_distance(clocks, p, p)


def test_space_time_point_parity():
    """
    Testa a paridade x + a dos pontos espaço-tempo
    """
    with pytest.raises(ValidationError):
        SpaceTimePoint(x=1, a=0, time=0.0)


def test_geodesic_cost_matches_sweep(clocks):
    """
    Testa se Dijkstra no grafo de eventos e a varredura exata concordam
    """
    p = SpaceTimePoint(x=1, a=1, time=0.0)
    q = SpaceTimePoint(x=3, a=1, time=2.0)
    cost, table = pam_geodesic(clocks, p, q)
    assert cost == pam_distance(clocks, p, q)
    assert list(table.columns) == ["time", "x", "a"]
    assert table.iloc[-1].tolist() == [2.0, 3, 1]


def test_event_graph_layers(clocks):
    """
    Testa se as camadas do grafo de eventos começam em s e seguem os anéis em (s, t]
    """
    g, layers = event_graph(clocks, 0.5, 1.5)
    assert layers[0] == 0.5
    assert all(0.5 < r <= 1.5 for r in layers[1:])
    assert g.number_of_nodes() > 0


@pytest.mark.parametrize("levels", [1, 2])
def test_tasep_coupling_identity(source, levels):
    """
    Testa a identidade exata entre o acoplamento de nível d e a fórmula variacional
    """
    clocks = ClockField.sample(0.7, 30, 2.0, source.child(f"d{levels}"), levels=levels)
    h0 = HeightFunction.narrow_wedge(2, 30)
    assert tasep_coupling_check(clocks, h0, 2.0, list(range(6)))
    assert tasep_coupling_check(clocks, h0, 0.0, [0, 1])


def test_time_reversal_symmetry(clocks):
    """
    Testa a simetria por inversão temporal de H_d^-
    """
    forward = pam_distance_reduced(clocks, 1, 0.2, 4, 1.8)
    assert reversed_reduced_distance(clocks, 1, 0.2, 4, 1.8) == forward


def test_level_spread_is_bounded(source):
    """
    Testa se a dispersão entre níveis não passa de 2d = 4 em 100 realizações com d = 2
    """
    for k in range(100):
        clocks = ClockField.sample(0.7, 12, 2.0, source.child(f"r{k}"), levels=2)
        assert 0 <= level_spread(clocks, 1, 0.0, 3, 2.0) <= 4


def test_level_spread_with_one_endpoint_fixed(source):
    """
    Testa se, com d = 3, a dispersão com um extremo fixo não passa de 2d - 2
    """
    for k in range(20):
        clocks = ClockField.sample(0.7, 12, 2.0, source.child(f"d3-{k}"), levels=3)
        values = level_matrix(clocks, 2, 0.0, 4, 2.0)
        assert (values.max(axis=0) - values.min(axis=0)).max() <= 4
        assert (values.max(axis=1) - values.min(axis=1)).max() <= 4
        assert values.max() - values.min() <= spread_bound(3)


def test_level_spread_can_exceed_2d_for_three_levels():
    """
    Testa um campo com d = 3 em que a dispersão total chega a 8 > 2d, dentro do limite garantido
    """
    events = [(0.1, 2, 2), (0.9, 2, 4), (0.3, 1, 3), (0.7, 1, 3), (0.3, 3, 3), (0.7, 3, 3)]
    clocks = ClockField.from_events(0.7, 10, 1.0, events, levels=3)
    values = level_matrix(clocks, 2, 0.0, 2, 1.0)
    assert values[0, 0] == 0
    assert values[1, 2] == 8
    assert level_spread(clocks, 2, 0.0, 2, 1.0) == 8 == spread_bound(3)


def test_level_spread_violation_raises(clocks):
    """
    Testa se uma matriz de níveis fora do limite levanta InvariantError, inclusive via H_d^-
    """
    bad = np.array([[0.0, 9.0], [0.0, 0.0]])
    with patch("halfspace_kpz.pam.level_matrix", return_value=bad):
        with pytest.raises(InvariantError, match="Dispersão"):
            level_spread(clocks, 1, 0.0, 3, 2.0)
        with pytest.raises(InvariantError):
            pam_distance_reduced(clocks, 1, 0.0, 3, 2.0)
        assert pam_distance_reduced(clocks, 1, 0.0, 3, 2.0, check_spread=False) >= 0


def test_rescaled_pam(source):
    """
    Testa a métrica reescalada e a validação do alpha dos relógios
    """
    points = [(0.0, 0.0, 0.25, 0.01)]
    clocks = pam_clocks(0.0, 0.25, points, 1, source)
    values = rescaled_pam(clocks, 0.0, 0.25, points)
    assert len(values) == 1
    with pytest.raises(DomainError):
        rescaled_pam(clocks, 1.0, 0.25, points)
