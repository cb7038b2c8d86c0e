"""
Testes para o módulo tasep
"""
import numpy as np
import pytest
from pydantic import ValidationError

from halfspace_kpz.errors import DomainError, PaddingError
from halfspace_kpz.models import HeightFunction, MCConfig
from halfspace_kpz.runner import ReplicaRunner
from halfspace_kpz.tasep import (
    ClockField,
    evolve_clocks,
    height_from_lpp,
    height_trajectory,
    lpp_cell,
    required_width,
    rescale_height,
    rescaled_fixed_point_marginal,
    tasep_field,
    tasep_tail_scan,
)


def test_height_function_validation():
    """
    Testa as restrições de SRW+ e de paridade de h(0)
    """
    with pytest.raises(ValidationError):
        HeightFunction(values=[1, 2])
    with pytest.raises(ValidationError):
        HeightFunction(values=[0, 2])
    assert HeightFunction.narrow_wedge(3, 5).values == [4, 3, 2, 1, 2, 3]


def test_flat_extension_alternates():
    """
    Testa a extensão alternada da condição plana
    """
    h = HeightFunction.flat(3)
    assert [h(x) for x in range(8)] == [0, 1, 0, 1, 0, 1, 0, 1]


def test_empty_clocks_keep_height():
    """
    Testa se sem eventos a altura não muda
    """
    h0 = HeightFunction.narrow_wedge(2, 6)
    clocks = ClockField.empty(1.0, 6, 5.0)
    assert evolve_clocks(h0, clocks, 5.0).values == h0.values


def test_single_flip_at_origin():
    """
    Testa um anel em (0, 0) sobre um mínimo local em x = 0
    """
    h0 = HeightFunction.narrow_wedge(0, 5)
    clocks = ClockField.from_events(1.0, 8, 2.0, [(0.5, 0, 0), (0.7, 1, 1)])
    h = evolve_clocks(h0, clocks, 1.0)
    assert h.values[:3] == [2, 3, 2]


def test_event_at_final_time_is_applied():
    """
    Testa o intervalo semiaberto (s, t]: um anel exatamente em t é processado
    """
    h0 = HeightFunction.narrow_wedge(0, 5)
    clocks = ClockField.from_events(1.0, 8, 2.0, [(1.0, 0, 0)])
    assert evolve_clocks(h0, clocks, 1.0).values[0] == 2
    assert evolve_clocks(h0, clocks, 0.99).values[0] == 0


def test_wrong_level_is_ignored():
    """
    Testa se no acoplamento d = 2 o anel só age quando a = h(x) mod 4
    """
    h0 = HeightFunction.narrow_wedge(0, 5)
    clocks = ClockField.from_events(1.0, 8, 2.0, [(0.5, 0, 2)], levels=2)
    assert evolve_clocks(h0, clocks, 1.0).values[0] == 0


def test_boundary_contamination_raises():
    """
    Testa se observar um sítio contaminado pela borda levanta PaddingError
    """
    h0 = HeightFunction.flat(4)
    clocks = ClockField.from_events(1.0, 4, 1.0, [(0.5, 4, 0)])
    with pytest.raises(PaddingError):
        evolve_clocks(h0, clocks, 1.0, observe=4)
    assert evolve_clocks(h0, clocks, 1.0, observe=3).width == 3


def test_sampled_clocks_are_valid_and_reproducible(source):
    """
    Testa a validade dos eventos e a reprodutibilidade do sorteio
    """
    clocks = ClockField.sample(0.5, 10, 3.0, source, levels=2)
    again = ClockField.sample(0.5, 10, 3.0, source, levels=2)
    assert clocks.events() == again.events()
    assert np.all(np.diff(clocks.times) >= 0)
    assert all((x + a) % 2 == 0 and 0 <= a < 4 for _, x, a in clocks.events())
    with pytest.raises(DomainError):
        ClockField.sample(0.0, 10, 3.0, source)


def test_reversed_clocks():
    """
    Testa a inversão temporal com níveis a -> -a mod 2d
    """
    clocks = ClockField.from_events(1.0, 5, 2.0, [(0.5, 1, 1)], levels=2)
    assert clocks.reversed().events() == [(1.5, 1, 3)]


def test_clock_record_round_trip(source):
    """
    Testa a serialização dos relógios em ClockRecord
    """
    clocks = ClockField.sample(1.0, 4, 1.0, source)
    restored = ClockField.from_record(clocks.to_record())
    assert restored.events() == clocks.events()


def test_height_trajectory_table():
    """
    Testa o formato da tabela de trajetória
    """
    h0 = HeightFunction.narrow_wedge(0, 5)
    clocks = ClockField.from_events(1.0, 8, 2.0, [(0.5, 0, 0)])
    table = height_trajectory(h0, clocks, [0.0, 1.0], [0, 1])
    assert list(table.columns) == ["t", "x", "h"]
    assert table["h"].tolist() == [0, 1, 2, 1]


def test_lpp_cell():
    """
    Testa R(x, g) = ((x + g)/2, (g - x)/2)
    """
    assert lpp_cell(3, 5) == (4, 1)
    assert lpp_cell(0, 2) == (1, 1)


def test_height_from_lpp_on_unit_weights(source):
    """
    Testa o exemplo com pesos unitários, h = delta_0, t = 2.5 e x = 0
    """
    h0 = HeightFunction.narrow_wedge(0, 10)
    field = tasep_field(1.0, h0, [0], 2.5, source)
    ones = field.with_values(np.where(field.values > -np.inf, 1.0, -np.inf))
    assert height_from_lpp(ones, h0, 2.5, 0) == 2


def test_required_width_grows_with_horizon():
    """
    Testa se a janela exigida cresce com o horizonte
    """
    assert required_width(10, 0.5, 4.0) > required_width(10, 0.5, 1.0) > 10


def test_rescale_round_trip():
    """
    Testa se A_eps seguido da inversa devolve a altura
    """
    h = HeightFunction.flat(6)
    assert rescale_height(h, 0.25).inverse().values == h.values


def test_fixed_point_marginal_at_time_zero(source):
    """
    Testa se em t = 0 o marginal reproduz A_eps h0
    """
    h0 = HeightFunction.narrow_wedge(0, 20)
    values = rescaled_fixed_point_marginal(h0, 0.0, 0.25, 0.0, [0.0, 0.25], source)
    assert values == pytest.approx([0.0, -1.0])


def test_fixed_point_marginal_validation(source):
    """
    Testa os erros de domínio do marginal reescalado
    """
    h0 = HeightFunction.narrow_wedge(0, 20)
    with pytest.raises(DomainError):
        rescaled_fixed_point_marginal(h0, 100.0, 0.25, 0.1, [0.0], source)
    with pytest.raises(DomainError):
        rescaled_fixed_point_marginal(h0, 0.0, 0.25, 0.1, [0.0], source, method="outro")


def test_tail_scan(small_mc):
    """
    Testa o formato e a monotonia da varredura de caudas
    """
    runner = ReplicaRunner(max_workers=1, batch_size=8)
    table = tasep_tail_scan(0.7, 0, 0, 2.0, [0.1, 0.3], small_mc, runner)
    assert list(table.columns) == ["eps", "upper", "lower", "upper_envelope", "lower_envelope"]
    assert table.attrs["monotone"]
    with pytest.raises(DomainError):
        tasep_tail_scan(0.7, 0, 0, 2.0, [], small_mc, runner)
