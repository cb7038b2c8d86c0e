"""
Testes para o módulo scaling
"""
import math

import pytest
from pydantic import ValidationError

from halfspace_kpz.errors import DomainError
from halfspace_kpz.scaling import (
    EpsilonMap,
    RescaleMap,
    alpha_threshold,
    fit_envelope_constant,
    fit_exponent,
    gaussian_envelope,
    kpz_scaling_consistent,
    mu,
    mu_alpha,
    mu_alpha_nm,
    rescaled_lpp,
    shape,
    upper_tail_envelope,
)


def test_full_space_shape():
    """
    Testa mu(4, 1) = 9
    """
    assert mu(4, 1) == pytest.approx(9.0)
    assert shape("mu", 4, 1) == pytest.approx(9.0)


def test_half_space_shape_branches():
    """
    Testa as duas fases de mu_alpha
    """
    assert mu_alpha(10, 0.7) == pytest.approx(40.0)
    assert mu_alpha(10, 0.5) == pytest.approx(40.0)
    assert mu_alpha(10, 0.25) == pytest.approx(10 / (0.25 * 0.75))


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5, 0.9])
def test_shape_on_diagonal_agrees(alpha):
    """
    Testa se mu_alpha(n, n, alpha) coincide com mu_alpha(n, alpha)
    """
    assert mu_alpha_nm(9, 9, alpha) == pytest.approx(mu_alpha(9, alpha))


def test_shape_is_continuous_at_threshold():
    """
    Testa a continuidade da forma no limiar sqrt(m/n)/(1 + sqrt(m/n))
    """
    a = alpha_threshold(16, 4)
    assert a == pytest.approx(1.0 / 3.0)
    assert mu_alpha_nm(16, 4, a - 1e-9) == pytest.approx(mu(16, 4), rel=1e-6)
    assert mu_alpha_nm(16, 4, a + 1e-9) == pytest.approx(mu(16, 4))


def test_shape_domain_errors():
    """
    Testa os erros de domínio das funções de forma
    """
    with pytest.raises(DomainError):
        mu(0, 1)
    with pytest.raises(DomainError):
        mu_alpha(5, 0.0)
    with pytest.raises(DomainError):
        mu_alpha_nm(2, 3, 0.5)
    with pytest.raises(DomainError):
        shape("desconhecida", 1)


def test_kpz_scaling_consistency():
    """
    Testa a invariância de escala KPZ dos mapas de coordenadas
    """
    assert kpz_scaling_consistent(8, 2, 0.5, [(0.5, 1.0), (-0.25, 0.5), (0.0, 2.0)])


def test_rescale_map_requires_positive_alpha():
    """
    Testa se rho grande demais torna o mapa inválido
    """
    with pytest.raises(ValidationError):
        RescaleMap(n=1, rho=10.0)
    assert RescaleMap(n=1, rho=-math.inf).alpha == math.inf


def test_rescale_map_point_and_normalization():
    """
    Testa o ponto da rede e a normalização de um valor exatamente no centro
    """
    scale = RescaleMap(n=8)
    assert scale.point(0.0, 1.0) == (8, 8)
    centre = scale.height(0.5, 1.0)
    assert scale.normalize(centre, 0.0, 0.0, 0.5, 1.0) == pytest.approx(0.0)


def test_epsilon_map():
    """
    Testa o mapa epsilon de sítios e tempos
    """
    m = EpsilonMap(eps=0.04, rho=1.0)
    assert m.site(1.0) == 50
    assert m.time(1.0) == pytest.approx(250.0)
    assert m.alpha == pytest.approx(0.4)
    assert EpsilonMap(eps=0.04, rho=-math.inf, alpha_fixed=0.3).alpha == 0.3


def test_fit_exponent_recovers_power_law():
    """
    Testa o ajuste log-log de uma lei de potência exata
    """
    points = [(n, 3.0 * n ** (2.0 / 3.0)) for n in (8, 27, 64, 125)]
    slope, stderr = fit_exponent(points)
    assert slope == pytest.approx(2.0 / 3.0)
    assert stderr == pytest.approx(0.0, abs=1e-9)


def test_fit_exponent_requires_points():
    """
    Testa as pré-condições do ajuste
    """
    with pytest.raises(DomainError):
        fit_exponent([(1, 1.0), (2, 2.0)])
    with pytest.raises(DomainError):
        fit_exponent([(1, 1.0), (2, 0.0), (3, 2.0)])


def test_envelope_constant_round_trip():
    """
    Testa se a constante ajustada reproduz a probabilidade observada
    """
    c = fit_envelope_constant(0.1, 4.0)
    assert 2.0 * math.exp(-c * 4.0) == pytest.approx(0.1)
    assert fit_envelope_constant(0.0, 4.0) is None
    assert upper_tail_envelope(1.0, 4.0, c, power=1.0) == pytest.approx(0.1)


def test_envelopes_are_capped():
    """
    Testa se os envelopes nunca passam de 1
    """
    assert upper_tail_envelope(0.01, 1.0, 0.0) == 1.0
    assert gaussian_envelope(0.0, 5.0) == 1.0


def test_rescaled_lpp_with_unit_weights(make_field):
    """
    Testa Q_n com pesos unitários (17 células até (8, 8)) e -inf quando a ordem da rede falha
    """
    field = make_field([[1.0] * 9 for _ in range(9)], i_min=0, j_min=0)
    scale = RescaleMap(n=8)
    values = rescaled_lpp(field, scale, [(0.0, 0.0, 0.0, 1.0), (0.0, 1.0, 0.0, 0.0)])
    assert values[0] == pytest.approx((17.0 - 32.0) / (2.0 ** (4.0 / 3.0) * 2.0))
    assert values[1] == -math.inf
