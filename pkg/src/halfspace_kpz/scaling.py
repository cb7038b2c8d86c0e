"""
Módulo de escala: funções de forma limite, mapas de reescala KPZ e ajuste de expoentes
"""
import logging
import math
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import stats

from .env import WeightField
from .errors import DomainError
from .lpp import passage_time
from .models import EnvironmentSpec, PassageQuery, WeightKind, Window

logger = logging.getLogger(__name__)

_TWO_5_3 = 2.0 ** (5.0 / 3.0)
_TWO_8_3 = 2.0 ** (8.0 / 3.0)
_TWO_4_3 = 2.0 ** (4.0 / 3.0)


def _check_nm(n: float, m: float = 1.0) -> None:
    if n < 1 or m < 1:
        raise DomainError(f"Requer n, m >= 1, recebido n={n}, m={m}")


def _check_alpha(alpha: float) -> None:
    if not alpha > 0:
        raise DomainError(f"Requer alpha > 0, recebido {alpha}")


def mu(n: float, m: float) -> float:
    """Forma limite do LPP exponencial de espaço inteiro: (sqrt(n) + sqrt(m))^2."""
    _check_nm(n, m)
    return (math.sqrt(n) + math.sqrt(m)) ** 2


def mu_alpha(n: float, alpha: float) -> float:
    """Ordem principal de X(1,1; n,n) no meio-espaço."""
    _check_nm(n)
    _check_alpha(alpha)
    if alpha >= 0.5:
        return 4.0 * n
    return n / (alpha * (1.0 - alpha))


def alpha_threshold(n: float, m: float) -> float:
    r = math.sqrt(m / n)
    return r / (1.0 + r)


def mu_alpha_nm(n: float, m: float, alpha: float) -> float:
    """
    Forma do meio-espaço para n >= m: menor majorante côncavo de mu com mu_alpha(n, n) = mu_alpha(n)
    """
    _check_nm(n, m)
    _check_alpha(alpha)
    if n < m:
        raise DomainError(f"Requer n >= m, recebido n={n}, m={m}")
    if alpha >= alpha_threshold(n, m):
        return mu(n, m)
    return m / alpha + n / (1.0 - alpha)


def delta_alpha(n: float, alpha: float) -> float:
    return mu_alpha(n, alpha) - mu(n, n)


def nu_alpha(n: float, m: float, alpha: float) -> float:
    return mu(n, m) + delta_alpha(m, alpha)


SHAPES = {
    "mu": mu,
    "mu_alpha": mu_alpha,
    "mu_alpha_nm": mu_alpha_nm,
    "delta_alpha": delta_alpha,
    "nu_alpha": nu_alpha,
}


def shape(kind: str, *args: float) -> float:
    """
    Avalia uma função de forma pelo nome

    Args:
        kind: Um de mu, mu_alpha, mu_alpha_nm, delta_alpha, nu_alpha
        *args: Argumentos da função

    Returns:
        Valor exato da fórmula
    """
    fn = SHAPES.get(kind)
    if fn is None:
        raise DomainError(f"Função de forma desconhecida: {kind}")
    try:
        return fn(*args)
    except TypeError as e:
        raise DomainError(f"Argumentos inválidos para {kind}: {e}")


class RescaleMap(BaseModel):
    """
    Mapa (x, s)_n = (floor(ns + 2^{5/3} n^{2/3} x), floor(ns)) e normalização de Q_n^rho
    """
    model_config = ConfigDict(frozen=True)

    n: float = Field(gt=0)
    rho: float = 0.0

    @model_validator(mode="after")
    def _check_alpha(self) -> "RescaleMap":
        if not self.alpha > 0:
            raise ValueError("Requer 1/2 - 2^{-4/3} rho n^{-1/3} > 0")
        return self

    @property
    def alpha(self) -> float:
        if self.rho == -math.inf:
            return math.inf
        return 0.5 - self.rho / (_TWO_4_3 * self.n ** (1.0 / 3.0))

    def point(self, x: float, s: float) -> Tuple[int, int]:
        n = self.n
        return (math.floor(n * s + _TWO_5_3 * n ** (2.0 / 3.0) * x + 1e-9), math.floor(n * s + 1e-9))

    def height(self, x: float, s: float) -> float:
        return 4.0 * self.n * s + _TWO_8_3 * self.n ** (2.0 / 3.0) * x

    def normalize(self, value: float, x: float, s: float, y: float, t: float) -> float:
        centre = 4.0 * self.n * (t - s) + _TWO_8_3 * self.n ** (2.0 / 3.0) * (y - x)
        return (value - centre) / (_TWO_4_3 * self.n ** (1.0 / 3.0))

    def environment(self, window: Window) -> EnvironmentSpec:
        """Meio-espaço exponencial com bulk Exp(1) e diagonal Exp(alpha)."""
        return EnvironmentSpec.half_space(self.alpha, window, WeightKind.EXPONENTIAL)


def rescaled_lpp(
    field: WeightField, scale: RescaleMap, points: Iterable[Tuple[float, float, float, float]]
) -> List[float]:
    """
    Q_n^rho(x, s; y, t) para cada ponto (x, s, y, t); -inf quando a ordem da rede falha
    """
    values = []
    for x, s, y, t in points:
        u, v = scale.point(x, s), scale.point(y, t)
        result = passage_time(field, PassageQuery(start=u, end=v))
        if result.value == -math.inf:
            values.append(-math.inf)
        else:
            values.append(scale.normalize(result.value, x, s, y, t))
    return values


def kpz_scaling_consistent(n: int, q: int, rho: float, points: Sequence[Tuple[float, float]]) -> bool:
    """
    Verifica Q_n^{rho}(q^2 x, q^3 s; ...) = q Q_{q^3 n}^{q rho}(x, s; ...) nos mapas de coordenadas

    As coordenadas de rede, o parâmetro de fronteira e o fator de normalização coincidem.
    """
    fine = RescaleMap(n=n, rho=rho)
    coarse = RescaleMap(n=q ** 3 * n, rho=q * rho)
    if not math.isclose(fine.alpha, coarse.alpha, rel_tol=1e-12):
        return False
    for x, s in points:
        if fine.point(q * q * x, q ** 3 * s) != coarse.point(x, s):
            return False
        lhs = fine.normalize(0.0, 0.0, 0.0, q * q * x, q ** 3 * s)
        rhs = q * coarse.normalize(0.0, 0.0, 0.0, x, s)
        if not math.isclose(lhs, rhs, rel_tol=1e-9, abs_tol=1e-9):
            return False
    return True


class EpsilonMap(BaseModel):
    """
    Reescala epsilon de TASEP e das métricas: x -> floor(2x/eps), s -> 2 eps^{-3/2} s
    """
    model_config = ConfigDict(frozen=True)

    eps: float = Field(gt=0)
    rho: float = 0.0
    alpha_fixed: float = 1.0

    @model_validator(mode="after")
    def _check_alpha(self) -> "EpsilonMap":
        if not self.alpha > 0:
            raise ValueError("Requer alpha = 1/2 - rho eps^{1/2}/2 > 0")
        return self

    @property
    def alpha(self) -> float:
        if self.rho == -math.inf:
            return self.alpha_fixed
        return 0.5 - self.rho * math.sqrt(self.eps) / 2.0

    def site(self, x: float) -> int:
        return math.floor(2.0 * x / self.eps + 1e-9)

    def time(self, s: float) -> float:
        return 2.0 * self.eps ** -1.5 * s


def fit_exponent(points: Sequence[Tuple[float, float]]) -> Tuple[float, float]:
    """
    Inclinação de log(estatística) contra log(n) por mínimos quadrados

    Args:
        points: Pares (n, estatística)

    Returns:
        (inclinação, erro padrão)
    """
    if len(points) < 3:
        raise DomainError("O ajuste de expoente requer ao menos 3 pontos")
    ns = np.array([p[0] for p in points], dtype=np.float64)
    vals = np.array([p[1] for p in points], dtype=np.float64)
    if np.any(ns <= 0) or np.any(vals <= 0):
        raise DomainError("O ajuste de expoente requer valores positivos")
    fit = stats.linregress(np.log(ns), np.log(vals))
    return float(fit.slope), float(fit.stderr)


def fit_envelope_constant(probability: float, exponent: float, prefactor: float = 2.0) -> Optional[float]:
    """
    Constante c tal que probability = prefactor * exp(-c * exponent); None se a probabilidade é 0
    """
    if probability <= 0 or exponent <= 0:
        return None
    return max(0.0, -math.log(min(probability / prefactor, 1.0)) / exponent)


def upper_tail_envelope(eps: float, scale: float, c: float, power: float = 1.5) -> float:
    """2 exp(-c eps^power scale): cauda superior (power 3/2) ou inferior rasa (power 2)."""
    return min(1.0, 2.0 * math.exp(-c * eps ** power * scale))


def gaussian_envelope(a: float, c: float) -> float:
    return min(1.0, 2.0 * math.exp(-c * a * a))
