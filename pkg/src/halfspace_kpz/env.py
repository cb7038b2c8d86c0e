"""
Módulo de ambientes aleatórios: fonte de números aleatórios indexada por coordenadas
e campos de pesos materializados numa janela.
"""
import logging
import math
import zlib
from typing import Iterable, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import special, stats

from .errors import CapacityError, DomainError, ParameterError, RangeError
from .models import Cell, EnvironmentSpec, Layout, WeightKind, Window

logger = logging.getLogger(__name__)

ArrayLike = Union[int, float, np.ndarray]

DEFAULT_MAX_CELLS = 50_000_000

# taxas abaixo disso são tratadas como zero (peso +inf)
DEGENERATE_TOL = 1e-12

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_TWO_M53 = 2.0 ** -53


def _mix64(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * _MUL1
    z = z ^ (z >> np.uint64(27))
    z = z * _MUL2
    return z ^ (z >> np.uint64(31))


def _as_words(x: ArrayLike) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=np.int64)).astype(np.uint64)


def _word(x: int) -> np.ndarray:
    return np.array([int(x) & _MASK64], dtype=np.uint64)


def _tag_word(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


class SeededSource(BaseModel):
    """
    Fonte aleatória baseada em contador (splitmix64).

    O valor sorteado é função pura de (master_seed, namespace, stream_id, tag, i, j).
    """
    model_config = ConfigDict(frozen=True)

    master_seed: int
    stream_id: int = 0
    namespace: int = 0

    def replica(self, r: int) -> "SeededSource":
        return self.model_copy(update={"stream_id": int(r) & _MASK64})

    def child(self, label: str) -> "SeededSource":
        """Deriva um espaço de nomes independente."""
        with np.errstate(over="ignore"):
            h = _mix64(_word(self.namespace) ^ (_word(_tag_word(label)) + _GOLDEN))
        return self.model_copy(update={"namespace": int(h[0])})

    def uniform(self, tag: str, i: ArrayLike = 0, j: ArrayLike = 0) -> np.ndarray:
        """
        Uniformes em (0, 1) indexadas por coordenadas

        Args:
            tag: Finalidade do sorteio
            i, j: Coordenadas (escalares ou arrays com broadcast)

        Returns:
            Array de uniformes com o formato do broadcast de i e j
        """
        ii, jj = np.broadcast_arrays(np.asarray(i, dtype=np.int64), np.asarray(j, dtype=np.int64))
        shape = ii.shape
        with np.errstate(over="ignore"):
            h = _mix64(_word(self.master_seed) ^ _GOLDEN)
            for word in (self.namespace, self.stream_id, _tag_word(tag)):
                h = _mix64(h ^ (_word(word) + _GOLDEN))
            h = _mix64(h ^ (_as_words(ii.ravel()) + _GOLDEN))
            h = _mix64(h ^ (_as_words(jj.ravel()) + _GOLDEN))
        u = ((h >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53
        return u.reshape(shape)

    def exponential(self, rate: ArrayLike, tag: str, i: ArrayLike = 0, j: ArrayLike = 0) -> np.ndarray:
        return exponential_from_uniform(self.uniform(tag, i, j), rate)

    def normal(self, mean: ArrayLike, var: ArrayLike, tag: str, i: ArrayLike = 0, j: ArrayLike = 0) -> np.ndarray:
        return np.asarray(mean) + np.sqrt(var) * special.ndtri(self.uniform(tag, i, j))

    def inverse_gamma(self, shape: ArrayLike, tag: str, i: ArrayLike = 0, j: ArrayLike = 0) -> np.ndarray:
        return inverse_gamma_from_uniform(self.uniform(tag, i, j), shape)

    def geometric(self, q: ArrayLike, tag: str, i: ArrayLike = 0, j: ArrayLike = 0) -> np.ndarray:
        return geometric_from_uniform(self.uniform(tag, i, j), q)

    def poisson(self, mean: ArrayLike, tag: str, i: ArrayLike = 0, j: ArrayLike = 0) -> np.ndarray:
        return stats.poisson.ppf(self.uniform(tag, i, j), mean).astype(np.int64)


def _check_finite_params(param: np.ndarray) -> None:
    if np.any(np.isnan(param)):
        raise ParameterError("Parâmetro NaN não define uma lei")


def exponential_from_uniform(u: np.ndarray, rate: ArrayLike) -> np.ndarray:
    """Exp(rate) por inversão; taxa <= 0 dá +inf e taxa +inf dá 0."""
    rate = np.broadcast_to(np.asarray(rate, dtype=np.float64), np.shape(u))
    _check_finite_params(rate)
    out = np.full(np.shape(u), np.inf)
    ok = rate > DEGENERATE_TOL
    with np.errstate(divide="ignore"):
        out[ok] = -np.log(u[ok]) / rate[ok]
    return out


def inverse_gamma_from_uniform(u: np.ndarray, shape: ArrayLike) -> np.ndarray:
    """Gamma^-1(shape) como recíproco do quantil da Gamma(shape, 1)."""
    a = np.broadcast_to(np.asarray(shape, dtype=np.float64), np.shape(u))
    _check_finite_params(a)
    out = np.full(np.shape(u), np.inf)
    ok = (a > DEGENERATE_TOL) & np.isfinite(a)
    out[ok] = 1.0 / special.gammaincinv(a[ok], u[ok])
    out[np.isposinf(a)] = 0.0
    return out


def geometric_from_uniform(u: np.ndarray, q: ArrayLike) -> np.ndarray:
    """Geo(q) com P(X >= k) = q^k; q >= 1 dá +inf e q = 0 dá 0."""
    q = np.broadcast_to(np.asarray(q, dtype=np.float64), np.shape(u))
    _check_finite_params(q)
    if np.any(q < 0):
        raise ParameterError("Parâmetro geométrico negativo")
    out = np.full(np.shape(u), np.inf)
    ok = q < 1.0 - DEGENERATE_TOL
    zero = q == 0.0
    mid = ok & ~zero
    out[mid] = np.floor(np.log(u[mid]) / np.log(q[mid]))
    out[zero] = 0.0
    return out


def _gamma_lookup(spec: EnvironmentSpec, idx: np.ndarray) -> np.ndarray:
    g = np.full(idx.shape, float(spec.theta))
    for key, value in spec.gamma.items():
        g[idx == key] = value
    return g


def _cell_parameters(spec: EnvironmentSpec, ii: np.ndarray, jj: np.ndarray) -> np.ndarray:
    """Parâmetro da lei em cada célula (taxa, forma ou q)."""
    if spec.layout == Layout.BOUNDARY_COLUMN:
        return np.where(ii == 1, spec.alpha, spec.theta).astype(np.float64)

    gi = _gamma_lookup(spec, ii)
    gj = _gamma_lookup(spec, jj)
    diag = ii == jj
    with np.errstate(invalid="ignore"):
        if spec.kind == WeightKind.GEOMETRIC:
            return np.where(diag, spec.alpha * gi, gi * gj)
        return np.where(diag, spec.alpha + gi, gi + gj)


def _draw_cells(spec: EnvironmentSpec, source: SeededSource, ii: np.ndarray, jj: np.ndarray) -> np.ndarray:
    ii = np.asarray(ii, dtype=np.int64)
    jj = np.asarray(jj, dtype=np.int64)
    off_lattice = np.zeros(ii.shape, dtype=bool)

    if spec.layout == Layout.EXTENDED:
        if spec.symmetric:
            ki, kj = np.maximum(ii, jj), np.minimum(ii, jj)
        else:
            ki, kj = ii, jj
            off_lattice = ii < jj
    else:
        ki, kj = ii, jj

    param = _cell_parameters(spec, ki, kj)
    u = source.uniform("weight", ki, kj)
    if spec.kind == WeightKind.EXPONENTIAL:
        values = exponential_from_uniform(u, param)
    elif spec.kind == WeightKind.LOG_GAMMA:
        values = inverse_gamma_from_uniform(u, param)
    else:
        values = geometric_from_uniform(u, param)
    values[off_lattice] = -np.inf
    return values


def sample_weight(spec: EnvironmentSpec, source: SeededSource, i: int, j: int) -> float:
    """
    Sorteia o peso da célula (i, j)

    Args:
        spec: Especificação da lei
        source: Fonte aleatória
        i, j: Coordenadas dentro da janela

    Returns:
        Peso (pode ser +inf; -inf indica célula fora da rede de meio-espaço)
    """
    if not spec.window.contains(i, j):
        raise RangeError(f"Célula ({i}, {j}) fora da janela")
    return float(_draw_cells(spec, source, np.array([i]), np.array([j]))[0])


class WeightField:
    """
    Campo de pesos denso sobre spec.window, indexado por coordenadas da rede
    """

    def __init__(self, spec: EnvironmentSpec, source: SeededSource, values: np.ndarray):
        if values.shape != spec.window.shape:
            raise ValueError("Formato dos valores não corresponde à janela")
        self.spec = spec
        self.source = source
        self.values = values
        self.values.setflags(write=False)

    @property
    def window(self) -> Window:
        return self.spec.window

    @property
    def kind(self) -> WeightKind:
        return self.spec.kind

    def contains(self, i: int, j: int) -> bool:
        return self.window.contains(i, j)

    def __getitem__(self, cell: Cell) -> float:
        i, j = cell
        if not self.contains(i, j):
            raise RangeError(f"Célula ({i}, {j}) fora da janela")
        return float(self.values[i - self.window.i_min, j - self.window.j_min])

    def block(self, i0: int, i1: int, j0: int, j1: int) -> np.ndarray:
        """Sub-bloco [i0, i1] x [j0, j1] (inclusivo)."""
        w = self.window
        if not (w.contains(i0, j0) and w.contains(i1, j1)):
            raise RangeError(f"Bloco [{i0},{i1}]x[{j0},{j1}] fora da janela")
        return self.values[i0 - w.i_min:i1 - w.i_min + 1, j0 - w.j_min:j1 - w.j_min + 1]

    def with_values(self, values: np.ndarray) -> "WeightField":
        return WeightField(self.spec, self.source, values)


def materialize(spec: EnvironmentSpec, source: SeededSource, max_cells: Optional[int] = None) -> WeightField:
    """
    Materializa todos os pesos da janela

    Args:
        spec: Especificação com janela finita
        source: Fonte aleatória
        max_cells: Orçamento de células

    Returns:
        Campo denso
    """
    budget = max_cells or DEFAULT_MAX_CELLS
    if spec.window.area > budget:
        raise CapacityError(f"Janela com {spec.window.area} células excede o limite de {budget}")

    w = spec.window
    ii, jj = np.meshgrid(
        np.arange(w.i_min, w.i_max + 1), np.arange(w.j_min, w.j_max + 1), indexing="ij"
    )
    values = _draw_cells(spec, source, ii, jj)
    logger.debug(f"Campo {spec.kind.value} materializado em {w.shape}")
    return WeightField(spec, source, values)


def override_cells(field: WeightField, cells: Iterable[Tuple[Cell, float]]) -> WeightField:
    """
    Retorna uma cópia do campo com as células listadas substituídas

    Args:
        field: Campo original
        cells: Pares ((i, j), valor)

    Returns:
        Novo campo (a simetria é reimposta quando spec.symmetric)
    """
    values = np.array(field.values, copy=True)
    w = field.window
    for (i, j), value in cells:
        if not w.contains(i, j):
            raise RangeError(f"Célula ({i}, {j}) fora da janela")
        if value < 0 or math.isnan(value):
            raise DomainError(f"Peso negativo não permitido em ({i}, {j}): {value}")
        values[i - w.i_min, j - w.j_min] = value
        if field.spec.symmetric and w.contains(j, i):
            values[j - w.i_min, i - w.j_min] = value
    return field.with_values(values)


def scale_diagonal(field: WeightField, factor: float) -> WeightField:
    """
    Multiplica os pesos da diagonal por factor (X_beta a partir de X_alpha com factor = alpha/beta)
    """
    if factor < 0:
        raise DomainError("Fator de escala negativo")
    w = field.window
    lo, hi = max(w.i_min, w.j_min), min(w.i_max, w.j_max)
    cells = []
    for i in range(lo, hi + 1):
        value = field[(i, i)]
        if math.isfinite(value):
            cells.append(((i, i), value * factor))
    return override_cells(field, cells)
