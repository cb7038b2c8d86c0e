"""
Módulo de TASEP de meio-espaço

Relógios de Poisson sobre Lambda_d, evolução evento a evento da função altura,
TASEP como inversa do LPP exponencial e a reescala 1:2:3 rumo ao ponto fixo KPZ.
"""
import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import ValidationError

from .env import SeededSource, WeightField, materialize
from .errors import DomainError, PaddingError
from .lpp import passage_grid
from .models import ClockRecord, EnvironmentSpec, HeightFunction, MCConfig, WeightKind, Window
from .runner import ReplicaRunner
from .scaling import EpsilonMap, fit_envelope_constant

logger = logging.getLogger(__name__)


def required_width(x_max: int, alpha: float, horizon: float) -> int:
    """Janela x_max + 4(1 + alpha) T + 10 sqrt(T) para o cone de luz dos relógios."""
    return int(x_max + math.ceil(4.0 * (1.0 + alpha) * horizon + 10.0 * math.sqrt(horizon))) + 1


@dataclass
class ClockField:
    """
    Relógios de Poisson sobre os vértices (x, a) de Lambda_d, x em [0, width]

    Intensidade alpha em x = 0 e 1 nos demais sítios; os eventos ficam ordenados por tempo.
    """
    alpha: float
    levels: int
    horizon: float
    width: int
    times: np.ndarray
    sites: np.ndarray
    marks: np.ndarray

    @classmethod
    def sample(
        cls, alpha: float, width: int, horizon: float, source: SeededSource, levels: int = 1
    ) -> "ClockField":
        if alpha <= 0:
            raise DomainError(f"alpha deve ser positivo, recebido {alpha}")
        if horizon < 0 or width < 0 or levels < 1:
            raise DomainError("horizon, width e levels inválidos")
        period = 2 * levels
        xs, marks = np.meshgrid(np.arange(width + 1), np.arange(period), indexing="ij")
        valid = (xs + marks) % 2 == 0
        xs, marks = xs[valid], marks[valid]
        rates = np.where(xs == 0, alpha, 1.0)
        counts = source.poisson(rates * horizon, "clock_count", xs, marks)

        total = int(counts.sum())
        vid = np.repeat(xs * period + marks, counts)
        k = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        times = horizon * source.uniform("clock_time", vid, k)
        order = np.argsort(times, kind="stable")
        logger.debug(f"{total} eventos de relógio em {width + 1} sítios, d={levels}, T={horizon}")
        return cls(
            alpha=alpha,
            levels=levels,
            horizon=horizon,
            width=width,
            times=times[order],
            sites=np.repeat(xs, counts)[order],
            marks=np.repeat(marks, counts)[order],
        )

    @classmethod
    def empty(cls, alpha: float, width: int, horizon: float, levels: int = 1) -> "ClockField":
        return cls(alpha, levels, horizon, width, np.zeros(0), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))

    @classmethod
    def from_events(
        cls, alpha: float, width: int, horizon: float, events: Iterable[Tuple[float, int, int]], levels: int = 1
    ) -> "ClockField":
        ev = sorted((float(t), int(x), int(a)) for t, x, a in events)
        for t, x, a in ev:
            if not (0 <= t <= horizon and 0 <= x <= width and 0 <= a < 2 * levels and (x + a) % 2 == 0):
                raise DomainError(f"Evento inválido ({t}, {x}, {a})")
        return cls(
            alpha, levels, horizon, width,
            np.array([e[0] for e in ev], dtype=np.float64),
            np.array([e[1] for e in ev], dtype=np.int64),
            np.array([e[2] for e in ev], dtype=np.int64),
        )

    def __len__(self) -> int:
        return int(self.times.size)

    def events(self) -> List[Tuple[float, int, int]]:
        return [(float(t), int(x), int(a)) for t, x, a in zip(self.times, self.sites, self.marks)]

    def events_at(self, x: int, a: int) -> np.ndarray:
        return self.times[(self.sites == x) & (self.marks == a)]

    def reversed(self) -> "ClockField":
        """Campo com tempos T - t e níveis a -> -a mod 2d (inversão temporal)."""
        period = 2 * self.levels
        return ClockField.from_events(
            self.alpha, self.width, self.horizon,
            [(self.horizon - t, x, (-a) % period) for t, x, a in self.events()], self.levels,
        )

    def to_record(self) -> ClockRecord:
        return ClockRecord(alpha=self.alpha, levels=self.levels, horizon=self.horizon,
                           width=self.width, events=self.events())

    @classmethod
    def from_record(cls, record: ClockRecord) -> "ClockField":
        return cls.from_events(record.alpha, record.width, record.horizon, record.events, record.levels)


class HeightEvolution:
    """
    Evolução de uma função altura pelos relógios (acoplamento de nível d)

    Um anel em (x, a) vira um mínimo local em x para máximo quando a = h(x) mod 2d. A frente
    de contaminação guarda o primeiro sítio cujo valor depende de dados fora da janela.
    """

    def __init__(self, h0: HeightFunction, clocks: ClockField):
        width = clocks.width if h0.right_slope is not None else min(clocks.width, h0.width)
        self.clocks = clocks
        self.h = np.array([h0(x) for x in range(width + 1)], dtype=np.int64)
        self.front = width + 1
        self.time = 0.0
        self._cursor = 0
        self.logger = logging.getLogger(__name__)

    def advance(self, t: float) -> None:
        if t < self.time:
            raise DomainError(f"Tempo {t} anterior ao estado atual {self.time}")
        if t > self.clocks.horizon + 1e-12:
            raise DomainError(f"Tempo {t} além do horizonte dos relógios {self.clocks.horizon}")
        period = 2 * self.clocks.levels
        times, sites, marks = self.clocks.times, self.clocks.sites, self.clocks.marks
        h = self.h
        while self._cursor < times.size and times[self._cursor] <= t:
            x, a = int(sites[self._cursor]), int(marks[self._cursor])
            self._cursor += 1
            if x >= self.front or a != h[x] % period:
                continue
            if x + 1 >= self.front:
                self.front = x
                continue
            right = h[x + 1] == h[x] + 1
            left = x == 0 or h[x - 1] == h[x] + 1
            if left and right:
                h[x] += 2
        self.time = t

    def height(self, x: int) -> int:
        if x >= self.front:
            raise PaddingError(f"Sítio {x} contaminado pela borda (frente em {self.front})")
        return int(self.h[x])

    def snapshot(self) -> HeightFunction:
        if self.front == 0:
            raise PaddingError("Toda a janela foi contaminada pela borda")
        return HeightFunction(values=self.h[:self.front].tolist(), right_slope=None)


def evolve_clocks(
    h0: HeightFunction, clocks: ClockField, t: float, observe: Optional[int] = None
) -> HeightFunction:
    """
    h_t a partir de h0 processando os eventos em ordem de tempo

    Args:
        h0: Altura inicial
        clocks: Campo de relógios com horizonte >= t
        t: Tempo final
        observe: Maior sítio observado; PaddingError se a contaminação da borda o alcançar

    Returns:
        Altura nos sítios não contaminados
    """
    evo = HeightEvolution(h0, clocks)
    evo.advance(t)
    if observe is not None and observe >= evo.front:
        raise PaddingError(f"Janela insuficiente: sítio {observe} contaminado (frente em {evo.front})")
    return evo.snapshot()


def height_trajectory(
    h0: HeightFunction, clocks: ClockField, times: Sequence[float], xs: Sequence[int]
) -> pd.DataFrame:
    """Tabela (t, x, h) da evolução nos tempos e sítios pedidos."""
    evo = HeightEvolution(h0, clocks)
    rows = []
    for t in sorted(times):
        evo.advance(t)
        for x in xs:
            rows.append({"t": t, "x": x, "h": evo.height(x)})
    return pd.DataFrame(rows, columns=["t", "x", "h"])


def lpp_cell(x: int, g: int) -> Tuple[int, int]:
    """R(x, g) = ((x + g)/2, (g - x)/2)."""
    return ((x + g) // 2, (g - x) // 2)


def _source_cells(h: HeightFunction, i_max: int) -> List[Tuple[int, int]]:
    """
    Fontes R(y, h(y) + 2) com primeira coordenada <= i_max, usando a extensão à direita de h

    Com inclinação +1 ou alternada a primeira coordenada cresce com y e a lista é finita.
    """
    cells = [lpp_cell(y, h(y) + 2) for y in range(h.width + 1)]
    if h.right_slope in (1, 0):
        y = h.width + 1
        while True:
            cell = lpp_cell(y, h(y) + 2)
            if cell[0] > i_max and y > h.width + 1:
                break
            cells.append(cell)
            y += 1
    return cells


def _tail_reaches(h: HeightFunction, i_max: int) -> bool:
    """Com inclinação -1 (ou sem extensão) as fontes além da janela têm primeira coordenada constante."""
    if h.right_slope in (1, 0):
        return False
    return lpp_cell(h.width + 1, h.values[-1] + 1)[0] <= i_max


def tasep_field(
    alpha: float,
    h: HeightFunction,
    xs: Sequence[int],
    t: float,
    source: SeededSource,
    max_cells: Optional[int] = None,
) -> WeightField:
    """
    Campo exponencial de meio-espaço (diagonal Exp(alpha), bulk Exp(1)) cobrindo as fontes
    R(y, h(y) + 2) e os alvos R(x, g) alcançáveis até o tempo t
    """
    if alpha <= 0:
        raise DomainError(f"alpha deve ser positivo, recebido {alpha}")
    rate = max(1.0, alpha) * max(t, 0.0)
    reach = 2 * int(math.ceil(rate + 10.0 * math.sqrt(rate) + 10.0))
    targets = [lpp_cell(x, h(x) + reach) for x in xs]
    i_max = max(c[0] for c in targets)
    j_max = max(c[1] for c in targets)
    relevant = [c for c in _source_cells(h, i_max) if c[0] <= i_max and c[1] <= j_max]
    window = Window(
        i_min=min(c[0] for c in relevant), i_max=i_max,
        j_min=min(c[1] for c in relevant), j_max=j_max,
    )
    spec = EnvironmentSpec.half_space(alpha, window, WeightKind.EXPONENTIAL)
    return materialize(spec, source, max_cells)


def heights_from_lpp(field: WeightField, h: HeightFunction, t: float, xs: Sequence[int]) -> np.ndarray:
    """
    max{g em 2Z + 1{x ímpar} : max_y X(R(y, h(y) + 2); R(x, g)) <= t} para cada x, numa única grade
    """
    if t < 0:
        raise DomainError(f"t deve ser >= 0, recebido {t}")
    w = field.window
    sources = []
    for i, j in _source_cells(h, w.i_max):
        if i > w.i_max or j > w.j_max:
            continue
        if i < w.i_min or j < w.j_min:
            raise PaddingError(f"Fonte ({i}, {j}) fora da janela do campo")
        sources.append((i, j))
    grid = passage_grid(field, sources, (w.i_max, w.j_max))

    out = np.empty(len(xs), dtype=np.int64)
    for p, x in enumerate(xs):
        if not 0 <= x <= h.width:
            raise DomainError(f"Sítio {x} fora da janela de h")
        g = h(x)
        while True:
            cand = g + 2
            cell = lpp_cell(x, cand)
            if cell[0] > w.i_max or cell[1] > w.j_max or _tail_reaches(h, cell[0]):
                raise PaddingError(f"Janela insuficiente para a altura em x={x}")
            if grid.value(cell) > t:
                break
            g = cand
        out[p] = g
    return out


def height_from_lpp(field: WeightField, h: HeightFunction, t: float, x: int) -> int:
    return int(heights_from_lpp(field, h, t, [x])[0])


class RescaledHeight:
    """
    A_eps h(x) = -eps^{1/2} h(2 x / eps) nos pontos (eps/2) Z>=0, com interpolação linear
    """

    def __init__(self, values: Sequence[float], eps: float):
        if eps <= 0:
            raise DomainError("eps deve ser positivo")
        self.eps = eps
        self.values = np.asarray(values, dtype=np.float64)

    def grid(self) -> np.ndarray:
        return self.eps / 2.0 * np.arange(self.values.size)

    def __call__(self, x):
        s = 2.0 * np.asarray(x, dtype=np.float64) / self.eps
        if np.any(s < -1e-9) or np.any(s > self.values.size - 1 + 1e-9):
            raise DomainError("Ponto fora da janela reescalada")
        return -math.sqrt(self.eps) * np.interp(s, np.arange(self.values.size), self.values)

    def inverse(self) -> HeightFunction:
        return unrescale_height(self(self.grid()), self.eps)


def rescale_height(h: HeightFunction, eps: float) -> RescaledHeight:
    return RescaledHeight(h.values, eps)


def unrescale_height(f: Sequence[float], eps: float, right_slope: Optional[int] = 1) -> HeightFunction:
    """A_eps^{-1} sobre os pontos da grade: h(i) = -f(i eps/2) / eps^{1/2}."""
    vals = [int(round(-v / math.sqrt(eps))) for v in f]
    return HeightFunction(values=vals, right_slope=right_slope)


def _interpolated_heights(heights: dict, eps: float, ys: Sequence[float]) -> np.ndarray:
    out = []
    for y in ys:
        s = 2.0 * y / eps
        lo = int(math.floor(s + 1e-9))
        frac = max(0.0, s - lo)
        value = heights[lo] if frac < 1e-9 else (1.0 - frac) * heights[lo] + frac * heights[lo + 1]
        out.append(-math.sqrt(eps) * value)
    return np.array(out)


def rescaled_fixed_point_marginal(
    h0: HeightFunction,
    rho: float,
    eps: float,
    t: float,
    ys: Sequence[float],
    source: SeededSource,
    method: str = "lpp",
    alpha_fixed: float = 1.0,
) -> np.ndarray:
    """
    Uma amostra de (A_eps h_{2 eps^{-3/2} t}(y) + t/eps)_{y em ys}

    Args:
        h0: Altura inicial (f0 = A_eps h0)
        rho: Parâmetro de fronteira reescalado (-inf usa alpha_fixed)
        eps: Parâmetro de rede
        t: Tempo macroscópico
        ys: Pontos espaciais
        source: Fonte aleatória
        method: "lpp" (inversa do LPP) ou "clocks" (evolução evento a evento)

    Returns:
        Valores na ordem de ys
    """
    try:
        emap = EpsilonMap(eps=eps, rho=rho, alpha_fixed=alpha_fixed)
    except ValidationError as e:
        raise DomainError(f"Parâmetros de reescala inválidos: {e.errors()[0]['msg']}")
    if any(y < 0 for y in ys):
        raise DomainError("Os pontos devem ser >= 0")
    if t < 0:
        raise DomainError("t deve ser >= 0")
    horizon = emap.time(t)
    sites = sorted({s for y in ys for s in (int(math.floor(2.0 * y / eps + 1e-9)),
                                            int(math.floor(2.0 * y / eps + 1e-9)) + 1)})

    if t == 0:
        heights = {x: h0(x) for x in sites}
    elif method == "lpp":
        field = tasep_field(emap.alpha, h0, sites, horizon, source.child("lpp"))
        heights = dict(zip(sites, heights_from_lpp(field, h0, horizon, sites).tolist()))
    elif method == "clocks":
        width = required_width(max(sites), emap.alpha, horizon)
        clocks = ClockField.sample(emap.alpha, width, horizon, source.child("clocks"))
        evo = HeightEvolution(h0, clocks)
        evo.advance(horizon)
        heights = {x: evo.height(x) for x in sites}
    else:
        raise DomainError(f"Método desconhecido: {method}")
    return _interpolated_heights(heights, eps, ys) + t / eps


def tasep_tail_scan(
    alpha: float,
    y: int,
    x: int,
    t: float,
    eps_grid: Sequence[float],
    mc: MCConfig,
    runner: Optional[ReplicaRunner] = None,
) -> pd.DataFrame:
    """
    Caudas empíricas de h^alpha(t, x; delta_y) - t/2 com os envelopes
    2 exp(-c eps^3 t^2) (superior) e 2 exp(-c eps^{3/2} t) (inferior)

    Returns:
        Tabela (eps, upper, lower, upper_envelope, lower_envelope); attrs["monotone"] indica
        caudas não crescentes em eps
    """
    if not eps_grid:
        raise DomainError("Grade de eps vazia")
    runner = runner or ReplicaRunner.from_config(mc)
    h0 = HeightFunction.narrow_wedge(y, max(x, y) + 2)

    def job(src: SeededSource) -> float:
        field = tasep_field(alpha, h0, [x], t, src)
        return float(heights_from_lpp(field, h0, t, [x])[0])

    label = f"tasep-tails-a{alpha}-t{t}"
    samples = runner.run_array(job, SeededSource(master_seed=mc.seed).child(label), mc.replicas, label)
    eps_sorted = sorted(eps_grid)
    upper = [float(np.mean(samples >= t / 2.0 + e * t)) for e in eps_sorted]
    lower = [float(np.mean(samples <= t / 2.0 - e * t)) for e in eps_sorted]

    def envelope(probs: List[float], exponent) -> List[float]:
        c = None
        for p, e in zip(probs, eps_sorted):
            c = fit_envelope_constant(p, exponent(e))
            if c is not None:
                break
        if c is None:
            return [0.0] * len(eps_sorted)
        return [min(1.0, 2.0 * math.exp(-c * exponent(e))) for e in eps_sorted]

    table = pd.DataFrame({
        "eps": eps_sorted,
        "upper": upper,
        "lower": lower,
        "upper_envelope": envelope(upper, lambda e: e ** 3 * t * t),
        "lower_envelope": envelope(lower, lambda e: e ** 1.5 * t),
    })
    table.attrs["monotone"] = bool(np.all(np.diff(upper) <= 0) and np.all(np.diff(lower) <= 0))
    return table
