"""
Módulo das métricas de Poisson multinível

Grafo cilíndrico Lambda_d, sua métrica dirigida D_d, a métrica espaço-tempo H_d, a
redução H_d^- e a identidade exata com o acoplamento de nível d de TASEP.
"""
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import pandas as pd

from .env import SeededSource
from .errors import DomainError, InvariantError, PaddingError
from .models import HeightFunction, SpaceTimePoint
from .scaling import EpsilonMap
from .tasep import ClockField, HeightEvolution, required_width

logger = logging.getLogger(__name__)

Vertex = Tuple[int, int]


class CylinderGraph:
    """
    Grafo Lambda_d truncado em x <= width: vértices (x, a) com x + a par, a em Z_{2d},
    arestas (x, a) -> (x + 1, a + 1) e (x, a) -> (x - 1, a + 1) para x >= 1
    """

    def __init__(self, levels: int, width: int):
        if levels < 1 or width < 0:
            raise DomainError("levels deve ser >= 1 e width >= 0")
        self.levels = levels
        self.width = width
        self.period = 2 * levels
        self.graph = nx.DiGraph()
        for x in range(width + 1):
            for a in range(self.period):
                if (x + a) % 2 == 0:
                    self.graph.add_node((x, a))
        for x, a in list(self.graph.nodes):
            up = (a + 1) % self.period
            if x + 1 <= width:
                self.graph.add_edge((x, a), (x + 1, up))
            if x >= 1:
                self.graph.add_edge((x, a), (x - 1, up))

    def check_vertex(self, v: Vertex) -> None:
        x, a = v
        if x < 0 or not 0 <= a < self.period or (x + a) % 2 != 0:
            raise DomainError(f"Vértice inválido {v} em Lambda_{self.levels}")

    def out_degree(self, v: Vertex) -> int:
        return self.graph.out_degree(v)

    def levels_at(self, x: int) -> List[int]:
        return [a for a in range(self.period) if (x + a) % 2 == 0]


def closed_form_distance(levels: int, u: Vertex, v: Vertex) -> int:
    """Menor k >= |x_v - x_u| com k = a_v - a_u (mod 2d)."""
    dx = abs(v[0] - u[0])
    return dx + (v[1] - u[1] - dx) % (2 * levels)


def graph_distance(g: CylinderGraph, u: Vertex, v: Vertex) -> int:
    """
    D_d(u, v) por busca em largura num grafo largo o bastante para conter os caminhos mínimos
    """
    g.check_vertex(u)
    g.check_vertex(v)
    needed = max(u[0], v[0]) + g.period + 1
    graph = g if g.width >= needed else CylinderGraph(g.levels, needed)
    return int(nx.shortest_path_length(graph.graph, u, v))


def _relax(dist: np.ndarray) -> np.ndarray:
    """Fecho sob movimentos instantâneos (x, a) -> (x +- 1, a + 1) de custo 1."""
    while True:
        rolled = np.roll(dist, 1, axis=1) + 1.0
        new = dist.copy()
        new[1:] = np.minimum(new[1:], rolled[:-1])
        new[:-1] = np.minimum(new[:-1], rolled[1:])
        if np.array_equal(new, dist):
            return new
        dist = new


class MetricSweep:
    """
    Varredura exata de H_d pelos eventos de relógio em (s, t]

    O estado guarda, para cada vértice, o menor custo de estar nele no instante corrente.
    Um evento em (x, a) proíbe a espera através dele; o vértice passa a ser alcançado só
    por um movimento a partir de um vizinho no mesmo instante.
    """

    def __init__(self, clocks: ClockField, initial: np.ndarray):
        expected = (clocks.width + 1, 2 * clocks.levels)
        if initial.shape != expected:
            raise ValueError(f"Estado inicial com formato {initial.shape}, esperado {expected}")
        self.clocks = clocks
        self.dist = _relax(initial.astype(np.float64))

    def run(self, s: float, t: float) -> np.ndarray:
        if not s < t:
            raise DomainError(f"Requer s < t, recebido s={s}, t={t}")
        if t > self.clocks.horizon + 1e-12:
            raise DomainError(f"t={t} além do horizonte dos relógios")
        times = self.clocks.times
        lo = int(np.searchsorted(times, s, side="right"))
        hi = int(np.searchsorted(times, t, side="right"))
        dist = self.dist
        period = dist.shape[1]
        k = lo
        while k < hi:
            batch = k
            while batch < hi and times[batch] == times[k]:
                batch += 1
            if batch - k == 1:
                x, a = int(self.clocks.sites[k]), int(self.clocks.marks[k])
                prev = (a - 1) % period
                best = math.inf
                if x >= 1:
                    best = dist[x - 1, prev] + 1.0
                if x + 1 < dist.shape[0]:
                    best = min(best, dist[x + 1, prev] + 1.0)
                dist[x, a] = best
            else:
                for q in range(k, batch):
                    dist[int(self.clocks.sites[q]), int(self.clocks.marks[q])] = math.inf
                dist = _relax(dist)
            k = batch
        self.dist = dist
        return dist


def _point_state(clocks: ClockField, vertices: Sequence[Vertex], values: Optional[Sequence[float]] = None) -> np.ndarray:
    state = np.full((clocks.width + 1, 2 * clocks.levels), math.inf)
    for p, (x, a) in enumerate(vertices):
        if x > clocks.width:
            raise PaddingError(f"Sítio {x} fora da janela dos relógios")
        state[x, a] = 0.0 if values is None else values[p]
    return state


def _check_truncation(value: float, clocks: ClockField, x_from: int, x_to: int) -> None:
    w = clocks.width
    if value >= (w - x_from) + (w - x_to):
        raise PaddingError(f"Janela {w} insuficiente para a distância {value}")


def pam_distance(clocks: ClockField, p: SpaceTimePoint, q: SpaceTimePoint) -> int:
    """
    H_d(p; q) com eventos em (p.time, q.time] e a regra de ponto final f(t^-) != v

    Args:
        clocks: Campo de relógios sobre Lambda_d
        p, q: Pontos espaço-tempo com p.time < q.time

    Returns:
        Distância inteira
    """
    g = CylinderGraph(clocks.levels, 0)
    g.check_vertex(p.vertex)
    g.check_vertex(q.vertex)
    if not p.time < q.time:
        raise DomainError(f"Ordem temporal violada: {p.time} >= {q.time}")
    if q.x > clocks.width:
        raise PaddingError(f"Sítio {q.x} fora da janela dos relógios")
    sweep = MetricSweep(clocks, _point_state(clocks, [p.vertex]))
    value = float(sweep.run(p.time, q.time)[q.x, q.a])
    _check_truncation(value, clocks, p.x, q.x)
    return int(value)


def pam_distance_reduced(
    clocks: ClockField, x: int, s: float, y: int, t: float, check_spread: bool = True
) -> int:
    """
    H_d^-(x, s; y, t) = min sobre (x, a), (y, b) de H_d

    Com check_spread, a dispersão entre níveis é conferida por level_spread (InvariantError se violada).
    """
    if check_spread and clocks.levels > 1:
        level_spread(clocks, x, s, y, t)
    g = CylinderGraph(clocks.levels, 0)
    sweep = MetricSweep(clocks, _point_state(clocks, [(x, a) for a in g.levels_at(x)]))
    dist = sweep.run(s, t)
    value = float(min(dist[y, b] for b in g.levels_at(y)))
    _check_truncation(value, clocks, x, y)
    return int(value)


def level_matrix(clocks: ClockField, x: int, s: float, y: int, t: float) -> np.ndarray:
    """H_d(x, a, s; y, b, t) com a nas linhas e b nas colunas (níveis válidos em ordem)."""
    g = CylinderGraph(clocks.levels, 0)
    rows = []
    for a in g.levels_at(x):
        dist = MetricSweep(clocks, _point_state(clocks, [(x, a)])).run(s, t)
        rows.append([float(dist[y, b]) for b in g.levels_at(y)])
    values = np.array(rows)
    _check_truncation(float(values.max()), clocks, x, y)
    return values


def spread_bound(levels: int) -> int:
    """
    Limite garantido para max - min de H_d sobre todos os pares de níveis

    Com um extremo fixo a dispersão é no máximo 2d - 2 (dois movimentos instantâneos sobem
    dois níveis); variando os dois extremos, 2(2d - 2), que coincide com 2d para d = 2.
    """
    return max(2 * levels, 4 * levels - 4)


def level_spread(clocks: ClockField, x: int, s: float, y: int, t: float) -> int:
    """
    max - min de H_d(x, a, s; y, b, t) sobre os níveis

    Raises:
        InvariantError: dispersão com um extremo fixo acima de 2d - 2 ou total acima de spread_bound
    """
    values = level_matrix(clocks, x, s, y, t)
    d = clocks.levels
    spread = int(values.max() - values.min())
    start_spread = int(np.max(values.max(axis=0) - values.min(axis=0)))
    end_spread = int(np.max(values.max(axis=1) - values.min(axis=1)))
    if max(start_spread, end_spread) > 2 * d - 2 or spread > spread_bound(d):
        raise InvariantError(
            f"Dispersão entre níveis {spread} (extremos {start_spread}, {end_spread}) acima do limite, d={d}"
        )
    if spread > 2 * d:
        logger.info(f"Dispersão entre níveis {spread} acima de 2d = {2 * d} (limite garantido {spread_bound(d)})")
    return spread


def reversed_reduced_distance(clocks: ClockField, x: int, s: float, y: int, t: float) -> int:
    """H_d^- calculada no campo invertido no tempo com os extremos trocados."""
    rev = clocks.reversed()
    return pam_distance_reduced(rev, y, clocks.horizon - t, x, clocks.horizon - s)


def coupled_heights(clocks: ClockField, h0: HeightFunction, s: float, t: float, xs: Sequence[int]) -> np.ndarray:
    """
    h_t(x) = min_{y, (x, a)} h_s(y) + H_d(pi(y, h_s(y)), s; x, a, t)
    """
    period = 2 * clocks.levels
    ys = list(range(clocks.width + 1))
    vertices = [(y, h0(y) % period) for y in ys]
    sweep = MetricSweep(clocks, _point_state(clocks, vertices, [float(h0(y)) for y in ys]))
    dist = sweep.run(s, t) if t > s else sweep.dist
    levels = CylinderGraph(clocks.levels, 0)
    out = np.empty(len(xs), dtype=np.int64)
    edge = float(h0(clocks.width))
    for p, x in enumerate(xs):
        value = float(min(dist[x, a] for a in levels.levels_at(x)))
        if value >= edge + (clocks.width - x):
            raise PaddingError(f"Janela insuficiente para o sítio {x}")
        out[p] = int(value)
    return out


def tasep_coupling_check(clocks: ClockField, h0: HeightFunction, t: float, xs: Sequence[int]) -> bool:
    """
    Compara a evolução do acoplamento de nível d com a fórmula variacional em H_d, sítio a sítio
    """
    evo = HeightEvolution(h0, clocks)
    evo.advance(t)
    direct = [evo.height(x) for x in xs]
    if t == 0:
        return all(d == h0(x) for d, x in zip(direct, xs))
    metric = coupled_heights(clocks, h0, 0.0, t, xs)
    mismatches = [(x, d, int(m)) for x, d, m in zip(xs, direct, metric) if d != m]
    if mismatches:
        logger.error(f"Acoplamento TASEP/H_d divergente em {mismatches[:5]}")
    return not mismatches


def _layer_times(clocks: ClockField, s: float, t: float) -> List[float]:
    times = clocks.times[(clocks.times > s) & (clocks.times <= t)]
    return [s] + sorted(set(float(r) for r in times))


def event_graph(clocks: ClockField, s: float, t: float) -> Tuple[nx.DiGraph, List[float]]:
    """
    Grafo de eventos: nós (x, a, k) = vértice no instante da camada k; movimentos de custo 1
    dentro da camada e esperas de custo 0 quando o vértice não toca no instante seguinte
    """
    layers = _layer_times(clocks, s, t)
    rings: Dict[int, set] = {}
    for r, x, a in clocks.events():
        if s < r <= t:
            rings.setdefault(layers.index(r), set()).add((x, a))
    cyl = CylinderGraph(clocks.levels, clocks.width)
    g = nx.DiGraph()
    for k in range(len(layers)):
        for u, v in cyl.graph.edges:
            g.add_edge((*u, k), (*v, k), weight=1)
        if k + 1 < len(layers):
            blocked = rings.get(k + 1, set())
            for u in cyl.graph.nodes:
                if u not in blocked:
                    g.add_edge((*u, k), (*u, k + 1), weight=0)
    return g, layers


def pam_geodesic(clocks: ClockField, p: SpaceTimePoint, q: SpaceTimePoint) -> Tuple[int, pd.DataFrame]:
    """
    Geodésica de H_d por Dijkstra no grafo de eventos

    Returns:
        (custo, tabela (time, x, a) com um registro por nó visitado)
    """
    if not p.time < q.time:
        raise DomainError(f"Ordem temporal violada: {p.time} >= {q.time}")
    g, layers = event_graph(clocks, p.time, q.time)
    source = (p.x, p.a, 0)
    target = (q.x, q.a, len(layers) - 1)
    try:
        path = nx.dijkstra_path(g, source, target, weight="weight")
    except nx.NetworkXNoPath:
        raise PaddingError("Sem trajetória dentro da janela dos relógios")
    cost = sum(g.edges[u, v]["weight"] for u, v in zip(path[:-1], path[1:]))
    rows = [{"time": layers[k], "x": x, "a": a} for x, a, k in path]
    rows.append({"time": q.time, "x": q.x, "a": q.a})
    _check_truncation(float(cost), clocks, p.x, q.x)
    return int(cost), pd.DataFrame(rows, columns=["time", "x", "a"])


def pam_clocks(
    rho: float,
    eps: float,
    points: Sequence[Tuple[float, float, float, float]],
    levels: int,
    source: SeededSource,
    alpha_fixed: float = 1.0,
) -> ClockField:
    """Relógios com alpha = 1/2 - rho eps^{1/2}/2 cobrindo os pontos reescalados."""
    emap = EpsilonMap(eps=eps, rho=rho, alpha_fixed=alpha_fixed)
    horizon = max(emap.time(t) for _, _, _, t in points)
    x_max = max(max(emap.site(x), emap.site(y)) for x, _, y, _ in points)
    if levels * math.sqrt(eps) * abs(math.log(eps)) > 0.5:
        logger.warning(f"d eps^(1/2) |log eps| = {levels * math.sqrt(eps) * abs(math.log(eps)):.3f} não é pequeno")
    return ClockField.sample(emap.alpha, required_width(x_max, emap.alpha, horizon), horizon, source, levels)


def rescaled_pam(
    clocks: ClockField,
    rho: float,
    eps: float,
    points: Sequence[Tuple[float, float, float, float]],
    alpha_fixed: float = 1.0,
) -> List[float]:
    """
    M^{rho,eps}(x, s; y, t) = -eps^{1/2} H^-(floor(2x/eps), 2 eps^{-3/2} s; floor(2y/eps), 2 eps^{-3/2} t) + (t - s)/eps
    """
    emap = EpsilonMap(eps=eps, rho=rho, alpha_fixed=alpha_fixed)
    if not math.isclose(clocks.alpha, emap.alpha, rel_tol=1e-12):
        raise DomainError(f"Relógios com alpha={clocks.alpha}, esperado {emap.alpha}")
    values = []
    for x, s, y, t in points:
        if not s < t:
            raise DomainError(f"Requer s < t, recebido ({s}, {t})")
        h = pam_distance_reduced(clocks, emap.site(x), emap.time(s), emap.site(y), emap.time(t))
        values.append(-math.sqrt(eps) * h + (t - s) / eps)
    return values
