"""
Módulo de percolação de última passagem (LPP) por programação dinâmica

Os valores são pares lexicográficos (número de células infinitas, parte finita):
caminhos que passam por mais células de peso +inf dominam, e a parte finita desempata.
Células inalcançáveis têm contagem -1 e parte finita -inf.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .env import WeightField
from .errors import DomainError, NoPathError, RangeError
from .models import Cell, Constraint, ConstraintKind, PassageQuery, PassageResult, TieBreak

logger = logging.getLogger(__name__)

UNIQUE_TOL = 1e-12
# folga para ell * n^(2/3) calculado em ponto flutuante
WIDTH_TOL = 1e-9

# direção 0: passo de (i-1, j); direção 1: passo de (i, j-1)
STEPS = ((1, 0), (0, 1))


def l_point(j: int, h: int) -> Cell:
    """Ponto [j, h]_L da região em forma de L no nível h."""
    return (h + j, h) if j >= 0 else (h, h - j)


def extended_value(cnt: int, fin: float) -> float:
    if cnt < 0:
        return -math.inf
    if cnt > 0:
        return math.inf
    return float(fin)


def split_weights(w: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    cnt = np.isposinf(w).astype(np.int32)
    fin = np.where(np.isfinite(w), w, 0.0)
    adm = w > -np.inf
    return cnt, fin, adm


@dataclass
class PathMasks:
    admissible: np.ndarray
    allow_first: np.ndarray
    hit: Optional[np.ndarray] = None


def constraint_masks(
    adm: np.ndarray, origin: Cell, constraint: Constraint
) -> PathMasks:
    a, b = adm.shape
    ii = np.arange(origin[0], origin[0] + a)[:, None]
    jj = np.arange(origin[1], origin[1] + b)[None, :]
    allow_first = np.ones((a, b), dtype=bool)
    admissible = adm.copy()
    hit = None

    if constraint.kind == ConstraintKind.DIAGONAL:
        # proíbe a aresta (i-1, i) -> (i, i)
        allow_first &= ~np.broadcast_to(ii == jj, (a, b))
    elif constraint.kind == ConstraintKind.HIT_SHIFTED:
        hit = np.broadcast_to(ii - jj == constraint.shift, (a, b)).copy()
    elif constraint.kind == ConstraintKind.PARALLELOGRAM:
        half_width = constraint.width * constraint.n ** (2.0 / 3.0) + WIDTH_TOL
        centre = (ii + jj) / 2.0
        corridor = (np.abs(ii - jj) <= half_width) & (centre >= 1) & (centre <= constraint.n)
        admissible &= corridor
    return PathMasks(admissible, allow_first, hit)


class PassageGrid:
    """
    Valores de passagem de um conjunto de fontes para todas as células de um retângulo
    """

    def __init__(
        self,
        origin: Cell,
        weights: np.ndarray,
        masks: PathMasks,
        sources: np.ndarray,
        tie_break: TieBreak = TieBreak.FROM_I,
    ):
        self.origin = origin
        self.order = (0, 1) if tie_break == TieBreak.FROM_I else (1, 0)
        self.weights = weights
        self.masks = masks
        self.layers = 1 if masks.hit is None else 2
        a, b = weights.shape
        self.cnt = np.full((self.layers, a, b), -1, dtype=np.int32)
        self.fin = np.full((self.layers, a, b), -np.inf)
        self.choice = np.full((self.layers, a, b), -1, dtype=np.int8)
        self._run(sources)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.weights.shape

    def _run(self, sources: np.ndarray) -> None:
        wc, wf, _ = split_weights(self.weights)
        m = self.masks
        a, b = self.shape
        hit = m.hit
        for d in range(a + b - 1):
            p = np.arange(max(0, d - b + 1), min(d, a - 1) + 1)
            q = d - p
            hit_d = hit[p, q] if hit is not None else None
            for layer in range(self.layers):
                best_c = np.full(p.size, -1, dtype=np.int32)
                best_f = np.full(p.size, -np.inf)
                best_code = np.full(p.size, -1, dtype=np.int8)
                for direction in self.order:
                    dp, dq = STEPS[direction]
                    pp, qq = p - dp, q - dq
                    ok = (pp >= 0) & (qq >= 0)
                    if direction == 0:
                        ok[ok] = m.allow_first[p[ok], q[ok]]
                    src_layers = [layer] if layer == 0 else [0, 1]
                    for src in src_layers:
                        c = np.full(p.size, -1, dtype=np.int32)
                        f = np.full(p.size, -np.inf)
                        c[ok] = self.cnt[src, pp[ok], qq[ok]]
                        f[ok] = self.fin[src, pp[ok], qq[ok]]
                        if layer == 1 and src == 0:
                            c[~hit_d] = -1
                            f[~hit_d] = -np.inf
                        better = (c > best_c) | ((c == best_c) & (f > best_f))
                        best_c = np.where(better, c, best_c)
                        best_f = np.where(better, f, best_f)
                        best_code = np.where(better, 1 + 2 * direction + src, best_code).astype(np.int8)

                start = sources[p, q].copy()
                if hit_d is not None:
                    start &= hit_d if layer == 1 else ~hit_d
                better = start & ((best_c < 0) | ((best_c == 0) & (best_f < 0.0)))
                best_c = np.where(better, 0, best_c)
                best_f = np.where(better, 0.0, best_f)
                best_code = np.where(better, 0, best_code).astype(np.int8)

                reach = (best_c >= 0) & m.admissible[p, q]
                if layer == 0 and hit_d is not None:
                    reach &= ~hit_d
                self.cnt[layer, p, q] = np.where(reach, best_c + wc[p, q], -1)
                self.fin[layer, p, q] = np.where(reach, best_f + wf[p, q], -np.inf)
                self.choice[layer, p, q] = np.where(reach, best_code, -1)

    def _local(self, cell: Cell) -> Tuple[int, int]:
        p, q = cell[0] - self.origin[0], cell[1] - self.origin[1]
        a, b = self.shape
        if not (0 <= p < a and 0 <= q < b):
            raise RangeError(f"Célula {cell} fora da grade de passagem")
        return p, q

    def pair(self, cell: Cell) -> Tuple[int, float]:
        p, q = self._local(cell)
        layer = self.layers - 1
        return int(self.cnt[layer, p, q]), float(self.fin[layer, p, q])

    def value(self, cell: Cell) -> float:
        return extended_value(*self.pair(cell))

    def row_pairs(self, j: int, i_from: int, i_to: int) -> Tuple[np.ndarray, np.ndarray]:
        layer = self.layers - 1
        q = j - self.origin[1]
        p0, p1 = i_from - self.origin[0], i_to - self.origin[0]
        return self.cnt[layer, p0:p1 + 1, q], self.fin[layer, p0:p1 + 1, q]

    def backtrack(self, cell: Cell) -> Tuple[List[Cell], float]:
        """
        Geodésica até cell e a menor margem de decisão ao longo dela
        """
        p, q = self._local(cell)
        layer = self.layers - 1
        if self.cnt[layer, p, q] < 0:
            raise NoPathError(f"Sem caminho admissível até {cell}")
        path = []
        margin = math.inf
        while True:
            path.append((p + self.origin[0], q + self.origin[1]))
            code = int(self.choice[layer, p, q])
            margin = min(margin, self._margin(layer, p, q, code))
            if code == 0:
                break
            direction, src = divmod(code - 1, 2)
            p, q = (p - 1, q) if direction == 0 else (p, q - 1)
            layer = src
        path.reverse()
        return path, margin

    def _margin(self, layer: int, p: int, q: int, code: int) -> float:
        m = self.masks
        cands: Dict[int, Tuple[int, float]] = {}
        is_hit = bool(m.hit[p, q]) if m.hit is not None else False
        for direction, (dp, dq) in enumerate(STEPS):
            pp, qq = p - dp, q - dq
            if pp < 0 or qq < 0 or (direction == 0 and not m.allow_first[p, q]):
                continue
            src_layers = [layer] if layer == 0 else ([0, 1] if is_hit else [1])
            for src in src_layers:
                c = int(self.cnt[src, pp, qq])
                if c >= 0:
                    cands[1 + 2 * direction + src] = (c, float(self.fin[src, pp, qq]))
        if code == 0:
            cands[0] = (0, 0.0)
        chosen = cands.get(code)
        if chosen is None:
            return math.inf
        gaps = [chosen[1] - f for k, (c, f) in cands.items() if k != code and c == chosen[0]]
        return min(gaps) if gaps else math.inf


def window_block(field: WeightField, lo: Cell, hi: Cell) -> np.ndarray:
    for cell in (lo, hi):
        if not field.contains(*cell):
            raise RangeError(f"Ponto {cell} fora da janela do campo")
    return np.array(field.block(lo[0], hi[0], lo[1], hi[1]), copy=True)


def grid_from_weights(
    weights: np.ndarray,
    origin: Cell,
    sources: Sequence[Cell],
    constraint: Optional[Constraint] = None,
    tie_break: TieBreak = TieBreak.FROM_I,
) -> PassageGrid:
    """
    Grade de passagem sobre um array de pesos arbitrário com origem na rede
    """
    constraint = constraint or Constraint()
    _, _, adm = split_weights(weights)
    masks = constraint_masks(adm, origin, constraint)
    src = np.zeros(weights.shape, dtype=bool)
    for i, j in sources:
        src[i - origin[0], j - origin[1]] = True
    return PassageGrid(origin, weights, masks, src, tie_break)


def passage_grid(
    field: WeightField,
    sources: Sequence[Cell],
    corner: Cell,
    constraint: Optional[Constraint] = None,
    include_start_weight: bool = True,
    tie_break: TieBreak = TieBreak.FROM_I,
) -> PassageGrid:
    """
    Passagem de múltiplas fontes até todas as células do retângulo [min(fontes), corner]

    Args:
        field: Campo de pesos
        sources: Pontos de partida
        corner: Canto superior direito do retângulo
        constraint: Restrição de caminhos
        include_start_weight: Se False o peso da fonte não é somado (variante X^-)
        tie_break: Passo preferido nos empates do retrocesso

    Returns:
        Grade com os valores lexicográficos
    """
    if not sources:
        raise DomainError("É preciso ao menos uma fonte")
    lo = (min(s[0] for s in sources), min(s[1] for s in sources))
    weights = window_block(field, lo, corner)
    if not include_start_weight:
        for i, j in sources:
            if weights[i - lo[0], j - lo[1]] > -np.inf:
                weights[i - lo[0], j - lo[1]] = 0.0
    return grid_from_weights(weights, lo, sources, constraint, tie_break)


def _result_from_grid(grid: PassageGrid, end: Cell, with_geodesic: bool) -> PassageResult:
    cnt, fin = grid.pair(end)
    result = PassageResult(value=extended_value(cnt, fin), infinite_cells=max(cnt, 0), finite_part=fin)
    if with_geodesic and cnt >= 0:
        path, margin = grid.backtrack(end)
        result.geodesic = path
        result.margin = margin
        result.unique = margin > UNIQUE_TOL
    return result


def passage_time(field: WeightField, q: PassageQuery, geodesic: bool = False) -> PassageResult:
    """
    Tempo de passagem de q.start até q.end

    Args:
        field: Campo de pesos
        q: Consulta
        geodesic: Se True também extrai a geodésica

    Returns:
        Resultado com valor estendido (-inf quando não há caminho)
    """
    for cell in (q.start, q.end):
        if not field.contains(*cell):
            raise RangeError(f"Ponto {cell} fora da janela do campo")
    if q.start[0] > q.end[0] or q.start[1] > q.end[1]:
        return PassageResult(value=-math.inf, infinite_cells=0, finite_part=-math.inf)
    grid = passage_grid(field, [q.start], q.end, q.constraint, q.include_start_weight, q.tie_break)
    return _result_from_grid(grid, q.end, geodesic)


def extract_geodesic(field: WeightField, q: PassageQuery) -> List[Cell]:
    """
    Geodésica por retrocesso do argmax da programação dinâmica (desempate: q.tie_break, por padrão o passo de (i-1, j))
    """
    result = passage_time(field, q, geodesic=True)
    if result.value == -math.inf or result.geodesic is None:
        raise NoPathError(f"Sem caminho de {q.start} até {q.end}")
    return result.geodesic


def path_weight(field: WeightField, path: Sequence[Cell], include_start_weight: bool = True) -> float:
    cells = path if include_start_weight else path[1:]
    return float(sum(field[c] for c in cells))


def _lex_argmax(cnts: np.ndarray, fins: np.ndarray) -> Tuple[int, float]:
    """Índice do maior par (menor índice em empates) e a margem para o segundo."""
    best = 0
    for k in range(1, len(cnts)):
        if cnts[k] > cnts[best] or (cnts[k] == cnts[best] and fins[k] > fins[best]):
            best = k
    gaps = [fins[best] - fins[k] for k in range(len(cnts)) if k != best and cnts[k] == cnts[best]]
    return best, (min(gaps) if gaps else math.inf)


def point_to_line_trapezoid(
    field: WeightField, n: int, m: int, constraint: Optional[Constraint] = None
) -> PassageResult:
    """
    max_{0 <= i <= m-1} X((1,1); (n+i, m-i))
    """
    if n < m or m < 1:
        raise DomainError(f"Requer n >= m >= 1, recebido n={n}, m={m}")
    grid = passage_grid(field, [(1, 1)], (n + m - 1, m), constraint)
    pairs = [grid.pair((n + i, m - i)) for i in range(m)]
    cnts = np.array([c for c, _ in pairs])
    fins = np.array([f for _, f in pairs])
    best, margin = _lex_argmax(cnts, fins)
    return PassageResult(
        value=extended_value(int(cnts[best]), float(fins[best])),
        infinite_cells=max(int(cnts[best]), 0),
        finite_part=float(fins[best]),
        argmax_index=best,
        unique=margin > UNIQUE_TOL,
        margin=margin,
    )


class BoundaryFunction(BaseModel):
    """
    Função de fronteira f: Z -> R com suporte finito e caudas lineares opcionais
    """
    model_config = ConfigDict(frozen=True)

    values: Dict[int, float] = Field(default_factory=dict)
    left_slope: Optional[float] = None
    right_slope: Optional[float] = None

    @classmethod
    def from_arrays(cls, js: Iterable[int], vals: Iterable[float], **kwargs) -> "BoundaryFunction":
        return cls(values={int(j): float(v) for j, v in zip(js, vals)}, **kwargs)

    @classmethod
    def zero(cls) -> "BoundaryFunction":
        return cls(values={0: 0.0}, left_slope=0.0, right_slope=0.0)

    def __call__(self, j: int) -> float:
        if j in self.values:
            return self.values[j]
        lo, hi = min(self.values), max(self.values)
        if j > hi and self.right_slope is not None:
            return self.values[hi] + self.right_slope * (j - hi)
        if j < lo and self.left_slope is not None:
            return self.values[lo] - self.left_slope * (lo - j)
        raise DomainError(f"f não está definida em {j}")


def seeded_weights(field: WeightField, f: BoundaryFunction, i_max: int, j_max: int) -> np.ndarray:
    """
    Ambiente E^f sobre [0, i_max] x [0, j_max]: nível 0 com incrementos de f, bulk do campo
    """
    weights = np.empty((i_max + 1, j_max + 1))
    weights[0, 0] = 0.0
    for i in range(1, i_max + 1):
        weights[i, 0] = f(i) - f(i - 1)
    for j in range(1, j_max + 1):
        weights[0, j] = f(-j) - f(-j + 1)
    if i_max >= 1 and j_max >= 1:
        weights[1:, 1:] = window_block(field, (1, 1), (i_max, j_max))
    return weights


def boundary_seeded_values(
    field: WeightField,
    f: BoundaryFunction,
    js: Sequence[int],
    h: int,
    constraint: Optional[Constraint] = None,
) -> np.ndarray:
    """
    X^f(0,0; [j,h]_L) para todos os j pedidos numa única programação dinâmica
    """
    if h < 1:
        raise DomainError(f"O nível alvo deve ser >= 1, recebido {h}")
    targets = [l_point(j, h) for j in js]
    i_max = max(t[0] for t in targets)
    j_max = max(t[1] for t in targets)
    weights = seeded_weights(field, f, i_max, j_max)
    grid = grid_from_weights(weights, (0, 0), [(0, 0)], constraint or Constraint.diagonal())
    return np.array([grid.value(t) for t in targets])


def boundary_seeded_passage(
    field: WeightField,
    f: BoundaryFunction,
    target: Tuple[int, int],
    constraint: Optional[Constraint] = None,
) -> PassageResult:
    """
    X^f(0,0; [j,h]_L) para target = (j, h)
    """
    j, h = target
    if h < 1:
        raise DomainError(f"O nível alvo deve ser >= 1, recebido {h}")
    end = l_point(j, h)
    weights = seeded_weights(field, f, end[0], end[1])
    grid = grid_from_weights(weights, (0, 0), [(0, 0)], constraint or Constraint.diagonal())
    return _result_from_grid(grid, end, with_geodesic=True)


def _reverse_masks(masks: PathMasks) -> PathMasks:
    a, b = masks.admissible.shape
    first = np.ones((a, b), dtype=bool)
    first[1:, :] = masks.allow_first[::-1, ::-1][:-1, :]
    return PathMasks(masks.admissible[::-1, ::-1].copy(), first)


def _lex_add(c1, f1, c2, f2):
    bad = (c1 < 0) | (c2 < 0)
    return np.where(bad, -1, c1 + c2), np.where(bad, -np.inf, f1 + f2)


def _lex_close(a: Tuple[int, float], b: Tuple[int, float], rel: float = 1e-10) -> bool:
    if a[0] != b[0]:
        return False
    if a[0] < 0:
        return True
    return math.isclose(a[1], b[1], rel_tol=rel, abs_tol=rel)


def metric_composition_check(
    field: WeightField, u: Cell, v: Cell, r: int, constraint: Optional[Constraint] = None
) -> bool:
    """
    Verifica X(u;v) = max_z [X(u;(z,r)) + X((z,r+1);v)]
    """
    if not u[1] < r < v[1]:
        raise DomainError(f"Linha {r} deve estar estritamente entre {u[1]} e {v[1]}")
    constraint = constraint or Constraint()
    if constraint.kind == ConstraintKind.HIT_SHIFTED:
        raise DomainError("A composição métrica não se aplica a restrições com memória")

    weights = window_block(field, u, v)
    _, _, adm = split_weights(weights)
    masks = constraint_masks(adm, u, constraint)
    src = np.zeros(weights.shape, dtype=bool)
    src[0, 0] = True
    forward = PassageGrid(u, weights, masks, src)

    a, b = weights.shape
    rmasks = _reverse_masks(masks)
    rsrc = np.zeros(weights.shape, dtype=bool)
    rsrc[0, 0] = True
    backward = PassageGrid((0, 0), weights[::-1, ::-1].copy(), rmasks, rsrc)

    q = r - u[1]
    fc, ff = forward.cnt[0, :, q], forward.fin[0, :, q]
    bc = backward.cnt[0, ::-1, b - 1 - (q + 1)]
    bf = backward.fin[0, ::-1, b - 1 - (q + 1)]
    cc, cf = _lex_add(fc, ff, bc, bf)
    best, _ = _lex_argmax(cc, cf)
    composed = (int(cc[best]), float(cf[best]))
    direct = (int(forward.cnt[0, a - 1, b - 1]), float(forward.fin[0, a - 1, b - 1]))
    return _lex_close(direct, composed)


def _pair(result: PassageResult) -> Tuple[int, float]:
    if result.value == -math.inf:
        return (-1, -math.inf)
    return (result.infinite_cells, result.finite_part)


def _pair_sum(a: Tuple[int, float], b: Tuple[int, float]) -> Tuple[int, float]:
    if a[0] < 0 or b[0] < 0:
        return (-1, -math.inf)
    return (a[0] + b[0], a[1] + b[1])


def _pair_geq(a: Tuple[int, float], b: Tuple[int, float], tol: float = 1e-9) -> bool:
    if b[0] < 0:
        return True
    if a[0] != b[0]:
        return a[0] > b[0]
    return a[1] >= b[1] - tol * max(1.0, abs(b[1]))


def quadrangle_check(
    field: WeightField,
    x1: int,
    x2: int,
    y1: int,
    y2: int,
    s: int,
    t: int,
    reduced: Optional[WeightField] = None,
    constraint: Optional[Constraint] = None,
) -> bool:
    """
    Desigualdade do quadrângulo para pontos de partida (x, s) e chegada (y, t)

    Com reduced (pesos <= field, iguais fora da diagonal) verifica a versão de dois ambientes:
    reduced(u1;v1) + field(u2;v2) <= field(u1;v1) + reduced(u2;v2).
    """
    if x1 > x2 or y1 > y2 or s >= t:
        raise DomainError("Requer x1 <= x2, y1 <= y2 e s < t")
    constraint = constraint or Constraint()

    def x(fld: WeightField, a: int, c: int) -> Tuple[int, float]:
        return _pair(passage_time(fld, PassageQuery(start=(a, s), end=(c, t), constraint=constraint)))

    if reduced is None:
        left = _pair_sum(x(field, x1, y1), x(field, x2, y2))
        right = _pair_sum(x(field, x1, y2), x(field, x2, y1))
        return _pair_geq(left, right)

    left = _pair_sum(x(reduced, x1, y1), x(field, x2, y2))
    right = _pair_sum(x(field, x1, y1), x(reduced, x2, y2))
    return _pair_geq(right, left)


def constrained_parallelogram(field: WeightField, n: int, ell: float, geodesic: bool = False) -> PassageResult:
    """
    Passagem de (1,1) a (n,n) restrita ao paralelogramo U_{n,ell}
    """
    if ell * n ** (2.0 / 3.0) < 2 - WIDTH_TOL:
        raise DomainError(f"Requer ell * n^(2/3) >= 2, recebido {ell * n ** (2.0 / 3.0):.3f}")
    q = PassageQuery(start=(1, 1), end=(n, n), constraint=Constraint.parallelogram(n, ell))
    result = passage_time(field, q, geodesic=geodesic)
    if result.value == -math.inf:
        raise NoPathError("Corredor vazio: nenhum caminho cabe no paralelogramo")
    return result


def path_admissible(path: Sequence[Cell], weights: Callable[[Cell], float], constraint: Constraint) -> bool:
    if any(weights(c) == -math.inf for c in path):
        return False
    if constraint.kind == ConstraintKind.DIAGONAL:
        for prev, cur in zip(path, path[1:]):
            if cur[0] == cur[1] and prev == (cur[0] - 1, cur[1]):
                return False
    elif constraint.kind == ConstraintKind.HIT_SHIFTED:
        return any(i - j == constraint.shift for i, j in path)
    elif constraint.kind == ConstraintKind.PARALLELOGRAM:
        half_width = constraint.width * constraint.n ** (2.0 / 3.0) + WIDTH_TOL
        return all(abs(i - j) <= half_width and 1 <= (i + j) / 2.0 <= constraint.n for i, j in path)
    return True


def enumerate_paths(start: Cell, end: Cell) -> Iterable[List[Cell]]:
    """Todos os caminhos up-right de start a end."""
    di, dj = end[0] - start[0], end[1] - start[1]
    if di < 0 or dj < 0:
        return
    for firsts in itertools.combinations(range(di + dj), di):
        chosen = set(firsts)
        path = [start]
        i, j = start
        for step in range(di + dj):
            if step in chosen:
                i += 1
            else:
                j += 1
            path.append((i, j))
        yield path


def brute_force_passage(field: WeightField, q: PassageQuery) -> float:
    """
    Oráculo por enumeração exaustiva de caminhos (janelas pequenas)
    """
    best = (-1, -math.inf)
    for path in enumerate_paths(q.start, q.end):
        if not path_admissible(path, field.__getitem__, q.constraint):
            continue
        cells = path if q.include_start_weight else path[1:]
        ws = [field[c] for c in cells]
        cand = (sum(1 for w in ws if w == math.inf), float(sum(w for w in ws if math.isfinite(w))))
        if cand[0] > best[0] or (cand[0] == best[0] and cand[1] > best[1]):
            best = cand
    return extended_value(*best)
