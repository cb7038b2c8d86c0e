"""
Módulo do polímero log-gamma: funções de partição em espaço logarítmico e a
RSK de duas linhas nas álgebras (+, x) e (max, +).
"""
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from .env import SeededSource, WeightField
from .errors import DomainError, RangeError
from .lpp import (
    BoundaryFunction,
    PathMasks,
    constraint_masks,
    enumerate_paths,
    l_point,
    window_block,
    path_admissible,
)
from .models import (
    Algebra,
    Cell,
    Constraint,
    IsometryReport,
    LogPartition,
    PassageQuery,
    SwapCoupling,
    TwoLineEnvironment,
    WeightKind,
)

logger = logging.getLogger(__name__)


def _lex_logsum(cs: np.ndarray, fs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Soma logarítmica de pares (contagem de infinitos, parte finita) empilhados no eixo 0
    """
    top = cs.max(axis=0)
    masked = np.where(cs == top, fs, -np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        fin = logsumexp(masked, axis=0)
    fin = np.where(top < 0, -np.inf, fin)
    return top, fin


def log_weights(weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Separa pesos positivos em (contagem de infinitos, log da parte finita, admissível)
    """
    adm = weights > -np.inf
    finite = np.isfinite(weights)
    if np.any(finite & (weights <= 0)):
        raise DomainError("Peso finito não positivo numa função de partição")
    cnt = np.isposinf(weights).astype(np.int32)
    with np.errstate(divide="ignore"):
        lw = np.where(finite, np.log(np.where(finite, weights, 1.0)), 0.0)
    return cnt, lw, adm


class LogPartitionGrid:
    """
    log Z de um conjunto de fontes para todas as células de um retângulo
    """

    def __init__(self, origin: Cell, log_w: np.ndarray, w_cnt: np.ndarray, masks: PathMasks, sources: np.ndarray):
        self.origin = origin
        self.layers = 1 if masks.hit is None else 2
        a, b = log_w.shape
        self.shape = (a, b)
        self.cnt = np.full((self.layers, a, b), -1, dtype=np.int32)
        self.fin = np.full((self.layers, a, b), -np.inf)

        hit = masks.hit
        for d in range(a + b - 1):
            p = np.arange(max(0, d - b + 1), min(d, a - 1) + 1)
            q = d - p
            hit_d = hit[p, q] if hit is not None else None
            for layer in range(self.layers):
                terms_c, terms_f = [], []
                for dp, dq, allow in ((1, 0, masks.allow_first), (0, 1, None)):
                    pp, qq = p - dp, q - dq
                    ok = (pp >= 0) & (qq >= 0)
                    if allow is not None:
                        ok[ok] = allow[p[ok], q[ok]]
                    for src in ([0] if layer == 0 else [0, 1]):
                        c = np.full(p.size, -1, dtype=np.int32)
                        f = np.full(p.size, -np.inf)
                        c[ok] = self.cnt[src, pp[ok], qq[ok]]
                        f[ok] = self.fin[src, pp[ok], qq[ok]]
                        if layer == 1 and src == 0:
                            c[~hit_d] = -1
                            f[~hit_d] = -np.inf
                        terms_c.append(c)
                        terms_f.append(f)
                start = sources[p, q].copy()
                if hit_d is not None:
                    start &= hit_d if layer == 1 else ~hit_d
                terms_c.append(np.where(start, 0, -1).astype(np.int32))
                terms_f.append(np.where(start, 0.0, -np.inf))

                c, f = _lex_logsum(np.stack(terms_c), np.stack(terms_f))
                reach = (c >= 0) & masks.admissible[p, q]
                if layer == 0 and hit_d is not None:
                    reach &= ~hit_d
                self.cnt[layer, p, q] = np.where(reach, c + w_cnt[p, q], -1)
                self.fin[layer, p, q] = np.where(reach, f + log_w[p, q], -np.inf)

    def pair(self, cell: Cell) -> Tuple[int, float]:
        p, q = cell[0] - self.origin[0], cell[1] - self.origin[1]
        if not (0 <= p < self.shape[0] and 0 <= q < self.shape[1]):
            raise RangeError(f"Célula {cell} fora da grade")
        return int(self.cnt[-1, p, q]), float(self.fin[-1, p, q])


def _log_value(cnt: int, fin: float) -> float:
    if cnt < 0:
        return -math.inf
    return math.inf if cnt > 0 else fin


def log_partition_grid(
    weights: np.ndarray, origin: Cell, sources: Sequence[Cell], constraint: Optional[Constraint] = None
) -> LogPartitionGrid:
    cnt, lw, adm = log_weights(weights)
    masks = constraint_masks(adm, origin, constraint or Constraint())
    src = np.zeros(weights.shape, dtype=bool)
    for i, j in sources:
        src[i - origin[0], j - origin[1]] = True
    return LogPartitionGrid(origin, lw, cnt, masks, src)


def log_partition(field: WeightField, q: PassageQuery) -> LogPartition:
    """
    log Z(u; v) pela recursão logZ(v) = log w(v) + logaddexp(logZ(v-e1), logZ(v-e2))

    Args:
        field: Campo de pesos positivos (log-gamma)
        q: Consulta com restrição opcional

    Returns:
        LogPartition; log_z = -inf quando não há caminho admissível
    """
    for cell in (q.start, q.end):
        if not field.contains(*cell):
            raise RangeError(f"Ponto {cell} fora da janela do campo")
    if q.start[0] > q.end[0] or q.start[1] > q.end[1]:
        return LogPartition(log_z=-math.inf, start=q.start, end=q.end, constraint=q.constraint)
    weights = np.array(window_block(field, q.start, q.end), copy=True)
    if not q.include_start_weight and weights[0, 0] > -np.inf:
        weights[0, 0] = 1.0
    grid = log_partition_grid(weights, q.start, [q.start], q.constraint)
    cnt, fin = grid.pair(q.end)
    return LogPartition(
        log_z=_log_value(cnt, fin),
        infinite_cells=max(cnt, 0),
        start=q.start,
        end=q.end,
        constraint=q.constraint,
    )


def trapezoid_log_partition(
    field: WeightField, n: int, m: int, constraint: Optional[Constraint] = None
) -> LogPartition:
    """
    log sum_{i=0}^{m-1} Z(1,1; n+i, m-i)
    """
    if n < m or m < 1:
        raise DomainError(f"Requer n >= m >= 1, recebido n={n}, m={m}")
    end = (n + m - 1, m)
    weights = np.array(window_block(field, (1, 1), end), copy=True)
    grid = log_partition_grid(weights, (1, 1), [(1, 1)], constraint)
    pairs = [grid.pair((n + i, m - i)) for i in range(m)]
    c, f = _lex_logsum(np.array([[p[0]] for p in pairs]), np.array([[p[1]] for p in pairs]))
    return LogPartition(
        log_z=_log_value(int(c[0]), float(f[0])),
        infinite_cells=max(int(c[0]), 0),
        start=(1, 1),
        end=(n, m),
        constraint=constraint or Constraint(),
    )


def brute_force_log_partition(field: WeightField, q: PassageQuery) -> float:
    """
    Oráculo por enumeração de caminhos para janelas pequenas (só pesos finitos)
    """
    terms = []
    for path in enumerate_paths(q.start, q.end):
        if not path_admissible(path, field.__getitem__, q.constraint):
            continue
        cells = path if q.include_start_weight else path[1:]
        terms.append(sum(math.log(field[c]) for c in cells))
    if not terms:
        return -math.inf
    return float(logsumexp(terms))


def seeded_log_weights(field: WeightField, log_f: BoundaryFunction, i_max: int, j_max: int) -> np.ndarray:
    """
    Pesos do ambiente semeado: nível 0 com razões f(j)/f(j - sgn j), bulk do campo
    """
    weights = np.empty((i_max + 1, j_max + 1))
    weights[0, 0] = 1.0
    for i in range(1, i_max + 1):
        weights[i, 0] = math.exp(log_f(i) - log_f(i - 1))
    for j in range(1, j_max + 1):
        weights[0, j] = math.exp(log_f(-j) - log_f(-j + 1))
    if i_max >= 1 and j_max >= 1:
        weights[1:, 1:] = window_block(field, (1, 1), (i_max, j_max))
    return weights


def boundary_seeded_log_partition(
    field: WeightField,
    log_f: BoundaryFunction,
    js: Sequence[int],
    h: int,
    constraint: Optional[Constraint] = None,
) -> np.ndarray:
    """
    log Z^f(0,0; [j,h]_L) para cada j, com log_f guardando log f

    Returns:
        Array com um log Z por j
    """
    if h < 1:
        raise DomainError(f"O nível alvo deve ser >= 1, recebido {h}")
    targets = [l_point(j, h) for j in js]
    i_max = max(t[0] for t in targets)
    j_max = max(t[1] for t in targets)
    weights = seeded_log_weights(field, log_f, i_max, j_max)
    grid = log_partition_grid(weights, (0, 0), [(0, 0)], constraint or Constraint.diagonal())
    return np.array([_log_value(*grid.pair(t)) for t in targets])


def _validate_two_line(a: Sequence[float], b: Sequence[float], algebra: Algebra) -> Tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size == 0:
        raise DomainError("A e B devem ser sequências não vazias do mesmo tamanho")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise DomainError("Entradas da RSK de duas linhas devem ser finitas")
    if algebra == Algebra.SUM_PRODUCT and (np.any(a <= 0) or np.any(b <= 0)):
        raise DomainError("A álgebra (+, x) exige entradas estritamente positivas")
    return a, b


def rsk_two_line(
    a: Sequence[float],
    b: Sequence[float],
    algebra: Algebra = Algebra.SUM_PRODUCT,
    queue_start: Optional[float] = None,
) -> TwoLineEnvironment:
    """
    RSK de duas linhas: resolve as regras cumulativas para (Ahat, Bhat)

    prod_{i<=k} Bhat_i = sum_{j<=k} prod_{i<=j} A_i prod_{i=j..k} B_i e
    prod_{i<=k} Ahat_i Bhat_i = prod_{i<=k} A_i B_i (e o análogo (max, +)).

    Args:
        a, b: Linhas de entrada
        algebra: SUM_PRODUCT ou MAX_PLUS
        queue_start: Variável de fila no índice 0 (A_0 neutro, B_0 = queue_start)

    Returns:
        TwoLineEnvironment com as linhas derivadas
    """
    a, b = _validate_two_line(a, b, algebra)
    if queue_start is not None:
        if math.isnan(queue_start) or queue_start < 0 or (algebra == Algebra.SUM_PRODUCT and queue_start == 0):
            raise DomainError(f"Início de fila inválido: {queue_start}")
        if math.isinf(queue_start):
            # fila infinita: a saída repete a entrada
            return TwoLineEnvironment(
                a=a.tolist(), b=b.tolist(), a_hat=a.tolist(), b_hat=b.tolist(),
                algebra=algebra, queue_start=queue_start,
            )

    if algebra == Algebra.MAX_PLUS:
        la, lb = a, b
    else:
        la, lb = np.log(a), np.log(b)
    cum_a = np.cumsum(la)

    prev = None
    if queue_start is not None:
        prev = queue_start if algebra == Algebra.MAX_PLUS else math.log(queue_start)
    m = np.empty(a.size)
    for k in range(a.size):
        if prev is None:
            m[k] = cum_a[k] + lb[k]
        elif algebra == Algebra.MAX_PLUS:
            m[k] = max(prev, cum_a[k]) + lb[k]
        else:
            m[k] = np.logaddexp(prev, cum_a[k]) + lb[k]
        prev = m[k]

    if queue_start is None:
        lb_hat = np.diff(m, prepend=0.0)
    else:
        first = queue_start if algebra == Algebra.MAX_PLUS else math.log(queue_start)
        lb_hat = np.diff(m, prepend=first)
    la_hat = la + lb - lb_hat

    if algebra == Algebra.SUM_PRODUCT:
        a_hat, b_hat = np.exp(la_hat), np.exp(lb_hat)
    else:
        a_hat, b_hat = la_hat, lb_hat
    return TwoLineEnvironment(
        a=a.tolist(), b=b.tolist(), a_hat=a_hat.tolist(), b_hat=b_hat.tolist(),
        algebra=algebra, queue_start=queue_start,
    )


def two_line_table(a: Sequence[float], b: Sequence[float], algebra: Algebra) -> np.ndarray:
    """
    L[x, y] = sum_{j=x}^y prod_{i=x}^j A_i prod_{i=j}^y B_i (em log para (+, x)), -inf para x > y
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if algebra == Algebra.SUM_PRODUCT:
        with np.errstate(divide="ignore"):
            a, b = np.log(a), np.log(b)
    n = a.size
    table = np.full((n, n), -np.inf)
    for x in range(n):
        cum = 0.0
        value = -np.inf
        for y in range(x, n):
            cum += a[y]
            if algebra == Algebra.MAX_PLUS:
                value = max(value, cum) + b[y]
            else:
                value = np.logaddexp(value, cum) + b[y]
            table[x, y] = value
    return table


def _violation(lhs: float, rhs: float) -> float:
    if lhs == rhs:
        return 0.0
    return abs(lhs - rhs) / max(1.0, abs(lhs))


def verify_isometry(env: TwoLineEnvironment, tol: float = 1e-9) -> IsometryReport:
    """
    Verifica as identidades de isometria da RSK de duas linhas

    Sem fila: L_AB(1, y) = prod Bhat_{1..y} para todo y e L_AB(x, y) = L_AhatBhat(x, y)
    para 2 <= x <= y. Com fila no índice 0, a identidade interior vale para 1 <= x <= y.
    """
    queued = env.queue_start is not None
    a, b = list(env.a), list(env.b)
    a_hat, b_hat = list(env.a_hat), list(env.b_hat)
    neutral = 0.0 if env.algebra == Algebra.MAX_PLUS else 1.0
    if queued:
        a, b = [neutral] + a, [env.queue_start] + b
        a_hat, b_hat = [neutral] + a_hat, [env.queue_start] + b_hat

    lab = two_line_table(a, b, env.algebra)
    lhat = two_line_table(a_hat, b_hat, env.algebra)
    if env.algebra == Algebra.SUM_PRODUCT:
        cum_b_hat = np.cumsum(np.log(b_hat))
    else:
        cum_b_hat = np.cumsum(b_hat)

    n = len(a)
    worst = 0.0
    checked = 0
    for y in range(n):
        worst = max(worst, _violation(lab[0, y], cum_b_hat[y]))
        checked += 1
        for x in range(1, y + 1):
            worst = max(worst, _violation(lab[x, y], lhat[x, y]))
            checked += 1
    return IsometryReport(max_violation=worst, checked_pairs=checked, tolerance=tol, passed=worst <= tol)


def _swap_laws(kind: WeightKind, gamma0: float, gamma1: float, betas: np.ndarray):
    if kind == WeightKind.GEOMETRIC:
        if np.any(betas <= 0) or gamma1 <= 0:
            raise DomainError("Geometric: parâmetros beta_i e gamma_1 devem ser positivos")
        if gamma0 < gamma1:
            raise DomainError("Geometric: requer gamma_0 >= gamma_1")
        if np.any(gamma0 * betas >= 1) or np.any(gamma0 * betas <= 0):
            raise DomainError("Geometric: requer gamma_0 * beta_i em (0, 1)")
        return gamma0 * betas, gamma1 * betas, gamma1 / gamma0
    if gamma0 > gamma1:
        raise DomainError("Requer gamma_0 <= gamma_1")
    if np.any(gamma0 + betas <= 0):
        raise DomainError("Requer gamma_0 + beta_i > 0 para todo i")
    return gamma0 + betas, gamma1 + betas, gamma1 - gamma0


def coupled_swap_sampler(
    kind: WeightKind,
    gamma0: float,
    gamma1: float,
    betas: Sequence[float],
    source: SeededSource,
) -> SwapCoupling:
    """
    Acopla (A, B) a (C, D) com parâmetros trocados preservando as passagens de duas linhas

    Uma variável de fila estacionária independente é colocada antes do intervalo; a RSK com
    essa fila produz C = Ahat e D = Bhat com as leis trocadas, e a identidade
    L_AB(x, y) = L_CD(x, y) vale para todo x <= y do intervalo.

    Args:
        kind: EXPONENTIAL, GEOMETRIC ou LOG_GAMMA
        gamma0, gamma1: Parâmetros de linha
        betas: Parâmetros beta_i do intervalo
        source: Fonte aleatória

    Returns:
        SwapCoupling com relatório de exatidão
    """
    betas = np.asarray(betas, dtype=np.float64)
    if betas.size == 0:
        raise DomainError("Intervalo vazio")
    p_a, p_b, p_queue = _swap_laws(kind, gamma0, gamma1, betas)
    idx = np.arange(1, betas.size + 1)

    if kind == WeightKind.EXPONENTIAL:
        a = source.exponential(p_a, "swap_a", idx)
        b = source.exponential(p_b, "swap_b", idx)
        z = float(source.exponential(p_queue, "swap_queue"))
        algebra = Algebra.MAX_PLUS
    elif kind == WeightKind.GEOMETRIC:
        a = source.geometric(p_a, "swap_a", idx)
        b = source.geometric(p_b, "swap_b", idx)
        z = float(source.geometric(p_queue, "swap_queue"))
        algebra = Algebra.MAX_PLUS
    else:
        a = source.inverse_gamma(p_a, "swap_a", idx)
        b = source.inverse_gamma(p_b, "swap_b", idx)
        z = float(source.inverse_gamma(p_queue, "swap_queue"))
        algebra = Algebra.SUM_PRODUCT

    env = rsk_two_line(a, b, algebra, queue_start=z)
    c, d = env.a_hat, env.b_hat
    report = compare_two_line(a, b, c, d, algebra)
    logger.debug(f"Acoplamento {kind.value} em {betas.size} índices, violação {report.max_violation:.2e}")
    return SwapCoupling(kind=kind, a=list(map(float, a)), b=list(map(float, b)), c=c, d=d, queue_start=z, report=report)


def compare_two_line(
    a: Sequence[float], b: Sequence[float], c: Sequence[float], d: Sequence[float], algebra: Algebra, tol: float = 1e-9
) -> IsometryReport:
    """Compara L_AB(x, y) e L_CD(x, y) para todo x <= y."""
    lab = two_line_table(a, b, algebra)
    lcd = two_line_table(c, d, algebra)
    n = lab.shape[0]
    worst = 0.0
    for x in range(n):
        for y in range(x, n):
            worst = max(worst, _violation(lab[x, y], lcd[x, y]))
    pairs = n * (n + 1) // 2
    return IsometryReport(max_violation=worst, checked_pairs=pairs, tolerance=tol, passed=worst <= tol)


def random_two_line(source: SeededSource, n: int, algebra: Algebra) -> Tuple[List[float], List[float]]:
    """Instância aleatória Exp(1) (ou Gamma^-1(2) em (+, x)) para testes de isometria."""
    idx = np.arange(n)
    if algebra == Algebra.MAX_PLUS:
        return source.exponential(1.0, "iso_a", idx).tolist(), source.exponential(1.0, "iso_b", idx).tolist()
    return source.inverse_gamma(2.0, "iso_a", idx).tolist(), source.inverse_gamma(2.0, "iso_b", idx).tolist()
