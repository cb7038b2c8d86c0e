"""
Módulo de medidas estacionárias e horizontes

Inclui as medidas Z+ de duas linhas, os processos conjuntamente estacionários
R^EL, R^GL e R^LG, o LPP cadlag exponencial-browniano e as marginais do horizonte
estacionário de meio-espaço.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from .env import SeededSource, WeightField, materialize
from .errors import DomainError, RangeError
from .ks import bound_report, one_sample_report, two_sample_report
from .lpp import BoundaryFunction, boundary_seeded_values, l_point, passage_grid, window_block
from .models import (
    Constraint,
    EnvironmentSpec,
    HorizonSample,
    KSReport,
    MCConfig,
    StationaryMeasureSpec,
    StationaryModel,
    WeightKind,
    Window,
)
from .polymer import boundary_seeded_log_partition, log_partition_grid
from .runner import ReplicaRunner
from .scaling import fit_envelope_constant

logger = logging.getLogger(__name__)

RECOMMENDED_DELTA = 0.01


def _check_zplus_beta(alpha: float, beta: float) -> None:
    if not max(0.5 - alpha, 0.0) < beta < 0.5:
        raise DomainError(f"beta deve estar em ((1/2 - alpha) v 0, 1/2), recebido beta={beta}, alpha={alpha}")


def _zplus_path(y22: float, top: np.ndarray, bottom: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Z+(j) para j >= 0 e j < 0 a partir de Y(i,1) = top[i-3] e Y(i,2) = bottom[i-3], i >= 3
    """
    s1 = np.cumsum(top)
    cb = np.concatenate([[0.0], np.cumsum(bottom)])
    # V_k = M_k - sum_{i=3..k} Y(i,2) satisfaz V_k = max(V_{k-1}, S1_k - CB_{k-1})
    v = np.maximum.accumulate(np.concatenate([[y22], s1 - cb[:-1]]))
    positive = v + cb - y22
    return positive, cb


def sample_Zplus(alpha: float, beta: float, j_min: int, j_max: int, source: SeededSource) -> Dict[int, float]:
    """
    Realiza Z+ exatamente pela definição de duas linhas

    Args:
        alpha: Parâmetro de fronteira
        beta: Parâmetro em ((1/2 - alpha) v 0, 1/2)
        j_min, j_max: Intervalo de índices
        source: Fonte aleatória

    Returns:
        Mapa j -> Z+(j)
    """
    _check_zplus_beta(alpha, beta)
    if j_min > j_max:
        raise DomainError("Intervalo vazio")
    depth = max(j_max, -j_min, 0)
    idx = np.arange(3, depth + 3)
    y22 = float(source.exponential(beta + alpha - 0.5, "zplus_y22"))
    top = source.exponential(0.5 - beta, "zplus_top", idx)
    bottom = source.exponential(0.5 + beta, "zplus_bottom", idx)
    positive, cb = _zplus_path(y22, top, bottom)
    return {j: float(positive[j] if j >= 0 else cb[-j]) for j in range(j_min, j_max + 1)}


def burke_sampler(beta: float, n: int, source: SeededSource) -> np.ndarray:
    """
    Incrementos (Z+(j) - Z+(j-1))_{j=1..n} com Y(2,2) trocado por Exp(2 beta) independente
    """
    if not 0.0 < beta < 0.5:
        raise DomainError(f"beta deve estar em (0, 1/2), recebido {beta}")
    if n < 1:
        raise DomainError("n deve ser positivo")
    idx = np.arange(3, n + 3)
    y22 = float(source.exponential(2.0 * beta, "burke_y22"))
    top = source.exponential(0.5 - beta, "burke_top", idx)
    bottom = source.exponential(0.5 + beta, "burke_bottom", idx)
    positive, _ = _zplus_path(y22, top, bottom)
    return np.diff(positive)


def zplus_oscillation_table(
    alpha: float,
    beta: float,
    length: int,
    thresholds: Sequence[float],
    mc: MCConfig,
    runner: Optional[ReplicaRunner] = None,
) -> pd.DataFrame:
    """
    Tabela de P(max_{r<s<=length} |Zbar(s) - Zbar(r)| >= m) com o envelope 2 exp(-c m^2 / (m + length))
    """
    _check_zplus_beta(alpha, beta)
    runner = runner or ReplicaRunner.from_config(mc)
    slope = 1.0 / (0.5 - beta)

    def job(src: SeededSource) -> float:
        z = sample_Zplus(alpha, beta, 0, length, src)
        centred = np.array([z[j] - j * slope for j in range(length + 1)])
        return float(centred.max() - centred.min())

    osc = runner.run_array(job, SeededSource(master_seed=mc.seed).child("zplus-osc"), mc.replicas, "zplus-osc")
    probs = [float(np.mean(osc >= m)) for m in thresholds]
    c = None
    if thresholds:
        c = fit_envelope_constant(probs[0], thresholds[0] ** 2 / (thresholds[0] + length))
    envelope = [
        min(1.0, 2.0 * math.exp(-c * m * m / (m + length))) if c is not None else float("nan")
        for m in thresholds
    ]
    return pd.DataFrame({"m": list(thresholds), "probability": probs, "envelope": envelope})


def stationary_environment(spec: StationaryMeasureSpec, size: int) -> EnvironmentSpec:
    """
    Ambiente estendido simétrico com gamma_i nas linhas 1..k e os parceiros em 2k+1-i
    """
    k = spec.k
    gamma = {}
    for i in range(1, k + 1):
        gamma[i] = spec.slopes[i - 1]
        gamma[2 * k + 1 - i] = spec.partner(i)
    return EnvironmentSpec(
        kind=spec.weight_kind(),
        alpha=spec.alpha,
        theta=spec.theta,
        gamma=gamma,
        symmetric=True,
        window=Window.square(1, size),
    )


def _range_corner(k: int, j_min: int, j_max: int) -> Tuple[int, int]:
    return (2 * k + max(j_max, 0), 2 * k + max(-j_min, 0))


def sample_joint_stationary(
    spec: StationaryMeasureSpec, j_min: int, j_max: int, source: SeededSource
) -> HorizonSample:
    """
    R_i(j) = X(2k+1-i, i; [j,2k]_L) - X(2k+1-i, i; 2k, 2k) para i = 1..k

    Com epsilon = 0 a célula de partida tem peso infinito nas duas passagens e a diferença
    é calculada exatamente pela contagem de células infinitas. No log-gamma devolve a
    razão logarítmica correspondente.

    Args:
        spec: Parâmetros da medida
        j_min, j_max: Intervalo de j
        source: Fonte aleatória

    Returns:
        HorizonSample com xs = j_min..j_max
    """
    if j_min > j_max:
        raise DomainError("Intervalo vazio")
    k = spec.k
    corner = _range_corner(k, j_min, j_max)
    field = materialize(stationary_environment(spec, max(corner)), source)
    js = list(range(j_min, j_max + 1))
    targets = [l_point(j, 2 * k) for j in js]

    processes = []
    for i in range(1, k + 1):
        start = (2 * k + 1 - i, i)
        if spec.model == StationaryModel.LOG_GAMMA:
            weights = np.array(window_block(field, start, corner), copy=True)
            grid = log_partition_grid(weights, start, [start], Constraint.diagonal())
        else:
            grid = passage_grid(field, [start], corner, Constraint.diagonal())
        ref_cnt, ref_fin = grid.pair((2 * k, 2 * k))
        row = []
        for t in targets:
            cnt, fin = grid.pair(t)
            if cnt != ref_cnt:
                raise DomainError(f"Células infinitas não se cancelam em R_{i} (alvo {t})")
            row.append(fin - ref_fin)
        processes.append(row)
    return HorizonSample(
        slopes=list(spec.slopes),
        xs=[float(j) for j in js],
        processes=processes,
        log_scale=spec.model == StationaryModel.LOG_GAMMA,
    )


def epsilon_stability(spec: StationaryMeasureSpec, j_min: int, j_max: int, source: SeededSource) -> float:
    """
    Maior diferença entre as amostras com epsilon e epsilon/2 na mesma realização indexada
    """
    if spec.epsilon <= 0:
        return 0.0
    a = sample_joint_stationary(spec, j_min, j_max, source)
    b = sample_joint_stationary(spec.model_copy(update={"epsilon": spec.epsilon / 2.0}), j_min, j_max, source)
    return float(np.max(np.abs(np.array(a.processes) - np.array(b.processes))))


def _evolution_spec(spec: StationaryMeasureSpec, i_max: int, j_max: int) -> EnvironmentSpec:
    """Ambiente homogêneo (gamma_i = theta) de D:geo usado para evoluir F."""
    size = max(i_max, j_max, 1)
    return EnvironmentSpec(
        kind=spec.weight_kind(), alpha=spec.alpha, theta=spec.theta, symmetric=True,
        window=Window.square(1, size),
    )


def stationarity_check(
    spec: StationaryMeasureSpec,
    h: int,
    j_min: int,
    j_max: int,
    mc: MCConfig,
    runner: Optional[ReplicaRunner] = None,
    bulk_zero: bool = False,
) -> List[KSReport]:
    """
    Compara a lei de F_i(j) - F_i(0) com a de X^{F_i}(0,0; [j,h]_L) - X^{F_i}(0,0; [0,h]_L)

    Args:
        spec: Medida estacionária
        h: Nível de evolução (0 significa sem evolução)
        j_min, j_max: Intervalo de j comparado
        mc: Configuração de Monte Carlo
        runner: Executor de réplicas
        bulk_zero: Modo de sanidade com todos os pesos do bulk nulos (log-gamma: iguais a 1)

    Returns:
        Um KSReport por (i, j) com j != 0
    """
    if h < 0:
        raise DomainError("h deve ser >= 0")
    runner = runner or ReplicaRunner.from_config(mc)
    k = spec.k
    js = list(range(j_min, j_max + 1))
    f_lo, f_hi = min(j_min, 0) - h, max(j_max, 0) + h
    log_scale = spec.model == StationaryModel.LOG_GAMMA
    if bulk_zero:
        logger.warning("stationarity_check em modo de sanidade: bulk nulo, evolução determinística")

    def job(src: SeededSource) -> np.ndarray:
        initial = sample_joint_stationary(spec, f_lo, f_hi, src.child("initial"))
        reference = sample_joint_stationary(spec, j_min, j_max, src.child("reference"))
        out = np.empty((k, 2, len(js)))
        field = None
        if h > 0:
            targets = [l_point(j, h) for j in js]
            evo = _evolution_spec(spec, max(t[0] for t in targets), max(t[1] for t in targets))
            field = materialize(evo, src.child("bulk"))
            if bulk_zero:
                field = field.with_values(np.full(evo.window.shape, 1.0 if log_scale else 0.0))
        for i in range(k):
            ref0 = reference.processes[i][js.index(0)] if 0 in js else 0.0
            out[i, 0] = [reference.processes[i][p] - ref0 for p in range(len(js))]
            f = BoundaryFunction.from_arrays(range(f_lo, f_hi + 1), initial.processes[i])
            if h == 0:
                out[i, 1] = [f(j) - f(0) for j in js]
                continue
            if log_scale:
                vals = boundary_seeded_log_partition(field, f, js + [0], h)
            else:
                vals = boundary_seeded_values(field, f, js + [0], h)
            out[i, 1] = vals[:-1] - vals[-1]
        return out

    label = f"stationary-{spec.model.value}-k{k}-h{h}"
    source = SeededSource(master_seed=mc.seed).child(label)
    samples = runner.run_array(job, source, mc.replicas, label)

    reports = []
    for i in range(k):
        for p, j in enumerate(js):
            if j == 0:
                continue
            reports.append(two_sample_report(f"{label}:R{i + 1}({j})", samples[:, i, 0, p], samples[:, i, 1, p]))
    return reports


@dataclass
class CadlagEnvironment:
    """
    Pilha de linhas cadlag: átomos em coordenadas inteiras negativas seguidos de um
    caminho browniano discretizado com passo delta em [0, T].

    atoms[l-1, m-1] é o átomo da linha l na posição -m; brownian[l-1, s] = B_l(s delta).
    """
    atoms: np.ndarray
    brownian: np.ndarray
    delta: float

    def __post_init__(self):
        if self.atoms.shape[0] != self.brownian.shape[0]:
            raise ValueError("atoms e brownian devem ter o mesmo número de linhas")
        if np.any(self.brownian[:, 0] != 0.0):
            raise ValueError("Cada linha browniana deve valer 0 na origem")

    @property
    def lines(self) -> int:
        return self.atoms.shape[0]

    @property
    def depth(self) -> int:
        return self.atoms.shape[1]

    @property
    def horizon(self) -> float:
        return (self.brownian.shape[1] - 1) * self.delta

    def positions(self) -> np.ndarray:
        return np.concatenate([-np.arange(self.depth, 0, -1, dtype=np.float64),
                               self.delta * np.arange(self.brownian.shape[1])])

    def index(self, x: float) -> int:
        """Índice de x na grade (inteiros negativos, depois múltiplos de delta)."""
        if x < 0:
            m = -x
            if m != int(m) or m > self.depth:
                raise RangeError(f"Posição {x} fora dos átomos da grade")
            return self.depth - int(m)
        s = int(round(x / self.delta))
        if abs(s * self.delta - x) > 1e-9 * max(1.0, abs(x)) or s >= self.brownian.shape[1]:
            raise RangeError(f"Posição {x} fora da grade browniana")
        return self.depth + s

    def hit_index(self, line: int, shift: int) -> Optional[int]:
        """Índice do ponto de Delta_shift = {(x, x + shift)} sobre a linha, se estiver na grade."""
        try:
            return self.index(float(line - shift))
        except RangeError:
            return None

    def values(self) -> Tuple[np.ndarray, np.ndarray]:
        """(f(z), f(z^-)) para todas as linhas e posições da grade."""
        cum = np.cumsum(self.atoms, axis=1)
        before = np.concatenate([np.zeros((self.lines, 1)), cum[:, :-1]], axis=1)
        # posição -m ocupa o índice depth - m
        neg = -before[:, ::-1]
        neg_left = -cum[:, ::-1]
        f = np.concatenate([neg, self.brownian], axis=1)
        left = np.concatenate([neg_left, self.brownian], axis=1)
        return f, left


def cadlag_profile(
    env: CadlagEnvironment, start: Tuple[float, int], line: int, hit_shift: Optional[int] = None
) -> np.ndarray:
    """
    Passagem cadlag de start até (z, line) para toda posição z da grade

    Com hit_shift, só contam caminhos que tocam Delta_{hit_shift}.
    """
    x0, l0 = start
    if not 1 <= l0 <= line <= env.lines:
        raise RangeError(f"Linhas fora do intervalo: {l0} -> {line}")
    f, left = env.values()
    ix = env.index(x0)
    size = f.shape[1]

    g = np.full(size, -np.inf)
    g[ix:] = f[l0 - 1, ix:] - left[l0 - 1, ix]
    hit = None
    if hit_shift is not None:
        hit = np.full(size, -np.inf)
        hidx = env.hit_index(l0, hit_shift)
        if hidx is not None and hidx >= ix:
            hit[hidx:] = g[hidx:]

    for l in range(l0 + 1, line + 1):
        cm = np.maximum.accumulate(g - left[l - 1])
        if hit is not None:
            hb = np.maximum.accumulate(hit - left[l - 1])
            hidx = env.hit_index(l, hit_shift)
            if hidx is not None:
                hb[hidx:] = np.maximum(hb[hidx:], cm[hidx])
            hit = f[l - 1] + hb
        g = f[l - 1] + cm
    return g if hit is None else hit


def cadlag_lpp(
    env: CadlagEnvironment,
    start: Tuple[float, int],
    end: Tuple[float, int],
    hit_shift: Optional[int] = None,
) -> float:
    """
    Passagem cadlag sup_pi df(pi) de start = (x, linha) até end = (y, linha)

    A programação dinâmica sobre os pontos de quebra é exata para linhas lineares por partes.
    """
    iy = env.index(end[0])
    if start[0] > end[0] or start[1] > end[1]:
        return -math.inf
    return float(cadlag_profile(env, start, end[1], hit_shift)[iy])


def _check_horizon_slopes(rho: float, slopes: Sequence[float]) -> None:
    if not slopes:
        raise DomainError("É preciso ao menos uma inclinação")
    if any(slopes[i] <= slopes[i + 1] for i in range(len(slopes) - 1)):
        raise DomainError("Inclinações devem ser estritamente decrescentes")
    floor = max(2.0 * rho, 0.0) if rho != -math.inf else 0.0
    if slopes[-1] < floor - 1e-12:
        raise DomainError(f"Requer lambda_k >= 2 rho v 0 = {floor}")


def _brownian_lines(drifts: Sequence[float], steps: int, delta: float, source: SeededSource) -> np.ndarray:
    out = np.zeros((len(drifts), steps + 1))
    idx = np.arange(steps)
    for l, mu in enumerate(drifts, start=1):
        inc = source.normal(mu * delta, 2.0 * delta, "brownian", l, idx)
        out[l - 1, 1:] = np.cumsum(inc)
    return out


def horizon_environment(
    rho: float, slopes: Sequence[float], horizon: float, delta: float, source: SeededSource
) -> Tuple[CadlagEnvironment, List[Tuple[float, int]]]:
    """
    Ambiente exponencial-browniano de 2k linhas e os pontos de partida de cada R_i

    Um átomo de taxa 0 (lambda_k = 2 rho) força o caminho a passar por ele; nesse caso o
    ponto de partida passa a ser o próprio átomo, com valor zerado (cancela na diferença).
    """
    _check_horizon_slopes(rho, slopes)
    if delta > RECOMMENDED_DELTA:
        logger.warning(f"delta = {delta} acima do recomendado ({RECOMMENDED_DELTA})")
    k = len(slopes)
    lam = list(slopes)
    drifts = lam + [-s for s in reversed(lam)]
    steps = max(1, int(math.ceil(horizon / delta - 1e-9)))
    brownian = _brownian_lines(drifts, steps, delta, source)

    atoms = np.zeros((2 * k, k))
    starts: List[Tuple[float, int]] = [(-float(i), i) for i in range(1, k + 1)]
    for i in range(1, k + 1):
        for j in range(i + 1, 2 * k + 2 - i):
            if j <= k:
                rate = (lam[i - 1] - lam[j - 1]) / 2.0
            elif j <= 2 * k - i:
                rate = (lam[i - 1] + lam[2 * k - j]) / 2.0
            else:
                rate = lam[i - 1] / 2.0 - rho
            value = float(source.exponential(rate, "atom", i, j))
            if math.isinf(value):
                starts[i - 1] = (-float(i), j)
                value = 0.0
            atoms[j - 1, i - 1] = value
    return CadlagEnvironment(atoms=atoms, brownian=brownian, delta=delta), starts


def sample_horizon_marginals(
    rho: float,
    slopes: Sequence[float],
    xs: Sequence[float],
    delta: float,
    source: SeededSource,
) -> HorizonSample:
    """
    Marginais R^DL_i(x) do horizonte estacionário de meio-espaço

    x >= 0: XB(-i, i; x, 2k) - XB(-i, i; 0, 2k);
    x <= 0: XB^{Delta_{2k+1}}(-i, i; |x|, 2k) - XB(-i, i; 0, 2k).

    Args:
        rho: Parâmetro de fronteira (pode ser -inf)
        slopes: lambda_1 > ... > lambda_k >= 2 rho v 0
        xs: Pontos da grade espacial (múltiplos de delta)
        delta: Passo da discretização browniana
        source: Fonte aleatória

    Returns:
        HorizonSample com um processo por inclinação
    """
    if not xs:
        raise DomainError("Grade espacial vazia")
    k = len(slopes)
    horizon = max(max(abs(x) for x in xs), delta)
    env, starts = horizon_environment(rho, slopes, horizon, delta, source)
    top = 2 * k
    zero = env.index(0.0)

    processes = []
    for start in starts:
        free = cadlag_profile(env, start, top)
        constrained = cadlag_profile(env, start, top, hit_shift=2 * k + 1) if any(x < 0 for x in xs) else None
        base = free[zero]
        row = []
        for x in xs:
            if x >= 0:
                row.append(float(free[env.index(x)] - base))
            else:
                row.append(float(constrained[env.index(-x)] - base))
        processes.append(row)
    return HorizonSample(slopes=list(slopes), xs=list(map(float, xs)), processes=processes)


def rectangle_inequality_violation(sample: HorizonSample, positive_only: bool = False) -> float:
    """
    Maior violação de R_i(x2) - R_i(x1) >= R_j(x2) - R_j(x1) para lambda_i > lambda_j, x1 < x2
    """
    order = np.argsort(sample.xs)
    xs = np.asarray(sample.xs)[order]
    keep = xs >= 0 if positive_only else np.ones(xs.size, dtype=bool)
    procs = np.asarray(sample.processes)[:, order][:, keep]
    worst = 0.0
    for i in range(procs.shape[0]):
        for j in range(i + 1, procs.shape[0]):
            diff = np.diff(procs[i] - procs[j])
            if diff.size:
                worst = max(worst, float(-diff.min()))
    return worst


def two_line_environment(
    lam0: float, lam1: float, depth: int, horizon: float, delta: float, source: SeededSource
) -> CadlagEnvironment:
    """
    Ambiente exponencial-browniano de duas linhas: linha 1 com inclinação lam0, linha 2 com lam1,
    átomos X(i, j) ~ Exp(-lambda_j/2 + beta) com beta = max(lam0, lam1)/2 + 1/2
    """
    beta = max(lam0, lam1) / 2.0 + 0.5
    atoms = np.zeros((2, max(depth, 1)))
    m = np.arange(1, atoms.shape[1] + 1)
    atoms[0] = source.exponential(-lam0 / 2.0 + beta, "atom", -m, 0)
    atoms[1] = source.exponential(-lam1 / 2.0 + beta, "atom", -m, 1)
    steps = max(1, int(math.ceil(horizon / delta - 1e-9)))
    return CadlagEnvironment(atoms=atoms, brownian=_brownian_lines([lam0, lam1], steps, delta, source), delta=delta)


def burke_coupling(b0: np.ndarray, b1: np.ndarray, x_star: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    B1' = B1 + (max_{y<=x}(B0 - B1)(y) - X*)^+ e B0' = B0 + B1 - B1'
    """
    run = np.maximum.accumulate(b0 - b1)
    b1p = b1 + np.maximum(run - x_star, 0.0)
    return b0 + b1 - b1p, b1p


def _interpolated_max(b0p: np.ndarray, b1p: np.ndarray, d: np.ndarray, x_star: float) -> float:
    """max de B0' - B1' sobre a interpolação linear: X* se B0 - B1 atinge X*, senão max da grade."""
    if np.any(d >= x_star):
        return x_star
    return float(np.max(b0p - b1p))


def exp_brownian_swap_check(
    lam0: float,
    lam1: float,
    delta: float,
    horizon: float,
    mc: MCConfig,
    pairs: Sequence[Tuple[float, float]] = ((0.0, 1.0), (0.0, 2.0), (1.0, 2.0), (-1.0, 1.0)),
    runner: Optional[ReplicaRunner] = None,
    residual_tol: float = 0.01,
    coverage: float = 0.95,
) -> List[KSReport]:
    """
    Troca de inclinações no ambiente exponencial-browniano de duas linhas

    Compara por KS a lei de XB(x, 0; y, 1) com (lam0, lam1) e com as inclinações trocadas,
    e verifica o acoplamento de Burke browniano (equações de B1' e de X*).

    Returns:
        Relatórios KS por par (x, y), seguidos dos relatórios do acoplamento
    """
    if not lam0 > lam1:
        raise DomainError("Requer lam0 > lam1")
    runner = runner or ReplicaRunner.from_config(mc)
    depth = max(1, int(math.ceil(-min(min(p) for p in pairs))))
    span = max(max(p) for p in pairs)

    def job(src: SeededSource) -> np.ndarray:
        out = np.empty((2, len(pairs)))
        for side, (a, b) in enumerate(((lam0, lam1), (lam1, lam0))):
            env = two_line_environment(a, b, depth, span, delta, src.child(f"side{side}"))
            for p, (x, y) in enumerate(pairs):
                out[side, p] = cadlag_lpp(env, (x, 1), (y, 2))
        return out

    label = f"exp-brownian-swap-{lam0}-{lam1}"
    source = SeededSource(master_seed=mc.seed).child(label)
    samples = runner.run_array(job, source, mc.replicas, label)
    reports = [
        two_sample_report(f"{label}:XB({x},{y})", samples[:, 0, p], samples[:, 1, p])
        for p, (x, y) in enumerate(pairs)
    ]

    steps = max(1, int(math.ceil(horizon / delta - 1e-9)))

    def coupling_job(src: SeededSource) -> np.ndarray:
        lines = _brownian_lines([lam0, lam1], steps, delta, src)
        b0, b1 = lines[0], lines[1]
        x_star = float(src.exponential((lam0 - lam1) / 2.0, "x_star"))
        b0p, b1p = burke_coupling(b0, b1, x_star)
        # B1'(x) = B1(x) v max_{y<=x} [B1(x) - B1(y) + B0(y) - X*]
        explicit = np.maximum(b1, b1 + np.maximum.accumulate(b0 - b1) - x_star)
        c2 = float(np.max(np.abs(explicit - b1p)))
        c3 = abs(x_star - _interpolated_max(b0p, b1p, b0 - b1, x_star))
        return np.array([c2, c3])

    residuals = runner.run_array(coupling_job, source.child("coupling"), mc.replicas, f"{label}-coupling")
    reports.append(bound_report(f"{label}:c2", float(residuals[:, 0].max()), 1e-9, n=mc.replicas))
    hit_rate = float(np.mean(residuals[:, 1] < residual_tol))
    reports.append(KSReport(
        label=f"{label}:c3", kind="coverage", statistic=hit_rate, threshold=coverage,
        passed=hit_rate >= coverage, n=mc.replicas,
    ))
    return reports


def brownian_marginal_check(
    rho: float, delta: float, lag: float, mc: MCConfig, runner: Optional[ReplicaRunner] = None
) -> KSReport:
    """
    k = 1 e lambda = 2|rho| com rho < 0: incrementos de R_1 seguem N(-2 rho lag, 2 lag)
    """
    if not rho < 0:
        raise DomainError("Requer rho < 0")
    runner = runner or ReplicaRunner.from_config(mc)
    lam = -2.0 * rho

    def job(src: SeededSource) -> float:
        s = sample_horizon_marginals(rho, [lam], [0.0, lag], delta, src)
        return s.processes[0][1] - s.processes[0][0]

    label = f"horizon-brownian-rho{rho}"
    inc = runner.run_array(job, SeededSource(master_seed=mc.seed).child(label), mc.replicas, label)
    law = stats.norm(loc=lam * lag, scale=math.sqrt(2.0 * lag))
    return one_sample_report(f"{label}:increment", inc, law.cdf)
