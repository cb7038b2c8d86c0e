"""
Módulo de verificação: suítes nomeadas que conferem identidades exatas, igualdades
em lei (KS) e formas de cauda por Monte Carlo em escala de desktop.
"""
import logging
import math
import time
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from .env import SeededSource, materialize, scale_diagonal
from .errors import ConfigurationError, DomainError, UsageError
from .horizon import (
    brownian_marginal_check,
    burke_sampler,
    exp_brownian_swap_check,
    sample_horizon_marginals,
    stationarity_check,
)
from .ks import bound_report, one_sample_report, two_sample_report
from .lpp import (
    brute_force_passage,
    metric_composition_check,
    passage_grid,
    passage_time,
    point_to_line_trapezoid,
    quadrangle_check,
)
from .models import (
    Algebra,
    Constraint,
    EnvironmentSpec,
    HeightFunction,
    KSReport,
    MCConfig,
    PassageQuery,
    StationaryMeasureSpec,
    StationaryModel,
    SuiteReport,
    WeightKind,
    Window,
)
from .pam import tasep_coupling_check
from .polymer import (
    brute_force_log_partition,
    coupled_swap_sampler,
    log_partition,
    random_two_line,
    rsk_two_line,
    trapezoid_log_partition,
    verify_isometry,
)
from .reports import write_suite_reports
from .runner import ReplicaRunner
from .scaling import fit_envelope_constant, fit_exponent, mu_alpha
from .tasep import ClockField, evolve_clocks, heights_from_lpp, required_width, tasep_field

logger = logging.getLogger(__name__)

ISOMETRY_TOL = 1e-9
ORACLE_TOL = 1e-12
LOG_ORACLE_TOL = 1e-10


def _runner(mc: MCConfig, runner: Optional[ReplicaRunner]) -> ReplicaRunner:
    return runner or ReplicaRunner.from_config(mc)


def _source(mc: MCConfig, label: str) -> SeededSource:
    return SeededSource(master_seed=mc.seed).child(label)


def _relative_gap(a: float, b: float) -> float:
    if a == b:
        return 0.0
    if math.isinf(a) or math.isinf(b):
        return math.inf
    return abs(a - b) / max(1.0, abs(a))


# ---------------------------------------------------------------------------
# Identidades exatas de duas linhas

def suite_rsk_isometry(
    mc: MCConfig, instances: int = 1000, max_len: int = 12, runner: Optional[ReplicaRunner] = None
) -> List[KSReport]:
    """
    Isometria da RSK de duas linhas em instâncias aleatórias de tamanho 1..max_len, nas duas álgebras
    """
    runner = _runner(mc, runner)
    example = rsk_two_line([1.0, 4.0], [2.0, 1.0], Algebra.MAX_PLUS)
    gap = max(abs(x - y) for x, y in zip(example.b_hat + example.a_hat, [3.0, 3.0, 0.0, 2.0]))
    reports = [bound_report("rsk-isometry:max_plus-example", gap, ISOMETRY_TOL, n=1)]

    for algebra in Algebra:
        def job(src: SeededSource, algebra: Algebra = algebra) -> float:
            n = 1 + int(src.uniform("length") * max_len)
            a, b = random_two_line(src, n, algebra)
            return verify_isometry(rsk_two_line(a, b, algebra), ISOMETRY_TOL).max_violation

        label = f"rsk-isometry-{algebra.value}"
        worst = runner.run_array(job, _source(mc, label), instances, label)
        reports.append(bound_report(f"rsk-isometry:{algebra.value}", float(worst.max()), ISOMETRY_TOL, n=instances))
    return reports


# (gamma0, gamma1, beta) de cada lei
SWAP_CASES: Dict[WeightKind, Tuple[float, float, float]] = {
    WeightKind.EXPONENTIAL: (0.2, 0.4, 0.3),
    WeightKind.GEOMETRIC: (0.8, 0.5, 0.6),
    WeightKind.LOG_GAMMA: (0.5, 1.5, 1.0),
}


def _swapped_law(kind: WeightKind, param: float):
    if kind == WeightKind.EXPONENTIAL:
        return stats.expon(scale=1.0 / param)
    return stats.invgamma(param)


def suite_coupled_swap(
    mc: MCConfig, length: int = 10, runner: Optional[ReplicaRunner] = None
) -> List[KSReport]:
    """
    Acoplamento (A, B) -> (C, D): identidade exata das passagens de duas linhas e
    marginais trocadas de C e D
    """
    runner = _runner(mc, runner)
    reports = []
    for kind, (g0, g1, beta) in SWAP_CASES.items():
        betas = [beta] * length

        def job(src: SeededSource, kind: WeightKind = kind, g0: float = g0, g1: float = g1) -> np.ndarray:
            coupling = coupled_swap_sampler(kind, g0, g1, betas, src)
            return np.array([coupling.report.max_violation, coupling.c[0], coupling.d[-1]])

        label = f"coupled-swap-{kind.value}"
        samples = runner.run_array(job, _source(mc, label), mc.replicas, label)
        reports.append(bound_report(f"{label}:identity", float(samples[:, 0].max()), ISOMETRY_TOL, n=mc.replicas))

        if kind == WeightKind.GEOMETRIC:
            for col, name, q in ((1, "C1", g1 * beta), (2, "Dn", g0 * beta)):
                mean = q / (1.0 - q)
                sd = math.sqrt(q) / (1.0 - q)
                reports.append(bound_report(
                    f"{label}:{name}-mean", abs(float(samples[:, col].mean()) - mean),
                    4.0 * sd / math.sqrt(mc.replicas), kind="mean", n=mc.replicas,
                ))
            continue
        c_law = _swapped_law(kind, g1 + beta)
        d_law = _swapped_law(kind, g0 + beta)
        reports.append(one_sample_report(f"{label}:C1", samples[:, 1], c_law.cdf))
        reports.append(one_sample_report(f"{label}:Dn", samples[:, 2], d_law.cdf))
    return reports


# ---------------------------------------------------------------------------
# TASEP e métricas

def suite_tasep_metric_equivalence(
    mc: MCConfig,
    levels: Sequence[int] = (1, 3),
    horizon: float = 10.0,
    alpha: float = 0.7,
    x_max: int = 30,
    realizations: int = 200,
    runner: Optional[ReplicaRunner] = None,
) -> List[KSReport]:
    """
    Igualdade inteira, sítio a sítio, entre o acoplamento de nível d e a fórmula variacional em H_d
    """
    runner = _runner(mc, runner)
    width = required_width(x_max, alpha, horizon)
    xs = list(range(x_max + 1))
    initials = [HeightFunction.flat(width), HeightFunction.narrow_wedge(x_max // 2, width)]
    reports = []
    for d in levels:
        def job(src: SeededSource, d: int = d) -> float:
            clocks = ClockField.sample(alpha, width, horizon, src, levels=d)
            return float(sum(not tasep_coupling_check(clocks, h0, horizon, xs) for h0 in initials))

        label = f"tasep-metric-equivalence-d{d}"
        mismatches = runner.run_array(job, _source(mc, label), realizations, label)
        reports.append(bound_report(label, float(mismatches.sum()), 0.0, n=realizations))
    return reports


def suite_tasep_lpp(
    mc: MCConfig,
    alpha: float = 0.7,
    t: float = 10.0,
    xs: Sequence[int] = (0, 3, 6),
    runner: Optional[ReplicaRunner] = None,
) -> List[KSReport]:
    """
    TASEP evento a evento contra a inversa do LPP exponencial de meio-espaço (mesma lei),
    mais o exemplo determinístico com pesos unitários
    """
    runner = _runner(mc, runner)
    xs = list(xs)
    h0 = HeightFunction.narrow_wedge(0, max(xs) + 2)
    width = required_width(max(xs), alpha, t)

    ones = tasep_field(1.0, h0, [0], 2.5, _source(mc, "tasep-lpp-ones"))
    ones = ones.with_values(np.where(np.isfinite(ones.values), 1.0, ones.values))
    reports = [bound_report("tasep-lpp:unit-weights", abs(float(heights_from_lpp(ones, h0, 2.5, [0])[0]) - 2.0), 0.0)]

    def job(src: SeededSource) -> np.ndarray:
        clocks = ClockField.sample(alpha, width, t, src.child("clocks"))
        evolved = evolve_clocks(h0, clocks, t, observe=max(xs))
        field = tasep_field(alpha, h0, xs, t, src.child("lpp"))
        return np.array([[evolved(x) for x in xs], heights_from_lpp(field, h0, t, xs)], dtype=np.float64)

    label = f"tasep-lpp-a{alpha}-t{t}"
    samples = runner.run_array(job, _source(mc, label), mc.replicas, label)
    for p, x in enumerate(xs):
        reports.append(two_sample_report(f"{label}:h({x})", samples[:, 0, p], samples[:, 1, p]))
    return reports


# ---------------------------------------------------------------------------
# Igualdades em lei de LPP e polímeros

def suite_barraquand_wang(
    n: int, m: int, alphas: Sequence[float], mc: MCConfig, runner: Optional[ReplicaRunner] = None
) -> List[KSReport]:
    """
    max_{0<=i<m} X(1,1; n+i, m-i) no meio-espaço contra W(1,1; n,m) com a primeira coluna Exp(alpha)

    Args:
        n, m: Extremo (n >= m)
        alphas: Parâmetros de fronteira
        mc: Configuração de Monte Carlo
        runner: Executor de réplicas

    Returns:
        Um KSReport por alpha
    """
    if n < m or m < 1:
        raise DomainError(f"Requer n >= m >= 1, recebido n={n}, m={m}")
    runner = _runner(mc, runner)
    reports = []
    for alpha in alphas:
        half = EnvironmentSpec.half_space(alpha, Window(i_min=1, i_max=n + m - 1, j_min=1, j_max=m))
        column = EnvironmentSpec.boundary_column(alpha, 1.0, Window(i_min=1, i_max=n, j_min=1, j_max=m))
        query = PassageQuery(start=(1, 1), end=(n, m))

        def job(src: SeededSource, half: EnvironmentSpec = half, column: EnvironmentSpec = column) -> np.ndarray:
            left = point_to_line_trapezoid(materialize(half, src.child("half-space")), n, m).value
            right = passage_time(materialize(column, src.child("column")), query).value
            return np.array([left, right])

        label = f"barraquand-wang-n{n}-m{m}-a{alpha}"
        samples = runner.run_array(job, _source(mc, label), mc.replicas, label)
        reports.append(two_sample_report(label, samples[:, 0], samples[:, 1]))
    return reports


def suite_barraquand_wang_log_gamma(
    n: int, m: int, alpha: float, beta: float, mc: MCConfig, runner: Optional[ReplicaRunner] = None
) -> KSReport:
    """log Z^T no meio-espaço log-gamma contra log Z_U com a primeira coluna Gamma^-1(alpha)."""
    if n < m or m < 1:
        raise DomainError(f"Requer n >= m >= 1, recebido n={n}, m={m}")
    runner = _runner(mc, runner)
    half = EnvironmentSpec.half_space(
        alpha, Window(i_min=1, i_max=n + m - 1, j_min=1, j_max=m), WeightKind.LOG_GAMMA, bulk=beta
    )
    column = EnvironmentSpec.boundary_column(
        alpha, beta, Window(i_min=1, i_max=n, j_min=1, j_max=m), WeightKind.LOG_GAMMA
    )
    query = PassageQuery(start=(1, 1), end=(n, m))

    def job(src: SeededSource) -> np.ndarray:
        left = trapezoid_log_partition(materialize(half, src.child("half-space")), n, m).log_z
        right = log_partition(materialize(column, src.child("column")), query).log_z
        return np.array([left, right])

    label = f"barraquand-wang-log-gamma-n{n}-m{m}-a{alpha}-b{beta}"
    samples = runner.run_array(job, _source(mc, label), mc.replicas, label)
    return two_sample_report(label, samples[:, 0], samples[:, 1])


Observable = Tuple[int, int, int, int]

PERMUTATION_DEFAULTS: Dict[WeightKind, Dict[str, float]] = {
    WeightKind.EXPONENTIAL: {"alpha": 0.5, "theta": 0.5, "gamma0": 0.2, "gamma1": 0.4},
    WeightKind.GEOMETRIC: {"alpha": 0.5, "theta": 0.5, "gamma0": 0.6, "gamma1": 0.3},
    WeightKind.LOG_GAMMA: {"alpha": 1.0, "theta": 1.0, "gamma0": 0.8, "gamma1": 1.2},
}


def _check_observables(observables: Sequence[Observable], window: Window) -> None:
    for p, q, r, s in observables:
        if 1 in (p, q) or 0 in (r, s):
            raise ConfigurationError(
                f"Observável X({p},{q};{r},{s}) toca índices proibidos (p, q != 1 e r, s != 0)"
            )
        if not (p <= r and q <= s):
            raise ConfigurationError(f"Observável X({p},{q};{r},{s}) fora de ordem")
        if not (window.contains(p, q) and window.contains(r, s)):
            raise ConfigurationError(f"Observável X({p},{q};{r},{s}) fora da janela")


def suite_permutation_invariance(
    kind: WeightKind,
    params: Dict[str, float],
    window: Window,
    mc: MCConfig,
    observables: Sequence[Observable] = ((0, 0, 3, 3), (2, 0, 3, 3)),
    runner: Optional[ReplicaRunner] = None,
) -> List[KSReport]:
    """
    Lei conjunta dos observáveis com (gamma_0, gamma_1) e com os parâmetros trocados

    Args:
        kind: Lei dos pesos do modelo estendido
        params: alpha, theta, gamma0, gamma1
        window: Janela do campo
        mc: Configuração de Monte Carlo
        observables: Tuplas (p, q, r, s) de X(p,q; r,s) (log Z no log-gamma)
        runner: Executor de réplicas

    Returns:
        KS por observável e, com dois ou mais observáveis, a diferença das correlações de Spearman
    """
    _check_observables(observables, window)
    runner = _runner(mc, runner)
    merged = {**PERMUTATION_DEFAULTS[kind], **params}
    base = dict(kind=kind, alpha=merged["alpha"], theta=merged["theta"], symmetric=True, window=window)
    specs = [
        EnvironmentSpec(gamma={0: merged["gamma0"], 1: merged["gamma1"]}, **base),
        EnvironmentSpec(gamma={0: merged["gamma1"], 1: merged["gamma0"]}, **base),
    ]
    queries = [
        PassageQuery(start=(p, q), end=(r, s), constraint=Constraint.diagonal())
        for p, q, r, s in observables
    ]

    def observe(spec: EnvironmentSpec, src: SeededSource) -> List[float]:
        field = materialize(spec, src)
        if kind == WeightKind.LOG_GAMMA:
            return [log_partition(field, qr).log_z for qr in queries]
        return [passage_time(field, qr).value for qr in queries]

    def job(src: SeededSource) -> np.ndarray:
        return np.array([observe(specs[0], src.child("original")), observe(specs[1], src.child("swapped"))])

    label = f"permutation-invariance-{kind.value}"
    samples = runner.run_array(job, _source(mc, label), mc.replicas, label)
    reports = [
        two_sample_report(f"{label}:X{obs}", samples[:, 0, k], samples[:, 1, k])
        for k, obs in enumerate(observables)
    ]
    if len(observables) >= 2:
        r0 = float(stats.spearmanr(samples[:, 0, 0], samples[:, 0, 1])[0])
        r1 = float(stats.spearmanr(samples[:, 1, 0], samples[:, 1, 1])[0])
        reports.append(bound_report(f"{label}:spearman", abs(r0 - r1), 0.03, kind="rank-correlation", n=mc.replicas))
    return reports


DEFAULT_STATIONARY_SPECS: List[Tuple[StationaryMeasureSpec, int]] = [
    (StationaryMeasureSpec(alpha=0.8, theta=0.5, slopes=[-0.2]), 3),
    (StationaryMeasureSpec(alpha=0.8, theta=0.5, slopes=[-0.3, -0.1]), 3),
    (StationaryMeasureSpec(model=StationaryModel.LOG_GAMMA, alpha=0.8, theta=1.0, slopes=[-0.2]), 2),
]


def suite_stationary(
    specs: Sequence[Tuple[StationaryMeasureSpec, int]],
    mc: MCConfig,
    j_min: int = -3,
    j_max: int = 5,
    runner: Optional[ReplicaRunner] = None,
) -> List[KSReport]:
    """Estacionariedade conjunta para cada (medida, nível de evolução h)."""
    runner = _runner(mc, runner)
    reports: List[KSReport] = []
    for spec, h in specs:
        reports.extend(stationarity_check(spec, h, j_min, j_max, mc, runner))
    return reports


def suite_burke(
    mc: MCConfig, beta: float = 0.25, n: int = 50, runner: Optional[ReplicaRunner] = None
) -> List[KSReport]:
    """Incrementos de Z+ com Y(2,2) ~ Exp(2 beta): Exp(1/2 - beta) e sem correlação entre vizinhos."""
    runner = _runner(mc, runner)

    def job(src: SeededSource) -> np.ndarray:
        return burke_sampler(beta, n, src)

    label = f"burke-b{beta}"
    samples = runner.run_array(job, _source(mc, label), mc.replicas, label)
    law = stats.expon(scale=1.0 / (0.5 - beta))
    reports = [
        one_sample_report(f"{label}:first", samples[:, 0], law.cdf),
        one_sample_report(f"{label}:last", samples[:, -1], law.cdf),
    ]
    if samples.shape[1] >= 2:
        x, y = samples[:, :-1].ravel(), samples[:, 1:].ravel()
        r = float(np.corrcoef(x, y)[0, 1])
        reports.append(bound_report(
            f"{label}:lag1", abs(r), max(0.02, 4.0 / math.sqrt(x.size)), kind="correlation", n=x.size
        ))
    return reports


# ---------------------------------------------------------------------------
# Forma limite, expoentes e caudas de X(1,1; n,n)

def _diagonal_passage(alpha: float, n: int, src: SeededSource) -> float:
    field = materialize(EnvironmentSpec.half_space(alpha, Window.square(1, n)), src)
    return passage_grid(field, [(1, 1)], (n, n)).value((n, n))


def diagonal_passage_samples(
    alpha: float, n: int, mc: MCConfig, runner: Optional[ReplicaRunner] = None
) -> np.ndarray:
    """Amostras de X(1,1; n,n) no meio-espaço exponencial."""
    runner = _runner(mc, runner)
    label = f"diagonal-a{alpha}-n{n}"
    return runner.run_array(lambda src: _diagonal_passage(alpha, n, src), _source(mc, label), mc.replicas, label)


def diagonal_passage_table(
    alpha: float, ns: Sequence[int], mc: MCConfig, runner: Optional[ReplicaRunner] = None
) -> pd.DataFrame:
    """
    Tabela (n, mean, variance, mean_over_n, mu_over_n) de X(1,1; n,n)
    """
    rows = []
    for n in ns:
        samples = diagonal_passage_samples(alpha, n, mc, runner)
        rows.append({
            "n": n,
            "mean": float(samples.mean()),
            "variance": float(samples.var(ddof=1)) if samples.size > 1 else 0.0,
            "mean_over_n": float(samples.mean()) / n,
            "mu_over_n": mu_alpha(n, alpha) / n,
        })
    return pd.DataFrame(rows, columns=["n", "mean", "variance", "mean_over_n", "mu_over_n"])


def suite_limit_shape(
    alphas: Sequence[float], n: int, mc: MCConfig, tol: float = 0.05, runner: Optional[ReplicaRunner] = None
) -> List[KSReport]:
    reports = []
    for alpha in alphas:
        row = diagonal_passage_table(alpha, [n], mc, runner).iloc[0]
        gap = abs(row["mean_over_n"] - row["mu_over_n"])
        reports.append(bound_report(f"limit-shape-a{alpha}-n{n}", float(gap), tol, kind="shape", n=mc.replicas))
    return reports


# janela aceita para a inclinação de log Var contra log n
EXPONENT_WINDOWS: Dict[float, Tuple[float, float]] = {1.0: (0.55, 0.8), 0.3: (0.9, 1.1)}


def exponent_scan(
    alpha: float, ns: Sequence[int], mc: MCConfig, runner: Optional[ReplicaRunner] = None
) -> Tuple[pd.DataFrame, float, float]:
    """
    Variância de X(1,1; n,n) por n e a inclinação ajustada em escala log-log

    Returns:
        (tabela, inclinação, erro padrão)
    """
    table = diagonal_passage_table(alpha, ns, mc, runner)
    slope, stderr = fit_exponent(list(zip(table["n"], table["variance"])))
    logger.info(f"Expoente de flutuação alpha={alpha}: {slope:.3f} +- {stderr:.3f}")
    return table, slope, stderr


def suite_fluctuation_exponent(
    ns: Sequence[int],
    mc: MCConfig,
    windows: Optional[Dict[float, Tuple[float, float]]] = None,
    runner: Optional[ReplicaRunner] = None,
) -> List[KSReport]:
    reports = []
    for alpha, (lo, hi) in (windows or EXPONENT_WINDOWS).items():
        _, slope, _ = exponent_scan(alpha, ns, mc, runner)
        reports.append(KSReport(
            label=f"fluctuation-exponent-a{alpha}:slope in [{lo}, {hi}]", kind="regression",
            statistic=slope, threshold=hi, passed=lo <= slope <= hi, n=mc.replicas,
        ))
    return reports


def _noise_margin(p: float, n: int) -> float:
    return 3.0 * math.sqrt(max(p * (1.0 - p), 0.0) / n) + 1.0 / n


def _envelope_rows(
    label: str, eps: Sequence[float], probs: Sequence[float], exponents: Sequence[float], n_samples: int
) -> List[dict]:
    """Ajusta a constante no primeiro ponto com probabilidade positiva e avalia os demais."""
    c = None
    fit_index = None
    for k, (p, e) in enumerate(zip(probs, exponents)):
        c = fit_envelope_constant(p, e)
        if c is not None:
            fit_index = k
            break
    rows = []
    for k, (e, p, x) in enumerate(zip(eps, probs, exponents)):
        env = min(1.0, 2.0 * math.exp(-c * x)) if c is not None else 0.0
        rows.append({
            "side": label, "eps": e, "probability": p, "envelope": env,
            "fitted": k == fit_index,
            "within": k == fit_index or p <= env + _noise_margin(env, n_samples),
        })
    return rows


def _log_linear_r2(xs: Sequence[float], probs: Sequence[float]) -> Optional[float]:
    pts = [(x, math.log(p)) for x, p in zip(xs, probs) if p > 0]
    if len(pts) < 3:
        return None
    fit = stats.linregress([p[0] for p in pts], [p[1] for p in pts])
    return float(fit.rvalue ** 2)


def suite_tail_bounds(
    alpha: float,
    ns: Sequence[int],
    eps_grid: Sequence[float],
    mc: MCConfig,
    runner: Optional[ReplicaRunner] = None,
) -> pd.DataFrame:
    """
    Caudas empíricas de X(1,1; n,n) em torno de mu_alpha(n) com os envelopes de cota superior

    Cauda superior: 2 exp(-c eps^{3/2} n (1 ^ eps^{1/2}/(1/2 - alpha)^+)); cauda inferior:
    2 exp(-c eps^2 n/(1/2 - alpha)) para alpha < 1/2 (rasa) e 2 exp(-c eps^3 n^2) caso contrário.
    Uma constante por envelope, ajustada num ponto reservado da grade.

    Returns:
        Tabela (n, side, eps, probability, envelope, fitted, within); attrs["checks"]
        guarda os veredictos
    """
    if not eps_grid:
        raise DomainError("Grade de eps vazia")
    eps = sorted(eps_grid)
    gap = 0.5 - alpha
    rows: List[dict] = []
    checks: List[KSReport] = []
    for n in ns:
        samples = diagonal_passage_samples(alpha, n, mc, runner)
        centre = mu_alpha(n, alpha)
        upper = [float(np.mean(samples >= centre + e * n)) for e in eps]
        lower = [float(np.mean(samples <= centre - e * n)) for e in eps]
        up_exp = [e ** 1.5 * n * (min(1.0, math.sqrt(e) / gap) if gap > 0 else 1.0) for e in eps]
        low_exp = [e * e * n / gap if gap > 0 else e ** 3 * n * n for e in eps]

        table_n = _envelope_rows("upper", eps, upper, up_exp, samples.size)
        table_n += _envelope_rows("lower", eps, lower, low_exp, samples.size)
        for row in table_n:
            row["n"] = n
        rows.extend(table_n)

        label = f"tail-bounds-a{alpha}-n{n}"
        outside = sum(not r["within"] for r in table_n)
        checks.append(bound_report(f"{label}:envelope", float(outside), 0.0, kind="envelope", n=samples.size))
        monotone = bool(np.all(np.diff(upper) <= 0) and np.all(np.diff(lower) <= 0))
        checks.append(bound_report(f"{label}:monotone", 0.0 if monotone else 1.0, 0.0, n=samples.size))
        if gap > 0:
            r2 = _log_linear_r2([e * e for e in eps], lower)
            checks.append(KSReport(
                label=f"{label}:shallow-lower-r2", kind="regression", statistic=r2 if r2 is not None else 0.0,
                threshold=0.9, passed=r2 is not None and r2 > 0.9, n=samples.size,
            ))

    table = pd.DataFrame(rows, columns=["n", "side", "eps", "probability", "envelope", "fitted", "within"])
    table.attrs["checks"] = checks
    return table


def _increments(alpha: float, n: int, z: int, r: int, src: SeededSource) -> np.ndarray:
    field = materialize(EnvironmentSpec.half_space(alpha, Window(i_min=1, i_max=n + z, j_min=1, j_max=n)), src)
    grid = passage_grid(field, [(1, 1)], (n + z, n))
    base = grid.value((n, n))
    return np.array([grid.value((n + z, n)) - base, base - grid.value((n - r, n - r))])


def suite_two_point(
    alpha: float,
    n: int,
    mc: MCConfig,
    z: Optional[int] = None,
    r: Optional[int] = None,
    thresholds: Sequence[float] = (0.5, 1.0, 1.5, 2.0, 2.5),
    runner: Optional[ReplicaRunner] = None,
) -> pd.DataFrame:
    """
    Caudas dos incrementos espacial X(1,1; n+z,n) - X(1,1; n,n) e temporal
    X(1,1; n,n) - X(1,1; n-r,n-r)

    Os limiares a estão em unidades do desvio padrão empírico de cada incremento (escala
    z^{1/2} no espacial). Espacial: log P(|incremento| >= a) linear em a^2 (R^2 > 0.9) e
    envelope 2 exp(-c a^2). Temporal: a cauda em 2a é menor que em a por um fator >= e.
    Um incremento identicamente nulo (z = 0) só confere que é nulo.

    Returns:
        Tabela (geometry, a, probability, envelope); attrs["checks"] com os veredictos
    """
    if n < 4:
        raise DomainError("Requer n >= 4")
    z = z if z is not None else int(math.floor(n ** (2.0 / 3.0)))
    r = r if r is not None else n // 4
    if z < 0 or not 0 < r < n:
        raise DomainError(f"Geometria inválida: z={z}, r={r}")
    runner = _runner(mc, runner)
    label = f"two-point-a{alpha}-n{n}"
    samples = runner.run_array(lambda src: _increments(alpha, n, z, r, src), _source(mc, label), mc.replicas, label)

    rows = []
    checks = []
    for col, geometry in enumerate(("spatial", "temporal")):
        inc = samples[:, col] - samples[:, col].mean()
        sd = float(inc.std())
        probs = [float(np.mean(np.abs(inc) >= a * sd)) if sd > 0 else 0.0 for a in thresholds]
        env_rows = _envelope_rows(geometry, thresholds, probs, [a * a for a in thresholds], samples.shape[0])
        for a, p, er in zip(thresholds, probs, env_rows):
            rows.append({"geometry": geometry, "a": a, "probability": p, "envelope": er["envelope"]})
        if sd == 0:
            checks.append(bound_report(
                f"{label}:{geometry}-degenerate", float(np.abs(inc).max()), 0.0, n=samples.shape[0]
            ))
        elif geometry == "spatial":
            r2 = _log_linear_r2([a * a for a in thresholds], probs)
            checks.append(KSReport(
                label=f"{label}:spatial-r2", kind="regression", statistic=r2 if r2 is not None else 0.0,
                threshold=0.9, passed=r2 is not None and r2 > 0.9, n=samples.shape[0],
            ))
        else:
            at_a = float(np.mean(np.abs(inc) >= sd))
            at_2a = float(np.mean(np.abs(inc) >= 2.0 * sd))
            ratio = at_a / at_2a if at_2a > 0 else math.inf
            checks.append(KSReport(
                label=f"{label}:temporal-ratio", kind="shape", statistic=ratio, threshold=math.e,
                passed=ratio >= math.e, n=samples.shape[0],
            ))
    table = pd.DataFrame(rows, columns=["geometry", "a", "probability", "envelope"])
    table.attrs["checks"] = checks
    return table


# ---------------------------------------------------------------------------
# Desigualdades determinísticas e oráculo

def suite_deterministic_inequalities(
    mc: MCConfig,
    fields: int = 1000,
    size: int = 50,
    tuples: int = 3,
    alpha: float = 0.7,
    beta: float = 1.3,
    runner: Optional[ReplicaRunner] = None,
) -> List[KSReport]:
    """
    Quadrângulo (um e dois ambientes) e composição métrica em campos de meio-espaço size x size
    """
    runner = _runner(mc, runner)
    spec = EnvironmentSpec.half_space(alpha, Window.square(1, size))

    def job(src: SeededSource) -> np.ndarray:
        field = materialize(spec, src)
        reduced = scale_diagonal(field, alpha / beta)
        failures = np.zeros(3)
        for k in range(tuples):
            u = src.uniform("tuple", k, np.arange(7))
            s = 1 + int(u[0] * (size - 2))
            t = s + 1 + int(u[1] * (size - s))
            x1, x2 = sorted(s + int(v * (size - s + 1)) for v in u[2:4])
            y1, y2 = sorted(t + int(v * (size - t + 1)) for v in u[4:6])
            failures[0] += not quadrangle_check(field, x1, x2, y1, y2, s, t)
            failures[1] += not quadrangle_check(field, x1, x2, y1, y2, s, t, reduced=reduced)
            if t - s >= 2:
                row = s + 1 + int(u[6] * (t - s - 1))
                failures[2] += not metric_composition_check(field, (x1, s), (max(y2, x1), t), row)
        return failures

    label = f"deterministic-inequalities-{size}"
    counts = runner.run_array(job, _source(mc, label), fields, label).sum(axis=0)
    return [
        bound_report(f"{label}:quadrangle", float(counts[0]), 0.0, n=fields),
        bound_report(f"{label}:quadrangle-two-env", float(counts[1]), 0.0, n=fields),
        bound_report(f"{label}:metric-composition", float(counts[2]), 0.0, n=fields),
    ]


ORACLE_CONSTRAINTS = {
    "none": lambda size: Constraint.none(),
    "diagonal": lambda size: Constraint.diagonal(),
    "hit_shifted": lambda size: Constraint.hit_shifted(1),
    "parallelogram": lambda size: Constraint.parallelogram(size, 0.5),
}


def suite_brute_force_oracle(
    mc: MCConfig, instances: int = 500, size: int = 6, runner: Optional[ReplicaRunner] = None
) -> List[KSReport]:
    """
    Programação dinâmica contra enumeração exaustiva de caminhos em janelas size x size
    """
    if size > 8:
        raise ConfigurationError("O oráculo exaustivo aceita janelas de até 8 x 8")
    runner = _runner(mc, runner)
    window = Window.square(1, size)
    zero_temp = EnvironmentSpec(alpha=0.5, theta=0.5, symmetric=True, window=window)
    half = EnvironmentSpec.half_space(0.7, window)
    positive_temp = EnvironmentSpec(kind=WeightKind.LOG_GAMMA, alpha=1.0, theta=1.0, symmetric=True, window=window)
    reports = []
    for name, make in ORACLE_CONSTRAINTS.items():
        constraint = make(size)

        def job(src: SeededSource, constraint: Constraint = constraint) -> np.ndarray:
            u = src.uniform("endpoint", np.arange(2))
            end = (1 + int(u[0] * size), 1 + int(u[1] * size))
            q = PassageQuery(start=(1, 1), end=end, constraint=constraint)
            gaps = []
            for tag, spec in (("extended", zero_temp), ("half-space", half)):
                field = materialize(spec, src.child(tag))
                gaps.append(_relative_gap(passage_time(field, q).value, brute_force_passage(field, q)))
            field = materialize(positive_temp, src.child("log-gamma"))
            gaps.append(_relative_gap(log_partition(field, q).log_z, brute_force_log_partition(field, q)))
            return np.array([max(gaps[:2]), gaps[2]])

        label = f"brute-force-oracle-{name}"
        gaps = runner.run_array(job, _source(mc, label), instances, label)
        reports.append(bound_report(f"{label}:lpp", float(gaps[:, 0].max()), ORACLE_TOL, n=instances))
        reports.append(bound_report(f"{label}:log-gamma", float(gaps[:, 1].max()), LOG_ORACLE_TOL, n=instances))
    return reports


# ---------------------------------------------------------------------------
# Horizonte

def suite_horizon_slopes(
    mc: MCConfig,
    cases: Sequence[Tuple[float, float]] = ((0.0, 1.0), (-1.0, 0.5)),
    x: float = 50.0,
    delta: float = 0.01,
    tol: float = 0.1,
    brownian_rho: float = -0.5,
    lag: float = 1.0,
    runner: Optional[ReplicaRunner] = None,
) -> List[KSReport]:
    """
    E[R_1(x)]/x perto de lambda_1 e marginal browniana N(-2 rho lag, 2 lag) em lambda = 2|rho|
    """
    runner = _runner(mc, runner)
    reports = []
    for rho, lam in cases:
        def job(src: SeededSource, rho: float = rho, lam: float = lam) -> float:
            return sample_horizon_marginals(rho, [lam], [0.0, x], delta, src).processes[0][1]

        label = f"horizon-slopes-rho{rho}-l{lam}"
        values = runner.run_array(job, _source(mc, label), mc.replicas, label)
        gap = abs(float(values.mean()) / x - lam)
        reports.append(bound_report(label, gap, tol, kind="shape", n=mc.replicas))
    reports.append(brownian_marginal_check(brownian_rho, delta, lag, mc, runner))
    return reports


def suite_exp_brownian_swap(
    mc: MCConfig,
    lam0: float = 1.0,
    lam1: float = 0.5,
    delta: float = 0.01,
    horizon: float = 2.0,
    runner: Optional[ReplicaRunner] = None,
) -> List[KSReport]:
    return exp_brownian_swap_check(lam0, lam1, delta, horizon, mc, runner=_runner(mc, runner))


# ---------------------------------------------------------------------------
# Registro e execução

def _param(mc: MCConfig, key: str, default):
    return mc.params.get(key, default)


def _run_barraquand_wang(mc: MCConfig, runner: ReplicaRunner) -> List[KSReport]:
    reports = suite_barraquand_wang(
        _param(mc, "n", 8), _param(mc, "m", 8), _param(mc, "alphas", [0.4, 0.7, 1.2]), mc, runner
    )
    reports.append(suite_barraquand_wang_log_gamma(
        _param(mc, "lg_n", 5), _param(mc, "lg_m", 5), _param(mc, "lg_alpha", 1.0), _param(mc, "lg_beta", 1.0),
        mc, runner,
    ))
    return reports


def _run_permutation(mc: MCConfig, runner: ReplicaRunner) -> List[KSReport]:
    kind = WeightKind(_param(mc, "kind", WeightKind.EXPONENTIAL.value))
    observables = [tuple(o) for o in _param(mc, "observables", [(0, 0, 3, 3), (2, 0, 3, 3)])]
    params = {k: mc.params[k] for k in ("alpha", "theta", "gamma0", "gamma1") if k in mc.params}
    return suite_permutation_invariance(
        kind, params, Window.square(0, _param(mc, "size", 3)), mc, observables, runner
    )


def _run_stationary(mc: MCConfig, runner: ReplicaRunner) -> List[KSReport]:
    specs = DEFAULT_STATIONARY_SPECS
    if "specs" in mc.params:
        specs = [(StationaryMeasureSpec(**s["spec"]), int(s.get("h", 3))) for s in mc.params["specs"]]
    return suite_stationary(specs, mc, _param(mc, "j_min", -3), _param(mc, "j_max", 5), runner)


def _run_tail_bounds(mc: MCConfig, runner: ReplicaRunner) -> List[KSReport]:
    alpha = _param(mc, "alpha", 1.0)
    default_grid = [0.005, 0.01, 0.02, 0.03, 0.05] if alpha >= 0.5 else [0.05, 0.1, 0.15, 0.2, 0.3]
    table = suite_tail_bounds(alpha, _param(mc, "ns", [1000]), _param(mc, "eps_grid", default_grid), mc, runner)
    return table.attrs["checks"]


def _run_two_point(mc: MCConfig, runner: ReplicaRunner) -> List[KSReport]:
    table = suite_two_point(
        _param(mc, "alpha", 0.5), _param(mc, "n", 2000), mc, _param(mc, "z", None), _param(mc, "r", None),
        runner=runner,
    )
    return table.attrs["checks"]


SUITES: Dict[str, Callable[[MCConfig, ReplicaRunner], List[KSReport]]] = {
    "rsk-isometry": lambda mc, rn: suite_rsk_isometry(
        mc, _param(mc, "instances", 1000), _param(mc, "max_len", 12), rn),
    "coupled-swap": lambda mc, rn: suite_coupled_swap(mc, _param(mc, "length", 10), rn),
    "tasep-metric-equivalence": lambda mc, rn: suite_tasep_metric_equivalence(
        mc, _param(mc, "levels", [1, 3]), _param(mc, "horizon", 10.0), _param(mc, "alpha", 0.7),
        _param(mc, "x_max", 30), _param(mc, "realizations", 200), rn),
    "barraquand-wang": _run_barraquand_wang,
    "permutation-invariance": _run_permutation,
    "stationary": _run_stationary,
    "burke": lambda mc, rn: suite_burke(mc, _param(mc, "beta", 0.25), _param(mc, "n", 50), rn),
    "limit-shape": lambda mc, rn: suite_limit_shape(
        _param(mc, "alphas", [0.3, 0.5, 1.0]), _param(mc, "n", 1000), mc, runner=rn),
    "fluctuation-exponent": lambda mc, rn: suite_fluctuation_exponent(
        _param(mc, "ns", [250, 500, 1000, 2000]), mc, runner=rn),
    "deterministic-inequalities": lambda mc, rn: suite_deterministic_inequalities(
        mc, _param(mc, "fields", 1000), _param(mc, "size", 50), runner=rn),
    "horizon-slopes": lambda mc, rn: suite_horizon_slopes(mc, delta=_param(mc, "delta", 0.01), runner=rn),
    "exp-brownian-swap": lambda mc, rn: suite_exp_brownian_swap(mc, delta=_param(mc, "delta", 0.01), runner=rn),
    "brute-force-oracle": lambda mc, rn: suite_brute_force_oracle(
        mc, _param(mc, "instances", 500), _param(mc, "size", 6), rn),
    "tasep-lpp": lambda mc, rn: suite_tasep_lpp(mc, _param(mc, "alpha", 0.7), _param(mc, "t", 10.0), runner=rn),
    "two-point": _run_two_point,
    "tail-bounds": _run_tail_bounds,
}


def list_suites() -> List[str]:
    return sorted(SUITES) + ["all"]


def run_suite(name: str, mc: MCConfig, out: Optional[str] = None) -> List[SuiteReport]:
    """
    Executa uma suíte nomeada (ou "all") e grava o relatório JSON

    Args:
        name: Nome da suíte
        mc: Configuração de Monte Carlo (parâmetros específicos em mc.params)
        out: Caminho opcional do relatório

    Returns:
        Um SuiteReport por suíte executada
    """
    if name != "all" and name not in SUITES:
        raise UsageError(f"Suíte desconhecida '{name}'. Disponíveis: {', '.join(list_suites())}")
    names = list(SUITES) if name == "all" else [name]
    runner = ReplicaRunner.from_config(mc)

    reports = []
    try:
        for suite in names:
            reports.append(_run_one(suite, mc, runner))
    finally:
        if out:
            write_suite_reports(reports, out, mc.model_dump())
    return reports


def _run_one(suite: str, mc: MCConfig, runner: ReplicaRunner) -> SuiteReport:
    """Executa uma suíte; uma exceção que não seja de configuração vira um relatório reprovado."""
    logger.info(f"Suíte {suite}: N={mc.replicas}, seed={mc.seed}")
    start = time.perf_counter()
    try:
        checks = SUITES[suite](mc, runner)
    except (UsageError, ConfigurationError):
        raise
    except Exception as e:
        elapsed = time.perf_counter() - start
        logger.error(f"Suíte {suite} interrompida: {type(e).__name__}: {e}")
        return SuiteReport(
            suite=suite, checks=[], seed=mc.seed, replicas=mc.replicas, elapsed_s=elapsed,
            error=f"{type(e).__name__}: {e}",
        )
    elapsed = time.perf_counter() - start
    report = SuiteReport(suite=suite, checks=checks, seed=mc.seed, replicas=mc.replicas, elapsed_s=elapsed)
    status = "passou" if report.passed else "FALHOU"
    logger.info(f"Suíte {suite} {status} em {elapsed:.1f}s ({len(checks)} verificações)")
    for check in checks:
        if not check.passed:
            logger.warning(f"{check.label}: {check.statistic:.4g} vs limiar {check.threshold:.4g}")
    return report
