"""
Estatísticas de Kolmogorov-Smirnov e limiares usados pelas verificações
"""
import math
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .errors import DomainError
from .models import KSReport

# quantil assintótico de KS usado como limiar (nível ~0.1%)
KS_QUANTILE = 1.95


def _as_sample(x: Sequence[float], name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64).ravel()
    if arr.size == 0:
        raise DomainError(f"Amostra {name} vazia")
    return arr


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> float:
    """
    Distância sup entre as funções de distribuição empíricas de a e b
    """
    a = _as_sample(a, "a")
    b = _as_sample(b, "b")
    return float(stats.ks_2samp(a, b).statistic)


def ks_one_sample(a: Sequence[float], cdf: Callable) -> float:
    a = _as_sample(a, "a")
    return float(stats.kstest(a, cdf).statistic)


def two_sample_threshold(n1: int, n2: int) -> float:
    return KS_QUANTILE * math.sqrt((n1 + n2) / (n1 * n2))


def one_sample_threshold(n: int) -> float:
    return KS_QUANTILE / math.sqrt(n)


def two_sample_report(label: str, a: Sequence[float], b: Sequence[float]) -> KSReport:
    stat = ks_two_sample(a, b)
    threshold = two_sample_threshold(len(a), len(b))
    return KSReport(label=label, kind="two-sample", statistic=stat, threshold=threshold,
                    passed=stat < threshold, n=min(len(a), len(b)))


def one_sample_report(label: str, a: Sequence[float], cdf: Callable) -> KSReport:
    stat = ks_one_sample(a, cdf)
    threshold = one_sample_threshold(len(a))
    return KSReport(label=label, kind="one-sample", statistic=stat, threshold=threshold,
                    passed=stat < threshold, n=len(a))


def bound_report(label: str, value: float, threshold: float, kind: str = "exact", n: int = 0) -> KSReport:
    """Relatório de uma grandeza que deve ficar abaixo (ou igual) de um limiar."""
    return KSReport(label=label, kind=kind, statistic=float(value), threshold=float(threshold),
                    passed=bool(value <= threshold), n=n)
