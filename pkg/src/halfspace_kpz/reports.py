"""
Módulo de exportação: relatórios JSON e tabelas CSV
"""
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from .models import Cell, HorizonSample, SuiteReport

logger = logging.getLogger(__name__)


def _ensure_parent(path: str) -> Path:
    p = Path(path)
    if p.parent and not p.parent.exists():
        os.makedirs(p.parent, exist_ok=True)
    return p


def write_json(data: Dict[str, Any], path: str) -> str:
    """
    Grava um dicionário como JSON indentado

    Args:
        data: Conteúdo serializável
        path: Caminho do arquivo

    Returns:
        Caminho gravado
    """
    p = _ensure_parent(path)
    with open(p, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2)
    logger.info(f"Relatório gravado em {p}")
    return str(p)


def read_json(path: str) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def suite_report_dict(report: SuiteReport, config: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Esquema {suite, passed, checks: [{label, kind, statistic, threshold, pass, n}], seed, elapsed_s}."""
    data = {
        "suite": report.suite,
        "passed": report.passed,
        "seed": report.seed,
        "replicas": report.replicas,
        "elapsed_s": report.elapsed_s,
        "checks": [
            {
                "label": c.label,
                "kind": c.kind,
                "statistic": c.statistic,
                "threshold": c.threshold,
                "pass": c.passed,
                "n": c.n,
            }
            for c in report.checks
        ],
    }
    if report.error is not None:
        data["error"] = report.error
    if config is not None:
        data["config"] = config
    return data


def write_suite_reports(reports: Sequence[SuiteReport], path: str, config: Optional[Dict[str, Any]] = None) -> str:
    data = {
        "passed": all(r.passed for r in reports),
        "suites": [suite_report_dict(r) for r in reports],
    }
    if config is not None:
        data["config"] = config
    return write_json(data, path)


def write_table(table: pd.DataFrame, path: str, metadata: Optional[Dict[str, Any]] = None) -> str:
    """
    Grava uma tabela CSV; metadata vai para um arquivo JSON ao lado (<nome>.json)
    """
    p = _ensure_parent(path)
    table.to_csv(p, index=False)
    if metadata is not None:
        write_json(metadata, str(p.with_suffix(".json")))
    logger.info(f"Tabela com {len(table)} linhas gravada em {p}")
    return str(p)


def geodesic_table(path: Sequence[Cell]) -> pd.DataFrame:
    return pd.DataFrame(list(path), columns=["i", "j"])


def horizon_table(sample: HorizonSample) -> pd.DataFrame:
    """Tabela (x, R_1, ..., R_k)."""
    data: Dict[str, List[float]] = {"x": list(sample.xs)}
    for i, row in enumerate(sample.processes, start=1):
        data[f"R_{i}"] = list(row)
    return pd.DataFrame(data)
