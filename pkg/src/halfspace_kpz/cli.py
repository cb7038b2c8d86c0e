"""
Interface de linha de comando: amostragem, varreduras e suítes de verificação
"""
import argparse
import json
import logging
import math
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd
from pydantic import ValidationError

from .config import setup_logging
from .core import init_field, init_settings, init_source
from .errors import HalfspaceKPZError, InvariantError, UsageError
from .horizon import sample_horizon_marginals
from .lpp import passage_time
from .models import (
    CliConfig,
    EnvironmentSpec,
    HeightFunction,
    MCConfig,
    PassageQuery,
    SpaceTimePoint,
    WeightKind,
    Window,
)
from .pam import pam_geodesic
from .polymer import log_partition
from .reports import geodesic_table, horizon_table, write_json, write_table
from .tasep import ClockField, height_trajectory, required_width, tasep_tail_scan
from .verify import diagonal_passage_table, exponent_scan, list_suites, run_suite, suite_tail_bounds, suite_two_point

logger = logging.getLogger(__name__)

SAMPLE_KINDS = ["lpp", "polymer", "horizon", "tasep", "pam"]
SCAN_KINDS = ["tails", "exponent", "shape", "two-point"]

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def parse_param(raw: str) -> Dict[str, Any]:
    """
    Converte "chave=valor" em {chave: valor}; valores JSON ou listas separadas por vírgula
    """
    if "=" not in raw:
        raise UsageError(f"Parâmetro '{raw}' deve ter a forma chave=valor")
    key, value = raw.split("=", 1)
    key = key.strip()
    if not key:
        raise UsageError(f"Parâmetro '{raw}' sem chave")
    try:
        return {key: json.loads(value)}
    except json.JSONDecodeError:
        pass
    if "," in value:
        items = [v for v in value.split(",") if v.strip()]
        try:
            return {key: [json.loads(v) for v in items]}
        except json.JSONDecodeError:
            return {key: items}
    return {key: value}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Semente mestre (sobrepõe HALFSPACE_KPZ_SEED)")
    common.add_argument("--replicas", type=int, default=None, help="Número de réplicas N")
    common.add_argument("--workers", type=int, default=None, help="Número de workers")
    common.add_argument("--format", dest="fmt", choices=["json", "csv"], default=None)
    common.add_argument("--out", default=None, help="Arquivo de saída")
    common.add_argument("--config", default=None, help="Arquivo JSON de configuração")
    common.add_argument("--param", action="append", default=[], metavar="CHAVE=VALOR",
                        help="Parâmetro específico (repetível)")
    common.add_argument("--progress", action="store_true", help="Mostra barras de progresso")
    common.add_argument("--log-level", default=None)

    parser = argparse.ArgumentParser(prog="halfspace-kpz", description="Simulação e verificação de KPZ em meio-espaço")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sample = sub.add_parser("sample", parents=[common], help="Gera amostras e trajetórias")
    sample.add_argument("kind", choices=SAMPLE_KINDS)

    verify = sub.add_parser("verify", parents=[common], help="Executa uma suíte de verificação")
    verify.add_argument("suite")

    scan = sub.add_parser("scan", parents=[common], help="Emite tabelas prontas para gráficos")
    scan.add_argument("kind", choices=SCAN_KINDS)

    sub.add_parser("list-suites", help="Lista as suítes disponíveis")
    return parser


def _load_config_file(path: Optional[str]) -> Dict[str, Any]:
    if not path:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"Não foi possível ler a configuração {path}: {e}")
    if not isinstance(data, dict):
        raise UsageError("O arquivo de configuração deve conter um objeto JSON")
    return data


def resolve_config(args: argparse.Namespace) -> CliConfig:
    """
    Ambiente < arquivo --config < flags
    """
    settings = init_settings()
    file_cfg = _load_config_file(args.config)
    params: Dict[str, Any] = dict(file_cfg.get("params", {}))
    for raw in args.param:
        params.update(parse_param(raw))

    def pick(flag, key, default):
        if flag is not None:
            return flag
        return file_cfg.get(key, default)

    fmt = pick(args.fmt, "format", "json")
    if fmt not in ("json", "csv"):
        raise UsageError(f"Formato desconhecido '{fmt}' (json ou csv)")

    return CliConfig(
        subcommand=args.subcommand,
        seed=pick(args.seed, "seed", settings.seed),
        out=pick(args.out, "out", None),
        fmt=fmt,
        replicas=pick(args.replicas, "replicas", 2000),
        workers=pick(args.workers, "workers", settings.workers),
        params=params,
    )


def _mc_config(cfg: CliConfig, show_progress: bool) -> MCConfig:
    settings = init_settings()
    return MCConfig(
        replicas=cfg.replicas, seed=cfg.seed, workers=cfg.workers,
        batch_size=settings.batch_size, show_progress=show_progress, params=cfg.params,
    )


def _default_out(cfg: CliConfig, name: str) -> str:
    return cfg.out or os.path.join(init_settings().output_dir, f"{cfg.subcommand}-{name}.{cfg.fmt}")


def _emit(table: pd.DataFrame, cfg: CliConfig, name: str, extra: Optional[Dict[str, Any]] = None) -> str:
    metadata: Dict[str, Any] = {"config": cfg.model_dump(), **(extra or {})}
    checks = table.attrs.get("checks")
    if checks:
        metadata["checks"] = [c.model_dump() for c in checks]
    path = _default_out(cfg, name)
    if cfg.fmt == "csv":
        return write_table(table, path, metadata)
    return write_json({**metadata, "rows": json.loads(table.to_json(orient="records"))}, path)


def _float_list(value: Any) -> List[float]:
    if isinstance(value, (int, float)):
        return [float(value)]
    return [float(v) for v in value]


# ---------------------------------------------------------------------------
# sample

def sample_lpp(cfg: CliConfig) -> pd.DataFrame:
    p = cfg.params
    n, alpha = int(p.get("n", 100)), float(p.get("alpha", 0.7))
    if n < 1 or alpha <= 0:
        raise UsageError("sample lpp requer n >= 1 e alpha > 0")
    field = init_field(EnvironmentSpec.half_space(alpha, Window.square(1, n)), init_source(cfg.seed))
    result = passage_time(field, PassageQuery(start=(1, 1), end=(n, n)), geodesic=True)
    table = geodesic_table(result.geodesic or [])
    table.attrs["value"] = result.value
    return table


def sample_polymer(cfg: CliConfig) -> pd.DataFrame:
    p = cfg.params
    n, alpha, beta = int(p.get("n", 20)), float(p.get("alpha", 1.0)), float(p.get("beta", 1.0))
    if n < 1 or alpha <= 0 or beta <= 0:
        raise UsageError("sample polymer requer n >= 1, alpha > 0 e beta > 0")
    spec = EnvironmentSpec.half_space(alpha, Window.square(1, n), WeightKind.LOG_GAMMA, bulk=beta)
    field = init_field(spec, init_source(cfg.seed))
    rows = [
        {"n": i, "log_z": log_partition(field, PassageQuery(start=(1, 1), end=(i, i))).log_z}
        for i in range(1, n + 1)
    ]
    return pd.DataFrame(rows, columns=["n", "log_z"])


def sample_horizon(cfg: CliConfig) -> pd.DataFrame:
    p = cfg.params
    slopes = _float_list(p.get("slopes", [1.0, 0.5]))
    rho = float(p.get("rho", 0.0))
    x_max, step = float(p.get("x_max", 5.0)), float(p.get("step", 0.5))
    delta = float(p.get("delta", 0.01))
    if x_max <= 0 or step <= 0:
        raise UsageError("sample horizon requer x_max > 0 e step > 0")
    count = int(math.floor(x_max / step + 1e-9))
    xs = [round(k * step, 10) for k in range(-count, count + 1)]
    sample = sample_horizon_marginals(rho, slopes, xs, delta, init_source(cfg.seed))
    return horizon_table(sample)


def sample_tasep(cfg: CliConfig) -> pd.DataFrame:
    p = cfg.params
    t, alpha = float(p.get("t", 10.0)), float(p.get("alpha", 0.7))
    x_max = int(p.get("x_max", 20))
    if t < 0 or alpha <= 0 or x_max < 0:
        raise UsageError("sample tasep requer t >= 0, alpha > 0 e x_max >= 0")
    times = _float_list(p.get("times", [t]))
    width = required_width(x_max, alpha, max(times))
    if p.get("initial", "narrow_wedge") == "flat":
        h0 = HeightFunction.flat(width)
    else:
        h0 = HeightFunction.narrow_wedge(int(p.get("y", 0)), width)
    clocks = ClockField.sample(alpha, width, max(times), init_source(cfg.seed), levels=int(p.get("levels", 1)))
    return height_trajectory(h0, clocks, times, list(range(x_max + 1)))


def sample_pam(cfg: CliConfig) -> pd.DataFrame:
    p = cfg.params
    t, alpha = float(p.get("t", 2.0)), float(p.get("alpha", 1.0))
    levels, x, y = int(p.get("levels", 1)), int(p.get("x", 0)), int(p.get("y", 6))
    if t <= 0 or alpha <= 0 or levels < 1 or x < 0 or y < 0:
        raise UsageError("sample pam requer t > 0, alpha > 0, levels >= 1 e x, y >= 0")
    clocks = ClockField.sample(alpha, required_width(max(x, y), alpha, t), t, init_source(cfg.seed), levels)
    start = SpaceTimePoint(x=x, a=x % 2, time=0.0)
    end = SpaceTimePoint(x=y, a=y % 2, time=t)
    cost, table = pam_geodesic(clocks, start, end)
    table.attrs["value"] = cost
    return table


SAMPLERS = {
    "lpp": sample_lpp,
    "polymer": sample_polymer,
    "horizon": sample_horizon,
    "tasep": sample_tasep,
    "pam": sample_pam,
}


def cmd_sample(cfg: CliConfig, kind: str) -> int:
    table = SAMPLERS[kind](cfg)
    extra = {"kind": kind}
    if "value" in table.attrs:
        extra["value"] = table.attrs["value"]
    path = _emit(table, cfg, kind, extra)
    print(f"Amostra {kind} gravada em {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify e scan

def cmd_verify(cfg: CliConfig, suite: str, show_progress: bool = False) -> int:
    if suite not in list_suites():
        raise UsageError(f"Suíte desconhecida '{suite}'. Disponíveis: {', '.join(list_suites())}")
    out = cfg.out or os.path.join(init_settings().output_dir, f"verify-{suite}.json")
    reports = run_suite(suite, _mc_config(cfg, show_progress), out)
    passed = all(r.passed for r in reports)
    for r in reports:
        status = "ok" if r.passed else (f"ERRO ({r.error})" if r.error else "FALHOU")
        print(f"{r.suite}: {status} ({len(r.checks)} verificações, {r.elapsed_s:.1f}s)")
    print(f"Relatório gravado em {out}")
    return EXIT_OK if passed else EXIT_FAILED


def cmd_scan(cfg: CliConfig, kind: str, show_progress: bool = False) -> int:
    mc = _mc_config(cfg, show_progress)
    p = cfg.params
    alpha = float(p.get("alpha", 1.0))
    extra: Dict[str, Any] = {"kind": kind}

    if kind == "tails":
        eps_grid = _float_list(p.get("eps_grid", [0.01, 0.02, 0.05]))
        if not eps_grid:
            raise UsageError("scan tails requer uma grade de eps não vazia")
        if p.get("model", "lpp") == "tasep":
            table = tasep_tail_scan(alpha, int(p.get("y", 0)), int(p.get("x", 0)), float(p.get("t", 50.0)),
                                    eps_grid, mc)
            extra["monotone"] = table.attrs["monotone"]
        else:
            ns = [int(n) for n in _float_list(p.get("ns", [200]))]
            table = suite_tail_bounds(alpha, ns, eps_grid, mc)
    elif kind == "exponent":
        ns = [int(n) for n in _float_list(p.get("ns", [250, 500, 1000]))]
        table, slope, stderr = exponent_scan(alpha, ns, mc)
        extra.update({"slope": slope, "stderr": stderr})
    elif kind == "shape":
        ns = [int(n) for n in _float_list(p.get("ns", p.get("n", [1000])))]
        table = diagonal_passage_table(alpha, ns, mc)
    else:
        table = suite_two_point(alpha, int(p.get("n", 500)), mc)

    path = _emit(table, cfg, kind, extra)
    print(f"Varredura {kind} gravada em {path}")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Ponto de entrada; devolve 0 (sucesso), 1 (verificação falhou) ou 2 (uso inválido)
    """
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.subcommand == "list-suites":
        for name in list_suites():
            print(name)
        return EXIT_OK

    try:
        settings = init_settings()
        setup_logging(args.log_level or settings.log_level)
        cfg = resolve_config(args)
        logger.info(f"Configuração resolvida: {cfg.model_dump_json()}")
        if args.subcommand == "sample":
            return cmd_sample(cfg, args.kind)
        if args.subcommand == "verify":
            return cmd_verify(cfg, args.suite, args.progress)
        return cmd_scan(cfg, args.kind, args.progress)
    except InvariantError as e:
        logger.error(f"Invariante violado: {e}")
        print(f"Erro: {e}", file=sys.stderr)
        return EXIT_FAILED
    except (ValidationError, HalfspaceKPZError, ValueError) as e:
        logger.error(f"Uso inválido: {e}")
        print(f"Erro: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.exception(f"Falha inesperada: {e}")
        print(f"Erro: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
