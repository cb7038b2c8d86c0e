"""
Testes para a interface de linha de comando
"""
import json
import os
from unittest.mock import patch

import pytest

from halfspace_kpz.cli import main, parse_param
from halfspace_kpz.errors import InvariantError, UsageError
from halfspace_kpz.verify import SUITES


@pytest.fixture(autouse=True)
def isolated_env(tmp_path):
    """
    Isola o ambiente: sem .env e com o diretório de saída temporário
    """
    env = {"HALFSPACE_KPZ_OUTPUT_DIR": str(tmp_path / "results")}
    with patch("halfspace_kpz.config.load_dotenv"), patch.dict(os.environ, env, clear=True):
        yield


def test_parse_param():
    """
    Testa a conversão de --param em valores JSON ou listas
    """
    assert parse_param("n=5") == {"n": 5}
    assert parse_param("alpha=0.25") == {"alpha": 0.25}
    assert parse_param("ns=100,200") == {"ns": [100, 200]}
    assert parse_param("slopes=[1, 0.5]") == {"slopes": [1, 0.5]}
    assert parse_param("initial=flat") == {"initial": "flat"}


def test_parse_param_invalid():
    """
    Testa se parâmetros sem '=' ou sem chave levantam UsageError
    """
    with pytest.raises(UsageError, match="chave=valor"):
        parse_param("n5")
    with pytest.raises(UsageError, match="sem chave"):
        parse_param("=5")


def test_list_suites(capsys):
    """
    Testa a listagem de suítes
    """
    assert main(["list-suites"]) == 0
    out = capsys.readouterr().out.split()
    assert "rsk-isometry" in out
    assert out[-1] == "all"


def test_unknown_suite_is_usage_error(tmp_path):
    """
    Testa se uma suíte desconhecida devolve o código 2
    """
    assert main(["verify", "bogus", "--out", str(tmp_path / "r.json")]) == 2
    assert not (tmp_path / "r.json").exists()


def test_bad_param_is_usage_error():
    """
    Testa se um --param malformado devolve o código 2
    """
    assert main(["sample", "lpp", "--param", "n5"]) == 2


def test_sample_lpp_reproducible(tmp_path):
    """
    Testa se a mesma semente produz a mesma geodésica
    """
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert main(["sample", "lpp", "--param", "n=6", "--seed", "3", "--out", str(p)]) == 0

    first, second = (json.loads(p.read_text(encoding="utf-8")) for p in paths)
    assert first["rows"] == second["rows"]
    assert first["value"] == second["value"]
    assert first["kind"] == "lpp"
    assert first["config"]["seed"] == 3
    assert first["rows"][0] == {"i": 1, "j": 1}
    assert first["rows"][-1] == {"i": 6, "j": 6}
    assert len(first["rows"]) == 11


def test_sample_csv_with_sidecar(tmp_path):
    """
    Testa a saída CSV com metadados em JSON ao lado
    """
    out = tmp_path / "polymer.csv"
    assert main(["sample", "polymer", "--param", "n=4", "--format", "csv", "--out", str(out)]) == 0
    assert out.read_text(encoding="utf-8").splitlines()[0] == "n,log_z"
    sidecar = json.loads((tmp_path / "polymer.json").read_text(encoding="utf-8"))
    assert sidecar["kind"] == "polymer"
    assert sidecar["config"]["fmt"] == "csv"


def test_default_output_dir(tmp_path):
    """
    Testa se sem --out a saída vai para HALFSPACE_KPZ_OUTPUT_DIR
    """
    assert main(["sample", "lpp", "--param", "n=3"]) == 0
    assert (tmp_path / "results" / "sample-lpp.json").exists()


def test_config_file_precedence(tmp_path):
    """
    Testa a precedência ambiente < arquivo --config < flags
    """
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"seed": 11, "params": {"n": 4}}), encoding="utf-8")

    out = tmp_path / "from-file.json"
    assert main(["sample", "lpp", "--config", str(config), "--out", str(out)]) == 0
    data = json.loads(out.read_text(encoding="utf-8"))
    assert data["config"]["seed"] == 11
    assert data["config"]["params"] == {"n": 4}

    out = tmp_path / "from-flag.json"
    assert main(["sample", "lpp", "--config", str(config), "--seed", "5", "--out", str(out)]) == 0
    assert json.loads(out.read_text(encoding="utf-8"))["config"]["seed"] == 5


def test_invalid_config_file(tmp_path):
    """
    Testa se um arquivo de configuração inválido devolve o código 2
    """
    config = tmp_path / "cfg.json"
    config.write_text("[1, 2]", encoding="utf-8")
    assert main(["sample", "lpp", "--config", str(config)]) == 2
    config.write_text(json.dumps({"format": "xml"}), encoding="utf-8")
    assert main(["sample", "lpp", "--config", str(config)]) == 2


def test_verify_writes_report(tmp_path, capsys):
    """
    Testa uma suíte pequena pela CLI
    """
    out = tmp_path / "verify.json"
    code = main([
        "verify", "rsk-isometry", "--param", "instances=20", "--param", "max_len=5",
        "--replicas", "10", "--workers", "1", "--out", str(out),
    ])
    assert code == 0
    assert json.loads(out.read_text(encoding="utf-8"))["passed"] is True
    assert "rsk-isometry: ok" in capsys.readouterr().out


def test_verify_failing_suite_exits_one(tmp_path, capsys):
    """
    Testa se uma suíte que levanta exceção dá código 1 e ainda grava o relatório
    """
    def failing(mc, rn):
        raise ZeroDivisionError("divisão por zero")

    out = tmp_path / "verify.json"
    with patch.dict(SUITES, {"rsk-isometry": failing}):
        code = main(["verify", "rsk-isometry", "--replicas", "2", "--workers", "1", "--out", str(out)])
    assert code == 1
    data = json.loads(out.read_text(encoding="utf-8"))
    assert data["passed"] is False
    assert "ERRO (ZeroDivisionError: divisão por zero)" in capsys.readouterr().out


def test_invariant_error_exits_one(capsys):
    """
    Testa se InvariantError dá código 1 e não é tratado como uso inválido
    """
    with patch("halfspace_kpz.cli.cmd_sample", side_effect=InvariantError("Dispersão entre níveis 9")):
        assert main(["sample", "lpp"]) == 1
    assert "Dispersão entre níveis 9" in capsys.readouterr().err


def test_unexpected_error_exits_one(capsys):
    """
    Testa se uma exceção inesperada é registrada e dá código 1
    """
    with patch("halfspace_kpz.cli.cmd_sample", side_effect=RuntimeError("falhou")):
        assert main(["sample", "lpp"]) == 1
    assert "RuntimeError: falhou" in capsys.readouterr().err
