"""
Tests for the run configuration and the hypangles command line
"""
import json

import numpy as np
import pytest

from config.settings import settings
from scripts.hypangles import main
from src.geometry.group_element import GroupElement, T
from src.reporting.commands import EXIT_CHECK_FAILED, EXIT_ERROR, EXIT_OK
from src.reporting.run_config import build_config, parse_element
from src.utils.exceptions import ConfigError
from src.utils.helpers import read_table


def _data_lines(path):
    return [line for line in path.read_text().splitlines() if not line.startswith("#")]


def _footer(path):
    lines = [line[2:] for line in path.read_text().splitlines()[1:] if line.startswith("# ")]
    return dict(line.split("=", 1) for line in lines)


def test_parse_element():
    assert parse_element("T") == T
    assert parse_element("[[2, 1], [1, 1]]") == GroupElement(2, 1, 1, 1)
    assert parse_element("1/2, 0, 0, 2").is_exact
    with pytest.raises(ConfigError):
        parse_element("1,2,3")
    with pytest.raises(ConfigError):
        parse_element("1,1,1,1")


def test_config_layering(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"Q": 30, "xi_max": 2.0, "seed": 99}))
    config = build_config(path, {"Q": 40.0, "seed": None})
    assert config.Q == 40.0
    assert config.xi_max == 2.0
    assert config.seed == 99
    assert config.samples == settings.DEFAULT_SAMPLES
    np.testing.assert_allclose(build_config(None, {"xi_max": 0.2, "xi_step": 0.05}).xi_grid(),
                               [0.05, 0.1, 0.15, 0.2])


def test_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        build_config(None, {"xi_step": 0.0})
    with pytest.raises(ConfigError):
        build_config(None, {"interval": "2:2"})
    with pytest.raises(ConfigError):
        build_config(None, {"q_values": []})
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        build_config(bad)
    with pytest.raises(ConfigError):
        build_config(None, {"Q": 1.0}).require_ball()
    assert build_config(None, {"Q": 10.0}).digest() != build_config(None, {"Q": 11.0}).digest()


def test_enumerate_writes_table_and_footer(tmp_path):
    code = main(["enumerate", "--Q", str(np.sqrt(5.0)), "--out", str(tmp_path), "--threads", "1"])
    assert code == EXIT_OK
    path = tmp_path / "enumeration.csv"
    assert path.read_text().splitlines()[0].startswith(f"# hypangles {settings.VERSION} command=enumerate config_hash=")
    table = read_table(path)
    assert list(table.columns) == ["a", "b", "c", "d", "norm_sq", "theta"]
    footer = _footer(path)
    assert footer["count"] == "10"
    assert footer["lattice"] == "psl2z"
    assert footer["complete"] == "True"


def test_outputs_are_reproducible(tmp_path, four_workers):
    args = ["enumerate", "--Q", "25"]
    assert main(args + ["--out", str(tmp_path / "a"), "--threads", "1"]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "a2"), "--threads", "1"]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "b"), "--threads", "3"]) == EXIT_OK
    first = _data_lines(tmp_path / "a" / "enumeration.csv")
    assert first == _data_lines(tmp_path / "a2" / "enumeration.csv")
    assert first == _data_lines(tmp_path / "b" / "enumeration.csv")

    args = ["paircorr", "--Q", "40", "--xi-max", "1.0", "--xi-step", "0.25", "--truncation", "30",
            "--tolerance", "5"]
    assert main(args + ["--out", str(tmp_path / "c"), "--threads", "1"]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "d"), "--threads", "4"]) == EXIT_OK
    assert _data_lines(tmp_path / "c" / "paircorr.csv") == _data_lines(tmp_path / "d" / "paircorr.csv")


def test_paircorr_and_restricted_outputs(tmp_path):
    args = ["paircorr", "--Q", "60", "--xi-max", "1.0", "--xi-step", "0.25",
            "--truncation", "30", "--interval", "0:pi", "--out", str(tmp_path)]
    assert main(args + ["--tolerance", "5.0"]) == EXIT_OK
    table = read_table(tmp_path / "paircorr.csv")
    assert list(table.columns) == ["xi", "N_Q", "R2_emp", "R2_theory", "g2_emp", "g2_theory", "abs_gap"]
    np.testing.assert_allclose(table["xi"], [0.25, 0.5, 0.75, 1.0])
    assert (table["R2_theory"] > 0).all()
    assert (tmp_path / "paircorr_long.csv").exists()
    restricted = read_table(tmp_path / "paircorr_restricted.csv")
    assert len(restricted) == len(table)
    assert (tmp_path / "paircorr_restricted_long.csv").exists()

    assert main(args + ["--tolerance", "0"]) == EXIT_CHECK_FAILED


def test_paircorr_on_trivial_lattice(tmp_path):
    code = main(["paircorr", "--lattice", "trivial", "--Q", "10", "--xi-max", "0.5",
                 "--xi-step", "0.25", "--out", str(tmp_path)])
    assert code == EXIT_OK
    table = read_table(tmp_path / "paircorr.csv")
    assert (table["N_Q"] == 0).all()


def test_paircorr_rejects_tiny_ball(tmp_path):
    assert main(["paircorr", "--Q", "1.0", "--out", str(tmp_path)]) == EXIT_ERROR


def test_density_table(tmp_path):
    code = main(["density", "--xi-max", "1.0", "--xi-step", "0.5", "--truncation", "30",
                 "--out", str(tmp_path)])
    assert code == EXIT_OK
    table = read_table(tmp_path / "density.csv")
    assert list(table.columns) == ["xi", "g2_theory", "R2_theory", "tail_bound", "R2_tail_bound"]
    long = read_table(tmp_path / "density_long.csv")
    assert set(long["series"]) == {"g2_theory", "R2_theory", "tail_bound", "R2_tail_bound"}


def test_volcheck_rows_and_seed(tmp_path):
    common = ["volcheck", "--M", "T", "--q-values", "20,40", "--xi-values", "0,1",
              "--samples", "20000", "--slack", "1000"]
    assert main(common + ["--seed", "1", "--out", str(tmp_path / "s1")]) == EXIT_OK
    assert main(common + ["--seed", "2", "--out", str(tmp_path / "s2")]) == EXIT_OK
    first = read_table(tmp_path / "s1" / "volcheck.csv")
    second = read_table(tmp_path / "s2" / "volcheck.csv")
    assert len(first) == 4

    empty = first[first["xi"] == 0]
    assert (empty["F_M"] == 0).all() and (empty["mc_mean"] == 0).all()
    assert (empty["quad_volume"] == 0).all()
    assert empty["passed"].all()

    for column in ("Q", "xi", "ell", "F_M", "closed_form", "quad_volume", "samples"):
        np.testing.assert_array_equal(first[column], second[column])
    assert not np.array_equal(first["mc_mean"][first["xi"] > 0], second["mc_mean"][second["xi"] > 0])
    long = read_table(tmp_path / "s1" / "volcheck_long.csv")
    assert list(long.columns) == ["Q", "xi", "series", "value"]


def test_volcheck_rejects_elements_of_K(tmp_path):
    assert main(["volcheck", "--M", "S", "--samples", "100", "--out", str(tmp_path)]) == EXIT_ERROR


def test_json_log_file_carries_run_tags(tmp_path):
    from loguru import logger

    log_file = tmp_path / "logs" / "run.jsonl"
    code = main(["density", "--xi-max", "0.5", "--xi-step", "0.5", "--truncation", "20",
                 "--out", str(tmp_path), "--log-file", str(log_file), "--log-json"])
    logger.remove()  # closes and flushes the file sink
    assert code == EXIT_OK
    records = [json.loads(line)["record"] for line in log_file.read_text().splitlines()]
    assert records
    assert {r["extra"]["command"] for r in records} >= {"density"}
    digests = {r["extra"]["config_hash"] for r in records} - {"-"}
    assert len(digests) == 1
