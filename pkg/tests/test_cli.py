"""CLI: config parsing, grid expansion, subcommands, exit codes, outputs."""

import json

import numpy as np
import pytest

from countcombine import CopulaFamily, Method, REPORT_COLUMNS
from countcombine.cli import (
    ConfigError,
    bundled_config_path,
    expand_cells,
    main,
    parse_config,
    serialize_config,
)

TYPE1_TEMPLATE = """\
[experiment]
name = unit_type1
kind = type1
target = unit test grid
family = {family}
{theta_line}
m = 3, 4
r = 2, 5
p = 0.5
n = 6
M = 150
alphas = 0.05
seed = 99
methods = CCT, Fisher, MinP
"""

POWER_TEMPLATE = """\
[experiment]
name = unit_power
kind = power
family = independence
m = 4
r = 3
r_alt = 5
p = 0.5
n_grid = 5, 12
M = 150
alphas = 0.05
seed = 99
"""


def write_type1(tmp_path, family="independence", theta_line=""):
    path = tmp_path / "unit_type1.ini"
    path.write_text(TYPE1_TEMPLATE.format(family=family, theta_line=theta_line))
    return path


def write_power(tmp_path, **replacements):
    text = POWER_TEMPLATE
    for old, new in replacements.items():
        text = text.replace(old, new)
    path = tmp_path / "unit_power.ini"
    path.write_text(text)
    return path


class TestParseConfig:
    def test_bundled_configs_parse(self):
        for name, kind in [
            ("table1_independence", "type1"),
            ("table2_clayton", "type1"),
            ("table3_gumbel", "type1"),
            ("fig2_independence", "power"),
            ("fig2_clayton_theta3", "power"),
            ("fig2_gumbel_theta3", "power"),
        ]:
            spec = parse_config(bundled_config_path(name))
            assert spec.name == name
            assert spec.kind == kind
            assert spec.target  # reproduction target is always recorded

    def test_round_trip(self, tmp_path):
        for name in ("table1_independence", "table3_gumbel", "fig2_clayton_theta3"):
            spec = parse_config(bundled_config_path(name))
            rewritten = tmp_path / f"{name}.ini"
            rewritten.write_text(serialize_config(spec))
            assert parse_config(rewritten) == spec

    def test_missing_key(self, tmp_path):
        path = tmp_path / "broken.ini"
        path.write_text("[experiment]\nname = x\nkind = type1\n")
        with pytest.raises(ConfigError, match="missing required key"):
            parse_config(path)

    def test_unknown_key_is_anchored(self, tmp_path):
        path = write_type1(tmp_path)
        path.write_text(path.read_text() + "bogus = 1\n")
        with pytest.raises(ConfigError, match=r"unit_type1\.ini:\d+: bogus"):
            parse_config(path)

    def test_clayton_requires_positive_theta(self, tmp_path):
        path = write_type1(tmp_path, family="clayton", theta_line="theta = 0")
        with pytest.raises(ConfigError, match="theta > 0"):
            parse_config(path)

    def test_copula_requires_theta_key(self, tmp_path):
        path = write_type1(tmp_path, family="clayton")
        with pytest.raises(ConfigError, match="explicit theta"):
            parse_config(path)

    def test_empty_n_grid(self, tmp_path):
        path = write_power(tmp_path, **{"n_grid = 5, 12": "n_grid ="})
        with pytest.raises(ConfigError, match="n_grid"):
            parse_config(path)


class TestExpandCells:
    def test_type1_grid_order_and_ids(self, tmp_path):
        spec = parse_config(write_type1(tmp_path))
        cells = expand_cells(spec)
        assert [c.experiment_id for c in cells] == [
            "unit_type1:m=3,r=2",
            "unit_type1:m=3,r=5",
            "unit_type1:m=4,r=2",
            "unit_type1:m=4,r=5",
        ]
        assert all(c.dataset.copula is None for c in cells)
        assert len({c.seed for c in cells}) == len(cells)

    def test_theta_expansion(self, tmp_path):
        spec = parse_config(write_type1(tmp_path, "clayton", "theta = 1, 3"))
        cells = expand_cells(spec)
        assert len(cells) == 2 * 2 * 2
        assert cells[0].dataset.copula.family is CopulaFamily.CLAYTON
        assert {c.dataset.copula.theta for c in cells} == {1.0, 3.0}

    def test_power_cells(self, tmp_path):
        spec = parse_config(write_power(tmp_path))
        cells = expand_cells(spec)
        assert [c.dataset.n for c in cells] == [5, 12]
        marginals = cells[0].dataset.marginals
        assert [mp.r for mp in marginals] == [3, 3, 3, 5]
        np.testing.assert_allclose(cells[0].null.mu0, 3.0)

    def test_seed_override(self, tmp_path):
        spec = parse_config(write_type1(tmp_path))
        assert expand_cells(spec, seed_override=1)[0].seed != expand_cells(spec)[0].seed
        seeds_again = [c.seed for c in expand_cells(spec, seed_override=1)]
        assert [c.seed for c in expand_cells(spec, seed_override=1)] == seeds_again

    def test_bundled_table1_shape(self):
        cells = expand_cells(parse_config(bundled_config_path("table1_independence")))
        assert len(cells) == 9
        assert all(c.replications == 10000 for c in cells)
        assert all(c.alpha_levels == (0.05, 0.01) for c in cells)

    def test_bundled_power_structure(self):
        cells = expand_cells(parse_config(bundled_config_path("fig2_independence")))
        assert len(cells) == 10
        marginals = cells[0].dataset.marginals
        assert [mp.r for mp in marginals] == [10] * 9 + [11]
        np.testing.assert_allclose(cells[0].null.mu0, 10.0)
        np.testing.assert_allclose(cells[0].null.var0, 20.0)


class TestType1Command:
    def test_end_to_end_csv(self, tmp_path, capsys):
        config = write_type1(tmp_path)
        out = tmp_path / "results"
        assert main(["type1", "--config", str(config), "--out", str(out)]) == 0
        csv_path = out / "unit_type1.csv"
        lines = csv_path.read_text().splitlines()
        meta = [line for line in lines if line.startswith("#")]
        assert "# name: unit_type1" in meta
        assert "# target: unit test grid" in meta
        header = [line for line in lines if not line.startswith("#")][0]
        assert header == ",".join(REPORT_COLUMNS)
        rows = [line for line in lines if not line.startswith("#")][1:]
        assert len(rows) == 4 * 3  # cells x methods

    def test_overwrite_protection(self, tmp_path):
        config = write_type1(tmp_path)
        out = tmp_path / "results"
        assert main(["type1", "--config", str(config), "--out", str(out)]) == 0
        assert main(["type1", "--config", str(config), "--out", str(out)]) == 1
        assert main(["type1", "--config", str(config), "--out", str(out), "--overwrite"]) == 0

    def test_parallelism_byte_identical(self, tmp_path):
        config = write_type1(tmp_path)
        for workers, out in [("1", tmp_path / "serial"), ("3", tmp_path / "parallel")]:
            assert main([
                "type1", "--config", str(config), "--out", str(out),
                "--parallelism", workers,
            ]) == 0
        serial = (tmp_path / "serial" / "unit_type1.csv").read_bytes()
        parallel = (tmp_path / "parallel" / "unit_type1.csv").read_bytes()
        assert serial == parallel

    def test_rerun_byte_identical(self, tmp_path):
        config = write_type1(tmp_path)
        out = tmp_path / "results"
        assert main(["type1", "--config", str(config), "--out", str(out)]) == 0
        first = (out / "unit_type1.csv").read_bytes()
        assert main(["type1", "--config", str(config), "--out", str(out), "--overwrite"]) == 0
        assert (out / "unit_type1.csv").read_bytes() == first

    def test_seed_override_changes_rates(self, tmp_path):
        config = write_type1(tmp_path)
        a = tmp_path / "a"
        b = tmp_path / "b"
        assert main(["type1", "--config", str(config), "--out", str(a), "--seed", "123"]) == 0
        assert main(["type1", "--config", str(config), "--out", str(b), "--seed", "456"]) == 0
        assert (a / "unit_type1.csv").read_text() != (b / "unit_type1.csv").read_text()

    def test_json_format(self, tmp_path):
        config = write_type1(tmp_path)
        out = tmp_path / "results"
        assert main([
            "type1", "--config", str(config), "--out", str(out), "--format", "json",
        ]) == 0
        payload = json.loads((out / "unit_type1.json").read_text())
        assert payload["name"] == "unit_type1"
        assert payload["kind"] == "type1"
        assert len(payload["rows"]) == 12
        assert set(payload["rows"][0]) == set(REPORT_COLUMNS)

    def test_bad_config_exit_code(self, tmp_path):
        path = write_type1(tmp_path, family="clayton", theta_line="theta = 0")
        assert main(["type1", "--config", str(path), "--out", str(tmp_path / "x")]) == 2

    def test_kind_mismatch(self, tmp_path):
        config = write_power(tmp_path)
        assert main(["type1", "--config", str(config), "--out", str(tmp_path / "x")]) == 2

    def test_missing_config_file(self, tmp_path):
        assert main(["type1", "--config", str(tmp_path / "nope.ini"), "--out", str(tmp_path)]) == 2


class TestPowerCommand:
    def test_end_to_end(self, tmp_path):
        config = write_power(tmp_path)
        out = tmp_path / "results"
        assert main(["power", "--config", str(config), "--out", str(out)]) == 0
        lines = (out / "unit_power.csv").read_text().splitlines()
        rows = [line for line in lines if not line.startswith("#")][1:]
        assert len(rows) == 2 * 3  # n-grid x methods
        assert all(",11," not in row for row in rows)  # r column reports the null r


class TestCombineCommand:
    def test_cct_neutral(self, capsys):
        assert main(["combine", "--method", "cct", "0.5", "0.5"]) == 0
        out = capsys.readouterr().out
        assert "method CCT" in out
        assert "statistic 0" in out
        assert "pvalue 0.5" in out

    def test_minp(self, capsys):
        assert main(["combine", "--method", "minp", "0.2", "0.5", "0.9"]) == 0
        assert "pvalue 0.488" in capsys.readouterr().out

    def test_fisher(self, capsys):
        assert main(["combine", "--method", "fisher", "0.5", "0.5"]) == 0
        assert "pvalue 0.596574" in capsys.readouterr().out

    def test_weights(self, capsys):
        assert main([
            "combine", "--method", "cct", "--weights", "0.5", "0.5", "--", "0.01", "0.9",
        ]) == 0
        assert "pvalue 0.0221132" in capsys.readouterr().out

    def test_file_input(self, tmp_path, capsys):
        path = tmp_path / "p.txt"
        path.write_text("0.2\n0.5 0.9\n")
        assert main(["combine", "--method", "minp", "--file", str(path)]) == 0
        assert "pvalue 0.488" in capsys.readouterr().out

    def test_malformed_value_exits_2(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["combine", "--method", "cct", "not-a-number"])
        assert excinfo.value.code == 2

    def test_out_of_range_exits_2(self):
        assert main(["combine", "--method", "cct", "1.5"]) == 2

    def test_unknown_method_exits_2(self):
        assert main(["combine", "--method", "stouffer", "0.5"]) == 2

    def test_no_values_exits_2(self):
        assert main(["combine", "--method", "cct"]) == 2


class TestSampleCommand:
    def test_writes_counts(self, tmp_path):
        config = write_type1(tmp_path)
        out = tmp_path / "results"
        assert main(["sample", "--config", str(config), "--out", str(out)]) == 0
        rows = (out / "unit_type1.tsv").read_text().strip().split("\n")
        assert len(rows) == 6
        assert all(len(row.split("\t")) == 3 for row in rows)
        assert all(int(tok) >= 0 for row in rows for tok in row.split("\t"))

    def test_deterministic(self, tmp_path):
        config = write_type1(tmp_path)
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["sample", "--config", str(config), "--out", str(a)]) == 0
        assert main(["sample", "--config", str(config), "--out", str(b)]) == 0
        assert (a / "unit_type1.tsv").read_bytes() == (b / "unit_type1.tsv").read_bytes()
