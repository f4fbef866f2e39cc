import math
import os
import subprocess
import sys
import numpy as np
import pytest

from magwp import ConfigError, GridMismatch, fixture_names, fixture_path, load_config
from magwp.config import config_from_text
from magwp.driver import compare, convergence, csv_header, read_csv, run

GOOD = """
schema = 1
experiment.id = trig2d
experiment.alpha = 0
eps = 0.001
d = 2
init.q0 = 1 1
init.p0 = 1 0
init.Q0_re = 1 0 0 1
init.Q0_im = 0 0 0 0
init.P0_re = 0 0 0 0
init.P0_im = 1 0 0 1
init.S0 = 0
time.t0 = 0
time.T = 0.1
time.tau = 0.01
scheme.name = symplectic2
quad.N = 7
output.every = 2
output.path = out.csv
"""


def cfg(text=GOOD, **overrides):
    lines = []
    for line in text.strip().splitlines():
        key = line.split("=")[0].strip()
        if key in overrides:
            val = overrides.pop(key)
            if val is None:
                continue
            lines.append(f"{key} = {val}")
        else:
            lines.append(line)
    for key, val in overrides.items():
        if val is not None:
            lines.append(f"{key} = {val}")
    return config_from_text("\n".join(lines))


class TestConfigParsing:
    def test_good_config(self):
        c = cfg()
        assert c.experiment_id == "trig2d"
        assert c.scheme == "symplectic2"
        assert c.n_steps == 10
        assert c.quad_N == 7

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown configuration key"):
            cfg(**{"bogus.key": "1"})

    def test_unknown_experiment_param(self):
        with pytest.raises(ConfigError, match="unknown parameter"):
            cfg(**{"experiment.omega": "1"})

    def test_missing_required(self):
        with pytest.raises(ConfigError, match="missing required key"):
            cfg(**{"time.T": None})

    def test_bad_schema_version(self):
        with pytest.raises(ConfigError, match="schema version"):
            cfg(schema="2")

    def test_tau_must_divide_span(self):
        with pytest.raises(ConfigError, match="divide"):
            cfg(**{"time.tau": "0.03"})

    def test_unknown_scheme(self):
        with pytest.raises(ConfigError, match="unknown scheme"):
            cfg(**{"scheme.name": "rk45"})

    def test_dimension_mismatch(self):
        with pytest.raises(ConfigError):
            cfg(d="3")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            config_from_text(GOOD + "\neps = 0.002\n")

    def test_comments_and_blanks_ignored(self):
        c = config_from_text(GOOD + "\n# a comment\n\n")
        assert c.eps == 0.001

    def test_invalid_initial_packet(self):
        with pytest.raises(ConfigError, match="initial packet"):
            cfg(**{"init.P0_im": "2 0 0 2"})

    def test_fixtures_parse(self):
        names = fixture_names()
        assert sorted(names) == [
            "penning",
            "sym_rotation",
            "sym_translation",
            "trig2d_alpha0",
            "trig2d_alpha05",
        ]
        for name in names:
            c = load_config(fixture_path(name))
            assert c.n_steps > 0


class TestRun:
    def test_zero_length_run_emits_initial_row(self, tmp_path):
        c = cfg(**{"time.T": "0", "output.path": str(tmp_path / "z.csv")})
        res = run(c)
        assert len(res.rows) == 1
        assert res.rows[0][0] == 0.0

    def test_row_count_and_grid(self, tmp_path):
        c = cfg(**{"output.path": str(tmp_path / "r.csv")})
        res = run(c)
        # initial row + every 2nd of 10 steps
        assert len(res.rows) == 1 + 5
        ts = [row[0] for row in res.rows]
        np.testing.assert_allclose(ts, [0.0, 0.02, 0.04, 0.06, 0.08, 0.1], atol=1e-15)

    def test_determinism_bitwise(self, tmp_path):
        pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
        run(cfg(**{"output.path": str(pa)}))
        run(cfg(**{"output.path": str(pb)}))
        assert pa.read_bytes() == pb.read_bytes()

    def test_csv_roundtrip(self, tmp_path):
        p = tmp_path / "c.csv"
        res = run(cfg(**{"output.path": str(p)}))
        header, rows = read_csv(p)
        assert header == csv_header(2)
        assert len(rows) == len(res.rows)
        for got, want in zip(rows, res.rows):
            for a, b in zip(got, want):
                if math.isnan(b):
                    assert math.isnan(a)
                else:
                    assert a == b  # 17 significant digits round-trip exactly

    def test_boris_schemes_run(self, tmp_path):
        mod_col = csv_header(2).index("boris_mod_residual")
        for scheme in ("boris", "boris_splitting"):
            c = cfg(**{"scheme.name": scheme, "output.path": str(tmp_path / f"{scheme}.csv")})
            res = run(c)
            assert len(res.rows) == 6
            last = list(res.rows[-1])
            del last[mod_col]  # nan for the nonlinear vector potential
            assert np.isfinite(last).all()

    def test_output_dir_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("MAGWP_OUTPUT_DIR", str(tmp_path))
        res = run(cfg(**{"output.path": "sub.csv"}))
        assert res.csv_path == tmp_path / "sub.csv"
        assert res.csv_path.exists()


class TestConvergence:
    def test_single_tau_single_row(self, tmp_path):
        c = cfg(**{"time.T": "0.2", "output.path": str(tmp_path / "x.csv")})
        rows = convergence(c, [0.01], tau_ref=0.0005)
        assert len(rows) == 1
        assert math.isnan(rows[0][3]) and math.isnan(rows[0][4])

    def test_orders_estimated(self, tmp_path):
        c = cfg(**{"time.T": "0.5", "output.path": str(tmp_path / "x.csv")})
        rows = convergence(c, [0.025, 0.0125], tau_ref=0.0005)
        assert rows[1][4] == pytest.approx(2.0, abs=0.5)  # state order ~ 2

    def test_taus_must_descend(self):
        with pytest.raises(ConfigError, match="descending"):
            convergence(cfg(), [0.01, 0.02])

    def test_tau_ref_bound(self):
        with pytest.raises(ConfigError, match="tau_ref"):
            convergence(cfg(), [0.01], tau_ref=0.005)


class TestCompare:
    def test_self_compare_identical_columns(self, tmp_path):
        a = cfg(**{"output.path": str(tmp_path / "a.csv")})
        b = cfg(**{"output.path": str(tmp_path / "b.csv")})
        header, rows = compare(a, b)
        n = (len(header) - 1) // 2
        for row in rows:
            assert row[1 : 1 + n] == row[1 + n :]

    def test_grid_mismatch(self, tmp_path):
        a = cfg(**{"output.path": str(tmp_path / "a.csv")})
        b = cfg(**{"time.tau": "0.005", "output.path": str(tmp_path / "b.csv")})
        with pytest.raises(GridMismatch):
            compare(a, b)

    def test_two_schemes_join(self, tmp_path):
        a = cfg(**{"output.path": str(tmp_path / "a.csv")})
        b = cfg(**{"scheme.name": "boris_splitting", "output.path": str(tmp_path / "b.csv")})
        header, rows = compare(a, b, out_path=tmp_path / "j.csv")
        assert (tmp_path / "j.csv").exists()
        assert header[0] == "t"
        assert any(c.startswith("a_") for c in header) and any(c.startswith("b_") for c in header)


class TestCli:
    def _cli(self, *args, env=None):
        e = dict(os.environ)
        if env:
            e.update(env)
        return subprocess.run(
            [sys.executable, "-m", "magwp.cli", *args],
            capture_output=True,
            text=True,
            env=e,
        )

    def test_list_builtins(self):
        r = self._cli("list-builtins")
        assert r.returncode == 0
        for bid in ("trig2d", "penning", "sym_rotation", "sym_translation", "harmonic"):
            assert bid in r.stdout

    def test_run_fixture_like_config(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text(GOOD)
        r = self._cli("run", str(p), env={"MAGWP_OUTPUT_DIR": str(tmp_path)})
        assert r.returncode == 0, r.stderr
        assert (tmp_path / "out.csv").exists()
        assert "max symplecticity residual" in r.stdout

    def test_config_error_exit_code(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text(GOOD.replace("schema = 1", "schema = 9"))
        r = self._cli("run", str(p))
        assert r.returncode == 2
        assert "error" in r.stderr

    def test_missing_file_exit_code(self):
        r = self._cli("run", "/nonexistent/path.cfg")
        assert r.returncode == 2

    def test_step_too_large_exit_code(self, tmp_path):
        big = GOOD.replace("experiment.id = trig2d", "experiment.id = linear_A")
        big = big.replace("experiment.alpha = 0", "")
        # tau ||M|| = 0.01 * 100 = 1 > kappa_rho
        p = tmp_path / "guard.cfg"
        p.write_text(big + "\nexperiment.MA = 0 -100 100 0\n")
        r = self._cli("run", str(p), env={"MAGWP_OUTPUT_DIR": str(tmp_path)})
        assert r.returncode == 3, (r.stdout, r.stderr)
        assert "step" in r.stderr.lower()

    def test_convergence_cli(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text(GOOD.replace("time.T = 0.1", "time.T = 0.2"))
        r = self._cli(
            "convergence", str(p), "--taus", "0.02,0.01", "--tau-ref", "0.001",
            env={"MAGWP_OUTPUT_DIR": str(tmp_path)},
        )
        assert r.returncode == 0, r.stderr
        assert (tmp_path / "trig2d_convergence.csv").exists()

    def test_compare_cli(self, tmp_path):
        pa = tmp_path / "a.cfg"
        pb = tmp_path / "b.cfg"
        pa.write_text(GOOD)
        pb.write_text(GOOD.replace("symplectic2", "boris_splitting"))
        r = self._cli("compare", str(pa), str(pb), env={"MAGWP_OUTPUT_DIR": str(tmp_path)})
        assert r.returncode == 0, r.stderr
        assert (tmp_path / "trig2d_compare.csv").exists()
