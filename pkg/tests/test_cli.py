"""End-to-end CLI behaviour: outputs, determinism, exit codes."""

import json
import math

from conformal_hodge import serialization as ser
from conformal_hodge.cli import main, parse_series_spec
from conformal_hodge.series import BivariateField, HolomorphicSeries, monomial


def write_field(path, field):
    ser.write_json(path, ser.field_to_json(field))
    return str(path)


class TestSeriesSpecParser:
    def test_plain_monomial(self):
        assert parse_series_spec("z") == HolomorphicSeries([0, 1.0])

    def test_scalar(self):
        assert parse_series_spec("0.5") == HolomorphicSeries([0.5])
        assert parse_series_spec("0.1+0.2j") == HolomorphicSeries([0.1 + 0.2j])

    def test_terms(self):
        got = parse_series_spec("1 + 0.5*z^2")
        assert got == HolomorphicSeries([1.0, 0, 0.5])
        got2 = parse_series_spec("(0.3+0.1j)*z")
        assert got2 == HolomorphicSeries([0, 0.3 + 0.1j])

    def test_json_path(self, tmp_path):
        p = tmp_path / "xi.json"
        ser.write_json(p, ser.series_to_json(HolomorphicSeries([1, 2j])))
        assert parse_series_spec(str(p)) == HolomorphicSeries([1, 2j])


class TestProject:
    def test_disk_monomial_rule(self, tmp_path):
        fin = write_field(tmp_path / "f.json", monomial(1, 1))
        out = tmp_path / "o.json"
        assert main(["project", "--domain", "disk", "--in", fin, "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["terms"] == [{"m": 0, "n": 0, "re": 0.5, "im": 0.0}]

    def test_deterministic_output(self, tmp_path):
        fin = write_field(tmp_path / "f.json", BivariateField({(2, 1): 1 + 2j, (0, 1): -1j}))
        o1, o2 = tmp_path / "a.json", tmp_path / "b.json"
        main(["project", "--in", fin, "--out", str(o1)])
        main(["project", "--in", fin, "--out", str(o2)])
        assert o1.read_bytes() == o2.read_bytes()

    def test_roundtrip_reparses_equal(self, tmp_path):
        fin = write_field(tmp_path / "f.json", BivariateField({(3, 1): 0.25j}))
        out = tmp_path / "o.json"
        main(["project", "--in", fin, "--out", str(out)])
        field = ser.field_from_json(json.loads(out.read_text()))
        again = tmp_path / "o2.json"
        main(["project", "--in", str(out), "--out", str(again)])
        assert ser.field_from_json(json.loads(again.read_text())) == field

    def test_mapped_projection(self, tmp_path):
        mp = tmp_path / "map.json"
        from conformal_hodge.mapping import ConformalMap

        ser.write_json(mp, ser.map_to_json(ConformalMap(HolomorphicSeries([0, 2.0]))))
        fin = write_field(tmp_path / "f.json", monomial(1, 1, 4.0))
        out = tmp_path / "o.json"
        code = main(["project", "--domain", f"map:{mp}", "--in", fin,
                     "--out", str(out), "--degree", "3"])
        assert code == 0
        got = ser.series_from_json(json.loads(out.read_text()))
        assert abs(got.coefficient(0) - 2.0) < 1e-10

    def test_annulus_incompatible(self, tmp_path):
        fin = write_field(tmp_path / "f.json", monomial(1, 0))
        assert main(["project", "--domain", "annulus:0.5", "--in", fin]) == 4

    def test_torus_projection(self, tmp_path, capsys):
        from conformal_hodge.torus import TorusField

        f = TorusField.from_terms(
            {(0, 0): 2.0, (1, 0): 0.5, (-1, 0): 0.5}, {(0, 0): -1.0}, band_limit=1
        )
        p = tmp_path / "t.json"
        ser.write_json(p, ser.torus_to_json(f))
        assert main(["project", "--domain", "torus", "--in", str(p)]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["c_theta"] == 2.0 and data["c_phi"] == -1.0
        residual = ser.torus_from_json(data["residual"])
        assert residual.mean() == (0.0, 0.0)


class TestCatalogAndClassify:
    def test_catalog_torus(self, capsys):
        assert main(["catalog", "--domain", "torus"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["dims"]["A3"] == "finite(2)"

    def test_catalog_unknown(self):
        assert main(["catalog", "--domain", "klein"]) == 4

    def test_classify_disk(self, tmp_path, capsys):
        fin = write_field(tmp_path / "f.json", monomial(1, 0))
        assert main(["classify", "--domain", "disk", "--in", fin]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["labels"] == ["A6"]

    def test_classify_annulus_pole(self, tmp_path, capsys):
        blob = {
            "band_limit": 1,
            "r_in": 0.5,
            "terms": [{"m": -1, "n": 0, "re": 1.0, "im": 0.0}],
        }
        p = tmp_path / "f.json"
        ser.write_json(p, blob)
        assert main(["classify", "--domain", "annulus:0.5", "--in", str(p)]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["a5_coeff"] == 1.0 and data["a4_coeff"] == 0.0
        assert data["labels"] == ["A4"]  # flat image spans the d ln(x^2+y^2) line


class TestDecomposeAdjoint:
    def test_decompose_json_contract(self, tmp_path):
        fin = write_field(tmp_path / "f.json", monomial(0, 1))
        out = tmp_path / "dec.json"
        assert main(["decompose", "--in", fin, "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert set(data) == {"kind", "conformal", "F", "G", "residual_norm", "orthogonality"}
        F = ser.field_from_json(data["F"])
        assert F == BivariateField({(1, 1): 0.5, (0, 0): -0.5})
        assert len(data["orthogonality"]) == 3

    def test_decompose_helmholtz_kind(self, tmp_path):
        fin = write_field(tmp_path / "f.json", monomial(1, 0, 1j))
        out = tmp_path / "dec.json"
        assert main(["decompose", "--in", fin, "--kind", "helmholtz",
                     "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["kind"] == "helmholtz"
        assert ser.field_from_json(data["conformal"]) == monomial(1, 0, 1j)

    def test_adjoint_disk(self, tmp_path, capsys):
        fin = write_field(tmp_path / "one.json", monomial(0, 0))
        assert main(["adjoint", "--in", fin]) == 0
        got = ser.series_from_json(json.loads(capsys.readouterr().out))
        assert got == HolomorphicSeries([0, 2.0])

    def test_adjoint_mapped(self, tmp_path, capsys):
        from conformal_hodge.mapping import ConformalMap

        mp = tmp_path / "map.json"
        ser.write_json(mp, ser.map_to_json(ConformalMap(HolomorphicSeries([0, 2.0]))))
        fin = write_field(tmp_path / "one.json", monomial(0, 0))
        assert main(["adjoint", "--map", str(mp), "--in", fin, "--degree", "3"]) == 0
        got = ser.series_from_json(json.loads(capsys.readouterr().out))
        assert abs(got.coefficient(1) - 0.5) < 1e-12


class TestDynamicsCommands:
    def test_wave_csv_and_summary(self, tmp_path):
        out = tmp_path / "traj.csv"
        summary = tmp_path / "summary.json"
        code = main([
            "wave", "--c", "0", "--xi0", "z", "--dt", "1e-3", "--steps", "10000",
            "--out", str(out), "--summary", str(summary),
        ])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        header = lines[0].split(",")
        assert header[0] == "t" and "xi1_re" in header and "I_1" in header
        col = header.index("xi1_re")
        for row in lines[1:]:
            vals = [float(v) for v in row.split(",")]
            assert abs(vals[col] - math.cos(math.sqrt(2.0) * vals[0])) < 1e-4
        sdata = json.loads(summary.read_text())
        assert sdata["first_integral_max_rel_drift"] <= 1e-6

    def test_wave_halve_dt_reports_order(self, tmp_path):
        summary = tmp_path / "s.json"
        out = tmp_path / "t.csv"
        code = main([
            "wave", "--c", "1", "--xi0", "z", "--xidot0", "0.3", "--dt", "2e-3",
            "--steps", "500", "--halve-dt", "--out", str(out), "--summary", str(summary),
        ])
        assert code == 0
        order = json.loads(summary.read_text())["order"]
        assert 1.8 <= order <= 2.2

    def test_wave_requires_disk(self, tmp_path):
        assert main(["wave", "--domain", "torus", "--xi0", "z",
                     "--dt", "1e-3", "--steps", "10"]) == 4

    def test_wave_rejects_bad_dt(self):
        assert main(["wave", "--xi0", "z", "--dt", "-1", "--steps", "10"]) == 2

    def test_stationary(self, tmp_path):
        out = tmp_path / "st.json"
        code = main(["stationary", "--c", "-2", "--init", "0.9*z",
                     "--degree", "4", "--out", str(out)])
        assert code == 0
        data = json.loads(out.read_text())
        assert data["converged"] is True
        assert data["residual_norm"] <= 1e-10

    def test_stationary_nonconvergence_exit(self, tmp_path):
        code = main(["stationary", "--c", "3", "--init", "z", "--max-iter", "0"])
        assert code == 3

    def test_geodesic(self, tmp_path):
        out = tmp_path / "g.csv"
        summary = tmp_path / "g.json"
        code = main([
            "geodesic", "--xi0", "0.1", "--dt", "1e-2", "--steps", "50",
            "--degree", "8", "--out", str(out), "--summary", str(summary),
        ])
        assert code == 0
        sdata = json.loads(summary.read_text())
        assert sdata["energy_rel_drift"] <= 1e-6
        header = out.read_text().splitlines()[0].split(",")
        assert "energy" in header and "min_deriv" in header

    def test_geodesic_halve_dt_order(self, tmp_path):
        summary = tmp_path / "g.json"
        code = main([
            "geodesic", "--xi0", "0.05+0.08*z", "--dt", "0.1", "--steps", "10",
            "--degree", "10", "--halve-dt",
            "--out", str(tmp_path / "g.csv"), "--summary", str(summary),
        ])
        assert code == 0
        order = json.loads(summary.read_text())["order"]
        assert 3.5 <= order <= 4.5


class TestConfigAndFlags:
    def test_config_json_supplies_numeric_values(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        ser.write_json(cfg, {"dt": 1e-2, "steps": 20, "sample_stride": 10})
        out = tmp_path / "t.csv"
        summary = tmp_path / "s.json"
        code = main(["wave", "--xi0", "z", "--config", str(cfg),
                     "--out", str(out), "--summary", str(summary)])
        assert code == 0
        assert json.loads(summary.read_text())["steps"] == 20

    def test_explicit_flags_beat_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        ser.write_json(cfg, {"dt": 1e-2, "steps": 20})
        summary = tmp_path / "s.json"
        out = tmp_path / "t.csv"
        main(["wave", "--xi0", "z", "--config", str(cfg), "--steps", "5",
              "--out", str(out), "--summary", str(summary)])
        assert json.loads(summary.read_text())["steps"] == 5

    def test_unknown_config_key_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        ser.write_json(cfg, {"dx": 1.0})
        assert main(["wave", "--xi0", "z", "--config", str(cfg)]) == 2

    def test_missing_dt_reported(self):
        assert main(["wave", "--xi0", "z", "--steps", "5"]) == 2

    def test_map_flag_shorthand(self, tmp_path):
        from conformal_hodge.mapping import ConformalMap

        mp = tmp_path / "map.json"
        ser.write_json(mp, ser.map_to_json(ConformalMap(HolomorphicSeries([0, 2.0]))))
        fin = write_field(tmp_path / "f.json", monomial(1, 1, 4.0))
        out = tmp_path / "o.json"
        code = main(["project", "--map", str(mp), "--in", fin,
                     "--out", str(out), "--degree", "3"])
        assert code == 0
        got = ser.series_from_json(json.loads(out.read_text()))
        assert abs(got.coefficient(0) - 2.0) < 1e-10

    def test_r_in_flag_shorthand(self, tmp_path, capsys):
        blob = {"band_limit": 1, "r_in": 0.5,
                "terms": [{"m": -1, "n": 0, "re": 0.0, "im": 1.0}]}
        p = tmp_path / "f.json"
        ser.write_json(p, blob)
        assert main(["classify", "--r-in", "0.5", "--in", str(p)]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["a4_coeff"] == 1.0
        assert data["labels"] == ["A5"]

    def test_wave_csv_deterministic(self, tmp_path):
        o1, o2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (o1, o2):
            main(["wave", "--xi0", "0.3*z + 0.1", "--dt", "1e-2", "--steps", "25",
                  "--out", str(out), "--summary", str(tmp_path / "s.json")])
        assert o1.read_bytes() == o2.read_bytes()

    def test_threads_env(self, monkeypatch, capsys, tmp_path):
        import conformal_hodge.cli as cli

        monkeypatch.setenv("CONFORMAL_HODGE_THREADS", "4")
        main(["catalog", "--domain", "disk", "--out", str(tmp_path / "c.json")])
        assert cli.MAX_THREADS == 4
        monkeypatch.setenv("CONFORMAL_HODGE_THREADS", "zero")
        main(["catalog", "--domain", "disk", "--out", str(tmp_path / "c.json")])
        assert "ignoring invalid" in capsys.readouterr().err


class TestSelfTest:
    def test_check_passes(self, capsys):
        assert main(["check"]) == 0
        out = capsys.readouterr().out
        assert "suites passed" in out and "FAIL" not in out

    def test_fault_injection_fails_adjoint_suite(self, capsys):
        assert main(["check", "--inject-inner-fault", "1e-3"]) == 1
        out = capsys.readouterr().out
        assert "FAIL" in out and "adjoint identity" in out

    def test_degraded_quadrature_relaxed_threshold(self, capsys):
        assert main(["check", "--quadrature", "8x16"]) == 0
        out = capsys.readouterr().out
        assert "degraded quadrature" in out


class TestErrorPaths:
    def test_missing_input_file(self):
        assert main(["project", "--in", "/nonexistent/f.json"]) == 2

    def test_malformed_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        assert main(["project", "--in", str(p)]) == 2

    def test_bad_domain_string(self, tmp_path):
        fin = write_field(tmp_path / "f.json", monomial(0, 0))
        assert main(["project", "--domain", "sphere:1", "--in", fin]) == 2

    def test_bad_degree_range(self, tmp_path):
        fin = write_field(tmp_path / "f.json", monomial(0, 0))
        assert main(["project", "--in", fin, "--degree", "65"]) == 2

    def test_argparse_error_code(self):
        assert main(["definitely-not-a-command"]) == 2
