import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from miekerker.cli import main

FIG1A_CONFIG = """\
[sweep]
kind = moments
na = 0.9
emit_patterns = true

[point:first_kerker]
a1 = 1
b1 = 1

[point:generalized_kerker]
a1 = 1
b1 = 1
a2 = 1
b2 = 1
"""


def read_csv(path):
    lines = path.read_text().strip().splitlines()
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


class TestPattern:
    def test_writes_grid_and_cuts(self, tmp_path, capsys):
        rc = main(["pattern", "--a1", "1", "--b1", "1", "--out", str(tmp_path)])
        assert rc == 0
        header, rows = read_csv(tmp_path / "pattern.csv")
        assert header == ["theta_deg", "phi_deg", "intensity"]
        header, rows = read_csv(tmp_path / "pattern_cut_inplane.csv")
        assert header == ["theta_deg", "intensity_normalized"]
        vals = np.array([[float(v) for v in r] for r in rows])
        assert vals[:, 1].max() == pytest.approx(1.0)  # normalized contract
        assert vals[0, 1] == pytest.approx(1.0)        # Kerker: forward peak
        assert vals[-1, 1] == pytest.approx(0.0, abs=1e-15)

    def test_usage_error_exit_code(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["pattern", "--n-theta", "not_a_number"])
        assert exc.value.code == 1


class TestBudget:
    def test_prints_reference_chain(self, capsys, tmp_path):
        rc = main(["budget", "--qe", "0.7", "--tau0-ns", "31",
                   "--enhancement", "300", "--ce", "0.75", "--out", str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "22.5806 MHz" in out
        assert "6.77419 GHz" in out
        assert "5.08065 GHz" in out
        data = json.loads((tmp_path / "budget.json").read_text())
        assert data["collection_rate_hz"] == pytest.approx(5.08e9, rel=1e-2)


class TestG2Command:
    def test_closed_form_csv_schema(self, tmp_path):
        rc = main(["g2", "--tau0-ns", "31", "--pump-ratio", "0.1",
                   "--points", "50", "--out", str(tmp_path)])
        assert rc == 0
        header, rows = read_csv(tmp_path / "g2.csv")
        assert header == ["tau_ns", "g2_closed", "g2_mc", "mc_err"]
        assert len(rows) == 50
        assert float(rows[0][1]) == 0.0

    def test_mc_csv_filled(self, tmp_path):
        rc = main(["g2", "--tau0-ns", "31", "--pump-ratio", "0.1", "--mc",
                   "--points", "40", "--duration-ns", str(31e3 * 800),
                   "--seed", "3", "--out", str(tmp_path)])
        assert rc == 0
        header, rows = read_csv(tmp_path / "g2.csv")
        assert all(r[2] != "" for r in rows)


class TestDecompose:
    def test_oracle_sphere_roundtrip(self, tmp_path):
        rc = main(["decompose", "--oracle", "sphere", "--x", "0.8", "--m", "2.0",
                   "--voxels-per-radius", "8", "--out", str(tmp_path)])
        assert rc == 0
        data = json.loads((tmp_path / "moments.json").read_text())
        from miekerker.mie import mie_coefficients
        c = mie_coefficients(0.8, 2.0)
        a1 = complex(*data["mie_moments"]["a1"])
        assert abs(a1 - c.a[0]) < 0.05 * abs(c.a[0])
        header, rows = read_csv(tmp_path / "moments_row.csv")
        assert header[0] == "wavelength_nm"
        assert len(rows) == 1

    def test_grid_file_input(self, tmp_path):
        from conftest import oracle_sphere_grid
        from miekerker.fields import save_grid
        g = oracle_sphere_grid(0.5, 1.5, voxels_per_radius=6)
        f = tmp_path / "grid.csv"
        save_grid(g, f)
        rc = main(["decompose", "--grid", str(f), "--out", str(tmp_path)])
        assert rc == 0
        assert (tmp_path / "moments.json").exists()


class TestKerkerScan:
    def test_min_backscatter(self, tmp_path):
        rc = main(["kerker-scan", "--objective", "min-backscatter",
                   "--bounds", "a1=0:2,b1=0:2", "--out", str(tmp_path)])
        assert rc == 0
        data = json.loads((tmp_path / "kerker_scan.json").read_text())
        assert data["best"]["a1"] == pytest.approx(data["best"]["b1"], abs=1e-6)


class TestCe:
    def test_prints_value(self, capsys):
        rc = main(["ce", "--a1", "1", "--b1", "1", "--na", "0.9"])
        assert rc == 0
        out = capsys.readouterr().out
        assert out.startswith("collection_efficiency=")
        assert 0.0 < float(out.split("=")[1]) < 1.0


class TestDecayCommand:
    def test_mirror_mode(self, tmp_path):
        rc = main(["decay", "--mirror-distance", "100", "--wavelength", "628.3",
                   "--out", str(tmp_path)])
        assert rc == 0
        data = json.loads((tmp_path / "decay.json").read_text())
        from miekerker.emitter import mirror_decay_rate_exact
        kd = 2 * np.pi / 628.3 * 100.0
        assert data["relative_rate"] == pytest.approx(
            mirror_decay_rate_exact(kd), rel=0.03)


class TestSweep:
    def test_moment_sweep_fig1a_patterns(self, tmp_path):
        cfg = tmp_path / "sweep.ini"
        cfg.write_text(FIG1A_CONFIG)
        out = tmp_path / "run1"
        rc = main(["sweep", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        assert (out / "pattern_first_kerker_cut_inplane.csv").exists()
        assert (out / "pattern_generalized_kerker_cut_inplane.csv").exists()
        header, rows = read_csv(out / "results.csv")
        assert "directivity" in header
        by_label = {r[0]: dict(zip(header, r)) for r in rows}
        d1 = float(by_label["first_kerker"]["directivity"])
        dg = float(by_label["generalized_kerker"]["directivity"])
        assert dg > d1

    def test_manifest_roundtrip_reproduces_hashes(self, tmp_path):
        cfg = tmp_path / "sweep.ini"
        cfg.write_text(FIG1A_CONFIG)
        out1, out2 = tmp_path / "run1", tmp_path / "run2"
        assert main(["sweep", "--config", str(cfg), "--out", str(out1)]) == 0
        manifest = out1 / "sweep_manifest.json"
        assert main(["sweep", "--config", str(manifest), "--out", str(out2)]) == 0
        for name in json.loads(manifest.read_text())["outputs"]:
            h1 = hashlib.sha256((out1 / name).read_bytes()).hexdigest()
            h2 = hashlib.sha256((out2 / name).read_bytes()).hexdigest()
            assert h1 == h2, name
        m1 = json.loads(manifest.read_text())
        m2 = json.loads((out2 / "sweep_manifest.json").read_text())
        assert m1["config_hash"] == m2["config_hash"]

    def test_unknown_key_rejected_before_compute(self, tmp_path):
        cfg = tmp_path / "sweep.ini"
        cfg.write_text(FIG1A_CONFIG + "\nturbo_mode = yes\n")
        out = tmp_path / "run"
        rc = main(["sweep", "--config", str(cfg), "--out", str(out)])
        assert rc == 1
        assert not (out / "results.csv").exists()

    def test_empty_sweep_rejected(self, tmp_path):
        cfg = tmp_path / "sweep.ini"
        cfg.write_text("[sweep]\nkind = moments\n")
        assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path)]) == 1

    def test_geometry_sweep_with_dielectric_mock(self, tmp_path):
        # small all-dielectric antenna: fast convergence, exercises the
        # voxelize -> solve -> decompose -> pattern pipeline per point
        cfg = tmp_path / "geo.ini"
        cfg.write_text("""\
[sweep]
kind = geometry
na = 0.9

[geometry]
lengths = 40 80
diameter = 80
gap = 40
emitter_size = 30
wavelength = 680
resolution = 10
metal_permittivity_re = 6.25

[solver]
rtol = 1e-5
""")
        out = tmp_path / "run"
        rc = main(["sweep", "--config", str(cfg), "--out", str(out),
                   "--threads", "2"])
        assert rc == 0
        header, rows = read_csv(out / "results.csv")
        assert len(rows) == 2
        assert "C_qe" in header and "ce" in header
        assert (out / "sweep_moments_vs_length.csv").exists()
        assert (out / "sweep_directivity_ce_vs_length.csv").exists()

    def test_partial_failure_exit_code(self, tmp_path, capsys):
        # one of two points has an impossible geometry: exit code 3,
        # the healthy point still lands in results.csv
        cfg = tmp_path / "geo.ini"
        cfg.write_text("""\
[sweep]
kind = geometry

[geometry]
lengths = -5 40
diameter = 80
gap = 40
wavelength = 680
resolution = 10
metal_permittivity_re = 6.25
""")
        out = tmp_path / "run"
        rc = main(["sweep", "--config", str(cfg), "--out", str(out)])
        assert rc == 3
        header, rows = read_csv(out / "results.csv")
        assert len(rows) == 1
        manifest = json.loads((out / "sweep_manifest.json").read_text())
        assert len(manifest["points_failed"]) == 1

    def test_json_config_accepted(self, tmp_path):
        cfg = tmp_path / "sweep.json"
        cfg.write_text(json.dumps({
            "sweep": {"kind": "moments", "na": "0.9"},
            "point:dipole": {"a1": "1"},
        }))
        out = tmp_path / "run"
        assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
        header, rows = read_csv(out / "results.csv")
        assert len(rows) == 1


class TestEntryPoint:
    def test_console_script_runs(self):
        proc = subprocess.run([sys.executable, "-m", "miekerker.cli", "--version"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert proc.stdout.strip() == "0.1.0"

    def test_compute_failure_exit_code(self, tmp_path):
        rc = main(["decompose", "--grid", str(tmp_path / "missing.csv"),
                   "--out", str(tmp_path)])
        assert rc == 2
