import json
import math

import numpy as np
import pytest

import npqec.qec
from npqec import cli


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def read_csv(path):
    comments, rows = [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh.read().splitlines():
            if line.startswith("#"):
                comments.append(line)
            else:
                rows.append(line.split(","))
    return comments, rows[0], rows[1:]


def dnp_config(**extra):
    payload = {
        "code": {
            "type": "gaussian",
            "s": 2,
            "p": 1,
            "q": 2,
            "amplitude": {"alpha": 1.4142135623730951, "r": 0.0},
        },
        "noise": {"gamma_t": 0.005, "kappa_t": 0.001},
    }
    payload.update(extra)
    return payload


class TestConfigSchema:
    def test_malformed_json_exits_2_without_output(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{"code": nonsense', encoding="utf-8")
        out = tmp_path / "out.csv"
        code = cli.main(["fidelity", "--config", str(path), "--out", str(out)])
        assert code == 2
        assert not out.exists()
        assert "config error" in capsys.readouterr().err

    def test_unknown_top_level_key_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, dnp_config(surprise=1))
        assert cli.main(["codes", "--config", cfg]) == 2
        assert "surprise" in capsys.readouterr().err

    def test_unknown_amplitude_key_rejected(self, tmp_path, capsys):
        payload = dnp_config()
        payload["code"]["amplitude"]["beta"] = 2.0
        cfg = write_config(tmp_path, payload)
        assert cli.main(["codes", "--config", cfg]) == 2
        assert "beta" in capsys.readouterr().err

    def test_missing_code_block_rejected(self, tmp_path):
        cfg = write_config(tmp_path, {"noise": {"gamma_t": 0.0, "kappa_t": 0.0}})
        assert cli.main(["codes", "--config", cfg]) == 2

    def test_sweep_needs_exactly_one_axis(self, tmp_path):
        cfg = write_config(
            tmp_path, dnp_config(sweep={"nbar": [4.0], "alpha": [2.0]})
        )
        assert cli.main(["fidelity", "--config", cfg]) == 2
        cfg = write_config(tmp_path, dnp_config(sweep={}), name="empty.json")
        assert cli.main(["fidelity", "--config", cfg]) == 2

    def test_alpha_sweep_rejected_for_binomial(self, tmp_path):
        payload = dnp_config(sweep={"alpha": [2.0]})
        payload["code"] = {
            "type": "binomial", "s": 4, "p": 0, "q": 1, "amplitude": {"K": 3},
        }
        cfg = write_config(tmp_path, payload)
        assert cli.main(["fidelity", "--config", cfg]) == 2

    def test_off_ladder_binomial_nbar_rejected(self, tmp_path):
        payload = dnp_config(sweep={"nbar": [5.0]})
        payload["code"] = {
            "type": "binomial", "s": 4, "p": 0, "q": 1, "amplitude": {},
        }
        cfg = write_config(tmp_path, payload)
        assert cli.main(["fidelity", "--config", cfg]) == 2

    def test_truncation_dim_excludes_auto(self, tmp_path):
        cfg = write_config(
            tmp_path, dnp_config(truncation={"dim": 40, "auto": True})
        )
        assert cli.main(["codes", "--config", cfg]) == 2

    def test_distance_must_be_whole_hops(self, tmp_path):
        cfg = write_config(
            tmp_path,
            dnp_config(repeater={
                "spacing_km": 3.0, "eps": 0.01, "h": 0.1,
                "distances_km": [100.0],
            }),
        )
        assert cli.main(["repeater", "--config", cfg]) == 2

    def test_qec_block_validated(self, tmp_path):
        cfg = write_config(
            tmp_path, dnp_config(qec={"G": 0, "L": 3, "phase_points": 8})
        )
        assert cli.main(["codes", "--config", cfg]) == 2


class TestCodesReport:
    def test_diamond_example_metrics(self, tmp_path, capsys):
        payload = dnp_config()
        payload["code"]["amplitude"]["alpha"] = math.sqrt(3.0)
        cfg = write_config(tmp_path, payload)
        out = tmp_path / "report.json"
        assert cli.main(["codes", "--config", cfg, "--out", str(out)]) == 0
        text = capsys.readouterr().out
        assert "d_N         4" in text
        report = json.loads(out.read_text())
        assert report["d_N"] == 4
        assert abs(report["d_phi"] - math.pi / 2) < 1e-12
        assert abs(report["nbar"] - 6.0) < 1e-3
        assert report["lattice"] == "Diam."
        assert report["syndrome_row"] == "(k, m f pi/s + phi_e)"
        levels = [lvl for lvl, _ in report["amplitudes"]]
        assert levels == sorted(levels)
        assert all(lvl % 2 == 0 for lvl in levels)

    def test_rectangular_syndrome_column(self, tmp_path, capsys):
        payload = dnp_config()
        payload["code"] = {
            "type": "binomial", "s": 4, "p": 0, "q": 1, "amplitude": {"K": 3},
        }
        cfg = write_config(tmp_path, payload)
        assert cli.main(["codes", "--config", cfg]) == 0
        text = capsys.readouterr().out
        assert "(k, phi_e)" in text
        assert "Rect." in text

    def test_oblique_syndrome_column(self, tmp_path, capsys):
        payload = dnp_config()
        payload["code"] = {
            "type": "gaussian", "s": 1, "p": 1, "q": 4,
            "amplitude": {"alpha": 2.0, "r": 0.0},
        }
        cfg = write_config(tmp_path, payload)
        assert cli.main(["codes", "--config", cfg]) == 0
        text = capsys.readouterr().out
        assert "(0, m f pi + phi_e)" in text
        assert "Obl." in text


class TestFidelitySweep:
    def test_same_seed_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path, dnp_config(sweep={"nbar": [4.0]}))
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert cli.main(["fidelity", "--config", cfg, "--out", str(out1)]) == 0
        assert cli.main(["fidelity", "--config", cfg, "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_jobs_do_not_change_bytes(self, tmp_path):
        cfg = write_config(tmp_path, dnp_config(sweep={"nbar": [4.0, 5.0, 6.0]}))
        out1, out2 = tmp_path / "serial.csv", tmp_path / "pool.csv"
        assert cli.main(["fidelity", "--config", cfg, "--out", str(out1)]) == 0
        assert cli.main(
            ["fidelity", "--config", cfg, "--out", str(out2), "--jobs", "2"]
        ) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_embedded_config_round_trip(self, tmp_path):
        cfg = write_config(tmp_path, dnp_config(sweep={"nbar": [4.0]}))
        out1 = tmp_path / "first.csv"
        assert cli.main(["fidelity", "--config", cfg, "--out", str(out1)]) == 0
        comments, _, _ = read_csv(out1)
        embedded = next(c for c in comments if c.startswith("# config="))
        replay = tmp_path / "replay.json"
        replay.write_text(embedded[len("# config="):], encoding="utf-8")
        out2 = tmp_path / "second.csv"
        assert cli.main(
            ["fidelity", "--config", str(replay), "--out", str(out2)]
        ) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_identity_noise_floor(self, tmp_path):
        payload = dnp_config(sweep={"alpha": [3.0]})
        payload["noise"] = {"gamma_t": 0.0, "kappa_t": 0.0}
        cfg = write_config(tmp_path, payload)
        out = tmp_path / "ident.csv"
        assert cli.main(["fidelity", "--config", cfg, "--out", str(out)]) == 0
        _, header, rows = read_csv(out)
        assert float(rows[0][header.index("infidelity")]) < 1e-3

    def test_noise_lists_expand_rows(self, tmp_path):
        payload = dnp_config(sweep={"nbar": [4.0]})
        payload["noise"] = {"gamma_t": [0.004, 0.008], "kappa_t": 0.001}
        cfg = write_config(tmp_path, payload)
        out = tmp_path / "grid.csv"
        assert cli.main(["fidelity", "--config", cfg, "--out", str(out)]) == 0
        _, header, rows = read_csv(out)
        gammas = [float(r[header.index("gamma_t")]) for r in rows]
        assert gammas == [0.004, 0.008]

    def test_seed_recorded(self, tmp_path):
        cfg = write_config(tmp_path, dnp_config(sweep={"nbar": [4.0]}))
        out = tmp_path / "seeded.csv"
        assert cli.main(
            ["fidelity", "--config", cfg, "--out", str(out), "--seed", "7"]
        ) == 0
        comments, header, rows = read_csv(out)
        assert "# seed=7" in comments
        assert rows[0][header.index("seed")] == "7"

    def test_truncation_failure_leaves_sentinel(self, tmp_path):
        payload = dnp_config(sweep={"nbar": [4.0, 18.0]},
                             truncation={"dim": 40})
        del payload["code"]["amplitude"]["alpha"]
        cfg = write_config(tmp_path, payload)
        out = tmp_path / "partial.csv"
        assert cli.main(["fidelity", "--config", cfg, "--out", str(out)]) == 3
        comments, header, rows = read_csv(out)
        assert len(rows) == 2
        assert float(rows[0][header.index("fidelity")]) > 0.999
        assert math.isnan(float(rows[1][header.index("fidelity")]))
        assert any("numerical-failure" in c and "TruncationError" in c
                   for c in comments)

    def test_stdout_when_no_out_path(self, tmp_path, capsys):
        cfg = write_config(tmp_path, dnp_config(sweep={"nbar": [4.0]}))
        assert cli.main(["fidelity", "--config", cfg]) == 0
        text = capsys.readouterr().out
        assert text.startswith("# config_sha256=")
        assert "code_type,s,p,q,alpha,r,nbar" in text


@pytest.fixture(scope="module")
def rows(tmp_path_factory):
    tmp_path = tmp_path_factory.mktemp("repeater")
    payload = {
        "code": {
            "type": "gaussian", "s": 2, "p": 1, "q": 2,
            "amplitude": {"alpha": 2.0, "r": 0.0},
        },
        "repeater": {
            "spacing_km": 1.0, "eps": 0.01, "h": 0.1, "t0_us": 1.0,
            "distances_km": [0.0, 5.0, 10.0, 20.0],
        },
    }
    cfg = write_config(tmp_path, payload)
    out = tmp_path / "rep.csv"
    assert cli.main(["repeater", "--config", cfg, "--out", str(out)]) == 0
    return read_csv(out)


class TestRepeaterRows:
    def test_gamma_column_matches_link_budget(self, rows):
        _, header, data = rows
        gamma = float(data[0][header.index("Gamma")])
        assert abs(gamma - (1.0 - math.exp(-1.0 / 20.0) + 0.01)) < 1e-12
        gamma_phi = float(data[0][header.index("Gamma_phi")])
        assert abs(gamma_phi - 0.1 * gamma) < 1e-14

    def test_zero_distance_keeps_full_key(self, rows):
        _, header, data = rows
        assert float(data[0][header.index("skrpm")]) == 1.0

    def test_key_rate_non_increasing_with_distance(self, rows):
        _, header, data = rows
        keys = [float(r[header.index("skrpm")]) for r in data]
        assert all(a >= b - 1e-9 for a, b in zip(keys, keys[1:]))

    def test_per_hop_columns_constant(self, rows):
        _, header, data = rows
        for name in ("fidelity", "tau", "Gamma"):
            col = {r[header.index(name)] for r in data}
            assert len(col) == 1


class TestLatticeAndWigner:
    def test_lattice_points_cover_period(self, tmp_path):
        cfg = write_config(tmp_path, dnp_config())
        out = tmp_path / "lattice.csv"
        assert cli.main(["lattice", "--config", cfg, "--out", str(out)]) == 0
        _, header, rows = read_csv(out)
        assert header == ["n", "phase"]
        pts = [(float(r[0]), float(r[1])) for r in rows]
        assert all(0.0 <= n <= 10.0 and 0.0 <= ph < 2 * math.pi for n, ph in pts)
        assert sum(1 for n, _ in pts if n == 0.0) == 4

    def test_wigner_grid_normalized(self, tmp_path):
        payload = {
            "code": {
                "type": "binomial", "s": 2, "p": 1, "q": 2,
                "amplitude": {"K": 2},
            },
        }
        cfg = write_config(tmp_path, payload)
        out = tmp_path / "wigner.csv"
        assert cli.main(["wigner", "--config", cfg, "--out", str(out)]) == 0
        _, header, rows = read_csv(out)
        assert header == ["x", "p", "w"]
        xs = sorted({float(r[0]) for r in rows})
        step = xs[1] - xs[0]
        total = sum(float(r[2]) for r in rows) * step * step
        assert abs(total - 1.0) < 5e-2


class TestValidateCommand:
    def test_quick_level_passes(self, capsys):
        assert cli.main(["validate", "--level", "quick"]) == 0
        text = capsys.readouterr().out
        assert "11/11 checks passed" in text
        assert "FAIL" not in text

    def test_full_level_emits_artifact(self, tmp_path, capsys):
        artifact = tmp_path / "sweep.csv"
        assert cli.main(["validate", "--level", "full", "--out", str(artifact)]) == 0
        assert "13/13 checks passed" in capsys.readouterr().out
        _, header, rows = read_csv(artifact)
        assert header[0] == "code_type"
        assert len(rows) == 9

    def test_injected_sign_flip_names_roundtrip_invariant(
        self, capsys, monkeypatch
    ):
        real = npqec.qec.decision_regions

        class Flipped:
            def __init__(self, regions):
                self._regions = regions
                self.sectors = regions.sectors

            def decode(self, angles, k):
                idx = self._regions.decode(angles, k)
                n = len(self._regions.sectors[k].labels)
                return (np.asarray(idx) + 1) % n

        monkeypatch.setattr(
            npqec.qec, "decision_regions", lambda code, cfg: Flipped(real(code, cfg))
        )
        assert cli.main(["validate", "--level", "quick"]) == 1
        assert "FAIL syndrome-region-round-trip" in capsys.readouterr().out
