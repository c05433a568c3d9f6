"""Tests for the command layer: configs, outputs, sidecars, validation, CLI."""

import json
import subprocess
import sys

import numpy as np
import pytest

from polarlab import harness
from polarlab.channel import (
    binary_entropy_inverse,
    make_bsc,
    make_bsec,
    star,
)
from polarlab.cli import main
from polarlab.codec import CodeSpec
from polarlab.construction import (
    gap_table,
    load_profile,
    select_frozen,
    z_profile_bec,
    z_profile_enum,
    z_profile_monte_carlo,
)
from polarlab.harness import (
    RunConfig,
    cmd_bler_sweep,
    cmd_profile,
    cmd_rd_sweep,
    cmd_scheme,
    cmd_validate,
    measure_bler,
)
from polarlab.schemes import design_storage, design_wz, run_storage, run_wz


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


def read_sidecar(primary):
    return json.loads((primary.parent / (primary.name + ".meta.json")).read_text())


class TestRunConfig:
    def test_defaults_from_config(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {"seed": 5, "workers": 3})
        run = RunConfig.load("profile", cfg)
        assert run.seed == 5
        assert run.workers == 3
        assert run.out.name == "profile.json"

    def test_cli_overrides_win(self, tmp_path):
        cfg = write_config(
            tmp_path, "c.json", {"seed": 5, "workers": 3, "out": "from_cfg.json"}
        )
        run = RunConfig.load("scheme", cfg, seed=9, workers=1, out="cli.json")
        assert run.seed == 9
        assert run.workers == 1
        assert run.out.name == "cli.json"

    def test_default_out_per_command(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {})
        assert RunConfig.load("rd-sweep", cfg).out.name == "rd_sweep.csv"
        assert RunConfig.load("validate", cfg).out.name == "validate.txt"

    def test_unknown_command(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {})
        with pytest.raises(ValueError):
            RunConfig.load("transmogrify", cfg)

    def test_non_object_config(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("[1, 2, 3]")
        with pytest.raises(ValueError):
            RunConfig.load("profile", path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            RunConfig.load("profile", tmp_path / "absent.json")

    def test_require_seed(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {})
        run = RunConfig.load("profile", cfg)
        with pytest.raises(ValueError):
            run.require_seed()

    def test_workers_floor(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {"workers": 0})
        assert RunConfig.load("profile", cfg).workers == 1


class TestCmdProfile:
    def test_enumeration_for_small_n(self, tmp_path):
        cfg = write_config(
            tmp_path, "c.json",
            {"channel": {"kind": "bsc", "params": {"D": 0.11}}, "n": 2},
        )
        out = tmp_path / "p.json"
        cmd_profile(RunConfig.load("profile", cfg, out=out))
        profile = load_profile(out)
        assert profile.method == "enum-exact"
        assert np.array_equal(profile.z, z_profile_enum(make_bsc(0.11), 2).z)
        meta = read_sidecar(out)
        assert meta["method"] == "enum-exact"
        assert meta["clamp_events"] == 0
        assert "created_utc" in meta and meta["command"] == "profile"

    def test_closed_form_for_erasure(self, tmp_path):
        cfg = write_config(
            tmp_path, "c.json",
            {"channel": {"kind": "bec", "params": {"epsilon": 0.5}}, "n": 8},
        )
        out = tmp_path / "p.json"
        cmd_profile(RunConfig.load("profile", cfg, out=out))
        profile = load_profile(out)
        assert profile.method == "bec-exact"
        assert np.array_equal(profile.z, z_profile_bec(0.5, 8).z)

    def test_monte_carlo_path_and_byte_determinism(self, tmp_path):
        payload = {
            "channel": {"kind": "bsc", "params": {"D": 0.11}},
            "n": 5,
            "trials": 300,
            "seed": 12,
        }
        cfg = write_config(tmp_path, "c.json", payload)
        out1 = tmp_path / "p1.json"
        out2 = tmp_path / "p2.json"
        cmd_profile(RunConfig.load("profile", cfg, workers=1, out=out1))
        cmd_profile(RunConfig.load("profile", cfg, workers=4, out=out2))
        assert out1.read_bytes() == out2.read_bytes()
        profile = load_profile(out1)
        assert profile.method == "monte-carlo"
        assert np.array_equal(
            profile.z, z_profile_monte_carlo(make_bsc(0.11), 5, 300, 12).z
        )

    def test_monte_carlo_requires_seed(self, tmp_path):
        cfg = write_config(
            tmp_path, "c.json",
            {"channel": {"kind": "bsc", "params": {"D": 0.11}}, "n": 5},
        )
        with pytest.raises(ValueError):
            cmd_profile(RunConfig.load("profile", cfg, out=tmp_path / "p.json"))


class TestCmdRdSweep:
    def base_config(self):
        return {
            "channel": {"kind": "bsc", "params": {"D": 0.11}},
            "n": [4],
            "rates": [0.5, 0.75],
            "trials": 60,
            "profile_trials": 300,
            "seed": 3,
        }

    def test_csv_shape_and_figure(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", self.base_config())
        out = tmp_path / "sweep.csv"
        cmd_rd_sweep(RunConfig.load("rd-sweep", cfg, out=out))
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "n,N,rate,target_D,measured_D,stderr,trials,seed"
        assert len(lines) == 3
        first = lines[1].split(",")
        assert first[0] == "4" and first[1] == "16"
        assert float(first[2]) == 0.5
        assert float(first[3]) == pytest.approx(
            binary_entropy_inverse(0.5), abs=1e-15
        )
        assert 0.0 <= float(first[4]) <= 1.0
        assert (tmp_path / "sweep.png").exists()
        assert read_sidecar(out)["figure"].endswith("sweep.png")

    def test_byte_identical_across_workers(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", self.base_config())
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        cmd_rd_sweep(RunConfig.load("rd-sweep", cfg, workers=1, out=out1))
        cmd_rd_sweep(RunConfig.load("rd-sweep", cfg, workers=4, out=out2))
        assert out1.read_bytes() == out2.read_bytes()

    def test_rejects_non_bsc_metric(self, tmp_path):
        payload = self.base_config()
        payload["channel"] = {"kind": "bec", "params": {"epsilon": 0.5}}
        cfg = write_config(tmp_path, "c.json", payload)
        with pytest.raises(ValueError):
            cmd_rd_sweep(RunConfig.load("rd-sweep", cfg, out=tmp_path / "s.csv"))

    def test_rejects_zero_rate(self, tmp_path):
        payload = self.base_config()
        payload["rates"] = [0.0, 0.5]
        cfg = write_config(tmp_path, "c.json", payload)
        with pytest.raises(ValueError):
            cmd_rd_sweep(RunConfig.load("rd-sweep", cfg, out=tmp_path / "s.csv"))

    def test_profile_path_exponent_checked(self, tmp_path, fixture_dir):
        payload = self.base_config()
        payload["profiles"] = {"4": str(fixture_dir / "bsc_d011_n10.json")}
        cfg = write_config(tmp_path, "c.json", payload)
        with pytest.raises(ValueError):
            cmd_rd_sweep(RunConfig.load("rd-sweep", cfg, out=tmp_path / "s.csv"))


class TestCmdBlerSweep:
    def base_config(self):
        return {
            "channel": {"kind": "bsc", "params": {"D": 0.11}},
            "n": [4],
            "rates": [0.0, 0.25],
            "trials": 80,
            "profile_trials": 300,
            "seed": 5,
        }

    def test_rows_match_direct_measurement(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", self.base_config())
        out = tmp_path / "bler.csv"
        cmd_bler_sweep(RunConfig.load("bler-sweep", cfg, out=out))
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "n,rate,bler,union_bound,trials"
        assert len(lines) == 3
        # Replicate the on-the-fly profile (seed + 1) and the measurement.
        profile = z_profile_monte_carlo(make_bsc(0.11), 4, 300, 5 + 1)
        table = gap_table(profile)
        zero_rate = lines[1].split(",")
        assert float(zero_rate[2]) == 0.0  # no information bits, no errors
        quarter = lines[2].split(",")
        k = 12  # frozen count at rate 1/4, n = 16
        spec = CodeSpec(4, select_frozen(profile, k), np.zeros(k, np.uint8),
                        make_bsc(0.11))
        assert float(quarter[2]) == measure_bler(spec, 80, 5)
        assert float(quarter[3]) == float(table.m[4])
        assert (tmp_path / "bler.png").exists()

    def test_byte_identical_across_workers(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", self.base_config())
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        cmd_bler_sweep(RunConfig.load("bler-sweep", cfg, workers=1, out=out1))
        cmd_bler_sweep(RunConfig.load("bler-sweep", cfg, workers=3, out=out2))
        assert out1.read_bytes() == out2.read_bytes()


class TestCmdScheme:
    def test_wz_matches_direct_pipeline(self, tmp_path):
        payload = {
            "scheme": "wz",
            "n": 6,
            "D": 0.11,
            "p": 0.25,
            "rate_margin": 0.1,
            "trials": 80,
            "profile_trials": 400,
            "seed": 11,
        }
        cfg = write_config(tmp_path, "c.json", payload)
        out = tmp_path / "wz.json"
        cmd_scheme(RunConfig.load("scheme", cfg, out=out))
        doc = json.loads(out.read_text())
        assert list(doc)[0] == "scheme" and doc["scheme"] == "wz"

        src = z_profile_monte_carlo(make_bsc(0.11), 6, 400, 11 + 1)
        chan = z_profile_monte_carlo(make_bsc(star(0.11, 0.25)), 6, 400, 11 + 2)
        nested = design_wz(src, chan, 0.1, 0.5, 0.03)
        result = run_wz(nested, 0.25, 80, 11)
        assert doc["rate_encoder"] == result.rate_encoder
        assert doc["distortion"] == result.distortion
        assert doc["block_error"] == result.block_error
        meta = read_sidecar(out)
        assert meta["frozen_source"] == nested.f_s.size
        assert meta["frozen_channel"] == nested.f_c.size
        assert meta["message_length"] == nested.message_length

    def test_storage_role_mapping(self, tmp_path):
        payload = {
            "scheme": "storage",
            "n": 5,
            "D": 0.11,
            "p": 0.25,
            "rate_margin": 0.12,
            "trials": 60,
            "profile_trials": 400,
            "seed": 21,
        }
        cfg = write_config(tmp_path, "c.json", payload)
        out = tmp_path / "st.json"
        cmd_scheme(RunConfig.load("scheme", cfg, out=out))
        doc = json.loads(out.read_text())
        state = z_profile_monte_carlo(make_bsec(0.25, 0.11), 5, 400, 21 + 1)
        read = z_profile_monte_carlo(make_bsc(0.11), 5, 400, 21 + 2)
        nested = design_storage(read, state, 0.12, 0.5, 0.03)
        result = run_storage(nested, 0.11, 60, 21)
        assert doc["distortion"] == result.distortion
        assert doc["block_error"] == result.block_error

    def test_unknown_scheme(self, tmp_path):
        payload = {"scheme": "broadcast", "n": 4, "D": 0.1, "p": 0.1,
                   "rate_margin": 0.1, "trials": 5, "seed": 1}
        cfg = write_config(tmp_path, "c.json", payload)
        with pytest.raises(ValueError):
            cmd_scheme(RunConfig.load("scheme", cfg, out=tmp_path / "s.json"))

    def test_profile_channel_mismatch_rejected(self, tmp_path, fixture_dir):
        payload = {
            "scheme": "wz",
            "n": 10,
            "D": 0.11,
            "p": 0.25,
            "rate_margin": 0.1,
            "trials": 5,
            "seed": 1,
            # d0305 belongs to the decode role, not the quantizer role
            "profiles": {"source": str(fixture_dir / "bsc_d0305_n10.json")},
        }
        cfg = write_config(tmp_path, "c.json", payload)
        with pytest.raises(ValueError):
            cmd_scheme(RunConfig.load("scheme", cfg, out=tmp_path / "s.json"))

    def test_fixture_profiles_accepted(self, tmp_path, fixture_dir):
        payload = {
            "scheme": "wz",
            "n": 10,
            "D": 0.11,
            "p": 0.25,
            "rate_margin": 0.1,
            "trials": 40,
            "seed": 2,
            "profiles": {
                "source": str(fixture_dir / "bsc_d011_n10.json"),
                "channel": str(fixture_dir / "bsc_d0305_n10.json"),
            },
        }
        cfg = write_config(tmp_path, "c.json", payload)
        out = tmp_path / "wz10.json"
        cmd_scheme(RunConfig.load("scheme", cfg, out=out))
        doc = json.loads(out.read_text())
        assert doc["block_error"] <= 0.2

    def test_byte_identical_across_workers(self, tmp_path, fixture_dir):
        payload = {
            "scheme": "gp",
            "n": 10,
            "D": 0.25,
            "p": 0.11,
            "rate_margin": 0.1,
            "trials": 40,
            "seed": 4,
            "profiles": {
                "source": str(fixture_dir / "bsc_d025_n12.json"),
            },
        }
        # Wrong exponent in the profile must be caught up front.
        cfg = write_config(tmp_path, "bad.json", payload)
        with pytest.raises(ValueError):
            cmd_scheme(RunConfig.load("scheme", cfg, out=tmp_path / "x.json"))
        payload["profiles"] = {}
        payload["profile_trials"] = 400
        cfg = write_config(tmp_path, "c.json", payload)
        out1 = tmp_path / "a.json"
        out2 = tmp_path / "b.json"
        cmd_scheme(RunConfig.load("scheme", cfg, workers=1, out=out1))
        cmd_scheme(RunConfig.load("scheme", cfg, workers=4, out=out2))
        assert out1.read_bytes() == out2.read_bytes()


class TestCmdValidate:
    def fast_config(self, **extra):
        payload = {
            "suites": ["gauge", "posterior-bias", "reliability-recursion",
                       "tree-process"],
            "seed": 7,
            "gauge_instances": 5,
            "posterior_max_n": 2,
            "recursion_pairs": 200,
            "tree_samples": 2,
        }
        payload.update(extra)
        return payload

    def test_all_pass(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", self.fast_config())
        out = tmp_path / "v.txt"
        rc = cmd_validate(RunConfig.load("validate", cfg, out=out))
        assert rc == 0
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 4
        assert all(line.startswith("[pass]") for line in lines)
        assert read_sidecar(out)["failures"] == 0

    def test_oracle_suite_small(self, tmp_path):
        cfg = write_config(
            tmp_path, "c.json",
            {"suites": ["oracle-equivalence"], "oracle_n": [1]},
        )
        out = tmp_path / "v.txt"
        assert cmd_validate(RunConfig.load("validate", cfg, out=out)) == 0
        assert out.read_text().startswith("[pass] oracle-equivalence:")

    def test_fault_injection_fails(self, tmp_path):
        cfg = write_config(
            tmp_path, "c.json",
            self.fast_config(recursion_perturbation=0.001),
        )
        out = tmp_path / "v.txt"
        rc = cmd_validate(RunConfig.load("validate", cfg, out=out))
        assert rc == 1
        assert "[fail] reliability-recursion:" in out.read_text()
        assert read_sidecar(out)["failures"] == 1

    def test_empty_request_skips(self, tmp_path):
        cfg = write_config(
            tmp_path, "c.json",
            {"suites": ["oracle-equivalence"], "oracle_n": [0]},
        )
        out = tmp_path / "v.txt"
        assert cmd_validate(RunConfig.load("validate", cfg, out=out)) == 0
        assert out.read_text().startswith("[skip] oracle-equivalence:")

    def test_unknown_suite_rejected(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {"suites": ["vibes"]})
        with pytest.raises(ValueError):
            cmd_validate(RunConfig.load("validate", cfg, out=tmp_path / "v.txt"))

    def test_seed_flag_overrides_config(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", self.fast_config(seed=7))
        out1 = tmp_path / "a.txt"
        out2 = tmp_path / "b.txt"
        cmd_validate(RunConfig.load("validate", cfg, out=out1))
        cmd_validate(RunConfig.load("validate", cfg, seed=7, out=out2))
        assert out1.read_bytes() == out2.read_bytes()


class TestCli:
    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert "polarlab" in capsys.readouterr().out

    def test_missing_subcommand(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_missing_config_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["profile"])
        assert exc.value.code == 2

    def test_bad_config_path_is_error_exit(self, tmp_path, capsys):
        rc = main(["profile", "--config", str(tmp_path / "nope.json")])
        assert rc == 2
        assert "error" in capsys.readouterr().err

    def test_config_error_reported(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path, "c.json",
            {"channel": {"kind": "bsc", "params": {"D": 0.11}}, "n": 5},
        )
        rc = main(["profile", "--config", str(cfg),
                   "--out", str(tmp_path / "p.json")])
        assert rc == 2  # Monte Carlo profile without a seed
        assert "seed" in capsys.readouterr().err

    def test_profile_happy_path(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path, "c.json",
            {"channel": {"kind": "bsc", "params": {"D": 0.11}}, "n": 2},
        )
        out = tmp_path / "p.json"
        rc = main(["profile", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        assert out.exists()
        assert "profile:" in capsys.readouterr().out

    def test_validate_exit_codes(self, tmp_path):
        ok = write_config(
            tmp_path, "ok.json",
            {"suites": ["tree-process"], "tree_samples": 1},
        )
        assert main(["validate", "--config", str(ok),
                     "--out", str(tmp_path / "a.txt")]) == 0
        bad = write_config(
            tmp_path, "bad.json",
            {"suites": ["reliability-recursion"], "recursion_pairs": 50,
             "recursion_perturbation": 0.001},
        )
        assert main(["validate", "--config", str(bad),
                     "--out", str(tmp_path / "b.txt")]) == 1

    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "polarlab.cli", "--version"],
            capture_output=True, text=True, check=False,
        )
        assert proc.returncode == 0
        assert "polarlab" in proc.stdout

    def test_unknown_validation_suite_via_cli(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "c.json", {"suites": ["vibes"]})
        rc = main(["validate", "--config", str(cfg),
                   "--out", str(tmp_path / "v.txt")])
        assert rc == 2
        assert "unknown validation suites" in capsys.readouterr().err
