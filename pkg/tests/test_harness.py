import json
import numpy as np
import pytest

from dmasense import InvalidInputError, load_config, load_model
from dmasense.cli import main as cli_main
from dmasense.harness import (
    config_from_dict,
    config_to_dict,
    run_diversity_map,
    run_dual_source_scenario,
    run_rank_study,
    run_single_source_sweep,
)

TINY = {
    "experiment_id": "tiny",
    "seed": 5,
    "model": {
        "n_meta": 12,
        "spacing_phi_deg": 30.0,
        "spacing_theta_deg": 30.0,
        "coupling_strength": 0.5,
        "seed": 2,
    },
    "sweep": {"k_values": [1, 4], "snr_db": [10.0, None]},
    "sequences": {"random": 1, "optimized": []},
    "estimation": {"trials": 1, "source_stride": 13},
    "optimizer": {"restarts": 1, "max_sweeps": 2, "subset_stride": 6},
    "reference": {"n_configs": 8, "n_pols": 2},
    "diversity": {"n_samples": 16},
    "rank_study": {"k_values": [2, 3], "objectives": ["raw"], "n_random": 6},
    "dual": {
        "tx_phi_deg": -60.0,
        "tx_theta_deg": 60.0,
        "jammer_phi_deg": 120.0,
        "jammer_theta_deg": 60.0,
        "k": 16,
        "snr_db": None,
        "trials": 2,
    },
}


def _tiny_cfg():
    return config_from_dict(json.loads(json.dumps(TINY)))


def _write_cfg(tmp_path, doc=TINY):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return path


def test_config_defaults_and_echo():
    cfg = config_from_dict({})
    assert cfg.model.n_meta == 96
    assert cfg.optimizer.restarts == 4 and cfg.optimizer.max_sweeps == 20
    assert cfg.estimation.exclusion_radius_deg == 10.0
    assert len(cfg.estimation.polarizations) == 3
    echo = config_to_dict(cfg)
    # the echo is itself a loadable config resolving to the same echo
    assert config_to_dict(config_from_dict(echo)) == echo


def test_config_rejects_unknown_keys():
    with pytest.raises(InvalidInputError):
        config_from_dict({"nope": 1})
    with pytest.raises(InvalidInputError):
        config_from_dict({"model": {"n_meta": 4, "typo": 1}})
    with pytest.raises(InvalidInputError):
        config_from_dict({"sequences": {"optimized": ["bogus_kind"]}})
    with pytest.raises(InvalidInputError):
        config_from_dict({"sweep": {"k_values": []}})


def test_config_snr_null_means_noiseless():
    cfg = config_from_dict({"sweep": {"k_values": [2], "snr_db": [None, 20.0]}})
    assert np.isinf(cfg.sweep.snr_db[0]) and cfg.sweep.snr_db[1] == 20.0
    assert config_to_dict(cfg)["sweep"]["snr_db"] == [None, 20.0]


def test_polarization_states_normalized_on_load():
    cfg = config_from_dict(
        {"estimation": {"polarizations": [[[3.0, 0.0], [4.0, 0.0]]]}}
    )
    state = np.array(cfg.estimation.polarizations[0])
    assert abs(np.linalg.norm(state) - 1.0) < 1e-12


def test_run_diversity_map_writes_and_reruns_identically(tmp_path):
    cfg = _tiny_cfg()
    out1, out2 = tmp_path / "a", tmp_path / "b"
    sd1 = run_diversity_map(cfg, out1)
    sd2 = run_diversity_map(cfg, out2)
    np.testing.assert_array_equal(sd1[0], sd2[0])
    f1 = (out1 / "diversity_map.csv").read_bytes()
    f2 = (out2 / "diversity_map.csv").read_bytes()
    assert f1 == f2
    header = f1.decode().splitlines()
    assert header[0].startswith("# config: ")
    assert header[1] == "direction,phi_deg,theta_deg,sd_e_phi,sd_e_theta"


def test_run_rank_study_rows(tmp_path):
    cfg = _tiny_cfg()
    rows = run_rank_study(cfg, tmp_path)
    assert len(rows) == 2  # two K values, one objective
    for k, kind, opt, mean, std, improvement in rows:
        assert kind == "raw"
        assert opt >= mean  # greedy result never falls below a random draw set
        if std > 0:
            assert improvement == pytest.approx((opt - mean) / std)
    assert (tmp_path / "rank_study.csv").exists()


def test_run_rank_study_degenerate_model_emits_nan(tmp_path):
    doc = json.loads(json.dumps(TINY))
    doc["model"]["alpha"] = [0.5, 0.0]
    doc["model"]["beta"] = [0.5, 0.0]
    cfg = config_from_dict(doc)
    rows = run_rank_study(cfg, tmp_path)
    assert all(np.isnan(row[5]) for row in rows)
    text = (tmp_path / "rank_study.csv").read_text()
    assert "nan" in text


def test_run_single_source_sweep_noiseless_is_exact(tmp_path):
    cfg = _tiny_cfg()
    records, aggregate = run_single_source_sweep(cfg, tmp_path)
    # aggregate rows: 2 K values x 1 sequence x 2 SNRs
    assert len(aggregate) == 4
    k4_noiseless = [r for r in aggregate if r[1] == 4 and np.isinf(r[2])]
    assert len(k4_noiseless) == 1
    assert k4_noiseless[0][5] == 0.0  # mean DoA error, exactly zero
    assert k4_noiseless[0][6] < 1e-6  # mean polarization error in degrees
    assert (tmp_path / "single_source_records.csv").exists()
    assert (tmp_path / "single_source_aggregate.csv").exists()


def test_aggregate_recomputable_from_records():
    cfg = _tiny_cfg()
    records, aggregate = run_single_source_sweep(cfg, None)
    for agg in aggregate:
        _, k, snr, label, n, mean_doa, mean_pol, mean_eta = agg
        cell = [r for r in records if r[1] == k and r[2] == snr and r[3] == label]
        assert len(cell) == n
        assert mean_doa == pytest.approx(np.mean([r[13] for r in cell]))
        assert mean_pol == pytest.approx(np.mean([r[14] for r in cell]))
        assert mean_eta == pytest.approx(np.mean([r[15] for r in cell]))


def test_run_single_source_sweep_reruns_identically(tmp_path):
    cfg = _tiny_cfg()
    out1, out2 = tmp_path / "a", tmp_path / "b"
    run_single_source_sweep(cfg, out1)
    run_single_source_sweep(cfg, out2)
    for name in ("single_source_records.csv", "single_source_aggregate.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_run_dual_source_scenario(tmp_path):
    cfg = _tiny_cfg()
    rows, estimate = run_dual_source_scenario(cfg, tmp_path)
    assert len(rows) == 2
    for row in rows:
        assert row[2] == 0.0  # jammer DoA exact in the noiseless run
        assert row[4] == 0.0  # transmitter DoA exact in the noiseless run
        assert row[3] < 1e-6 and row[5] < 1e-6
    maps = json.loads((tmp_path / "dual_source_maps.json").read_text())
    assert len(maps["eta_map"]) == len(maps["phi_deg"])
    assert maps["eta_res_map"][maps["jammer_direction"]] == -1.0  # excluded
    assert (tmp_path / "dual_source_records.csv").exists()


def test_dual_rejects_off_grid_angles():
    doc = json.loads(json.dumps(TINY))
    doc["dual"]["tx_phi_deg"] = -40.0  # not on the 30-degree grid
    cfg = config_from_dict(doc)
    with pytest.raises(InvalidInputError):
        run_dual_source_scenario(cfg, None)


def test_cli_all_subcommands_and_reproducibility(tmp_path):
    cfg_path = _write_cfg(tmp_path)
    for command in ("synth-model", "diversity-map", "rank-study", "sweep-single", "dual-scenario"):
        out1 = tmp_path / command / "run1"
        out2 = tmp_path / command / "run2"
        assert cli_main([command, "--config", str(cfg_path), "--out", str(out1)]) == 0
        assert cli_main([command, "--config", str(cfg_path), "--out", str(out2)]) == 0
        files1 = sorted(p.name for p in out1.iterdir())
        files2 = sorted(p.name for p in out2.iterdir())
        assert files1 and files1 == files2
        for name in files1:
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), (command, name)


def test_cli_synth_model_output_loads(tmp_path):
    cfg_path = _write_cfg(tmp_path)
    out = tmp_path / "model_out"
    cli_main(["synth-model", "--config", str(cfg_path), "--out", str(out)])
    model = load_model(out / "model.json")
    assert model.n_meta == TINY["model"]["n_meta"]


def test_cli_seed_override_changes_results(tmp_path):
    cfg_path = _write_cfg(tmp_path)
    out1 = tmp_path / "s1"
    out2 = tmp_path / "s2"
    cli_main(["diversity-map", "--config", str(cfg_path), "--out", str(out1), "--seed", "1"])
    cli_main(["diversity-map", "--config", str(cfg_path), "--out", str(out2), "--seed", "2"])
    assert (out1 / "diversity_map.csv").read_bytes() != (out2 / "diversity_map.csv").read_bytes()


def test_load_config_from_file(tmp_path):
    cfg_path = _write_cfg(tmp_path)
    cfg = load_config(cfg_path)
    assert cfg.experiment_id == "tiny"
    assert cfg.sweep.k_values == (1, 4)
