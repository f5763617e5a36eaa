"""Config-driven experiment runner.

A single JSON config file (schema below) drives all experiment commands.
Unknown keys anywhere in the file are rejected.  Every output file embeds the
fully resolved config, including every seed, and all random streams derive
deterministically from the master seed, so rerunning a command with the same
config reproduces its outputs byte for byte.  Tables are CSV (UTF-8, header
row, '.' decimal separator, complex values as re/im column pairs, one leading
'# config: ...' comment line); score maps are JSON.

Config sections and defaults::

    {
      "experiment_id": "experiment",
      "seed": 0,                      # master seed, all sub-streams derive from it
      "model": {"n_meta": 96, "spacing_phi_deg": 15.0, "spacing_theta_deg": 15.0,
                "coupling_strength": 0.6, "alpha": [re, im], "beta": [re, im],
                "seed": 1},
      "sweep": {"k_values": [5, 10, 20], "snr_db": [25.0]},   # null SNR = noiseless
      "sequences": {"random": 1, "optimized": []},
      "estimation": {"polarizations": [...3 states...], "trials": 10,
                     "exclusion_radius_deg": 10.0, "pole_margin_deg": 3.0,
                     "source_stride": 1},
      "optimizer": {"restarts": 4, "max_sweeps": 20,
                    "subset_stride": 10, "subset_pole_margin_deg": 3.0},
      "reference": {"n_configs": 100, "n_pols": 3},
      "diversity": {"n_samples": 1000},
      "rank_study": {"k_values": [2, 5, 10, 20], "objectives": [all three],
                     "n_random": 100},
      "dual": {"jammer_phi_deg": 120.0, "jammer_theta_deg": 45.0,
               "tx_phi_deg": -40.0, "tx_theta_deg": 45.0, "imbalance_db": 20.0,
               "k": 100, "snr_db": 25.0, "trials": 10,
               "objective": "column_normalized", "polarization": [[s,0],[s,0]]}
    }

Polarization states are given as [[re, im], [re, im]] pairs and are
normalized on load.  All core operations are pure given explicit seeds;
independent (scenario, trial) cells could run concurrently since each derives
its own stream, but the reference implementation evaluates them serially in a
fixed order.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .estimation import (
    ChannelSet,
    DEFAULT_EXCLUSION_RADIUS_DEG,
    estimate_dual,
    estimate_single,
    pol_error,
)
from .grid import (
    DEFAULT_POLE_MARGIN_DEG,
    DEFAULT_SUBSET_STRIDE,
    angular_separation,
    optimization_subset,
    valid_source_directions,
)
from .mnt import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    DEFAULT_COUPLING_STRENGTH,
    MntModel,
    diversity_map,
    random_configs,
    synthesize_model,
)
from .modelio import save_model
from .optimization import (
    DEFAULT_MAX_SWEEPS,
    DEFAULT_RESTARTS,
    OBJECTIVE_KINDS,
    OptimizerConfig,
    greedy_optimize,
    random_sequence_stats,
)
from .sensing import (
    NoiseSpec,
    SourceSpec,
    noise_power,
    reference_power,
    synthesize_measurements,
)
from . import grid as gridmod

_SQ2 = 1.0 / np.sqrt(2.0)
DEFAULT_POLARIZATIONS = (
    (1.0 + 0.0j, 0.0 + 0.0j),        # pure E_phi
    (0.0 + 0.0j, 1.0 + 0.0j),        # pure E_theta
    (_SQ2 + 0.0j, _SQ2 + 0.0j),      # balanced (E_phi + E_theta) / sqrt(2)
)

# Purpose tags for deriving independent sub-streams from the master seed.
_SEED_SEQUENCE = 1
_SEED_OPTIMIZER = 2
_SEED_NOISE = 3
_SEED_REFERENCE = 4
_SEED_DIVERSITY = 5


def _sub_seed(master: int, *tags: int) -> int:
    ss = np.random.SeedSequence([int(master)] + [int(t) for t in tags])
    return int(ss.generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------------------
# Config schema


@dataclass
class ModelSection:
    n_meta: int = 96
    spacing_phi_deg: float = 15.0
    spacing_theta_deg: float = 15.0
    coupling_strength: float = DEFAULT_COUPLING_STRENGTH
    alpha: complex = DEFAULT_ALPHA
    beta: complex = DEFAULT_BETA
    seed: int = 1


@dataclass
class SweepSection:
    k_values: tuple = (5, 10, 20)
    snr_db: tuple = (25.0,)


@dataclass
class SequencesSection:
    random: int = 1
    optimized: tuple = ()


@dataclass
class EstimationSection:
    polarizations: tuple = DEFAULT_POLARIZATIONS
    trials: int = 10
    exclusion_radius_deg: float = DEFAULT_EXCLUSION_RADIUS_DEG
    pole_margin_deg: float = DEFAULT_POLE_MARGIN_DEG
    source_stride: int = 1


@dataclass
class OptimizerSection:
    restarts: int = DEFAULT_RESTARTS
    max_sweeps: int = DEFAULT_MAX_SWEEPS
    subset_stride: int = DEFAULT_SUBSET_STRIDE
    subset_pole_margin_deg: float = DEFAULT_POLE_MARGIN_DEG


@dataclass
class ReferenceSection:
    n_configs: int = 100
    n_pols: int = 3


@dataclass
class DiversitySection:
    n_samples: int = 1000


@dataclass
class RankStudySection:
    k_values: tuple = (2, 5, 10, 20)
    objectives: tuple = OBJECTIVE_KINDS
    n_random: int = 100


@dataclass
class DualSection:
    jammer_phi_deg: float = 120.0
    jammer_theta_deg: float = 45.0
    tx_phi_deg: float = -40.0
    tx_theta_deg: float = 45.0
    imbalance_db: float = 20.0
    k: int = 100
    snr_db: float | None = 25.0
    trials: int = 10
    objective: str = "column_normalized"
    polarization: tuple = (_SQ2 + 0.0j, _SQ2 + 0.0j)


@dataclass
class ExperimentConfig:
    experiment_id: str = "experiment"
    seed: int = 0
    model: ModelSection = field(default_factory=ModelSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    sequences: SequencesSection = field(default_factory=SequencesSection)
    estimation: EstimationSection = field(default_factory=EstimationSection)
    optimizer: OptimizerSection = field(default_factory=OptimizerSection)
    reference: ReferenceSection = field(default_factory=ReferenceSection)
    diversity: DiversitySection = field(default_factory=DiversitySection)
    rank_study: RankStudySection = field(default_factory=RankStudySection)
    dual: DualSection = field(default_factory=DualSection)


def _reject_unknown(data: dict, allowed, context: str) -> None:
    unknown = set(data) - set(allowed)
    if unknown:
        raise InvalidInputError(f"unknown config keys in {context}: {sorted(unknown)}")


def _parse_complex(value, context: str) -> complex:
    if not (isinstance(value, (list, tuple)) and len(value) == 2):
        raise InvalidInputError(f"{context} must be a [re, im] pair")
    return complex(float(value[0]), float(value[1]))


def _parse_state(value, context: str) -> tuple:
    if not (isinstance(value, (list, tuple)) and len(value) == 2):
        raise InvalidInputError(f"{context} must be a pair of [re, im] pairs")
    c = np.array([_parse_complex(v, context) for v in value])
    norm = np.linalg.norm(c)
    if norm == 0:
        raise InvalidInputError(f"{context} must be a nonzero state")
    if abs(norm - 1.0) > 1e-12:  # keep already-normalized states bit-exact
        c = c / norm
    return (complex(c[0]), complex(c[1]))


def _parse_snr(value):
    return np.inf if value is None else float(value)


def _parse_section(cls, data: dict, context: str, converters: dict):
    _reject_unknown(data, {f for f in cls.__dataclass_fields__}, context)
    kwargs = {}
    for key, value in data.items():
        conv = converters.get(key)
        kwargs[key] = conv(value) if conv else value
    section = cls(**kwargs)
    return section


def config_from_dict(doc: dict) -> ExperimentConfig:
    _reject_unknown(doc, {f for f in ExperimentConfig.__dataclass_fields__}, "config root")
    cfg = ExperimentConfig()
    if "experiment_id" in doc:
        cfg.experiment_id = str(doc["experiment_id"])
    if "seed" in doc:
        cfg.seed = int(doc["seed"])
    if "model" in doc:
        cfg.model = _parse_section(
            ModelSection,
            doc["model"],
            "model",
            {
                "alpha": lambda v: _parse_complex(v, "model.alpha"),
                "beta": lambda v: _parse_complex(v, "model.beta"),
            },
        )
    if "sweep" in doc:
        cfg.sweep = _parse_section(
            SweepSection,
            doc["sweep"],
            "sweep",
            {
                "k_values": lambda v: tuple(int(k) for k in v),
                "snr_db": lambda v: tuple(_parse_snr(s) for s in v),
            },
        )
        if not cfg.sweep.k_values or not cfg.sweep.snr_db:
            raise InvalidInputError("sweep axes must be nonempty")
    if "sequences" in doc:
        cfg.sequences = _parse_section(
            SequencesSection,
            doc["sequences"],
            "sequences",
            {"optimized": tuple, "random": int},
        )
        for kind in cfg.sequences.optimized:
            if kind not in OBJECTIVE_KINDS:
                raise InvalidInputError(f"unknown objective kind {kind!r} in sequences.optimized")
    if "estimation" in doc:
        cfg.estimation = _parse_section(
            EstimationSection,
            doc["estimation"],
            "estimation",
            {
                "polarizations": lambda v: tuple(
                    _parse_state(s, "estimation.polarizations") for s in v
                )
            },
        )
    if "optimizer" in doc:
        cfg.optimizer = _parse_section(OptimizerSection, doc["optimizer"], "optimizer", {})
    if "reference" in doc:
        cfg.reference = _parse_section(ReferenceSection, doc["reference"], "reference", {})
    if "diversity" in doc:
        cfg.diversity = _parse_section(DiversitySection, doc["diversity"], "diversity", {})
    if "rank_study" in doc:
        cfg.rank_study = _parse_section(
            RankStudySection,
            doc["rank_study"],
            "rank_study",
            {"k_values": lambda v: tuple(int(k) for k in v), "objectives": tuple},
        )
        for kind in cfg.rank_study.objectives:
            if kind not in OBJECTIVE_KINDS:
                raise InvalidInputError(f"unknown objective kind {kind!r} in rank_study")
    if "dual" in doc:
        cfg.dual = _parse_section(
            DualSection,
            doc["dual"],
            "dual",
            {
                "snr_db": _parse_snr,
                "polarization": lambda v: _parse_state(v, "dual.polarization"),
            },
        )
        if cfg.dual.objective not in OBJECTIVE_KINDS:
            raise InvalidInputError(f"unknown objective kind {cfg.dual.objective!r} in dual")
    return cfg


def load_config(path) -> ExperimentConfig:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict):
        raise InvalidInputError("config file must contain a JSON object")
    return config_from_dict(doc)


def _complex_pair(z: complex) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def _snr_json(snr):
    return None if np.isinf(snr) else float(snr)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """Fully resolved, JSON-ready echo of the config (defaults included)."""
    return {
        "experiment_id": cfg.experiment_id,
        "seed": cfg.seed,
        "model": {
            "n_meta": cfg.model.n_meta,
            "spacing_phi_deg": cfg.model.spacing_phi_deg,
            "spacing_theta_deg": cfg.model.spacing_theta_deg,
            "coupling_strength": cfg.model.coupling_strength,
            "alpha": _complex_pair(cfg.model.alpha),
            "beta": _complex_pair(cfg.model.beta),
            "seed": cfg.model.seed,
        },
        "sweep": {
            "k_values": list(cfg.sweep.k_values),
            "snr_db": [_snr_json(s) for s in cfg.sweep.snr_db],
        },
        "sequences": {"random": cfg.sequences.random, "optimized": list(cfg.sequences.optimized)},
        "estimation": {
            "polarizations": [[_complex_pair(c) for c in s] for s in cfg.estimation.polarizations],
            "trials": cfg.estimation.trials,
            "exclusion_radius_deg": cfg.estimation.exclusion_radius_deg,
            "pole_margin_deg": cfg.estimation.pole_margin_deg,
            "source_stride": cfg.estimation.source_stride,
        },
        "optimizer": {
            "restarts": cfg.optimizer.restarts,
            "max_sweeps": cfg.optimizer.max_sweeps,
            "subset_stride": cfg.optimizer.subset_stride,
            "subset_pole_margin_deg": cfg.optimizer.subset_pole_margin_deg,
        },
        "reference": {"n_configs": cfg.reference.n_configs, "n_pols": cfg.reference.n_pols},
        "diversity": {"n_samples": cfg.diversity.n_samples},
        "rank_study": {
            "k_values": list(cfg.rank_study.k_values),
            "objectives": list(cfg.rank_study.objectives),
            "n_random": cfg.rank_study.n_random,
        },
        "dual": {
            "jammer_phi_deg": cfg.dual.jammer_phi_deg,
            "jammer_theta_deg": cfg.dual.jammer_theta_deg,
            "tx_phi_deg": cfg.dual.tx_phi_deg,
            "tx_theta_deg": cfg.dual.tx_theta_deg,
            "imbalance_db": cfg.dual.imbalance_db,
            "k": cfg.dual.k,
            "snr_db": _snr_json(cfg.dual.snr_db if cfg.dual.snr_db is not None else np.inf),
            "trials": cfg.dual.trials,
            "objective": cfg.dual.objective,
            "polarization": [_complex_pair(c) for c in cfg.dual.polarization],
        },
    }


# ---------------------------------------------------------------------------
# Output writers


def _write_csv(path: Path, header, rows, config_echo: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        f.write("# config: " + json.dumps(config_echo, sort_keys=True, separators=(",", ":")) + "\n")
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _write_json(path: Path, payload: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=1), encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# Runners


def make_model(section: ModelSection) -> MntModel:
    grid = gridmod.build_grid(section.spacing_phi_deg, section.spacing_theta_deg)
    return synthesize_model(
        n_meta=section.n_meta,
        grid=grid,
        coupling_strength=section.coupling_strength,
        seed=section.seed,
        alpha=section.alpha,
        beta=section.beta,
    )


def run_synth_model(cfg: ExperimentConfig, out_dir) -> Path:
    """Synthesize the configured model and write it as a model JSON file."""
    model = make_model(cfg.model)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = save_model(model, out_dir / "model.json")
    print(f"[synth-model] wrote {path}")
    return path


def run_diversity_map(cfg: ExperimentConfig, out_dir=None):
    """Per-direction standard deviation of both field components over random
    configurations; rows (direction, phi, theta, sd_phi, sd_theta)."""
    t0 = time.perf_counter()
    model = make_model(cfg.model)
    sd_phi, sd_theta = diversity_map(
        model, n_samples=cfg.diversity.n_samples, seed=_sub_seed(cfg.seed, _SEED_DIVERSITY)
    )
    grid = model.grid
    rows = [
        [d, grid.phi_deg[d], grid.theta_deg[d], sd_phi[d], sd_theta[d]]
        for d in range(grid.n_directions)
    ]
    if out_dir is not None:
        path = _write_csv(
            Path(out_dir) / "diversity_map.csv",
            ["direction", "phi_deg", "theta_deg", "sd_e_phi", "sd_e_theta"],
            rows,
            config_to_dict(cfg),
        )
        print(f"[diversity-map] wrote {path} in {time.perf_counter() - t0:.2f} s")
    return sd_phi, sd_theta


def run_rank_study(cfg: ExperimentConfig, out_dir=None):
    """Optimized objective value against the random-sequence baseline.

    For every (K, objective) cell: greedy optimization plus mean/std over
    n_random random sequences; the normalized improvement is
    (optimized - mean) / std, reported as nan when the baseline std is zero.
    """
    t0 = time.perf_counter()
    model = make_model(cfg.model)
    subset = optimization_subset(
        model.grid, cfg.optimizer.subset_stride, cfg.optimizer.subset_pole_margin_deg
    )
    rows = []
    for k_idx, K in enumerate(cfg.rank_study.k_values):
        for kind_idx, kind in enumerate(cfg.rank_study.objectives):
            mean, std, _ = random_sequence_stats(
                model, K, subset, kind,
                n_sequences=cfg.rank_study.n_random,
                seed=_sub_seed(cfg.seed, _SEED_SEQUENCE, k_idx, kind_idx),
            )
            result = greedy_optimize(
                model, K, subset, kind,
                OptimizerConfig(
                    restarts=cfg.optimizer.restarts,
                    max_sweeps=cfg.optimizer.max_sweeps,
                    seed=_sub_seed(cfg.seed, _SEED_OPTIMIZER, k_idx, kind_idx),
                ),
            )
            improvement = (result.best_value - mean) / std if std > 0 else float("nan")
            rows.append([K, kind, result.best_value, mean, std, improvement])
    if out_dir is not None:
        path = _write_csv(
            Path(out_dir) / "rank_study.csv",
            ["k", "objective", "optimized_value", "random_mean", "random_std",
             "normalized_improvement"],
            rows,
            config_to_dict(cfg),
        )
        print(f"[rank-study] wrote {path} in {time.perf_counter() - t0:.2f} s")
    return rows


def _materialize_sequences(cfg: ExperimentConfig, model: MntModel, subset, K: int, k_idx: int):
    sequences = []
    for j in range(cfg.sequences.random):
        V = random_configs(K, model.n_meta, _sub_seed(cfg.seed, _SEED_SEQUENCE, k_idx, j))
        sequences.append((f"random-{j}", V))
    for kind_idx, kind in enumerate(cfg.sequences.optimized):
        result = greedy_optimize(
            model, K, subset, kind,
            OptimizerConfig(
                restarts=cfg.optimizer.restarts,
                max_sweeps=cfg.optimizer.max_sweeps,
                seed=_sub_seed(cfg.seed, _SEED_OPTIMIZER, k_idx, kind_idx),
            ),
        )
        sequences.append((f"opt-{kind}", result.best_sequence))
    return sequences


def run_single_source_sweep(cfg: ExperimentConfig, out_dir=None):
    """Single-source error sweep over (K, SNR, sequence) cells.

    Sources run over the valid (non-polar) directions, subsampled by
    source_stride, crossed with the configured polarization states and noise
    trials.  Returns (records, aggregate); aggregate rows are per-cell means,
    recomputable from the record table.
    """
    t0 = time.perf_counter()
    model = make_model(cfg.model)
    grid = model.grid
    est = cfg.estimation
    subset = optimization_subset(
        grid, cfg.optimizer.subset_stride, cfg.optimizer.subset_pole_margin_deg
    )
    source_dirs = valid_source_directions(grid, est.pole_margin_deg)[:: est.source_stride]
    p_ref = None
    if any(np.isfinite(s) for s in cfg.sweep.snr_db):
        p_ref = reference_power(
            model, grid,
            n_configs=cfg.reference.n_configs,
            n_pols=cfg.reference.n_pols,
            seed=_sub_seed(cfg.seed, _SEED_REFERENCE),
            pole_margin=est.pole_margin_deg,
        )
    records = []
    aggregate = []
    for k_idx, K in enumerate(cfg.sweep.k_values):
        for label_idx, (label, V) in enumerate(
            _materialize_sequences(cfg, model, subset, K, k_idx)
        ):
            channels = ChannelSet.from_model(model, V)
            for snr_idx, snr in enumerate(cfg.sweep.snr_db):
                sigma2 = 0.0 if np.isinf(snr) else noise_power(p_ref, snr)
                doa_errors = []
                pol_errors = []
                eta_peaks = []
                for pol_idx, state in enumerate(est.polarizations):
                    for d in source_dirs:
                        src = SourceSpec(direction=int(d), c=np.asarray(state))
                        for trial in range(est.trials):
                            noise = NoiseSpec(
                                sigma2=sigma2,
                                seed=_sub_seed(
                                    cfg.seed, _SEED_NOISE,
                                    k_idx, snr_idx, label_idx, pol_idx, int(d), trial,
                                ),
                            )
                            meas = synthesize_measurements(channels, [src], noise)
                            result = estimate_single(channels, meas.y)
                            e_doa = angular_separation(src.direction, result.d_hat, grid)
                            e_pol = pol_error(src.c_bar, result.c_bar_hat)
                            eta_peak = float(result.eta_map[result.d_hat])
                            doa_errors.append(e_doa)
                            pol_errors.append(e_pol)
                            eta_peaks.append(eta_peak)
                            records.append([
                                cfg.experiment_id, K, snr, label, pol_idx,
                                int(d), grid.phi_deg[d], grid.theta_deg[d],
                                state[0].real, state[0].imag, state[1].real, state[1].imag,
                                trial, e_doa, e_pol, eta_peak,
                            ])
                aggregate.append([
                    cfg.experiment_id, K, snr, label, len(doa_errors),
                    float(np.mean(doa_errors)), float(np.mean(pol_errors)),
                    float(np.mean(eta_peaks)),
                ])
    if out_dir is not None:
        echo = config_to_dict(cfg)
        out = Path(out_dir)
        p1 = _write_csv(
            out / "single_source_records.csv",
            ["experiment_id", "k", "snr_db", "sequence", "pol_index",
             "direction", "phi_deg", "theta_deg",
             "c_phi_re", "c_phi_im", "c_theta_re", "c_theta_im",
             "trial", "eps_doa_deg", "eps_pol_deg", "eta_peak"],
            records, echo,
        )
        p2 = _write_csv(
            out / "single_source_aggregate.csv",
            ["experiment_id", "k", "snr_db", "sequence", "n_records",
             "mean_eps_doa_deg", "mean_eps_pol_deg", "mean_eta_peak"],
            aggregate, echo,
        )
        print(f"[sweep-single] wrote {p1} and {p2} in {time.perf_counter() - t0:.2f} s")
    return records, aggregate


def run_dual_source_scenario(cfg: ExperimentConfig, out_dir=None):
    """Jammer plus weaker transmitter scenario with sequential cancellation.

    Optimizes one sequence for the configured objective, runs the dual-source
    estimator over the noise trials, and emits per-trial errors plus the two
    score maps of the first trial for plotting.
    """
    t0 = time.perf_counter()
    model = make_model(cfg.model)
    grid = model.grid
    dual = cfg.dual
    d_jam = grid.index_of(dual.jammer_phi_deg, dual.jammer_theta_deg)
    d_tx = grid.index_of(dual.tx_phi_deg, dual.tx_theta_deg)
    subset = optimization_subset(
        grid, cfg.optimizer.subset_stride, cfg.optimizer.subset_pole_margin_deg
    )
    result = greedy_optimize(
        model, dual.k, subset, dual.objective,
        OptimizerConfig(
            restarts=cfg.optimizer.restarts,
            max_sweeps=cfg.optimizer.max_sweeps,
            seed=_sub_seed(cfg.seed, _SEED_OPTIMIZER, 999),
        ),
    )
    channels = ChannelSet.from_model(model, result.best_sequence)
    snr = np.inf if dual.snr_db is None else dual.snr_db
    if np.isinf(snr):
        sigma2 = 0.0
    else:
        p_ref = reference_power(
            model, grid,
            n_configs=cfg.reference.n_configs,
            n_pols=cfg.reference.n_pols,
            seed=_sub_seed(cfg.seed, _SEED_REFERENCE),
            pole_margin=cfg.estimation.pole_margin_deg,
        )
        sigma2 = noise_power(p_ref, snr)
    state = np.asarray(dual.polarization)
    amp_tx = 10.0 ** (-dual.imbalance_db / 20.0)
    src_jam = SourceSpec(direction=d_jam, c=state)
    src_tx = SourceSpec(direction=d_tx, c=amp_tx * state)
    rows = []
    first_estimate = None
    for trial in range(dual.trials):
        noise = NoiseSpec(sigma2=sigma2, seed=_sub_seed(cfg.seed, _SEED_NOISE, 999, trial))
        meas = synthesize_measurements(channels, [src_jam, src_tx], noise)
        estimate = estimate_dual(
            channels, meas.y, exclusion_radius=cfg.estimation.exclusion_radius_deg
        )
        if first_estimate is None:
            first_estimate = estimate
        rows.append([
            cfg.experiment_id, trial,
            angular_separation(d_jam, estimate.d_hat_1, grid),
            pol_error(src_jam.c_bar, estimate.c_bar_hat_1),
            angular_separation(d_tx, estimate.d_hat_2, grid),
            pol_error(src_tx.c_bar, estimate.c_bar_hat_2),
            float(estimate.eta_map[estimate.d_hat_1]),
            float(estimate.eta_res_map[estimate.d_hat_2]),
        ])
    if out_dir is not None:
        echo = config_to_dict(cfg)
        out = Path(out_dir)
        p1 = _write_csv(
            out / "dual_source_records.csv",
            ["experiment_id", "trial", "eps_doa_jammer_deg", "eps_pol_jammer_deg",
             "eps_doa_tx_deg", "eps_pol_tx_deg", "eta_peak", "eta_res_peak"],
            rows, echo,
        )
        p2 = _write_json(
            out / "dual_source_maps.json",
            {
                "config": echo,
                "jammer_direction": d_jam,
                "tx_direction": d_tx,
                "phi_deg": [float(x) for x in grid.phi_deg],
                "theta_deg": [float(x) for x in grid.theta_deg],
                "eta_map": [float(x) for x in first_estimate.eta_map],
                "eta_res_map": [float(x) for x in first_estimate.eta_res_map],
            },
        )
        print(f"[dual-scenario] wrote {p1} and {p2} in {time.perf_counter() - t0:.2f} s")
    return rows, first_estimate
