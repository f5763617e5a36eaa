"""Feed-signal synthesis for one or two far-field sources, and SNR calibration.

For configuration k the noiseless received signal of a source at direction d
with polarization-and-amplitude vector c = (c_phi, c_theta) is

    y_k = h_phi_k(d) c_phi + h_theta_k(d) c_theta,

summed over sources in the two-source case, plus circular complex Gaussian
noise n_k ~ CN(0, sigma2).  The SNR scale is anchored to a reference power
P_ref, the median received-signal variance of a unit-amplitude source over
random configurations, valid directions and random polarization states;
sigma2 = P_ref 10^(-SNR_dB / 10) is then held fixed across sequences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .grid import DEFAULT_POLE_MARGIN_DEG, SphericalGrid, valid_source_directions
from .mnt import MntModel, compute_channel, random_configs

REFERENCE_N_CONFIGS = 100
REFERENCE_N_POLS = 3


@dataclass
class SourceSpec:
    """A far-field source: grid direction index plus complex 2-vector c."""

    direction: int
    c: np.ndarray

    def __post_init__(self):
        self.direction = int(self.direction)
        self.c = np.asarray(self.c, dtype=np.complex128).reshape(2)
        if np.linalg.norm(self.c) == 0.0:
            raise InvalidInputError("source polarization-amplitude vector must be nonzero")

    @property
    def c_bar(self) -> np.ndarray:
        """Normalized polarization state."""
        return self.c / np.linalg.norm(self.c)


@dataclass
class NoiseSpec:
    """Noise power per complex scalar measurement plus the draw seed."""

    sigma2: float
    seed: int = 0

    def __post_init__(self):
        if self.sigma2 < 0:
            raise InvalidInputError(f"sigma2 must be >= 0, got {self.sigma2}")


@dataclass
class MeasurementSet:
    y: np.ndarray
    configs: np.ndarray
    noise: NoiseSpec


def _check_sources(sources) -> list[SourceSpec]:
    sources = list(sources)
    if not 1 <= len(sources) <= 2:
        raise InvalidInputError(f"expected 1 or 2 sources, got {len(sources)}")
    if len(sources) == 2 and sources[0].direction == sources[1].direction:
        raise InvalidInputError("the two source directions must be distinct")
    return sources


def noiseless_vector(channels, sources) -> np.ndarray:
    """Noiseless received signals for all K configurations at once."""
    sources = _check_sources(sources)
    H = channels.H_full
    y = np.zeros(H.shape[0], dtype=np.complex128)
    for src in sources:
        d = src.direction
        y += H[:, 2 * d] * src.c[0] + H[:, 2 * d + 1] * src.c[1]
    return y


def noiseless_signal(channels, k: int, sources) -> complex:
    """Noiseless received signal of configuration k."""
    k = int(k)
    if not 0 <= k < channels.H_full.shape[0]:
        raise InvalidInputError(f"configuration index {k} out of range")
    return complex(noiseless_vector(channels, sources)[k])


def random_polarization_states(n: int, rng: np.random.Generator | int) -> np.ndarray:
    """(n, 2) unit-norm states drawn uniformly on the complex projective sphere."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    c = (rng.standard_normal((int(n), 2)) + 1j * rng.standard_normal((int(n), 2))) / np.sqrt(2.0)
    return c / np.linalg.norm(c, axis=1, keepdims=True)


def reference_power(
    model: MntModel,
    grid: SphericalGrid,
    n_configs: int = REFERENCE_N_CONFIGS,
    n_pols: int = REFERENCE_N_POLS,
    seed: int = 0,
    configs=None,
    pole_margin: float = DEFAULT_POLE_MARGIN_DEG,
) -> float:
    """Median received-signal variance of a unit-amplitude source.

    Draws a reference ensemble of n_configs random configurations and n_pols
    random normalized polarization states, computes for every (valid
    direction, state) pair the variance of the noiseless signal across the
    ensemble, and returns the median over all pairs.  The complex variance is
    the mean squared deviation from the complex mean.  An explicit ensemble
    can be supplied through configs (n_configs is then ignored).
    """
    if n_pols < 1:
        raise InvalidInputError(f"n_pols must be >= 1, got {n_pols}")
    rng = np.random.default_rng(seed)
    pols = random_polarization_states(n_pols, rng)
    if configs is None:
        if n_configs < 2:
            raise InvalidInputError(f"n_configs must be >= 2, got {n_configs}")
        configs = random_configs(n_configs, model.n_meta, rng)
    H = np.empty((len(configs), 2 * grid.n_directions), dtype=np.complex128)
    for k, v in enumerate(configs):
        H[k] = compute_channel(model, v)
    valid = valid_source_directions(grid, pole_margin)
    h_phi = H[:, 2 * valid]
    h_theta = H[:, 2 * valid + 1]
    variances = np.empty((n_pols, valid.size))
    for i, c in enumerate(pols):
        s = h_phi * c[0] + h_theta * c[1]
        variances[i] = np.mean(np.abs(s - s.mean(axis=0)) ** 2, axis=0)
    return float(np.median(variances))


def noise_power(p_ref: float, snr_db: float) -> float:
    """sigma2 = P_ref 10^(-SNR_dB / 10); snr_db = inf gives exactly 0."""
    if p_ref <= 0:
        raise InvalidInputError(f"reference power must be positive, got {p_ref}")
    return float(p_ref * 10.0 ** (-snr_db / 10.0))


def synthesize_measurements(channels, sources, noise: NoiseSpec) -> MeasurementSet:
    """Noiseless signals plus i.i.d. CN(0, sigma2) noise, deterministic in seed."""
    y = noiseless_vector(channels, sources)
    if noise.sigma2 > 0:
        rng = np.random.default_rng(noise.seed)
        scale = np.sqrt(noise.sigma2 / 2.0)
        y = y + scale * (rng.standard_normal(y.size) + 1j * rng.standard_normal(y.size))
    return MeasurementSet(y=y, configs=channels.configs, noise=noise)
