"""Grid-search estimators for source direction and polarization.

Single source: for every candidate direction d the K x 2 dictionary D_d
(columns = E_phi and E_theta responses over the sequence) is fitted to the
measurement vector by least squares, c_hat(d) = pinv(D_d) y, and scored by
the explained energy fraction

    eta(d) = ||D_d c_hat(d)||^2 / ||y||^2.

The direction estimate is the argmax of eta (ties break to the smallest
index) and the polarization state is the normalized fit there.

Two sources with a known strength imbalance: estimate the strongest source,
subtract its fitted contribution, search the residual for the weaker source
outside an angular exclusion neighborhood of the first estimate, then refit
both polarization vectors jointly from the stacked K x 4 dictionary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateMeasurementError,
    InvalidConfigurationError,
    InvalidInputError,
    NoSignalError,
    SecondSourceUndetectableError,
)
from .grid import SphericalGrid
from .mnt import MntModel, as_config_matrix, compute_channel

DEFAULT_EXCLUSION_RADIUS_DEG = 10.0

# ||y_res|| below this multiple of eps * ||y|| counts as an exactly cancelled
# measurement, i.e. no second source present.
RESIDUAL_FLOOR_FACTOR = 1e3

# Gram determinant above this fraction of (g11 + g22)^2 marks a candidate
# dictionary as safely rank 2 for the closed-form projection energy; below it
# the per-direction pseudoinverse path is used instead.
_RANK2_DET_FRACTION = 1e-6

ETA_UNEVALUATED = -1.0


@dataclass
class ChannelSet:
    """Stacked far-field channels of a configuration sequence.

    Row k of H_full is the full 2 N_D channel vector of configuration k;
    columns follow the grid's (E_phi, E_theta) interleaving.
    """

    H_full: np.ndarray
    configs: np.ndarray
    grid: SphericalGrid

    def __post_init__(self):
        if self.H_full.ndim != 2 or self.H_full.shape[1] != 2 * self.grid.n_directions:
            raise InvalidInputError(
                f"H_full must be (K, {2 * self.grid.n_directions}), got {self.H_full.shape}"
            )

    @property
    def n_configs(self) -> int:
        return int(self.H_full.shape[0])

    @classmethod
    def from_model(cls, model: MntModel, configs) -> "ChannelSet":
        configs = as_config_matrix(configs, model.n_meta)
        H = np.empty((configs.shape[0], 2 * model.grid.n_directions), dtype=np.complex128)
        for k, v in enumerate(configs):
            H[k] = compute_channel(model, v)
        return cls(H_full=H, configs=configs, grid=model.grid)


@dataclass
class SingleEstimate:
    d_hat: int
    c_hat: np.ndarray
    c_bar_hat: np.ndarray
    eta_map: np.ndarray


@dataclass
class DualEstimate:
    d_hat_1: int
    d_hat_2: int
    c_hat_1: np.ndarray
    c_hat_2: np.ndarray
    c_bar_hat_1: np.ndarray
    c_bar_hat_2: np.ndarray
    eta_map: np.ndarray
    eta_res_map: np.ndarray


def build_dictionary(channels: ChannelSet, d: int) -> np.ndarray:
    """K x 2 dictionary of direction d, columns (E_phi, E_theta)."""
    d = int(d)
    if not 0 <= d < channels.grid.n_directions:
        raise InvalidInputError(f"direction index {d} out of range")
    return channels.H_full[:, 2 * d : 2 * d + 2]


def fit_polarization(D: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Minimum-norm least-squares polarization-and-amplitude fit pinv(D) y.

    Singular values below max(K, 2) * eps * sigma_max are treated as zero, so
    a rank-deficient dictionary yields the minimum-norm solution.
    """
    D = np.asarray(D)
    rcond = max(D.shape) * np.finfo(np.float64).eps
    c, *_ = np.linalg.lstsq(D, np.asarray(y), rcond=rcond)
    return c


def projection_score(D: np.ndarray, c_hat: np.ndarray, y: np.ndarray) -> float:
    """Explained energy fraction ||D c_hat||^2 / ||y||^2."""
    y = np.asarray(y)
    den = float(np.linalg.norm(y) ** 2)
    if den == 0.0:
        raise DegenerateMeasurementError("measurement vector has zero norm")
    return float(np.linalg.norm(np.asarray(D) @ np.asarray(c_hat)) ** 2) / den


def _eta_scores(channels: ChannelSet, y: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Projection scores for all directions in idx, vectorized.

    Uses the closed-form 2x2 normal-equation energy where the dictionary Gram
    matrix is safely rank 2 and falls back to an explicit pseudoinverse fit
    for degenerate directions.
    """
    H = channels.H_full
    K = H.shape[0]
    den = float(np.linalg.norm(y) ** 2)
    h_phi = H[:, 2 * idx]
    h_theta = H[:, 2 * idx + 1]
    g11 = np.einsum("kd,kd->d", h_phi.real, h_phi.real) + np.einsum(
        "kd,kd->d", h_phi.imag, h_phi.imag
    )
    g22 = np.einsum("kd,kd->d", h_theta.real, h_theta.real) + np.einsum(
        "kd,kd->d", h_theta.imag, h_theta.imag
    )
    g12 = np.einsum("kd,kd->d", h_phi.conj(), h_theta)
    z1 = h_phi.conj().T @ y
    z2 = h_theta.conj().T @ y
    trace = g11 + g22
    if not np.any(trace > 0):
        raise NoSignalError("every candidate dictionary over the search set is zero")
    if K == 1:
        # A 1 x 2 system is always consistent: any nonzero dictionary explains
        # the scalar measurement exactly.
        return np.where(trace > 0, 1.0, 0.0)
    det = g11 * g22 - np.abs(g12) ** 2
    rank2 = det > _RANK2_DET_FRACTION * trace**2
    energy = np.zeros(idx.size)
    if np.any(rank2):
        num = (
            g22[rank2] * np.abs(z1[rank2]) ** 2
            + g11[rank2] * np.abs(z2[rank2]) ** 2
            - 2.0 * np.real(g12[rank2] * np.conj(z1[rank2]) * z2[rank2])
        )
        energy[rank2] = num / det[rank2]
    for j in np.flatnonzero(~rank2):
        if trace[j] == 0.0:
            continue
        D = np.column_stack((h_phi[:, j], h_theta[:, j]))
        energy[j] = float(np.linalg.norm(D @ fit_polarization(D, y)) ** 2)
    return energy / den


def _normalized_state(c: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(c)
    return c / n if n > 0 else np.zeros_like(c)


def estimate_single(channels: ChannelSet, y: np.ndarray, search_set=None) -> SingleEstimate:
    """Single-source direction and polarization estimate by dictionary search.

    eta is evaluated for every direction in search_set (all directions when
    None); the returned map carries the sentinel -1.0 outside the search set.
    """
    y = np.asarray(y, dtype=np.complex128).reshape(-1)
    if y.shape[0] != channels.n_configs:
        raise InvalidInputError("measurement length does not match the configuration count")
    if np.linalg.norm(y) == 0.0:
        raise DegenerateMeasurementError("measurement vector has zero norm")
    n_d = channels.grid.n_directions
    if search_set is None:
        idx = np.arange(n_d)
    else:
        idx = np.asarray(search_set, dtype=np.intp).reshape(-1)
        if idx.size == 0:
            raise InvalidConfigurationError("search set is empty")
        if idx.min() < 0 or idx.max() >= n_d:
            raise InvalidInputError("search set index out of range")
    eta_map = np.full(n_d, ETA_UNEVALUATED)
    eta_map[idx] = _eta_scores(channels, y, idx)
    d_hat = int(np.argmax(eta_map))
    c_hat = fit_polarization(build_dictionary(channels, d_hat), y)
    return SingleEstimate(
        d_hat=d_hat, c_hat=c_hat, c_bar_hat=_normalized_state(c_hat), eta_map=eta_map
    )


def estimate_dual(
    channels: ChannelSet,
    y: np.ndarray,
    search_set=None,
    exclusion_radius: float = DEFAULT_EXCLUSION_RADIUS_DEG,
) -> DualEstimate:
    """Two-source estimate: detect, cancel, detect again, then refit jointly.

    Steps: (1) single-source estimate of the strongest source; (2) residual
    y_res = y - D_1 c_1; (3) residual search excluding every direction within
    exclusion_radius (inclusive) of the first estimate; (4) joint
    least-squares refit of both polarization vectors from [D_1 D_2]; (5)
    normalization of both states.
    """
    if exclusion_radius <= 0:
        raise InvalidInputError(f"exclusion radius must be > 0, got {exclusion_radius}")
    y = np.asarray(y, dtype=np.complex128).reshape(-1)
    first = estimate_single(channels, y, search_set)
    D1 = build_dictionary(channels, first.d_hat)
    y_res = y - D1 @ first.c_hat
    floor = RESIDUAL_FLOOR_FACTOR * np.finfo(np.float64).eps * np.linalg.norm(y)
    if np.linalg.norm(y_res) <= floor:
        raise SecondSourceUndetectableError(
            "residual is numerically zero after cancelling the strongest source"
        )
    idx = (
        np.arange(channels.grid.n_directions)
        if search_set is None
        else np.asarray(search_set, dtype=np.intp).reshape(-1)
    )
    units = channels.grid.unit_vectors()
    cosines = np.clip(units[idx] @ units[first.d_hat], -1.0, 1.0)
    separations = np.degrees(np.arccos(cosines))
    reduced = idx[separations > exclusion_radius]
    if reduced.size == 0:
        raise InvalidConfigurationError(
            f"exclusion radius {exclusion_radius} deg empties the search set"
        )
    second = estimate_single(channels, y_res, reduced)
    D2 = build_dictionary(channels, second.d_hat)
    D12 = np.hstack((D1, D2))
    rcond = max(D12.shape) * np.finfo(np.float64).eps
    stacked, *_ = np.linalg.lstsq(D12, y, rcond=rcond)
    c1, c2 = stacked[:2], stacked[2:]
    return DualEstimate(
        d_hat_1=first.d_hat,
        d_hat_2=second.d_hat,
        c_hat_1=c1,
        c_hat_2=c2,
        c_bar_hat_1=_normalized_state(c1),
        c_bar_hat_2=_normalized_state(c2),
        eta_map=first.eta_map,
        eta_res_map=second.eta_map,
    )


def pol_error(c_true_bar: np.ndarray, c_est_bar: np.ndarray) -> float:
    """Angle in [0, 90] degrees between two unit polarization states.

    Equals arccos(|<c_true, c_est>|), so it is invariant to a global complex
    phase of either state.  Evaluated through the phase-aligned chord,
    2 arcsin(||c_est e^{-j arg g} - c_true|| / 2) with g the Hermitian inner
    product, which stays accurate down to machine precision for nearly
    identical states.
    """
    a = np.asarray(c_true_bar, dtype=np.complex128).reshape(-1)
    b = np.asarray(c_est_bar, dtype=np.complex128).reshape(-1)
    g = np.vdot(a, b)
    mag = abs(g)
    if mag == 0.0:
        return 90.0
    chord = np.linalg.norm(b * (g.conjugate() / mag) - a)
    return float(np.degrees(2.0 * np.arcsin(min(1.0, 0.5 * chord))))
