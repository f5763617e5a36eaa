"""Multiport-network channel model of a 1-bit dynamic metasurface antenna.

The antenna is abstracted as a scattering network with one feed port, N_M
"virtual" ports (one per tunable lumped element, each terminated by a 1-bit
reflective load) and 2 N_D far-field radiation ports (two transverse
polarizations per discretized direction).  All scattering parameters are
referenced to Z0 = 50 ohm; the reference impedance never enters the math here
because everything is expressed directly in scattering quantities.

For a binary control vector v the per-element load reflection coefficients are

    r(v) = alpha * 1 + (beta - alpha) * v,

and the feed-to-far-field channel vector is the resolvent map

    h(r) = h0 + A (I - Phi(r) Gamma)^(-1) Phi(r) b,      Phi(r) = diag(r),

where h0 is the direct feed-to-radiation channel, A the virtual-port-to-
radiation channels, Gamma the mutual coupling between virtual ports and b the
feed-to-virtual-port channel.  Entry 2d of h is the E_phi component of
direction d and entry 2d+1 the E_theta component.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgWarning, lapack, lu_factor, lu_solve

from .errors import InvalidInputError, SingularModelError
from .grid import SphericalGrid

Z0_OHM = 50.0

# Near-antipodal lossy 1-bit load states used for synthetic models.
DEFAULT_ALPHA = 0.9 * np.exp(1j * np.pi / 6)
DEFAULT_BETA = 0.9 * np.exp(-1j * 5 * np.pi / 6)
DEFAULT_COUPLING_STRENGTH = 0.6

# Reciprocal-condition floor below which the resolvent solve is refused.
RCOND_FLOOR = 1e-12


@dataclass
class MntModel:
    """Network parameters {alpha, beta, h0, A, Gamma, b} bound to a grid."""

    alpha: complex
    beta: complex
    h0: np.ndarray
    A: np.ndarray
    Gamma: np.ndarray
    b: np.ndarray
    grid: SphericalGrid

    @property
    def n_meta(self) -> int:
        return int(self.b.size)

    def validate(self) -> None:
        """Check shapes, load passivity and resolvent invertibility.

        Invertibility of (I - Phi Gamma) is checked at the two extremal
        configurations v = 0 and v = 1; synthesized models guarantee it for
        every configuration by construction.
        """
        n_ports = 2 * self.grid.n_directions
        n_m = self.n_meta
        if self.h0.shape != (n_ports,):
            raise InvalidInputError(f"h0 must have shape ({n_ports},), got {self.h0.shape}")
        if self.A.shape != (n_ports, n_m):
            raise InvalidInputError(f"A must have shape ({n_ports}, {n_m}), got {self.A.shape}")
        if self.Gamma.shape != (n_m, n_m):
            raise InvalidInputError(f"Gamma must be ({n_m}, {n_m}), got {self.Gamma.shape}")
        if abs(self.alpha) > 1 + 1e-12 or abs(self.beta) > 1 + 1e-12:
            raise InvalidInputError("passive loads require |alpha| <= 1 and |beta| <= 1")
        for extremal in (np.zeros(n_m, dtype=np.uint8), np.ones(n_m, dtype=np.uint8)):
            _load_excitation(self, extremal)


def _as_config_vector(v, n_meta: int) -> np.ndarray:
    v = np.asarray(v)
    if v.shape != (n_meta,):
        raise InvalidInputError(f"control vector must have shape ({n_meta},), got {v.shape}")
    if not np.isin(v, (0, 1)).all():
        raise InvalidInputError("control vector entries must be 0 or 1")
    return v


def as_config_matrix(configs, n_meta: int) -> np.ndarray:
    """Validate an ordered configuration sequence as a (K, n_meta) 0/1 array."""
    V = np.atleast_2d(np.asarray(configs))
    if V.ndim != 2 or V.shape[1] != n_meta or V.shape[0] < 1:
        raise InvalidInputError(f"expected a (K, {n_meta}) binary array, got shape {V.shape}")
    if not np.isin(V, (0, 1)).all():
        raise InvalidInputError("configuration entries must be 0 or 1")
    return V


def load_vector(v, model: MntModel) -> np.ndarray:
    """Per-element load reflection coefficients r(v) = alpha + (beta - alpha) v."""
    v = _as_config_vector(v, model.n_meta)
    return model.alpha + (model.beta - model.alpha) * v.astype(np.complex128)


def _load_excitation(model: MntModel, v) -> np.ndarray:
    """Solve (I - Phi(r) Gamma) x = Phi(r) b for the virtual-port excitation x.

    One dense LU solve per configuration; no explicit inverse.  Raises
    SingularModelError when the LAPACK reciprocal-condition estimate falls
    below RCOND_FLOOR.
    """
    r = load_vector(v, model)
    M = -r[:, None] * model.Gamma
    M[np.diag_indices_from(M)] += 1.0
    anorm = np.abs(M).sum(axis=0).max()
    with warnings.catch_warnings():
        # an exactly singular factorization is caught by the rcond check below
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(M, check_finite=False)
    rcond, info = lapack.zgecon(lu, anorm, norm="1")
    if info != 0:
        raise SingularModelError(f"condition estimation failed (info={info})", rcond=0.0)
    if rcond < RCOND_FLOOR:
        raise SingularModelError(
            f"(I - Phi Gamma) is numerically singular (rcond={rcond:.3e})", rcond=rcond
        )
    return lu_solve((lu, piv), r * model.b, check_finite=False)


def compute_channel(model: MntModel, v) -> np.ndarray:
    """Far-field channel vector h(r(v)) of length 2 N_D."""
    return model.h0 + model.A @ _load_excitation(model, v)


def radiation_port_indices(directions) -> np.ndarray:
    """Interleaved (E_phi, E_theta) row indices for the given direction indices."""
    d = np.asarray(directions, dtype=np.intp).ravel()
    rows = np.empty(2 * d.size, dtype=np.intp)
    rows[0::2] = 2 * d
    rows[1::2] = 2 * d + 1
    return rows


def compute_channel_rows(model: MntModel, v, directions) -> np.ndarray:
    """Channel entries restricted to the given directions.

    Shares the single resolvent solve with compute_channel and applies only
    the selected rows of A, so a caller revisiting one configuration row does
    not pay for the full grid.
    """
    d = np.asarray(directions, dtype=np.intp).ravel()
    if d.size == 0:
        raise InvalidInputError("directions must be nonempty")
    if d.min() < 0 or d.max() >= model.grid.n_directions:
        raise InvalidInputError("direction index out of range")
    rows = radiation_port_indices(d)
    return model.h0[rows] + model.A[rows] @ _load_excitation(model, v)


def _crandn(rng: np.random.Generator, *shape) -> np.ndarray:
    """Circular complex Gaussian CN(0, 1) samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def synthesize_model(
    n_meta: int,
    grid: SphericalGrid,
    coupling_strength: float = DEFAULT_COUPLING_STRENGTH,
    seed: int = 0,
    alpha: complex = DEFAULT_ALPHA,
    beta: complex = DEFAULT_BETA,
) -> MntModel:
    """Draw a random model that is invertible for every configuration.

    h0, A and b are i.i.d. CN(0, 1).  Gamma is complex symmetric (reciprocity)
    with CN(0, 1) entries, then rescaled so that
    max(|alpha|, |beta|) * ||Gamma||_2 <= coupling_strength < 1, which bounds
    the spectral radius of Phi(r) Gamma away from 1 for all 2^N_M load
    vectors.  Deterministic in seed.
    """
    if n_meta < 1:
        raise InvalidInputError(f"n_meta must be >= 1, got {n_meta}")
    if not 0.0 <= coupling_strength < 1.0:
        raise InvalidInputError(f"coupling_strength must lie in [0, 1), got {coupling_strength}")
    if abs(alpha) > 1 or abs(beta) > 1:
        raise InvalidInputError("passive loads require |alpha| <= 1 and |beta| <= 1")
    rng = np.random.default_rng(seed)
    n_ports = 2 * grid.n_directions
    h0 = _crandn(rng, n_ports)
    A = _crandn(rng, n_ports, n_meta)
    b = _crandn(rng, n_meta)
    G = _crandn(rng, n_meta, n_meta)
    Gamma = np.triu(G) + np.triu(G, 1).T
    load_mag = max(abs(alpha), abs(beta))
    norm2 = np.linalg.norm(Gamma, 2)
    if coupling_strength == 0.0 or load_mag == 0.0 or norm2 == 0.0:
        Gamma = np.zeros_like(Gamma)
    else:
        # Tiny safety factor keeps the rescaled norm strictly at or below the
        # target despite rounding.
        Gamma *= (1.0 - 1e-9) * coupling_strength / (load_mag * norm2)
    model = MntModel(alpha=complex(alpha), beta=complex(beta), h0=h0, A=A, Gamma=Gamma, b=b, grid=grid)
    model.validate()
    return model


def random_configs(n: int, n_meta: int, rng: np.random.Generator | int) -> np.ndarray:
    """n uniform random binary configurations as a (n, n_meta) uint8 array."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return rng.integers(0, 2, size=(int(n), int(n_meta)), dtype=np.uint8)


def enumerate_configs(n_meta: int) -> np.ndarray:
    """All 2^n_meta binary configurations, row i = binary digits of i."""
    n_meta = int(n_meta)
    if n_meta > 20:
        raise InvalidInputError("enumeration above 2^20 configurations refused")
    i = np.arange(2**n_meta, dtype=np.uint32)
    return ((i[:, None] >> np.arange(n_meta)[None, :]) & 1).astype(np.uint8)


def diversity_map(
    model: MntModel,
    n_samples: int = 1000,
    seed: int = 0,
    configs=None,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-direction standard deviation of E_phi and E_theta over random configurations.

    For complex samples the standard deviation is the square root of the mean
    squared deviation from the complex sample mean.  Pass configs to evaluate
    an explicit configuration ensemble (e.g. an exhaustive enumeration)
    instead of drawing n_samples uniform ones.
    """
    if configs is None:
        if n_samples < 2:
            raise InvalidInputError(f"n_samples must be >= 2, got {n_samples}")
        configs = random_configs(n_samples, model.n_meta, np.random.default_rng(seed))
    else:
        configs = as_config_matrix(configs, model.n_meta)
        if configs.shape[0] < 2:
            raise InvalidInputError("need at least 2 configurations")
    H = np.empty((configs.shape[0], 2 * model.grid.n_directions), dtype=np.complex128)
    for k, v in enumerate(configs):
        H[k] = compute_channel(model, v)
    sd = np.sqrt(np.mean(np.abs(H - H.mean(axis=0)) ** 2, axis=0))
    return sd[0::2], sd[1::2]
