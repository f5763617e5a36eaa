"""Sensing-matrix surrogate objectives and the binary sequence optimizer.

A candidate sequence of K configurations is scored through its sensing
matrix, the K x 2 N_opt stack of far-field responses over a direction subset.
The surrogate objective is the effective rank

    R_eff(H) = exp(-sum_i p_i log p_i),    p_i = sigma_i / sum_j sigma_j,

of the raw matrix, of the column-normalized matrix (each column scaled to
unit l2 norm), or of the direction-block-normalized matrix (each E_phi /
E_theta column pair scaled jointly to unit Frobenius norm, preserving the
balance between the two polarizations of a direction).

Sequences are optimized by multi-start greedy coordinate ascent over the
K * N_M control bits: flip one bit, recompute only the affected sensing-matrix
row, accept the flip only on a strict objective increase, stop early on a
flip-free sweep, keep the best restart.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack
from threadpoolctl import threadpool_limits

from .errors import InvalidConfigurationError, InvalidInputError, SingularModelError
from .mnt import (
    MntModel,
    _load_excitation,
    as_config_matrix,
    compute_channel_rows,
    radiation_port_indices,
    random_configs,
)

OBJECTIVE_KINDS = ("raw", "column_normalized", "direction_block_normalized")

DEFAULT_RESTARTS = 4
DEFAULT_MAX_SWEEPS = 20


@dataclass
class SensingMatrix:
    """K x 2 |subset| response stack; row k belongs to configuration k."""

    H: np.ndarray
    subset: np.ndarray


@dataclass
class OptimizerConfig:
    restarts: int = DEFAULT_RESTARTS
    max_sweeps: int = DEFAULT_MAX_SWEEPS
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1 or self.max_sweeps < 1:
            raise InvalidInputError("restarts and max_sweeps must be >= 1")


@dataclass
class OptimizationResult:
    """Best sequence over all restarts plus a full audit trail.

    trace[r] holds the objective after initialization followed by the value
    after every accepted flip of restart r, so each inner list is strictly
    increasing.  restart_errors records restarts aborted by singular model
    evaluations.
    """

    best_sequence: np.ndarray
    best_value: float
    best_matrix: SensingMatrix
    trace: list = field(default_factory=list)
    sweeps_used: list = field(default_factory=list)
    restart_errors: list = field(default_factory=list)


def _singular_values(H: np.ndarray) -> np.ndarray:
    """Descending singular values of H, exact to LAPACK accuracy.

    Wide matrices are first reduced by a QR factorization of the conjugate
    transpose (singular values are invariant under it), which is much faster
    than a direct SVD when the column count dominates.
    """
    H = np.asarray(H)
    if H.dtype != np.complex128:
        H = H.astype(np.complex128)
    m, n = H.shape
    if n >= 2 * m and m > 1:
        tall = np.conjugate(H).T  # owned buffer, F-contiguous, safe to overwrite
        if not tall.flags.f_contiguous:
            tall = np.asfortranarray(tall)
        qr, _tau, _work, info = lapack.zgeqrf(tall, overwrite_a=1)
        if info != 0:
            raise InvalidInputError(f"QR reduction failed (info={info})")
        H = np.triu(qr[:m, :m])
    return np.linalg.svd(H, compute_uv=False)


def effective_rank(H) -> float:
    """Exponentiated Shannon entropy of the normalized singular values.

    Singular values at or below max(shape) * eps * sigma_max count as zero
    and contribute nothing (the 0 log 0 = 0 convention); an all-zero matrix
    is rejected.  The value always lies in [1, min(shape)].
    """
    H = np.asarray(H)
    if H.ndim != 2 or H.size == 0:
        raise InvalidInputError("effective rank needs a nonempty 2-d matrix")
    s = _singular_values(H)
    if s[0] == 0.0:
        raise InvalidInputError("effective rank of an all-zero matrix is undefined")
    s = s[s > max(H.shape) * np.finfo(np.float64).eps * s[0]]
    p = s / s.sum()
    return float(np.exp(-np.sum(p * np.log(p))))


def normalize_columns(H: np.ndarray) -> np.ndarray:
    """Scale every nonzero column to unit l2 norm; zero columns stay zero."""
    H = np.asarray(H)
    norms = np.linalg.norm(H, axis=0)
    return H / np.where(norms > 0, norms, 1.0)


def normalize_direction_blocks(H: np.ndarray) -> np.ndarray:
    """Scale every (E_phi, E_theta) column pair to unit Frobenius norm.

    One real factor per pair, so the norm ratio between the two columns of a
    block is preserved; zero blocks stay zero.
    """
    H = np.asarray(H)
    if H.shape[1] % 2 != 0:
        raise InvalidInputError("direction-block normalization needs an even column count")
    sq = np.abs(H) ** 2
    block = np.sqrt(sq[:, 0::2].sum(axis=0) + sq[:, 1::2].sum(axis=0))
    scale = 1.0 / np.where(block > 0, block, 1.0)
    return H * np.repeat(scale, 2)[None, :]


def objective(H, kind: str) -> float:
    """Effective rank of the sensing matrix after the kind's normalization."""
    if kind not in OBJECTIVE_KINDS:
        raise InvalidInputError(f"unknown objective kind {kind!r}, expected one of {OBJECTIVE_KINDS}")
    M = H.H if isinstance(H, SensingMatrix) else np.asarray(H)
    if kind == "column_normalized":
        M = normalize_columns(M)
    elif kind == "direction_block_normalized":
        M = normalize_direction_blocks(M)
    return effective_rank(M)


def build_sensing_matrix(model: MntModel, configs, subset) -> SensingMatrix:
    """Assemble the response stack of a sequence over a direction subset."""
    configs = as_config_matrix(configs, model.n_meta)
    subset = np.asarray(subset, dtype=np.intp).reshape(-1)
    if subset.size == 0:
        raise InvalidConfigurationError("direction subset is empty")
    H = np.empty((configs.shape[0], 2 * subset.size), dtype=np.complex128)
    for k, v in enumerate(configs):
        H[k] = compute_channel_rows(model, v, subset)
    return SensingMatrix(H=H, subset=subset)


def greedy_optimize(
    model: MntModel,
    K: int,
    subset,
    kind: str,
    cfg: OptimizerConfig | None = None,
    initializations=None,
) -> OptimizationResult:
    """Multi-start greedy coordinate ascent over the K * N_M control bits.

    Each restart starts from an independent random binary sequence (or from
    the corresponding entry of initializations, which overrides the restart
    count), sweeps all coordinates in a fresh random order per sweep, accepts
    a flip only on a strict objective increase and stops early after a sweep
    without any accepted flip.  Singular model evaluations abort the restart
    and are reported in restart_errors.  Deterministic in cfg.seed.
    """
    cfg = cfg or OptimizerConfig()
    if kind not in OBJECTIVE_KINDS:
        raise InvalidInputError(f"unknown objective kind {kind!r}")
    K = int(K)
    if K < 1:
        raise InvalidInputError(f"K must be >= 1, got {K}")
    subset = np.asarray(subset, dtype=np.intp).reshape(-1)
    if subset.size == 0:
        raise InvalidConfigurationError("direction subset is empty")
    n_m = model.n_meta
    rows = radiation_port_indices(subset)
    A_sub = np.ascontiguousarray(model.A[rows])
    h0_sub = model.h0[rows]

    if initializations is not None:
        starts = [as_config_matrix(V, n_m) for V in initializations]
        if any(V.shape[0] != K for V in starts):
            raise InvalidInputError("every initialization must have K rows")
        n_restarts = len(starts)
    else:
        starts = None
        n_restarts = cfg.restarts

    children = np.random.SeedSequence(cfg.seed).spawn(n_restarts)
    best_value = -np.inf
    best_sequence = None
    best_H = None
    trace: list = []
    sweeps_used: list = []
    restart_errors: list = []

    # The sweeps make tens of thousands of small LAPACK calls; threaded BLAS
    # thrashes badly at those sizes, so pin it to one thread for the run.
    with threadpool_limits(limits=1):
        for r in range(n_restarts):
            rng = np.random.default_rng(children[r])
            V = (
                starts[r].astype(np.uint8)
                if starts is not None
                else random_configs(K, n_m, rng)
            )
            try:
                H = np.empty((K, rows.size), dtype=np.complex128)
                for k in range(K):
                    H[k] = h0_sub + A_sub @ _load_excitation(model, V[k])
                current = objective(H, kind)
                restart_trace = [current]
                n_sweeps = 0
                for _sweep in range(cfg.max_sweeps):
                    accepted_any = False
                    for coord in rng.permutation(K * n_m):
                        k, i = divmod(int(coord), n_m)
                        V[k, i] ^= 1
                        old_row = H[k].copy()
                        H[k] = h0_sub + A_sub @ _load_excitation(model, V[k])
                        value = objective(H, kind)
                        if value > current:
                            current = value
                            restart_trace.append(value)
                            accepted_any = True
                        else:
                            V[k, i] ^= 1
                            H[k] = old_row
                    n_sweeps += 1
                    if not accepted_any:
                        break
            except SingularModelError as exc:
                restart_errors.append(f"restart {r}: {exc}")
                continue
            trace.append(restart_trace)
            sweeps_used.append(n_sweeps)
            if current > best_value:
                best_value = current
                best_sequence = V.copy()
                best_H = H.copy()

    if best_sequence is None:
        raise SingularModelError(
            "every restart aborted on a singular model evaluation: "
            + "; ".join(restart_errors)
        )
    return OptimizationResult(
        best_sequence=best_sequence,
        best_value=float(best_value),
        best_matrix=SensingMatrix(H=best_H, subset=subset),
        trace=trace,
        sweeps_used=sweeps_used,
        restart_errors=restart_errors,
    )


def random_sequence_stats(
    model: MntModel,
    K: int,
    subset,
    kind: str,
    n_sequences: int = 100,
    seed: int = 0,
) -> tuple[float, float, list]:
    """Objective mean and sample standard deviation over random sequences."""
    if n_sequences < 2:
        raise InvalidInputError(f"n_sequences must be >= 2, got {n_sequences}")
    rng = np.random.default_rng(seed)
    values = []
    with threadpool_limits(limits=1):
        for _ in range(int(n_sequences)):
            V = random_configs(K, model.n_meta, rng)
            values.append(objective(build_sensing_matrix(model, V, subset), kind))
    arr = np.asarray(values)
    return float(arr.mean()), float(arr.std(ddof=1)), values
