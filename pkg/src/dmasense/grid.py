"""Discretized far-field direction grid and angular geometry.

Angles follow the physics convention: the azimuth phi is measured in the
xy-plane from the +x axis toward +y and lives in (-180, 180] degrees; the
polar angle theta is measured from the +z axis and lives in [0, 180] degrees.
Direction index d maps to one (phi, theta) grid point; every channel vector
stores the two transverse field components of direction d at positions 2d
(E_phi) and 2d+1 (E_theta).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfigurationError, InvalidInputError

DEFAULT_POLE_MARGIN_DEG = 3.0
DEFAULT_SUBSET_STRIDE = 10


@dataclass
class SphericalGrid:
    """Ordered set of far-field directions on a regular (phi, theta) lattice.

    Poles appear at most once each; index order is theta-major (north pole
    first, then rings of increasing theta with phi ascending, south pole last).
    """

    phi_deg: np.ndarray
    theta_deg: np.ndarray
    spacing_phi: float
    spacing_theta: float
    _unit_cache: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)
    _index_cache: dict | None = field(default=None, init=False, repr=False, compare=False)

    @property
    def n_directions(self) -> int:
        return int(self.phi_deg.size)

    def direction(self, d: int) -> tuple[float, float]:
        """(phi, theta) in degrees for direction index d."""
        d = int(d)
        if not 0 <= d < self.n_directions:
            raise InvalidInputError(f"direction index {d} out of range [0, {self.n_directions})")
        return float(self.phi_deg[d]), float(self.theta_deg[d])

    def index_of(self, phi_deg: float, theta_deg: float) -> int:
        """Index of the grid point at (phi, theta); poles match any phi."""
        if self._index_cache is None:
            self._index_cache = {
                (round(float(p), 6), round(float(t), 6)): i
                for i, (p, t) in enumerate(zip(self.phi_deg, self.theta_deg))
            }
        theta = round(float(theta_deg), 6)
        key = (0.0, theta) if theta in (0.0, 180.0) else (round(float(phi_deg), 6), theta)
        try:
            return self._index_cache[key]
        except KeyError:
            raise InvalidInputError(
                f"({phi_deg}, {theta_deg}) is not a grid point of the "
                f"{self.spacing_phi}/{self.spacing_theta} degree grid"
            ) from None

    def unit_vectors(self) -> np.ndarray:
        """(N_D, 3) array of unit direction vectors, cached after first call."""
        if self._unit_cache is None:
            phi = np.deg2rad(self.phi_deg)
            theta = np.deg2rad(self.theta_deg)
            st = np.sin(theta)
            self._unit_cache = np.column_stack((st * np.cos(phi), st * np.sin(phi), np.cos(theta)))
        return self._unit_cache


def _check_divides(spacing: float, full: float, name: str) -> int:
    if spacing <= 0:
        raise InvalidInputError(f"{name} spacing must be positive, got {spacing}")
    ratio = full / spacing
    if abs(ratio - round(ratio)) > 1e-9:
        raise InvalidInputError(f"{name} spacing {spacing} does not divide {full}")
    return int(round(ratio))


def build_grid(spacing_phi: float, spacing_theta: float) -> SphericalGrid:
    """Build the direction grid for the given angular spacings in degrees.

    theta ranges over {0, spacing_theta, ..., 180} and phi over
    {-180 + spacing_phi, ..., 180}; the two pole rings collapse to a single
    direction each, stored with phi = 0.  A 3 degree spacing therefore yields
    59 * 120 + 2 = 7082 directions.
    """
    n_phi = _check_divides(spacing_phi, 360.0, "phi")
    n_theta = _check_divides(spacing_theta, 180.0, "theta")
    phi_ring = -180.0 + spacing_phi * np.arange(1, n_phi + 1)
    phis = [0.0]
    thetas = [0.0]
    for i in range(1, n_theta):
        theta = spacing_theta * i
        phis.extend(phi_ring)
        thetas.extend([theta] * n_phi)
    phis.append(0.0)
    thetas.append(180.0)
    return SphericalGrid(
        phi_deg=np.asarray(phis, dtype=float),
        theta_deg=np.asarray(thetas, dtype=float),
        spacing_phi=float(spacing_phi),
        spacing_theta=float(spacing_theta),
    )


def unit_vector(phi_deg: float, theta_deg: float) -> np.ndarray:
    """Unit vector (sin t cos p, sin t sin p, cos t) for angles in degrees."""
    phi = np.deg2rad(phi_deg)
    theta = np.deg2rad(theta_deg)
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def angular_separation(d_true: int, d_est: int, grid: SphericalGrid) -> float:
    """Great-circle angle in degrees between two grid directions.

    Identical indices return exactly 0.0; otherwise the dot product of the
    unit vectors is clamped to [-1, 1] before the arccosine.
    """
    d_true = int(d_true)
    d_est = int(d_est)
    if not (0 <= d_true < grid.n_directions and 0 <= d_est < grid.n_directions):
        raise InvalidInputError("direction index out of range")
    if d_true == d_est:
        return 0.0
    units = grid.unit_vectors()
    dot = float(np.clip(units[d_true] @ units[d_est], -1.0, 1.0))
    return float(np.degrees(np.arccos(dot)))


def valid_source_directions(
    grid: SphericalGrid, pole_margin: float = DEFAULT_POLE_MARGIN_DEG
) -> np.ndarray:
    """Indices of all directions with pole_margin <= theta <= 180 - pole_margin.

    The boundary is inclusive: a ring at exactly pole_margin is retained.
    """
    keep = (grid.theta_deg >= pole_margin) & (grid.theta_deg <= 180.0 - pole_margin)
    idx = np.flatnonzero(keep)
    if idx.size == 0:
        raise InvalidConfigurationError(
            f"pole margin {pole_margin} deg leaves no valid source directions"
        )
    return idx


def optimization_subset(
    grid: SphericalGrid,
    stride: int = DEFAULT_SUBSET_STRIDE,
    pole_margin: float = DEFAULT_POLE_MARGIN_DEG,
) -> np.ndarray:
    """Subsampled direction set used by the sequence optimizer.

    Drops directions closer than pole_margin to either pole (the spherical
    polarization basis degenerates there and azimuthal neighbors are nearly
    redundant), then keeps every stride-th survivor in grid order.
    """
    stride = int(stride)
    if stride < 1:
        raise InvalidInputError(f"stride must be >= 1, got {stride}")
    idx = valid_source_directions(grid, pole_margin)[::stride]
    if idx.size == 0:
        raise InvalidConfigurationError("optimization subset is empty")
    return idx
