"""Uniform planar array, steering vectors and the analog beam codebook.

Global frame: x east, y north, z up. Azimuth is measured from +x toward +y,
elevation from the horizontal plane. The panel's boresight points at
``(boresight_az, tilt)``; columns run along the horizontal in-panel axis and
rows along the vertical in-panel axis, so with zero tilt and zero boresight
azimuth element (r, c) has phase 2*pi*d*(c*cos(el)*sin(az) + r*sin(el)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ArrayGeometry:
    n_rows: int = 32
    n_cols: int = 32
    spacing_wavelengths: float = 0.5
    tilt_rad: float = 0.0
    boresight_az_rad: float = 0.0

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError("array needs at least one row and one column")
        if self.spacing_wavelengths <= 0:
            raise ValueError("element spacing must be positive")

    @property
    def n_elements(self) -> int:
        return self.n_rows * self.n_cols

    def panel_axes(self) -> tuple[np.ndarray, np.ndarray]:
        """Unit vectors of the column and row axes in the global frame."""
        a, t = self.boresight_az_rad, self.tilt_rad
        col_axis = np.array([-np.sin(a), np.cos(a), 0.0])
        row_axis = np.array([-np.sin(t) * np.cos(a), -np.sin(t) * np.sin(a), np.cos(t)])
        return col_axis, row_axis

    def direction_cosines(self, az, el) -> tuple[np.ndarray, np.ndarray]:
        k = unit_vector(az, el)
        col_axis, row_axis = self.panel_axes()
        return k @ col_axis, k @ row_axis


@dataclass(frozen=True)
class Direction:
    azimuth_rad: float
    elevation_rad: float

    def __post_init__(self):
        if not -np.pi / 2 - 1e-12 <= self.elevation_rad <= np.pi / 2 + 1e-12:
            raise ValueError("elevation must lie in [-pi/2, pi/2]")
        # wrap azimuth to [-pi, pi)
        az = (self.azimuth_rad + np.pi) % (2 * np.pi) - np.pi
        object.__setattr__(self, "azimuth_rad", float(az))


def unit_vector(az, el) -> np.ndarray:
    az = np.asarray(az, dtype=float)
    el = np.asarray(el, dtype=float)
    return np.stack([np.cos(az) * np.cos(el), np.sin(az) * np.cos(el), np.sin(el)], axis=-1)


def steering_matrix(geometry: ArrayGeometry, az, el) -> np.ndarray:
    """Steering vectors for many directions, shape (n_dirs, N), unit norm."""
    u_c, u_r = geometry.direction_cosines(np.atleast_1d(az), np.atleast_1d(el))
    d = geometry.spacing_wavelengths
    a_c = np.exp(2j * np.pi * d * np.outer(u_c, np.arange(geometry.n_cols)))
    a_r = np.exp(2j * np.pi * d * np.outer(u_r, np.arange(geometry.n_rows)))
    # element index r * n_cols + c
    a = (a_r[:, :, None] * a_c[:, None, :]).reshape(len(u_c), -1)
    return a / np.sqrt(geometry.n_elements)


def steering_vector(geometry: ArrayGeometry, direction: Direction) -> np.ndarray:
    return steering_matrix(geometry, direction.azimuth_rad, direction.elevation_rad)[0]


def beamformed_gain(w, a_rx, a_tx, f) -> complex:
    """(w^H a_rx)(a_tx^H f): scalar response of the rank-one path matrix a_rx a_tx^H."""
    vecs = [np.asarray(v).ravel() for v in (w, a_rx, a_tx, f)]
    if len({v.size for v in vecs}) != 1:
        raise ValueError("beamforming vectors must all have length N")
    w, a_rx, a_tx, f = vecs
    return complex(np.vdot(w, a_rx) * np.vdot(a_tx, f))


def _dirichlet(n: int, x: np.ndarray) -> np.ndarray:
    """(1/n) sum_{i<n} exp(j 2 pi x i), evaluated in closed form."""
    num = np.sin(np.pi * n * x)
    den = n * np.sin(np.pi * x)
    small = np.abs(den) < 1e-12
    ratio = np.where(small, np.cos(np.pi * n * x) / np.where(small, np.cos(np.pi * x), 1.0),
                     num / np.where(small, 1.0, den))
    return np.exp(1j * np.pi * (n - 1) * x) * ratio


@dataclass(frozen=True)
class Codebook:
    geometry: ArrayGeometry
    azimuth_rad: np.ndarray
    elevation_rad: np.ndarray
    n_az: int
    n_el: int

    def __len__(self) -> int:
        return self.azimuth_rad.size

    @property
    def weights(self) -> np.ndarray:
        return steering_matrix(self.geometry, self.azimuth_rad, self.elevation_rad)

    def direction(self, index: int) -> Direction:
        return Direction(float(self.azimuth_rad[index]), float(self.elevation_rad[index]))

    def response(self, az, el) -> np.ndarray:
        """w_b^H a(dir) for every beam and direction, shape (n_beams, n_dirs).

        Uses the separable row/column structure instead of length-N products.
        """
        g = self.geometry
        bu_c, bu_r = g.direction_cosines(self.azimuth_rad, self.elevation_rad)
        pu_c, pu_r = g.direction_cosines(np.atleast_1d(az), np.atleast_1d(el))
        d = g.spacing_wavelengths
        return (_dirichlet(g.n_cols, d * (pu_c[None, :] - bu_c[:, None]))
                * _dirichlet(g.n_rows, d * (pu_r[None, :] - bu_r[:, None])))

    def monostatic_gain(self, az, el) -> np.ndarray:
        """beamformed_gain with w = f = beam and a_rx = a_tx = a(dir): |w^H a|^2."""
        return np.abs(self.response(az, el)) ** 2


def dft_codebook(geometry: ArrayGeometry, n_az: int, n_el: int,
                 az_span: tuple[float, float], el_span: tuple[float, float]) -> Codebook:
    """Steering-vector beams on a uniform (azimuth, elevation) grid.

    Beams are ordered elevation-major: index = i_el * n_az + i_az.
    """
    if n_az < 1 or n_el < 1:
        raise ValueError("n_az and n_el must be >= 1")
    grids = []
    for n, (lo, hi), name in ((n_az, az_span, "azimuth"), (n_el, el_span, "elevation")):
        if hi < lo:
            raise ValueError(f"{name} span is reversed")
        if n > 1 and hi == lo:
            raise ValueError(f"empty {name} span with {n} beams")
        grids.append(np.array([(lo + hi) / 2]) if n == 1 else np.linspace(lo, hi, n))
    if el_span[0] < -np.pi / 2 or el_span[1] > np.pi / 2:
        raise ValueError("elevation span must lie within [-pi/2, pi/2]")
    el, az = np.meshgrid(grids[1], grids[0], indexing="ij")
    return Codebook(geometry, az.ravel(), el.ravel(), n_az, n_el)
