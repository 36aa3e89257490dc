"""Frequency-domain multipath model for a planar array observed over OFDM subcarriers.

Each active subcarrier k yields one array snapshot

    x(k) = sum_l beta_l * a(theta_l) * S(w_k) * exp(-1j * w_k * tau_l) + w(k)

where ``a`` is the narrowband far-field steering vector of the array and
``w_k`` is the baseband angular frequency of the subcarrier. Angles are
azimuths in radians, delays are in seconds, and sensor positions are in
carrier wavelengths.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ArrayGeometry:
    """Planar sensor layout; ``positions`` is an (M, 2) array in wavelengths."""

    positions: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim == 1 and pos.size == 2:
            pos = pos.reshape(1, 2)
        if pos.ndim != 2 or pos.shape[1] != 2 or pos.shape[0] < 1:
            raise ValueError("positions must have shape (M, 2) with M >= 1")
        if not np.all(np.isfinite(pos)):
            raise ValueError("sensor positions must be finite")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def M(self) -> int:
        return self.positions.shape[0]

    @classmethod
    def uca(cls, M: int, radius: float) -> "ArrayGeometry":
        """Uniform circular array, sensor m at angle 2*pi*m/M (m = 0..M-1)."""
        if M < 1:
            raise ValueError("M must be >= 1")
        gamma = TWO_PI * np.arange(M) / M
        return cls(radius * np.column_stack([np.cos(gamma), np.sin(gamma)]))

    @classmethod
    def ula(cls, M: int, spacing: float) -> "ArrayGeometry":
        """Uniform linear array along the x axis, first sensor at the origin."""
        if M < 1:
            raise ValueError("M must be >= 1")
        return cls(np.column_stack([spacing * np.arange(M), np.zeros(M)]))


@dataclass(frozen=True)
class SubcarrierGrid:
    """OFDM subcarrier layout.

    Active bin ``i`` maps to ``w = 2*pi*spacing_hz*(i - (total_bins - 1)/2)``,
    i.e. frequencies are centred on the carrier.
    """

    carrier_hz: float
    spacing_hz: float
    total_bins: int
    active_bins: np.ndarray = None

    def __post_init__(self):
        if not self.spacing_hz > 0:
            raise ValueError("spacing_hz must be positive")
        if self.total_bins < 1:
            raise ValueError("total_bins must be >= 1")
        if self.active_bins is None:
            bins = np.arange(self.total_bins)
        else:
            bins = np.asarray(self.active_bins)
            if bins.ndim != 1 or bins.size < 1:
                raise ValueError("active_bins must be a non-empty 1-D sequence")
            if not np.all(bins == np.round(bins)):
                raise ValueError("active_bins must be integers")
            bins = bins.astype(int)
            if np.any(np.diff(bins) <= 0):
                raise ValueError("active_bins must be strictly increasing")
            if bins[0] < 0 or bins[-1] >= self.total_bins:
                raise ValueError("active_bins must lie in [0, total_bins)")
        bins.setflags(write=False)
        object.__setattr__(self, "active_bins", bins)

    @property
    def K(self) -> int:
        return self.active_bins.size

    @property
    def omega(self) -> np.ndarray:
        """Angular baseband frequency (rad/s) of each active bin."""
        centre = (self.total_bins - 1) / 2.0
        return TWO_PI * self.spacing_hz * (self.active_bins - centre)

    @property
    def tau_max(self) -> float:
        """Unambiguous delay range of the grid, in seconds."""
        return 1.0 / self.spacing_hz

    @classmethod
    def wifi_ht40(cls, carrier_hz: float = 5.32e9) -> "SubcarrierGrid":
        """802.11n 40 MHz layout: 128 bins at 312.5 kHz, 114 of them active."""
        bins = np.concatenate([np.arange(6, 63), np.arange(65, 122)])
        return cls(carrier_hz, 312.5e3, 128, bins)


@dataclass(frozen=True)
class PathSet:
    """L propagation paths: azimuth (rad), delay (s) and complex gain."""

    theta: np.ndarray
    tau: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        tau = np.atleast_1d(np.asarray(self.tau, dtype=float))
        beta = np.atleast_1d(np.asarray(self.beta, dtype=complex))
        if not (theta.ndim == tau.ndim == beta.ndim == 1):
            raise ValueError("path parameters must be 1-D")
        if not (theta.size == tau.size == beta.size) or theta.size < 1:
            raise ValueError("theta, tau and beta must have equal length L >= 1")
        if not np.all(np.isfinite(theta)):
            raise ValueError("theta must be finite")
        if not np.all(np.isfinite(tau)) or np.any(tau < 0):
            raise ValueError("tau must be finite and non-negative")
        theta = np.mod(theta, TWO_PI)
        for arr in (theta, tau, beta):
            arr.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "beta", beta)

    @property
    def L(self) -> int:
        return self.theta.size

    @classmethod
    def from_records(cls, records) -> "PathSet":
        """Build from an iterable of ``(theta, tau, beta)`` triples."""
        records = list(records)
        if not records:
            raise ValueError("at least one path is required")
        theta, tau, beta = zip(*records)
        return cls(np.array(theta), np.array(tau), np.array(beta))

    def permuted(self, order) -> "PathSet":
        order = np.asarray(order)
        return PathSet(self.theta[order], self.tau[order], self.beta[order])

    def with_beta(self, beta) -> "PathSet":
        return PathSet(self.theta, self.tau, beta)


@dataclass
class CsiMatrix:
    """M x K complex observations; column k is the array snapshot at active bin k."""

    data: np.ndarray
    geometry: ArrayGeometry
    grid: SubcarrierGrid
    spectrum: np.ndarray = field(default=None)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.shape != (self.geometry.M, self.grid.K):
            raise ValueError(
                f"CSI shape {self.data.shape} does not match "
                f"(M, K) = ({self.geometry.M}, {self.grid.K})"
            )
        self.spectrum = check_spectrum(self.spectrum, self.grid)


@dataclass(frozen=True)
class NoiseSpec:
    """Noise level given either as a variance per complex element or an SNR.

    SNR is the mean of ``|x_m(k)|**2`` over the noiseless CSI divided by sigma2.
    """

    sigma2: float | None = None
    snr_db: float | None = None

    def __post_init__(self):
        if (self.sigma2 is None) == (self.snr_db is None):
            raise ValueError("exactly one of sigma2 or snr_db must be given")
        if self.sigma2 is not None and not self.sigma2 >= 0:
            raise ValueError("sigma2 must be non-negative")

    def variance(self, clean: CsiMatrix | np.ndarray) -> float:
        if self.sigma2 is not None:
            return float(self.sigma2)
        data = clean.data if isinstance(clean, CsiMatrix) else np.asarray(clean)
        power = np.mean(np.abs(data) ** 2)
        return float(power / 10.0 ** (self.snr_db / 10.0))


def check_spectrum(spectrum, grid: SubcarrierGrid) -> np.ndarray:
    """Validate a per-bin signal spectrum; ``None`` means all ones."""
    if spectrum is None:
        return np.ones(grid.K, dtype=complex)
    s = np.asarray(spectrum, dtype=complex).ravel()
    if s.size != grid.K:
        raise ValueError(f"spectrum has {s.size} entries, grid has K={grid.K}")
    if not np.any(s != 0):
        raise ValueError("spectrum must have at least one nonzero entry")
    return s


def _phase(geom: ArrayGeometry, theta):
    # (M,) for scalar theta, (M, n) for an array of angles
    theta = np.asarray(theta, dtype=float)
    x, y = geom.positions[:, 0], geom.positions[:, 1]
    if theta.ndim == 0:
        return TWO_PI * (x * np.cos(theta) + y * np.sin(theta))
    return TWO_PI * (np.outer(x, np.cos(theta)) + np.outer(y, np.sin(theta)))


def steering_vector(geom: ArrayGeometry, theta) -> np.ndarray:
    """Array response ``exp(j*2*pi*(x*cos(theta) + y*sin(theta)))``.

    A scalar angle gives an (M,) vector; an array of n angles gives an
    (M, n) steering matrix.
    """
    return np.exp(1j * _phase(geom, theta))


def steering_derivative(geom: ArrayGeometry, theta) -> np.ndarray:
    """Derivative of :func:`steering_vector` with respect to theta."""
    theta = np.asarray(theta, dtype=float)
    x, y = geom.positions[:, 0], geom.positions[:, 1]
    if theta.ndim == 0:
        dphi = TWO_PI * (-x * np.sin(theta) + y * np.cos(theta))
    else:
        dphi = TWO_PI * (-np.outer(x, np.sin(theta)) + np.outer(y, np.cos(theta)))
    return 1j * dphi * steering_vector(geom, theta)


def delay_vector(grid: SubcarrierGrid, tau) -> np.ndarray:
    """``exp(-j*w_k*tau)`` over the active bins; (K,) or (K, n)."""
    tau = np.asarray(tau, dtype=float)
    if tau.ndim == 0:
        return np.exp(-1j * grid.omega * tau)
    return np.exp(-1j * np.outer(grid.omega, tau))


def synthesize_csi(geom: ArrayGeometry, grid: SubcarrierGrid, spectrum,
                   paths: PathSet) -> CsiMatrix:
    """Noiseless CSI: ``X = A(theta) diag(beta) T(tau)^T diag(S)``."""
    spectrum = check_spectrum(spectrum, grid)
    A = steering_vector(geom, paths.theta)
    T = delay_vector(grid, paths.tau)
    data = (A * paths.beta) @ T.T * spectrum
    return CsiMatrix(data, geom, grid, spectrum)


def add_noise(csi: CsiMatrix, spec: NoiseSpec, seed) -> CsiMatrix:
    """Add circular complex Gaussian noise, variance sigma2 per element.

    With ``snr_db`` the noise level is computed from ``csi``, which is then
    assumed to be noiseless.
    """
    sigma2 = spec.variance(csi)
    if sigma2 == 0:
        return CsiMatrix(csi.data.copy(), csi.geometry, csi.grid, csi.spectrum)
    rng = np.random.default_rng(seed)
    shape = csi.data.shape
    w = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return CsiMatrix(csi.data + np.sqrt(sigma2 / 2.0) * w,
                     csi.geometry, csi.grid, csi.spectrum)
