"""Deterministic Cramér-Rao bounds for joint and DOA-only estimation.

All bounds treat the path gains as unknown deterministic nuisance
parameters. Angle blocks are in rad**2, delay blocks in s**2.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import RankDeficientError, SingularInformationError
from .signal_model import (ArrayGeometry, PathSet, SubcarrierGrid, check_spectrum,
                           steering_derivative, steering_vector)

COND_WARN = 1e12
_COND_FAIL = 1e15
_RANK_RCOND = 1e-10


@dataclass
class CrbReport:
    crb_theta_joint: np.ndarray
    crb_tau_joint: np.ndarray
    crb_theta_only: np.ndarray
    sigma2: float

    @property
    def gap_min_eig(self) -> float:
        return float(np.linalg.eigvalsh(self.crb_theta_only - self.crb_theta_joint)[0])


def _inverse(mat, name):
    """Inverse via a solve against the identity, guarded on conditioning."""
    cond = np.linalg.cond(mat)
    if not np.isfinite(cond) or cond > _COND_FAIL:
        raise SingularInformationError(
            f"{name} is singular (condition number {cond:.3g}); "
            "the path configuration is not identifiable")
    if cond > COND_WARN:
        warnings.warn(f"{name} is ill-conditioned (condition number {cond:.3g})",
                      RuntimeWarning, stacklevel=3)
    inv = np.linalg.solve(mat, np.eye(mat.shape[0]))
    return 0.5 * (inv + inv.T)


def _orth_basis(mat, what):
    Q, R = np.linalg.qr(mat)
    d = np.abs(np.diag(R))
    if d.size and d.min() < _RANK_RCOND * d.max():
        raise RankDeficientError(f"{what} does not have full column rank")
    return Q


def build_stacked_jacobians(geom: ArrayGeometry, grid: SubcarrierGrid, spectrum,
                            paths: PathSet):
    """Stacked response ``D~`` and its angle and delay derivatives ``E~``, ``Lambda~``.

    Each is (M*K, L); rows ``k*M:(k+1)*M`` hold subcarrier k. Column l of
    ``D~`` is ``S_k a(theta_l) exp(-j w_k tau_l)`` stacked over k.
    """
    spectrum = check_spectrum(spectrum, grid)
    A = steering_vector(geom, paths.theta)                     # (M, L)
    dA = steering_derivative(geom, paths.theta)                # (M, L)
    phase = np.exp(-1j * np.outer(grid.omega, paths.tau))      # (K, L)
    weight = spectrum[:, None] * phase                         # (K, L)
    D = weight[:, None, :] * A[None, :, :]
    E = weight[:, None, :] * dA[None, :, :]
    Lam = (-1j * grid.omega)[:, None, None] * D
    n = geom.M * grid.K
    L = paths.L
    D, E, Lam = D.reshape(n, L), E.reshape(n, L), Lam.reshape(n, L)
    _orth_basis(D, "stacked response matrix D~")
    return D, E, Lam


def crb_joint(geom, grid, spectrum, paths: PathSet, sigma2: float):
    """Angle and delay blocks of the joint deterministic CRB.

    Returns ``(crb_theta, crb_tau)``, each L x L::

        crb_theta = sigma2/2 * inv(G1 - G2 inv(G3) G2^T)
        crb_tau   = sigma2/2 * inv(G3 - G2^T inv(G1) G2)

    where ``G1 = Re{(E^H P E) * W}``, ``G2 = Re{(E^H P Lam) * W}``,
    ``G3 = Re{(Lam^H P Lam) * W}``, ``P`` projects onto the orthogonal
    complement of ``D~`` and ``W = conj(beta) beta^T``.
    """
    D, E, Lam = build_stacked_jacobians(geom, grid, spectrum, paths)
    Q = _orth_basis(D, "stacked response matrix D~")
    Ep = E - Q @ (Q.conj().T @ E)
    Lp = Lam - Q @ (Q.conj().T @ Lam)
    W = np.outer(paths.beta.conj(), paths.beta)
    g1 = np.real((E.conj().T @ Ep) * W)
    g2 = np.real((E.conj().T @ Lp) * W)
    g3 = np.real((Lam.conj().T @ Lp) * W)
    g1_inv = _inverse(g1, "angle information block Gamma1")
    g3_inv = _inverse(g3, "delay information block Gamma3")
    crb_theta = 0.5 * sigma2 * _inverse(g1 - g2 @ g3_inv @ g2.T,
                                        "angle Schur complement Gamma1 - Gamma2 Gamma3^-1 Gamma2^T")
    crb_tau = 0.5 * sigma2 * _inverse(g3 - g2.T @ g1_inv @ g2,
                                      "delay Schur complement Gamma3 - Gamma2^T Gamma1^-1 Gamma2")
    return crb_theta, crb_tau


def _angle_information(geom, theta, weight):
    A = steering_vector(geom, theta)
    Psi = steering_derivative(geom, theta)
    Q = _orth_basis(A, "steering matrix A")
    H = Psi.conj().T @ (Psi - Q @ (Q.conj().T @ Psi))
    return np.real(H * weight)


def crb_doa_only(geom, grid, spectrum, paths: PathSet, sigma2: float) -> np.ndarray:
    """DOA-only deterministic CRB with per-subcarrier path signals as nuisance.

    ``sigma2/(2K) * inv(Re{(Psi^H P_A^perp Psi) * R_c})`` with
    ``R_c = (1/K) sum_k conj(c(k)) c(k)^T`` and
    ``c_l(k) = beta_l S_k exp(-j w_k tau_l)``.
    """
    spectrum = check_spectrum(spectrum, grid)
    K = grid.K
    C = paths.beta[:, None] * np.exp(-1j * np.outer(paths.tau, grid.omega)) * spectrum
    Rc = (C.conj() @ C.T) / K
    info = _angle_information(geom, paths.theta, Rc)
    return sigma2 / (2 * K) * _inverse(info, "DOA-only information matrix")


def crb_equal_delay_closed_form(geom, grid, spectrum, paths: PathSet,
                                sigma2: float) -> np.ndarray:
    """Angle CRB when every path shares one delay (joint and DOA-only coincide)."""
    if np.ptp(paths.tau) > 1e-15:
        raise ValueError("closed form requires all path delays to be equal")
    spectrum = check_spectrum(spectrum, grid)
    power = np.sum(np.abs(spectrum) ** 2)
    W = np.outer(paths.beta.conj(), paths.beta)
    info = _angle_information(geom, paths.theta, W)
    return sigma2 / (2 * power) * _inverse(info, "equal-delay information matrix")


def crb_single_path_td_closed_form(geom, grid, spectrum, beta1, theta1,
                                   sigma2: float) -> float:
    """Delay CRB of a lone path; independent of its angle and delay."""
    spectrum = check_spectrum(spectrum, grid)
    p = np.abs(spectrum) ** 2
    w = grid.omega
    double_sum = np.sum(w[:, None] * (w[:, None] - w[None, :]) * p[:, None] * p[None, :])
    a = steering_vector(geom, float(theta1))
    denom = 2 * abs(beta1) ** 2 * np.vdot(a, a).real * double_sum
    if not denom > 0:
        raise SingularInformationError(
            "delay is unidentifiable: the spectrum-weighted frequency spread is zero")
    return float(sigma2 * np.sum(p) / denom)


def crb_report(geom, grid, spectrum, paths: PathSet, sigma2: float) -> CrbReport:
    theta_j, tau_j = crb_joint(geom, grid, spectrum, paths, sigma2)
    theta_o = crb_doa_only(geom, grid, spectrum, paths, sigma2)
    return CrbReport(theta_j, tau_j, theta_o, float(sigma2))


def bound_gap_min_eig(geom, grid, spectrum, paths: PathSet, sigma2: float) -> float:
    """Smallest eigenvalue of ``CRB_DOA-only - CRB_joint`` for the angles.

    Non-negative (up to rounding): exploiting delay structure never makes
    the angle bound worse.
    """
    return crb_report(geom, grid, spectrum, paths, sigma2).gap_min_eig


check_theorem2 = bound_gap_min_eig
