"""Approximate maximum-likelihood (AML) joint angle and delay estimation.

The estimator alternates two closed-form least-squares steps, each followed
by independent 1-D searches per path:

* delays given angles: ``U = pinv(A(theta)) X``, then a matched-filter delay
  search on each row of ``U`` (divided by the signal spectrum);
* angles given delays: ``B = X R^H (R R^H)^-1`` with ``R[l, k] = S_k exp(-j w_k tau_l)``,
  then a beamformer angle search on each column of ``B``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._search import angle_grid, delay_grid, grid_then_refine
from .errors import RankDeficientError, SingularGramError, ZeroInputError
from .signal_model import (TWO_PI, ArrayGeometry, CsiMatrix, SubcarrierGrid,
                           delay_vector, steering_vector)

_GRAM_RCOND = 1e-12
_RANK_RCOND = 1e-10


@dataclass(frozen=True)
class AmlConfig:
    n_paths: int
    max_iterations: int = 10
    theta_step: float = np.deg2rad(1.0)
    tau_step: float = 1e-9
    refine_tol_theta: float = 1e-4
    refine_tol_tau: float = 1e-11
    converge_tol: float = 1e-8

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        for name in ("theta_step", "tau_step", "refine_tol_theta",
                     "refine_tol_tau", "converge_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def validate_for(self, csi: CsiMatrix) -> None:
        if self.n_paths > csi.geometry.M:
            raise ValueError(
                f"n_paths={self.n_paths} exceeds sensor count M={csi.geometry.M}")


@dataclass
class EstimationResult:
    theta_hat: np.ndarray
    tau_hat: np.ndarray
    beta_hat: np.ndarray
    residual: float
    iterations_used: int
    residual_history: list = field(default_factory=list)


def _path_rows(csi: CsiMatrix, tau) -> np.ndarray:
    """``R[l, k] = S_k exp(-j w_k tau_l)``, shape (L, K)."""
    return delay_vector(csi.grid, np.atleast_1d(tau)).T * csi.spectrum


def _model(csi: CsiMatrix, theta, tau, beta) -> np.ndarray:
    A = steering_vector(csi.geometry, np.atleast_1d(theta))
    return (A * np.atleast_1d(beta)) @ _path_rows(csi, tau)


def concentrated_objective(csi: CsiMatrix, theta, tau, beta) -> float:
    """Sum over subcarriers of ``||x(k) - D(k) beta||**2``."""
    g = csi.data - _model(csi, theta, tau, beta)
    return float(np.vdot(g, g).real)


def least_squares_beta(csi: CsiMatrix, theta, tau) -> np.ndarray:
    """Gains minimising the concentrated objective for fixed angles and delays."""
    A = steering_vector(csi.geometry, np.atleast_1d(theta))
    R = _path_rows(csi, tau)
    # column l of the stacked (M*K, L) response is vec(a_l r_l^T)
    D = (A[:, None, :] * R.T[None, :, :]).reshape(-1, A.shape[1])
    beta, *_ = np.linalg.lstsq(D, csi.data.reshape(-1), rcond=None)
    return beta


def solve_B_given_tau(csi: CsiMatrix, tau_hat) -> np.ndarray:
    """Unstructured least-squares estimate of ``A(theta) diag(beta)`` given delays."""
    R = _path_rows(csi, tau_hat)
    gram = R @ R.conj().T
    if R.shape[0] > R.shape[1] or 1.0 / np.linalg.cond(gram) < _GRAM_RCOND:
        raise SingularGramError(
            "delay Gram matrix is singular (coincident delays or K < L)")
    num = csi.data @ R.conj().T
    # B = num @ inv(gram)  <=>  gram^T B^T = num^T
    return np.linalg.solve(gram.T, num.T).T


def solve_theta_beta_per_path(b_hat, geom: ArrayGeometry, cfg: AmlConfig):
    """Angle and gain of one path from a column of the B estimate.

    Maximises ``|b^H a(theta)|**2 / ||a(theta)||**2`` and returns
    ``(theta, a(theta)^H b / ||a(theta)||**2)``.
    """
    b = np.asarray(b_hat, dtype=complex)
    if not np.any(b):
        raise ZeroInputError("angle search received an all-zero column")

    def many(th):
        A = steering_vector(geom, th)
        return np.abs(b.conj() @ A) ** 2 / np.sum(np.abs(A) ** 2, axis=0)

    def one(th):
        a = steering_vector(geom, th)
        return np.abs(np.vdot(b, a)) ** 2 / np.vdot(a, a).real

    theta, _ = grid_then_refine(many, one, angle_grid(cfg.theta_step),
                                cfg.theta_step, cfg.refine_tol_theta)
    theta = float(np.mod(theta, TWO_PI))
    a = steering_vector(geom, theta)
    return theta, complex(np.vdot(a, b) / np.vdot(a, a).real)


def solve_u_given_theta(csi: CsiMatrix, theta_hat):
    """Least-squares path signals given angles.

    Returns ``(U, V)``: ``U`` is (L, K) with column k equal to
    ``pinv(A) x(k)``; ``V`` is (K, L) with ``V[k, l] = U[l, k] / S_k``.
    """
    theta_hat = np.atleast_1d(theta_hat)
    A = steering_vector(csi.geometry, theta_hat)
    M, L = A.shape
    if L > M:
        raise RankDeficientError(f"L={L} paths exceed M={M} sensors")
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] < _RANK_RCOND * sv[0]:
        raise RankDeficientError("steering matrix is rank deficient (coincident angles)")
    if np.any(csi.spectrum == 0):
        raise ZeroInputError("signal spectrum vanishes on an active bin")
    U = np.linalg.solve(A.conj().T @ A, A.conj().T @ csi.data)
    V = (U / csi.spectrum).T
    return U, V


def solve_tau_beta_per_path(v_hat, grid: SubcarrierGrid, cfg: AmlConfig):
    """Delay and gain of one path from a column of V.

    Maximises ``|t(tau)^H v|**2`` over ``[0, tau_max]`` and returns
    ``(tau, t(tau)^H v / K)``.
    """
    v = np.asarray(v_hat, dtype=complex)
    if not np.any(v):
        raise ZeroInputError("delay search received an all-zero column")
    omega = grid.omega

    def many(taus):
        return np.abs(v @ np.exp(1j * np.outer(omega, taus))) ** 2

    def one(t):
        return np.abs(v @ np.exp(1j * omega * t)) ** 2

    tau, _ = grid_then_refine(many, one, delay_grid(cfg.tau_step, grid.tau_max),
                              cfg.tau_step, cfg.refine_tol_tau, 0.0, grid.tau_max)
    t = delay_vector(grid, tau)
    return tau, complex(np.vdot(t, v) / grid.K)


def initialize(csi: CsiMatrix, L: int, cfg: AmlConfig):
    """Starting angles and delays by successive cancellation.

    Each pass picks the (theta, tau) cell of the coarse grid with the largest
    matched-filter output on the current residual, fits that path's gain by
    least squares and subtracts its contribution.
    """
    geom, grid = csi.geometry, csi.grid
    thetas = angle_grid(cfg.theta_step)
    taus = delay_grid(cfg.tau_step, grid.tau_max)
    A = steering_vector(geom, thetas)
    E = np.exp(1j * np.outer(grid.omega, taus))
    resid = csi.data.copy()
    theta0, tau0 = np.empty(L), np.empty(L)
    for l in range(L):
        Z = ((A.conj().T @ resid) * csi.spectrum.conj()) @ E
        i, j = np.unravel_index(np.argmax(np.abs(Z) ** 2), Z.shape)
        theta0[l], tau0[l] = thetas[i], taus[j]
        d = np.outer(A[:, i], _path_rows(csi, taus[j])[0])
        beta = np.vdot(d, resid) / np.vdot(d, d).real
        resid = resid - beta * d
    return theta0, tau0


def aml_estimate(csi: CsiMatrix, cfg: AmlConfig) -> EstimationResult:
    """Alternate delay and angle updates from a successive-cancellation start.

    Iteration stops after ``cfg.max_iterations``, when the relative drop of
    the objective falls below ``cfg.converge_tol``, or when no parameter moves
    by more than its refinement tolerance. An iteration that would raise the
    objective is discarded and ends the loop (it still counts towards
    ``iterations_used``), so ``residual_history`` is non-increasing.
    """
    cfg.validate_for(csi)
    L = cfg.n_paths
    theta, tau = initialize(csi, L, cfg)
    beta = least_squares_beta(csi, theta, tau)
    resid = concentrated_objective(csi, theta, tau, beta)
    history = [resid]
    used = 0
    for it in range(1, cfg.max_iterations + 1):
        _, V = solve_u_given_theta(csi, theta)
        tau_new = np.array([solve_tau_beta_per_path(V[:, l], csi.grid, cfg)[0]
                            for l in range(L)])
        B = solve_B_given_tau(csi, tau_new)
        theta_new = np.array([solve_theta_beta_per_path(B[:, l], csi.geometry, cfg)[0]
                              for l in range(L)])
        beta_new = least_squares_beta(csi, theta_new, tau_new)
        resid_new = concentrated_objective(csi, theta_new, tau_new, beta_new)
        used = it
        if resid_new > resid:
            break
        dtheta = np.abs(np.angle(np.exp(1j * (theta_new - theta))))
        dtau = np.abs(tau_new - tau)
        drop = resid - resid_new
        theta, tau, beta, resid = theta_new, tau_new, beta_new, resid_new
        history.append(resid)
        if (drop <= cfg.converge_tol * history[-2]
                or (np.all(dtheta <= cfg.refine_tol_theta)
                    and np.all(dtau <= cfg.refine_tol_tau))):
            break
    return EstimationResult(theta, tau, beta, resid, used, history)
