"""DOA-only deterministic maximum likelihood, used as the comparison baseline.

Per-subcarrier path signals are treated as unknown and unstructured, which
concentrates the likelihood to ``sum_k ||P_A^perp(theta) x(k)||**2``. The
criterion is minimised by alternating projection: one angle at a time, with
the others held fixed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._search import angle_grid, grid_then_refine
from .errors import RankDeficientError
from .signal_model import TWO_PI, CsiMatrix, steering_vector

_RANK_RCOND = 1e-10


@dataclass(frozen=True)
class DoaOnlyConfig:
    n_paths: int
    theta_step: float = np.deg2rad(1.0)
    refine_tol_theta: float = 1e-4
    max_iterations: int = 20

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not (self.theta_step > 0 and self.refine_tol_theta > 0):
            raise ValueError("theta_step and refine_tol_theta must be positive")


@dataclass
class DoaOnlyResult:
    theta_hat: np.ndarray
    objective: float
    iterations_used: int
    objective_history: list = field(default_factory=list)


def _orth_basis(A):
    M, L = A.shape
    if L > M:
        raise RankDeficientError(f"L={L} angles exceed M={M} sensors")
    Q, R = np.linalg.qr(A)
    d = np.abs(np.diag(R))
    if d.min() < _RANK_RCOND * d.max():
        raise RankDeficientError("steering matrix is rank deficient (coincident angles)")
    return Q


def doa_only_objective(csi: CsiMatrix, theta) -> float:
    """``sum_k x(k)^H P_A^perp x(k)`` for the steering matrix at ``theta``."""
    A = steering_vector(csi.geometry, np.atleast_1d(theta))
    Q = _orth_basis(A)
    resid = csi.data - Q @ (Q.conj().T @ csi.data)
    return float(np.vdot(resid, resid).real)


def _coordinate_scores(csi, fixed):
    """Objective decrease from adding one angle to the ``fixed`` set.

    Evaluates ``||a~^H X||**2 / ||a~||**2`` with ``a~ = P_fixed^perp a(theta)``
    for each candidate angle.
    """
    geom = csi.geometry
    if len(fixed):
        Q = _orth_basis(steering_vector(geom, np.asarray(fixed)))

        def project(v):
            return v - Q @ (Q.conj().T @ v)
    else:
        def project(v):
            return v

    X = project(csi.data)

    def many(th):
        At = project(steering_vector(geom, th))
        norm2 = np.sum(np.abs(At) ** 2, axis=0)
        num = np.sum(np.abs(At.conj().T @ X) ** 2, axis=1)
        ok = norm2 > _RANK_RCOND * geom.M
        return np.where(ok, num / np.where(ok, norm2, 1.0), 0.0)

    def one(th):
        return float(many(np.array([th]))[0])

    return many, one


def _best_angle(csi, fixed, cfg):
    many, one = _coordinate_scores(csi, fixed)
    theta, _ = grid_then_refine(many, one, angle_grid(cfg.theta_step),
                                cfg.theta_step, cfg.refine_tol_theta)
    return float(np.mod(theta, TWO_PI))


def doa_only_estimate(csi: CsiMatrix, cfg: DoaOnlyConfig) -> DoaOnlyResult:
    """Alternating-projection minimisation of the DOA-only criterion.

    Angles are initialised one at a time, each maximising the projected
    beamformer given those already found. Sweeps then re-optimise each angle
    with the rest fixed; a coordinate update is accepted only if it does not
    raise the criterion, so the recorded history is non-increasing.
    """
    L = cfg.n_paths
    if L > csi.geometry.M:
        raise ValueError(f"n_paths={L} exceeds sensor count M={csi.geometry.M}")
    theta = []
    for _ in range(L):
        theta.append(_best_angle(csi, theta, cfg))
    theta = np.array(theta)
    obj = doa_only_objective(csi, theta)
    history = [obj]
    used = 0
    if L == 1:
        return DoaOnlyResult(theta, obj, used, history)
    for it in range(1, cfg.max_iterations + 1):
        used = it
        moved = 0.0
        for l in range(L):
            others = np.delete(theta, l)
            cand = theta.copy()
            cand[l] = _best_angle(csi, others, cfg)
            try:
                cand_obj = doa_only_objective(csi, cand)
            except RankDeficientError:
                continue
            if cand_obj <= obj:
                moved = max(moved, abs(np.angle(np.exp(1j * (cand[l] - theta[l])))))
                theta, obj = cand, cand_obj
        history.append(obj)
        if moved <= cfg.refine_tol_theta:
            break
    return DoaOnlyResult(theta, obj, used, history)
