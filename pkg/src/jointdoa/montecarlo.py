"""Monte Carlo trials and parameter sweeps comparing AML, DOA-only ML and the CRBs.

Every trial draws its random path phases and noise from a child seed of
``(master_seed, value_index, trial_index)``, so results do not depend on
execution order or on how trials are spread over worker processes.
"""
from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .aml import AmlConfig, aml_estimate
from .crb import CrbReport, crb_report
from .doa_only import DoaOnlyConfig, doa_only_estimate
from .errors import DegeneracyError
from .signal_model import (ArrayGeometry, NoiseSpec, PathSet, SubcarrierGrid,
                           add_noise, synthesize_csi)

ESTIMATORS = ("aml", "doa_only")
SWEEP_VARIABLES = ("snr_db", "delta_theta", "delta_tau")
CSV_COLUMNS = ("swept_value", "rmse_doa_deg_aml", "rmse_td_ns_aml", "rmse_doa_deg_only",
               "sqrt_crb_doa_joint_deg", "sqrt_crb_doa_only_deg", "sqrt_crb_td_joint_ns",
               "failures")


@dataclass(frozen=True)
class Scenario:
    """One Monte Carlo configuration.

    ``random_phase`` flags, per path, whether the gain phase is redrawn
    uniformly on [0, 2*pi) in every trial (magnitude taken from ``paths``).
    """

    geometry: ArrayGeometry
    grid: SubcarrierGrid
    paths: PathSet
    noise: NoiseSpec
    spectrum: np.ndarray | None = None
    random_phase: tuple = ()
    estimators: tuple = ESTIMATORS
    n_trials: int = 100
    master_seed: int = 0
    aml: AmlConfig | None = None
    doa_only: DoaOnlyConfig | None = None

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        unknown = set(self.estimators) - set(ESTIMATORS)
        if unknown:
            raise ValueError(f"unknown estimators {sorted(unknown)}")
        flags = tuple(bool(f) for f in self.random_phase) or (False,) * self.paths.L
        if len(flags) != self.paths.L:
            raise ValueError("random_phase needs one flag per path")
        object.__setattr__(self, "random_phase", flags)
        if self.aml is None:
            object.__setattr__(self, "aml", AmlConfig(self.paths.L))
        if self.doa_only is None:
            object.__setattr__(self, "doa_only", DoaOnlyConfig(self.paths.L))


@dataclass
class TrialOutcome:
    paths: PathSet
    sigma2: float
    crb: CrbReport
    # estimator name -> (theta, tau or None) aligned with the true paths
    estimates: dict = field(default_factory=dict)
    failed: dict = field(default_factory=dict)

    def errors(self, name):
        """Angle (rad) and delay (s) errors of an estimator, aligned per path."""
        theta, tau = self.estimates[name]
        dtheta = _wrap(theta - self.paths.theta)
        dtau = None if tau is None else tau - self.paths.tau
        return dtheta, dtau


def _wrap(x):
    return np.angle(np.exp(1j * np.asarray(x)))


def associate(theta_hat, theta_true, tau_hat=None, tau_true=None) -> np.ndarray:
    """Order of the estimates that best matches the true paths.

    Minimises the summed absolute angle error over all permutations; equal
    angle costs are broken by the summed absolute delay error.
    """
    theta_hat, theta_true = np.asarray(theta_hat), np.asarray(theta_true)
    best, best_key = None, None
    for perm in itertools.permutations(range(theta_true.size)):
        perm = np.array(perm)
        cost = float(np.sum(np.abs(_wrap(theta_hat[perm] - theta_true))))
        tie = 0.0
        if tau_hat is not None and tau_true is not None:
            tie = float(np.sum(np.abs(np.asarray(tau_hat)[perm] - tau_true)))
        key = (round(cost, 12), tie)
        if best_key is None or key < best_key:
            best, best_key = perm, key
    return best


def trial_seed(master_seed: int, trial_index: int, value_index: int = 0):
    return np.random.SeedSequence([int(master_seed), int(value_index), int(trial_index)])


def draw_paths(scenario: Scenario, rng) -> PathSet:
    """Trial realisation of the path gains (random phases where flagged)."""
    beta = scenario.paths.beta.copy()
    phases = rng.uniform(0.0, 2 * np.pi, size=beta.size)
    flags = np.array(scenario.random_phase)
    beta[flags] = np.abs(beta[flags]) * np.exp(1j * phases[flags])
    return scenario.paths.with_beta(beta)


def realize(scenario: Scenario, trial_index: int = 0, value_index: int = 0):
    """Draw one trial's paths and noisy CSI: ``(paths, csi, sigma2)``."""
    rng = np.random.default_rng(trial_seed(scenario.master_seed, trial_index, value_index))
    paths = draw_paths(scenario, rng)
    noise_seed = int(rng.integers(2**63))
    clean = synthesize_csi(scenario.geometry, scenario.grid, scenario.spectrum, paths)
    sigma2 = scenario.noise.variance(clean)
    return paths, add_noise(clean, NoiseSpec(sigma2=sigma2), noise_seed), sigma2


def run_trial(scenario: Scenario, trial_index: int, value_index: int = 0) -> TrialOutcome:
    """Realise one trial, run the selected estimators and the CRBs.

    Estimator degeneracies mark that estimator as failed for the trial
    instead of raising.
    """
    paths, csi, sigma2 = realize(scenario, trial_index, value_index)
    report = crb_report(scenario.geometry, scenario.grid, scenario.spectrum, paths, sigma2)
    out = TrialOutcome(paths, sigma2, report)
    for name in scenario.estimators:
        try:
            if name == "aml":
                res = aml_estimate(csi, scenario.aml)
                order = associate(res.theta_hat, paths.theta, res.tau_hat, paths.tau)
                out.estimates[name] = (res.theta_hat[order], res.tau_hat[order])
            else:
                res = doa_only_estimate(csi, scenario.doa_only)
                order = associate(res.theta_hat, paths.theta)
                out.estimates[name] = (res.theta_hat[order], None)
            out.failed[name] = False
        except (DegeneracyError, np.linalg.LinAlgError):
            out.failed[name] = True
    return out


@dataclass(frozen=True)
class SweepSpec:
    """Vary one quantity of ``base``.

    ``snr_db`` is in dB; ``delta_theta`` (rad) and ``delta_tau`` (s) move
    path 2 relative to path 1.
    """

    base: Scenario
    variable: str
    values: tuple

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ValueError(f"sweep variable must be one of {SWEEP_VARIABLES}")
        if len(self.values) == 0:
            raise ValueError("sweep needs at least one value")
        if self.variable != "snr_db" and self.base.paths.L < 2:
            raise ValueError(f"{self.variable} sweeps need at least two paths")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def scenario(self, value: float) -> Scenario:
        base = self.base
        if self.variable == "snr_db":
            return replace(base, noise=NoiseSpec(snr_db=value))
        p = base.paths
        theta, tau = p.theta.copy(), p.tau.copy()
        if self.variable == "delta_theta":
            theta[1] = theta[0] + value
        else:
            tau[1] = tau[0] + value
        return replace(base, paths=PathSet(theta, tau, p.beta))


@dataclass
class SweepResult:
    """Per swept value (rows) and per path (columns) RMSEs and CRB overlays.

    Angles in degrees, delays in nanoseconds. ``nan`` marks an estimator
    that was not run or failed in every trial.
    """

    variable: str
    values: np.ndarray
    rmse_doa_aml: np.ndarray
    rmse_td_aml: np.ndarray
    rmse_doa_only: np.ndarray
    sqrt_crb_doa_joint: np.ndarray
    sqrt_crb_doa_only: np.ndarray
    sqrt_crb_td_joint: np.ndarray
    failures_aml: np.ndarray
    failures_doa_only: np.ndarray

    @property
    def failures(self) -> np.ndarray:
        return self.failures_aml + self.failures_doa_only

    @staticmethod
    def pooled(per_path: np.ndarray) -> np.ndarray:
        return np.sqrt(np.mean(np.asarray(per_path) ** 2, axis=1))

    def display_values(self) -> np.ndarray:
        if self.variable == "delta_theta":
            return np.rad2deg(self.values)
        if self.variable == "delta_tau":
            return self.values * 1e9
        return self.values

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        cols = [self.display_values(),
                self.pooled(self.rmse_doa_aml), self.pooled(self.rmse_td_aml),
                self.pooled(self.rmse_doa_only),
                self.pooled(self.sqrt_crb_doa_joint), self.pooled(self.sqrt_crb_doa_only),
                self.pooled(self.sqrt_crb_td_joint)]
        for i in range(self.values.size):
            row = [f"{c[i]:.9g}" for c in cols]
            row.append(str(int(self.failures[i])))
            writer.writerow(row)
        return buf.getvalue()


def _rmse(errors, scale):
    if not errors:
        return None
    e = np.vstack(errors) * scale
    return np.sqrt(np.mean(e ** 2, axis=0))


def summarize(outcomes, L: int):
    """Per-path RMSEs and averaged CRB square roots from a list of trials."""
    deg, ns = np.rad2deg(1.0), 1e9
    nan = np.full(L, np.nan)
    ok_aml = [o for o in outcomes if o.failed.get("aml") is False]
    ok_only = [o for o in outcomes if o.failed.get("doa_only") is False]
    doa_aml = _rmse([o.errors("aml")[0] for o in ok_aml], deg)
    td_aml = _rmse([o.errors("aml")[1] for o in ok_aml], ns)
    doa_only = _rmse([o.errors("doa_only")[0] for o in ok_only], deg)
    crb_j = np.mean([o.crb.crb_theta_joint for o in outcomes], axis=0)
    crb_o = np.mean([o.crb.crb_theta_only for o in outcomes], axis=0)
    crb_t = np.mean([o.crb.crb_tau_joint for o in outcomes], axis=0)
    return {
        "rmse_doa_aml": nan if doa_aml is None else doa_aml,
        "rmse_td_aml": nan if td_aml is None else td_aml,
        "rmse_doa_only": nan if doa_only is None else doa_only,
        "sqrt_crb_doa_joint": np.sqrt(np.diag(crb_j)) * deg,
        "sqrt_crb_doa_only": np.sqrt(np.diag(crb_o)) * deg,
        "sqrt_crb_td_joint": np.sqrt(np.diag(crb_t)) * ns,
        "failures_aml": sum(bool(o.failed.get("aml")) for o in outcomes),
        "failures_doa_only": sum(bool(o.failed.get("doa_only")) for o in outcomes),
    }


def run_scenario(scenario: Scenario, value_index: int = 0, n_jobs: int = 1):
    """All trials of one scenario, in trial order."""
    idx = range(scenario.n_trials)
    if n_jobs == 1:
        return [run_trial(scenario, t, value_index) for t in idx]
    from joblib import Parallel, delayed
    return Parallel(n_jobs=n_jobs)(delayed(run_trial)(scenario, t, value_index) for t in idx)


def run_sweep(spec: SweepSpec, n_jobs: int = 1, progress=None) -> SweepResult:
    """Run every swept value; ``progress(i, n, value)`` is called after each."""
    rows = []
    n = len(spec.values)
    for i, value in enumerate(spec.values):
        scen = spec.scenario(value)
        rows.append(summarize(run_scenario(scen, i, n_jobs), scen.paths.L))
        if progress is not None:
            progress(i + 1, n, value)

    def stack(key):
        return np.array([r[key] for r in rows])

    return SweepResult(spec.variable, np.array(spec.values),
                       stack("rmse_doa_aml"), stack("rmse_td_aml"), stack("rmse_doa_only"),
                       stack("sqrt_crb_doa_joint"), stack("sqrt_crb_doa_only"),
                       stack("sqrt_crb_td_joint"),
                       stack("failures_aml"), stack("failures_doa_only"))
