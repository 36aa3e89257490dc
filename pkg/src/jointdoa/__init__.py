"""Joint direction-of-arrival and time-delay estimation for multipath CSI."""
from .aml import AmlConfig, EstimationResult, aml_estimate, concentrated_objective
from .crb import (CrbReport, bound_gap_min_eig, check_theorem2, crb_doa_only,
                  crb_equal_delay_closed_form, crb_joint, crb_report, crb_single_path_td_closed_form)
from .doa_only import DoaOnlyConfig, DoaOnlyResult, doa_only_estimate, doa_only_objective
from .errors import DegeneracyError
from .montecarlo import Scenario, SweepResult, SweepSpec, run_sweep, run_trial
from .signal_model import (ArrayGeometry, CsiMatrix, NoiseSpec, PathSet, SubcarrierGrid,
                           add_noise, delay_vector, steering_derivative, steering_vector,
                           synthesize_csi)

__version__ = "0.1.0"
