"""Numerical toolkit for Orlicz spaces and fractional Orlicz–Sobolev modulars.

Covers Young functions and their averaged form Ā, Orlicz modulars and
Luxemburg norms, the fractional modular J_s by quadrature and Monte Carlo,
small-s limit studies, and the fractional Hardy companion construction.
"""

__version__ = "0.1.0"

from .errors import (ConstructionFailure, DegenerateInput, InvalidParameter, NumericFailure,
                     OrliczFracError, StudyFailure, UnboundedNorm)
from .hardy import HardyCompanion, build_companion, check_conditions, hardy_check
from .limits import (LimitStudyResult, counterexample_lower_bound, limit_study,
                     ms_power_study)
from .modular import (ModularResult, limit_target, luxemburg_norm, orlicz_modular)
from .quadrature import DEFAULT_CONFIG, QuadratureConfig
from .seminorm import (frac_modular_1d, frac_modular_mc, frac_modular_radial,
                       radial_identity_residual, shell_identity_residual)
from .testfn import (TestFunction, make_constant, make_counterexample_v, make_exp_decay,
                     make_tent, make_zero, scale)
from .young import (YoungFunction, abar, delta2_diagnose, make_custom, make_exp_counterexample,
                    make_expm1, make_polynomial, make_power, make_power_log, matuszewska_index)
