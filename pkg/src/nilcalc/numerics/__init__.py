"""Grid-based numerical checks on concrete groups."""

from .grid import GridFunction, GridSpec, gaussian_bump, random_bump, relative_error
from .fd import FDOperator, apply_op_fd
from .convolution import group_convolve
from .heat import HeatRun, InstabilityError, heat_scaling_check, heat_solve
from .bessel import (BesselTable, HeatProfile, bessel_family, bessel_l2_norm, bessel_potential,
                     semigroup_check)
from .decay import FitReport, decay_exponent
from .sobolev import sobolev_inequality_check, sobolev_norm
from .schrodinger import (RepMatrix, calibrate_plancherel, group_fourier_h1,
                          plancherel_check_h1, schrodinger_rep)
from .quantize import (l1_seminorm_bound, leibniz_numeric_check, multiplier_seminorm,
                       quantize_kernel)

__all__ = [
    "GridFunction", "GridSpec", "gaussian_bump", "random_bump", "relative_error",
    "FDOperator", "apply_op_fd", "group_convolve", "HeatRun", "InstabilityError",
    "heat_scaling_check", "heat_solve", "BesselTable", "HeatProfile", "bessel_family",
    "bessel_l2_norm", "bessel_potential", "semigroup_check", "FitReport", "decay_exponent",
    "sobolev_inequality_check", "sobolev_norm", "RepMatrix", "calibrate_plancherel",
    "group_fourier_h1", "plancherel_check_h1", "schrodinger_rep", "l1_seminorm_bound",
    "leibniz_numeric_check", "multiplier_seminorm", "quantize_kernel",
]
