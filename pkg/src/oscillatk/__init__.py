"""oscillatk: exact rearrangement / K-functional calculus plus an
inequality verification lab.

Step functions get exact rearrangements, maximal averages, oscillations,
Lorentz and Orlicz functionals and K-functional machinery; grid functions
on cubes get sharp maximal functions and BMO seminorms through a compiled
kernel (with a pure-numpy fallback).  The lab module turns a registry of
oscillation inequalities into seeded, reproducible checks and sharpness
probes; the CLI front-end drives computation, verification and reporting.
"""
from .steps import (
    Divergent,
    StepFunction,
    DecreasingStep,
    rearrange,
    distribution,
    integrate_star,
    double_star,
    oscillation,
    truncate,
    power_integral,
    oscillation_power_integral,
    double_star_power_integral,
)
from .norms import (
    LorentzParams,
    lorentz_norm,
    lp_norm,
    lorentz_inf_q,
    linf_inf,
    luxemburg_expL,
    delta_extrapolation,
    norm_from_request,
)
from .kfunc import (
    ConcaveCurve,
    ThetaQ,
    k_curve_l1_linf,
    k_derivative,
    j_inf_theta,
    interp_norm,
    gagliardo1_norm,
    gagliardo2_norm,
    optimal_decomposition_l1_linf,
    k_l1_bmo_proxy,
    k_lp_bmo_proxy,
)
from .grid import (
    GridFunction,
    Cube,
    CubeFamily,
    KERNEL_BACKEND,
    cube_mean,
    mean_oscillation_p,
    sharp_function,
    bmo_seminorm,
    gradient_magnitude,
    to_step,
)
from .generators import generate
from .lab import CheckSpec, CheckReport, run_check, probe_sharpness, registry_names

__version__ = "0.1.0"
