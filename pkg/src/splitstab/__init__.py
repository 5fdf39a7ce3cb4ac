"""Stability analysis and simulation of IMEX flux splittings for stiff linear hyperbolic systems."""

from .imex import (
    Grid,
    GridField,
    ImexStepper,
    PeriodicBlockTridiagonal,
    RunResult,
    convergence_study,
    init_fourier,
    observed_orders,
    run,
    solve_periodic_block_tridiagonal,
    step,
)
from .modeq import (
    CflBounds,
    SchemeParams,
    StabilityReport,
    alpha_values,
    cfl_bounds,
    char_real_parts,
    characteristic_real_parts,
    discrete_symbol,
    frequency_matrix,
    frequency_spectrum,
    max_stable_ratio,
    stability_scan,
    symbol_radius,
    viscosity_matrix,
)
from .models import (
    CATALOG,
    FluxSplitting,
    SystemSpec,
    characteristic_basis,
    check_admissible,
    euler_characteristic_splitting,
    euler_linearized_system,
    euler_pressure_splitting,
    generic_characteristic_splitting,
    get_splitting,
    prototype_characteristic_splitting,
    prototype_noncommuting_splitting,
    prototype_system,
)
from .smallmat import EigenConvergenceError, SingularMatrixError, Spectrum, commutator, eig, solve_linear

__version__ = "0.1.0"
