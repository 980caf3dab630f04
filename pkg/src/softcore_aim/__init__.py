"""High-precision spectra and quasi-exact solutions for softcore Coulomb problems."""
from .aim import (
    AimSeed,
    AimState,
    DeltaEvaluator,
    EigenResult,
    PartialFractions,
    aim_iterate,
    choose_r0,
    delta,
    find_eigenvalue,
    scan_spectrum,
    track_root,
)
from .models import (
    HeunParams,
    ProblemSpec,
    WavefunctionSample,
    build_aim_seed,
    build_ode,
    degeneracy_orbit,
    evaluate_wavefunction,
    exact_energy,
    exact_solution_catalog,
    heun_map,
    node_count,
    radius_for_energy,
)
from .polysolve import (
    DeterminantCondition,
    PolyODE,
    PolynomialSolution,
    RecurrenceSystem,
    build_recurrence,
    determinant_conditions,
    necessary_condition,
    solve_parameter_constraints,
    solve_polynomial,
)
from .precision import PrecisionContext
from .roots import find_root_bracketed, isolate_real_roots
from .series import TaylorSeries, series_diff, series_from_rational, series_mul

__version__ = "0.1.0"
