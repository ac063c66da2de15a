"""Kernels of magnetic Schrodinger operators on 2D flat cones.

The library evaluates the propagator, heat, resolvent, and spectral-measure
kernels of the flux-twisted Laplacian on a flat cone by two independent
routes (angular eigenfunction series vs. image sum plus diffractive integral)
and provides the scan harness that checks dispersive and Strichartz-type
bounds at desk scale.
"""

from .cone import (
    BVariant,
    ConeParams,
    ConePoint,
    FourierGauge,
    ImageTerm,
    AngularMode,
    DiffractiveGeometry,
    a_factor,
    b_kernel,
    diffractive_geometry,
    eigen_nu,
    image_indices,
    mode_phase_product,
)
from .errors import AccuracyError, DomainError, IntegrandError
from .estimates import (
    AdmissiblePair,
    BumpProfile,
    Flow,
    InitialDatum,
    NormFamily,
    ScanGrid,
    ScanReport,
    SpaceGrid,
    b_integral_bounds,
    dispersive_scan_schrodinger,
    evolve_datum,
    heat_gaussian_scan,
    make_scan_grid,
    make_time_grid,
    mass_conservation_defect,
    random_datum,
    square_function_check,
    strichartz_quotient,
    wave_dispersive_scan,
    wave_energy,
)
from .propagator import (
    KernelValue,
    SeriesTruncation,
    heat_kernel,
    mode_heat,
    mode_kernel,
    schrodinger_closed,
    schrodinger_series,
    suggested_truncation,
)
from .quadrature import (
    QuadratureResult,
    QuadratureSpec,
    default_epsilon_schedule,
    integrate_decaying,
    integrate_finite,
    integrate_oscillatory_regularized,
)
from .specfun import (
    SpecFunAccuracy,
    bessel_i,
    bessel_i_scaled,
    bessel_j,
    bessel_y0,
    hankel0,
    hankel_split,
)
from .spectral import (
    LPWindow,
    ResolventSign,
    SpectralSample,
    dyadic_bump,
    partition_of_unity,
    resolvent_kernel,
    resolvent_kernel_analytic,
    spectral_density_series_batch,
    spectral_measure_closed,
    spectral_measure_series,
    wave_localized_batch,
    wave_localized_kernel,
)

__version__ = "0.1.0"
