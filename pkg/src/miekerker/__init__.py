"""Multipolar Mie-moment toolkit for directional nanoantennas.

Decomposes electromagnetic scattering into Cartesian/Mie multipole
moments, synthesizes far-field radiation patterns, detects Kerker
conditions, and propagates the results into single-photon-source figures
of merit (decay-rate enhancement, collection efficiency, g2, photon
rates).
"""

__version__ = "0.1.0"

from .emitter import (AntibunchingFit, DecayRateResult, G2Histogram,
                      PhotonBudget, TwoLevelModel, fit_antibunching, g2,
                      g2_enhanced, hbt_montecarlo, mirror_decay_rate_exact,
                      photon_budget, relative_decay_rate)
from .farfield import (KerkerMetrics, RadiationPattern, collection_efficiency,
                       kerker_metrics, kerker_search, mix_emission, pattern,
                       scattering_amplitudes)
from .fields import (AntennaGeometry, FieldGrid, PlaneWave, PointDipole,
                     SolverError, extinction_cross_section, field_at,
                     incident_field, induced_current, load_grid,
                     radiated_power, save_grid, scattering_cross_section,
                     silver_permittivity, solve, vacuum_dipole_power,
                     voxelize)
from .mie import (ConvergenceError, Efficiencies, MieCoefficients,
                  internal_field, mie_coefficients, mie_efficiencies,
                  wiscombe_n_max)
from .multipole import (CartesianMultipoles, MomentEfficiencies, decompose,
                        efficiencies, to_mie_moments)
from .specfun import (AngularFunctions, RiccatiBessel, TIME_CONVENTION,
                      angular_function_arrays, angular_functions,
                      riccati_bessel)

__all__ = [
    "AngularFunctions", "AntennaGeometry", "AntibunchingFit",
    "CartesianMultipoles", "ConvergenceError", "DecayRateResult",
    "Efficiencies", "FieldGrid", "G2Histogram", "KerkerMetrics",
    "MieCoefficients", "MomentEfficiencies", "PhotonBudget", "PlaneWave",
    "PointDipole", "RadiationPattern", "RiccatiBessel", "SolverError",
    "TIME_CONVENTION", "TwoLevelModel", "angular_function_arrays",
    "angular_functions", "collection_efficiency", "decompose",
    "efficiencies", "extinction_cross_section", "field_at",
    "fit_antibunching", "g2", "g2_enhanced", "hbt_montecarlo",
    "incident_field", "induced_current", "internal_field", "kerker_metrics",
    "kerker_search", "load_grid", "mie_coefficients", "mie_efficiencies",
    "mirror_decay_rate_exact", "mix_emission", "pattern", "photon_budget",
    "radiated_power", "relative_decay_rate", "riccati_bessel", "save_grid",
    "scattering_amplitudes", "scattering_cross_section",
    "silver_permittivity", "solve", "to_mie_moments", "vacuum_dipole_power",
    "voxelize", "wiscombe_n_max",
]
