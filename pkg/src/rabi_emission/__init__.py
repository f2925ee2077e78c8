"""Gauge-consistent emission rates and spectra of the dissipative quantum Rabi model."""

__version__ = "0.1.0"

from .hilbert import HilbertSpace, build_space
from .models import ModelParams, hamiltonian, hamiltonian_coulomb, hamiltonian_dipole, hamiltonian_jc
from .dressed import (EigenSystem, FieldOperatorSpec, TransitionTable, diagonalize, field_operator_minus,
                      field_operator_plus, label_states, transition_table, wrong_field_operator_plus)
from .master import (BathSpec, RateTable, Superoperator, decay_rates, dissipator_generic,
                     liouvillian_dressed_rwa, liouvillian_gme, liouvillian_standard, thermal_occupation)
from .spectra import (SpectrumResult, emission_rate, emission_spectrum, reference_rate_eta0,
                      spectrum_map, steady_state, two_level_ratio)
from .pipeline import find_level_crossing, gauge_audit, solve_point

__all__ = [
    "HilbertSpace", "build_space", "ModelParams", "hamiltonian", "hamiltonian_coulomb",
    "hamiltonian_dipole", "hamiltonian_jc", "EigenSystem", "FieldOperatorSpec", "TransitionTable",
    "diagonalize", "field_operator_minus", "field_operator_plus", "label_states", "transition_table",
    "wrong_field_operator_plus", "BathSpec", "RateTable", "Superoperator", "decay_rates",
    "dissipator_generic", "liouvillian_dressed_rwa", "liouvillian_gme", "liouvillian_standard",
    "thermal_occupation", "SpectrumResult", "emission_rate", "emission_spectrum",
    "reference_rate_eta0", "spectrum_map", "steady_state", "two_level_ratio",
    "find_level_crossing", "gauge_audit", "solve_point",
]
