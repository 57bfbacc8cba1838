"""Phonon-limited decoherence in quantum-dot qubit arrays.

Simulates the dissipative dynamics of N charge qubits coupled to acoustic
phonons, searches for subdecoherent encodings, and ships a config-driven
sweep harness (`subdeco` on the command line).
"""

from .device import (DeviceError, DeviceParams, FormFactors, MaterialParams,
                     form_factors, gaas, qubit_energies, validate,
                     well_form_factor)
from .phonon import (CircularFit, CouplingMatrices, QuadratureError,
                     bose_occupation, circular_fit, coupling_matrices,
                     delta_pair, gamma_pair, single_dot_rate)
from .lindblad import (EvolutionError, LindbladModel, RegisterState,
                       TrajectoryPoint, canonical_lindblad,
                       effective_hamiltonian, evolve, fidelity,
                       lamb_shift_hamiltonian, linear_entropy,
                       liouvillian_apply, tau1_inverse, tau1_inverse_via_heff,
                       tau_u_inverse)
from .codes import (CMSpec, CodeReport, DimerSpec, N2Spectrum, cm_model,
                    cm_spectrum_q0, dimer_partitions, dimer_state, f_factors,
                    kernel_report, lindblad_algebra_dim, n2_spectrum,
                    sl2_multiplicity, symmetric_state, synthesize_dimer,
                    verify_commutators)
from .units import HBAR, KB

__version__ = "0.1.0"
