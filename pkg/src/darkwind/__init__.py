"""darkwind: topology and coherence of disordered, dissipative qubit-cavity chains.

Dense numpy/scipy simulation library covering restricted non-Hermitian
Hamiltonians of dimer and trimer chains, real-space winding numbers via
polar decomposition, disorder-averaged coherence dynamics and complex
spectra, closed-form localization lengths / phase boundaries / dark
states, a full master-equation cross-check, and a seeded sweep driver
(CLI ``darkwind``).
"""

from .model import (
    DIMER,
    TRIMER,
    BondNoise,
    DisorderSpec,
    ModelSpec,
    build_hamiltonian,
    load_matrix,
    sample_noise,
    save_matrix,
    sublattice_blocks,
)
from .topology import (
    TrimerWinding,
    WindingAverage,
    WindingResult,
    polar_unitary,
    winding_clean_dimer,
    winding_clean_trimer,
    winding_mean,
    winding_real_space_dimer,
    winding_real_space_trimer,
)
from .dynamics import (
    CoherenceTrace,
    DOSHistogram,
    NoFiniteCoherenceTime,
    coherence_mean,
    coherence_time_tau,
    coherence_trace,
    complex_dos,
    default_times,
    eigenvalues,
    long_time_mean,
)
from .analytics import (
    AsymptoticCoherence,
    BoundaryContour,
    DarkStatePair,
    DivergentLogAverage,
    asymptotic_coherence_dimer,
    asymptotic_coherence_trimer,
    dimer_boundary_small_mu,
    expected_log_abs_uniform,
    expected_log_abs_uniform2,
    inv_loc_length_dimer,
    inv_loc_length_trimer,
    log_coupling_balance_dimer,
    log_coupling_balance_trimer,
    phase_boundary_dimer,
    phase_boundary_trimer,
    trimer_dark_states,
)
from .lindblad import OracleReport, coherence_master, evolve_and_compare, lindblad_rhs
from .seeds import derive_seed
from .sweep import SweepConfig, load_config, parse_config, run

__version__ = "0.1.0"
