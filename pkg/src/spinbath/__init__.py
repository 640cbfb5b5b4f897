"""Central-spin decoherence in a spin-1/2 bath.

A small cluster of spin-1/2 "central" spins is exchange-coupled to N
environmental spin-1/2 entities that carry no dynamics of their own.  The
package computes the central-spin polarization signal two independent ways:
by numerically exact matrix-free propagation of the full many-body state,
and by closed-form / semi-analytic evaluation built on exact spin-addition
combinatorics.  The two routes cross-check each other; the command line
runner reproduces the standard decay / plateau / parity experiments.
"""

from .spin_algebra import (
    CgTriple,
    HalfIntSpin,
    WeightTable,
    binomial,
    cg_decompose_exact,
    cg_decompose_large_s,
    multiplet_degeneracy,
    subspace_probability_third,
    weight_exact,
    weight_gaussian,
)
from .hilbert import (
    BlochAngles,
    HamiltonianSpec,
    StateVector,
    apply_hamiltonian,
    build_initial_state,
    expectation_sigma_z,
    expectation_spin_squared,
    hamiltonian_norm_bound,
    total_sz_sector,
)
from .propagator import (
    PropagationError,
    PropagatorConfig,
    TimeGrid,
    TimeSeries,
    dense_hamiltonian,
    dense_oracle,
    evolve_observable,
    propagate,
)
from .analytic import (
    AnalyticParams,
    envelope,
    sigma1z_closed_form,
    sigma1z_sector,
    sigma1z_semianalytic,
)
from .experiments import (
    EnvelopeResult,
    EqualCouplingRun,
    ExperimentConfig,
    ParityEntry,
    RandomCouplingRun,
    emit_weights,
    extract_envelope,
    run_equal_coupling,
    run_parity_sweep,
    run_random_coupling,
)

__version__ = "0.1.0"
