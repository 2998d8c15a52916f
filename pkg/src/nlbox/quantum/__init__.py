"""Two-qubit layer: states, measurements, entanglement measures, EDPs."""
from .blockdiag import BlockDecomposition, block_diagonalize
from .edp import edp_sweep, haar_unitary, sample_edp
from .entanglement import (
    c_alpha,
    fidelity_plus,
    fully_entangled_fraction,
    lemma5_witness,
    nl_state,
    nl_upper_from_F,
    t_matrix,
)
from .measurement import Observable, canonical_measurements, measure_box, simulate_isotropic
from .states import DensityMatrix, omega, omega_power, omega_power_decomposition, partial_trace
