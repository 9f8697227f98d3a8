"""Green's operator of Coulomb-plus-polynomial Hamiltonians via matrix continued fractions."""
from .basis import (
    BandedSymmetric,
    BasisSpec,
    MomentTable,
    PotentialSpec,
    assemble_j,
    cs_radial_eval,
    kinetic_matrix,
    moment_matrices,
    overlap_matrix,
    power_matrix,
)
from .errors import (
    AtPoleError,
    ContourError,
    CSGreenError,
    NonConvergenceError,
    PartitionError,
    TailSingularityError,
    UnsupportedPowerError,
)
from .mcf import BlockTridiagonal, GreenBlockMatrix, blockify, green_matrix, hamiltonian_blocks, logdet_corrected, tail_cf
from .spectral import Eigenstate, SpectrumResult, eigenstate_eval, find_eigenvalues, residue_at, sweep_b

__version__ = "0.1.0"
