"""Adaptive multiresolution analysis with affine-like systems.

Integer lattice algebra, subdivision and transition operators, unitary
extension principle certification, tight-frame bank construction
(tensor, multi-lattice, shearlet), the adaptive tree transform, and the
unimodular rotation approximation.
"""

from .bankgen import (
    SeedBank1D,
    UncertifiedBankError,
    lattice_bank,
    merge_banks,
    seed_bank,
    shearlet_bank_2d,
    shearlet_bank_3d,
    tensor_bank,
)
from .filterbank import FilterBank
from .intlat import IntMatrix, coset_reps, det, dual_coset_reps, lattice_equal, smith_factor
from .mask import Mask, correlation, remap_by_E, scale, symbol, tensor
from .ops import Signal, reconstruct_step, subdivide, transition
from .rotapprox import RotationSolution, best_unimodular, best_unimodular_bruteforce, objective
from .tree import Pyramid, TreePlan, far, fad, shearlet_plan, validate_plan
from .uep import UepReport, agreement, check_uep_general, check_uep_same_lattice

__version__ = "0.1.0"

__all__ = [
    "SeedBank1D",
    "UncertifiedBankError",
    "lattice_bank",
    "merge_banks",
    "seed_bank",
    "shearlet_bank_2d",
    "shearlet_bank_3d",
    "tensor_bank",
    "FilterBank",
    "IntMatrix",
    "coset_reps",
    "det",
    "dual_coset_reps",
    "lattice_equal",
    "smith_factor",
    "Mask",
    "correlation",
    "remap_by_E",
    "scale",
    "symbol",
    "tensor",
    "Signal",
    "reconstruct_step",
    "subdivide",
    "transition",
    "RotationSolution",
    "best_unimodular",
    "best_unimodular_bruteforce",
    "objective",
    "Pyramid",
    "TreePlan",
    "far",
    "fad",
    "shearlet_plan",
    "validate_plan",
    "UepReport",
    "agreement",
    "check_uep_general",
    "check_uep_same_lattice",
]
