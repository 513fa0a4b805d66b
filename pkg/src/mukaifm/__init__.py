"""Exact Mukai-lattice arithmetic, Fourier-Mukai actions and stability criteria."""
from .lattice import (
    LatticeError, MukaiVector, NSLattice, SurfaceKind, dual, exp_class, from_chern,
    is_isotropic, is_primitive, line_bundle, mukai, mukai_tensor, pairing, rho_class,
    square, to_chern, twist,
)
from .fm import (
    ContextError, FMContext, FMCoordinates, decompose, decompose_y, fm_apply, fm_inverse,
    gm_apply, k3_example_context, make_context, poincare_context, recompose,
)

__version__ = "0.1.0"
