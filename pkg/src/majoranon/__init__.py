"""Simulation of two-component Majoranon spinors in 1+1 and 2+1 dimensions.

The Majorana equation ``i dpsi/dt = (sigma . p) psi - i m sigma_y psi*`` is
evolved three ways: by decomposition into two Majorana fields that obey
Dirac equations with masses +m and -m, by the real 4-component expansion,
and by a dense reference propagator.
"""

__version__ = "0.1.0"

from .dynamics import (  # noqa: E402
    Backend,
    Custom,
    Dirac,
    DiracMajorana,
    Majorana,
    Weyl,
    evolve,
    evolve_dirac,
    evolve_dirac_majorana_decomposed,
    evolve_expanded,
    evolve_majorana_decomposed,
    evolve_recorded,
    rest_frame_solution,
)
from .fields import (  # noqa: E402
    GaussianState,
    Grid,
    MajoranaPair,
    SpinorField,
    TableState,
    UniformState,
    decompose_majorana,
    make_grid,
    reconstruct,
    sample_initial,
)
