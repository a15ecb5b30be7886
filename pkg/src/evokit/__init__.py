"""evokit: perturbative expansions of quantum evolution operators.

Every truncated evolutor is a product of exponentials of Hermitian
operators, hence exactly unitary, and every result can be checked against
a brute-force propagation oracle.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .operators import (SX, SY, SZ, I2, ad_power_apply, commutator, conjugate, dagger,  # noqa: F401
                        expm_hermitian, fro_norm, hermitian, mat_exp, unitarity_defect)
from .spectral import (SpectralDecomposition, contour_projector, diag_part,  # noqa: F401
                       energy_green_part, offdiag_part, spectral_decompose)
from .series import (B_fun, B_mixed, R_fun, bernoulli, big_G, c_from_frakc,  # noqa: F401
                     compositions, frakc_from_c, script_G)
from .quadrature import (Constant, Cosine, DrivenOperator, Gaussian, PiecewiseLinear,  # noqa: F401
                         QuadratureConfig, Sine, TimeGrid, TimeOperatorFunction, cumulative,
                         integrate, window_average)
from .unperturbed import CommutingFamily, StaticH0  # noqa: F401
from .static import (StaticProblem, StaticSolution, assemble_static_evolutor,  # noqa: F401
                     effective_eigenvalues, solve_static, solve_static_matrices)
from .adiabatic import (AdiabaticProblem, AdiabaticSolution, adiabatic_residual,  # noqa: F401
                        assemble_adiabatic_evolutor, solve_adiabatic)
from .dynamic import (DynamicProblem, DynamicSolution, assemble_general_evolutor,  # noqa: F401
                      effective_hamiltonian, interaction_picture, solve_dynamic)
from .oracle import PropagationResult, order_scaling_check, propagate_exact  # noqa: F401
