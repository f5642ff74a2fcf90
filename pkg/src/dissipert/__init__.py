"""Functional calculus and perturbation bounds for dissipative matrices."""
from . import (dissipative_core, errors, function_spaces, functional_calculus,
               operator_integrals, perturbation_lab)
from .dissipative_core import (ContractionMatrix, DissipativeMatrix, cayley,
                               classify, inverse_cayley, random_dissipative,
                               random_hermitian, random_strict, resolvent,
                               schaffer_dilation, semi_spectral_density,
                               semigroup)
from .errors import *  # noqa: F401,F403
from .function_spaces import (GridFunction, LPKernelBank, build_kernel_bank,
                              freq_bump, log_family, shifted_power, tone,
                              tone_sum)
from .functional_calculus import compare_routes, f_of_L
from .operator_integrals import divided_difference, evaluate_doi, rep_order
from .perturbation_lab import (BoundCheck, PerturbationInstance, THEOREMS,
                               bound_check, higher_difference, hs_difference,
                               operator_derivative, operator_difference,
                               quasicommutator, scaling_exponent,
                               schatten_report)

__version__ = "0.1.0"
