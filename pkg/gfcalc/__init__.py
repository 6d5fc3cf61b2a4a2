from .utils import DomainError, EvaluationError, GFCalcError, SpecError, UnsupportedError
from .kernels import Family, Kernel, power_kernel, moment_kernel, tempered_power_kernel, \
    sonine_pair_power, sonine_pair_tempered, sonine_pair_kummer, bessel_pair
from .algebra import KernelExpr, KernelPair, Provenance, conv_expr, simplify, atomic_pair, \
    build_Tn, build_Tnm, build_Tnml, build_multiset, check_pair
from .conv import Grid, SampledFunction, ResidualReport, Tolerance, Verdict, num_conv, \
    differentiate, iterated_integral
from .operators import TestFunction, gfi, gfd_caputo, gfd_rl
from .verify import Theorem, FTCase, make_case, run_suite, verify_ft1_caputo, \
    verify_ft2_caputo, verify_ft1_rl, verify_ft2_rl
