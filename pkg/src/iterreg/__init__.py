"""Iterative regularization of convex-bias interpolation by primal-dual steps."""

from .bias import Bias, BlockBias, L1, Nuclear, SqL2, Zero, soft_threshold
from .errors import (
    AssumptionViolated,
    BoundViolation,
    CertificateInvalid,
    CertificationFailure,
    ContractViolation,
    IterRegError,
    NumericalFailure,
    RuleInapplicable,
)
from .linop import (
    DenseOperator,
    Grad2D,
    LinearOperator,
    MaskOperator,
    StackedOperator,
    dense_from_csv,
    identity,
    mask_from_csv,
    op_norm,
    stack,
)
from .metrics import (
    BoundInputs,
    NormBoundData,
    bregman,
    gap,
    gap_equals_bregman_check,
    norm_bound,
    norm_bound_data,
    lagrangian,
    stability_feas_bound,
    stability_gap_bound,
    weighted_v,
)
from .pdsolver import (
    IterateLog,
    LogRow,
    PdState,
    SaddleCertificate,
    SolverConfig,
    certify,
    initial_state,
    make_config,
    run,
    step,
)
from .problems import (
    NoisyProblem,
    add_noise,
    gen_matcomp,
    gen_sparse,
    load_problem,
    save_problem,
    tv_reformulate,
)
from .baseline import PathResult, TikhonovSolution, lambda_grid, lasso_path, solve_tikhonov
from .stopping import StopRule, budget_stop, discrepancy_stop, oracle_stop

__version__ = "0.1.0"
