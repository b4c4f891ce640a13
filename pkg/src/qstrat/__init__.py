"""qstrat: PSD representations of multi-round quantum strategies, the
interaction statistics they induce, and the semidefinite programs that
extract forced-output probabilities and refereed-game values."""

from .tensor import (
    HERM_TOL,
    PSD_TOL,
    HermOp,
    Space,
    SpaceList,
    haar_isometry,
    identity_op,
    is_psd,
    kron,
    partial_trace,
    permutation_matrix,
    purify,
    scalar_op,
    tensor_with_identity,
    unvec,
    vec,
)
from .strategy import (
    KIND_COSTRATEGY,
    KIND_STRATEGY,
    CoStrategyDescription,
    MeasuringRep,
    SpaceProfile,
    StrategyDescription,
    StrategyRep,
    ValidationReport,
    extract_marginal,
    random_costrategy,
    random_strategy,
    represent_costrategy,
    represent_strategy,
    require_valid,
    synthesize,
    validate,
)
from .interaction import (
    TRIVIAL_OUTCOME,
    OutcomeDistribution,
    distribution_via_reps,
    ensure_measuring,
    simulate_interaction,
)
from .sdp import (
    LinMap,
    SdpProblem,
    SdpSolution,
    export_sdpa,
    parse_sdpa,
    solve,
)
from .games import (
    CoinFlipReport,
    GameValueResult,
    MaxForcedResult,
    Referee,
    coinflip_analyze,
    game_value,
    max_forced_output,
    minmax_check,
)

__version__ = "0.1.0"
