"""Rate vs. discrimination-exponent trade-offs for joint communication and channel sensing."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    BudgetError,
    ChannelProblem,
    CostSpec,
    DiscreteChannel,
    DomainError,
    FiniteDistribution,
    ShapeError,
    conditional_kl,
    convolve_star,
    d_b,
    expected_cost,
    h_b,
    mutual_information,
)
from .region import (  # noqa: E402
    ParetoSurface,
    RegionPoint,
    example1_closed_form,
    example1_problem,
    example2_closed_form,
    example2_problem,
    membership,
    minimax_frontier,
    np_frontier,
    rate_exponent_surface,
)
from .sim import (  # noqa: E402
    ErrorPair,
    LlrtSpec,
    TypeComposition,
    exact_error_pair,
    exponent_estimate,
    llr_statistic,
    make_codeword,
    monte_carlo_error_pair,
    np_threshold_search,
    quantize_type,
)
from .tilt import (  # noqa: E402
    ExponentPoint,
    MuTriple,
    chernoff_info,
    e_of_r,
    e_of_r_oracle,
    exponent_frontier,
    exponent_pair,
    mu_p,
    mu_x,
    tilted_channel,
)
