"""Local series expansions and conservation laws for P-Q pairs."""

from .errors import *  # noqa: F401,F403
from .series import (  # noqa: F401
    LaurentMatrixSeries,
    entry_norm,
    recenter,
    series_add,
    series_commutator,
    series_eval,
    series_mul,
    transform_to_origin,
    truncate,
)
from .expressions import (  # noqa: F401
    differentiate,
    eval_expression,
    parse_expression,
)
from .model import PQPairModel, compatibility_residual, pair_coeffs_at  # noqa: F401

__version__ = "0.1.0"
