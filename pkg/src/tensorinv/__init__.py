"""Exact tensor invariants, Latin hypercube sign sums, and Kronecker coefficients."""

from .core import (
    BalancedTable,
    Hypermatrix,
    Partition,
    canonicalize_table,
    multi_sign,
    partitions,
    sign_of_sequence,
    table_to_set_partitions,
    validate_balanced,
)
from .delta import (
    at_power_table,
    at_square_table,
    block_sign,
    column_swap_sign,
    delta_eval,
    delta_eval_unit,
    fundamental_table,
    fundamental_table_reduced,
    hconcat,
    vconcat,
)
from .errors import BudgetExceeded, DomainError, Inconclusive, InvariantViolation, TensorInvError
from .exterior import WedgeVector, is_highest_weight, omega, raising_operator, wedge, wedge_power
from .kronecker import character, delta_degree, delta_lower_bound, g_rect, g_rect_kernel, g_recursive, kronecker_char
from .latin import (
    MagicSet,
    PartialLatinHypercube,
    alon_tarsi,
    directional_sign,
    enumerate_latin,
    enumerate_magic_sets,
    full_sign,
    magic_set_sign,
    symbol_sign,
)

__version__ = "0.1.0"
