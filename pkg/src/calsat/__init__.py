"""calsat: satisfiability solving for calendar-date constraints.

Parses a small constraint language over dates, periods, integers and
booleans, reduces it to quantifier-free linear integer arithmetic (with one
optional use of arrays) under one of five interchangeable encoding
strategies, hands the result to an external SMT solver over SMT-LIB2 text,
and checks any model against concrete calendar arithmetic.
"""

from .gregorian import (
    Bounds,
    Date,
    DEFAULT_BOUNDS,
    DEFAULT_LB,
    DEFAULT_UB,
    Period,
    add_days,
    add_months,
    add_period,
    compare,
    from_alpha_beta,
    from_epoch_days,
    is_leap,
    nb_days,
    parse_iso_date,
    period_add,
    period_scale,
    to_alpha_beta,
    to_epoch_days,
    valid,
)

__version__ = "0.1.0"

__all__ = [
    "Bounds",
    "Date",
    "DEFAULT_BOUNDS",
    "DEFAULT_LB",
    "DEFAULT_UB",
    "Period",
    "add_days",
    "add_months",
    "add_period",
    "compare",
    "from_alpha_beta",
    "from_epoch_days",
    "is_leap",
    "nb_days",
    "parse_iso_date",
    "period_add",
    "period_scale",
    "to_alpha_beta",
    "to_epoch_days",
    "valid",
    "__version__",
]
