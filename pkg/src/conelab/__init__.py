"""conelab: exact-rational certificates for translate-property experiments
on finitely generated groups."""

from conelab.groups import (
    BallCapExceeded,
    BallTable,
    Element,
    GroupError,
    GroupHandle,
    ball,
    growth_report,
    inverse,
    make_group,
    multiply,
    power_counts,
)

__all__ = [
    "BallCapExceeded",
    "BallTable",
    "Element",
    "GroupError",
    "GroupHandle",
    "ball",
    "growth_report",
    "inverse",
    "make_group",
    "multiply",
    "power_counts",
]

__version__ = "0.1.0"
