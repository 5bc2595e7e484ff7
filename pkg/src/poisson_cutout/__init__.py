"""Poissonian cutouts of Q-regular spaces: densities, pressure and simulation."""

from .errors import (
    ConsistencyError,
    CutoutError,
    DomainError,
    InvalidSpaceError,
    ResourceError,
    ToleranceError,
    UnsupportedSpaceError,
)
from .space_model import (
    CellArray,
    CircleSpace,
    Cylinder,
    SelfSimilarSpace,
    ball_measure,
    bundled_space_path,
    cut_set,
    sample_from_measure,
    solve_moran,
    space_from_json,
    ternary,
    verify_q_regularity,
)

__version__ = "0.1.0"
