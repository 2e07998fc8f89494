from .ground import (
    KERNEL,
    EvalResult,
    GridSpec,
    GroundAtom,
    NotConverged,
    equivalent_on_grid,
    ground_eval,
)

__all__ = ["KERNEL", "EvalResult", "GridSpec", "GroundAtom", "NotConverged",
           "equivalent_on_grid", "ground_eval"]
