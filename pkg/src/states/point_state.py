"""
Experiment Point State Definition
One sweep point (delta, seed) or one ablation setting flowing through the graph
"""

import operator
from typing import Annotated, Any, Dict, List, Optional

from typing_extensions import TypedDict


class PointState(TypedDict, total=False):
    point_key: str  # relative directory of the point under the output dir
    mode: str  # "sweep" or "ablation"
    delta: float
    seed: int
    setting: Dict[str, Any]  # ablation overrides, empty for sweep points
    cached: bool
    dataset: Any
    pool: Any
    selection: Dict[str, Any]
    stacking: Dict[str, Any]
    maes: Any
    maes_subset: Optional[List[int]]
    result: Dict[str, Any]
    events: Annotated[list, operator.add]  # one line per finished node
