"""kresil: dense-failure resilience of finite transition systems.

Solve how many *dense* failures (failures striking before recovery completes)
a controlled system can absorb forever, extract the memoryless controller
that achieves it, and validate that controller against adversarial fault
injection.
"""

from pathlib import Path

from .engine import (
    AttractorResult,
    KMaxResult,
    RecoveryMove,
    ResilienceStrategy,
    SafeKResult,
    cla,
    frag,
    k_max,
    load_strategy,
    res_k,
    safe0,
    safe_k,
    save_strategy,
)
from .oracle import OracleCapExceeded, brute_force_res_k, brute_force_safe_k
from .simulate import PlayTrace, SimulationReport, simulate
from .tsf import (
    TransitionSystem,
    TsfError,
    TsfFormatError,
    TsfValidationError,
    Violation,
    load,
    save,
    to_dot,
    validate,
)

__version__ = "0.1.0"


def data_file(name: str) -> Path:
    """Path of a data file shipped with the package (goldens, sample models)."""
    return Path(__file__).parent / "data" / name


__all__ = [
    "AttractorResult",
    "KMaxResult",
    "OracleCapExceeded",
    "PlayTrace",
    "RecoveryMove",
    "ResilienceStrategy",
    "SafeKResult",
    "SimulationReport",
    "TransitionSystem",
    "TsfError",
    "TsfFormatError",
    "TsfValidationError",
    "Violation",
    "brute_force_res_k",
    "brute_force_safe_k",
    "cla",
    "data_file",
    "frag",
    "k_max",
    "load",
    "load_strategy",
    "res_k",
    "safe0",
    "safe_k",
    "save",
    "save_strategy",
    "simulate",
    "to_dot",
    "validate",
]
