"""The MaxState solver."""

from .anneal import LogRecord, MapAnnealer, UnsatisfiableInstance, WorkerResult, neighbor_map, random_map
from .config import REDUCED_RATES, Schedule, SolverConfig, acceptance_probability, make_rng, stream_seed
from .driver import SolveResult, merge_logs, solve, warm_start_map
from .isomorphism import find_monomorphism, incremental_isomorphism
from .maxstate import MaxStateRunner, RunAborted, gate_weights, max_state_search, objective, route_one_pass
from .oracle import OracleBounds, OracleBoundsError, brute_force_oracle

__all__ = [
    "LogRecord", "MapAnnealer", "MaxStateRunner", "OracleBounds", "OracleBoundsError",
    "REDUCED_RATES", "RunAborted", "Schedule", "SolveResult", "SolverConfig",
    "UnsatisfiableInstance", "WorkerResult", "acceptance_probability", "brute_force_oracle",
    "find_monomorphism", "gate_weights", "incremental_isomorphism", "make_rng",
    "max_state_search", "merge_logs", "neighbor_map", "objective", "random_map",
    "route_one_pass", "solve", "stream_seed", "warm_start_map",
]
