"""Solver configuration and annealing schedules."""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import asdict, dataclass, field


@dataclass(frozen=True)
class Schedule:
    """Geometric cooling: multiply the temperature by (1 - rate) each step until it reaches tau_f."""

    tau_i: float = 10.0
    rate: float = 1e-3
    tau_f: float = 1e-5

    def __post_init__(self):
        if not 0 < self.rate <= 1:
            raise ValueError(f"cooling rate must be in (0, 1], got {self.rate}")
        if not 0 < self.tau_f < self.tau_i:
            raise ValueError(f"need 0 < tau_f < tau_i, got tau_f={self.tau_f}, tau_i={self.tau_i}")

    @property
    def iterations(self) -> int:
        if self.rate >= 1.0:
            return 1
        return max(1, math.ceil(math.log(self.tau_f / self.tau_i) / math.log(1.0 - self.rate)))

    def with_rate(self, rate: float) -> "Schedule":
        return Schedule(self.tau_i, rate, self.tau_f)


def acceptance_probability(c_new: float, c_curr: float, tau: float) -> float:
    """Metropolis rule min(1, exp(-(c_new - c_curr) / tau)); infinite costs count as failures."""
    if math.isinf(c_new):
        return 1.0 if math.isinf(c_curr) else 0.0
    if math.isinf(c_curr):
        return 1.0
    delta = c_new - c_curr
    if delta <= 0:
        return 1.0
    return math.exp(-delta / tau)


# 1 - 10^(10 log10 0.9) = 1 - 0.9^10
REDUCED_RATES = (1e-2, 1e-1, 1.0 - 0.9 ** 10, 1.0)


@dataclass
class SolverConfig:
    seed: int = 0
    timeout: float = 10.0
    jobs: int = 1
    sa_map: Schedule = field(default_factory=Schedule)
    sa_perm: Schedule = field(default_factory=Schedule)
    perm_reduced_rates: tuple[float, ...] = REDUCED_RATES
    # evaluations allowed per maximal-state search over layer orderings
    perm_eval_budget: int = 200
    perm_evals_per_order: int = 16
    criticality_weighting: bool = True
    warm_start: bool = True
    # "single": score transitions with one index-order pass; "full": run the ordering search
    transition_search: str = "single"
    # empty states in a row before the distance fallback switches to focused mode
    stall_limit: int = 4
    # empty states in a row after which a run is abandoned; None derives it from the arch size
    stall_cap: int | None = None
    iso_node_budget: int = 20000
    run_cache_size: int = 200_000

    def __post_init__(self):
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")
        if self.timeout < 0:
            raise ValueError("timeout must be non-negative")
        if self.transition_search not in ("single", "full"):
            raise ValueError("transition_search must be 'single' or 'full'")

    def perm_schedules(self) -> list[Schedule]:
        return [self.sa_perm] + [self.sa_perm.with_rate(r) for r in self.perm_reduced_rates]

    def to_json(self) -> dict:
        d = asdict(self)
        d["perm_reduced_rates"] = list(self.perm_reduced_rates)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "SolverConfig":
        d = dict(d)
        for k in ("sa_map", "sa_perm"):
            if k in d and isinstance(d[k], dict):
                d[k] = Schedule(**d[k])
        if "perm_reduced_rates" in d:
            d["perm_reduced_rates"] = tuple(d["perm_reduced_rates"])
        return cls(**d)


def stream_seed(seed: int, *parts) -> int:
    """64-bit seed for an independent stream keyed by ``seed`` and ``parts`` (SHA-256 based)."""
    text = ":".join(str(p) for p in (seed,) + parts)
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


def make_rng(seed: int, *parts) -> random.Random:
    return random.Random(stream_seed(seed, *parts))
