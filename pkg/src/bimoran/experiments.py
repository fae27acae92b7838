"""Batch experiment drivers and their machine-readable output.

Each command produces :class:`EstimateRecord` rows serialized as CSV or
JSON with a fixed column order.  Output is byte-identical across runs for
the same configuration: all randomness derives from the per-replica
streams, aggregation is a deterministic fold in replica order, floats are
rendered by shortest round-trip repr, and wall-clock timing is kept out
of the serialized rows unless explicitly requested (``timing=True``),
since it would break reproducibility.  Measured times always go to the
log instead.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import asdict, dataclass
from typing import Sequence

from .chain import exact_absorption, fixation_probability
from .ensemble import run_ensemble
from .errors import ParameterError
from .limits import limit_d, limit_s_infinity, limit_uv, limit_weight
from .model import ModelParams
from .verify import CheckResult, run_identity_suite

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "label", "N", "s", "a", "b", "n_runs", "n_fixed",
    "mean", "stderr", "exact_value", "limit_value", "wall_time_ms",
)

COMMANDS = ("simulate", "exact", "limit", "verify", "sweep")

# Tridiagonal absorption solves stay fast and well conditioned up to here.
EXACT_SOLVER_MAX_N = 100_000

DEFAULT_REPLICAS = 1000

# Fraction of truncated runs above which the estimate is flagged.
TRUNCATION_WARN_FRACTION = 0.01


@dataclass
class EstimateRecord:
    """One output row; optional fields serialize as empty CSV cells."""

    label: str
    N: int | None = None
    s: float | None = None
    a: float | None = None
    b: float | None = None
    n_runs: int = 0
    n_fixed: int = 0
    mean: float | None = None
    stderr: float | None = None
    exact_value: float | None = None
    limit_value: float | None = None
    wall_time_ms: int | None = None


@dataclass
class RunConfig:
    """Resolved configuration of one CLI invocation."""

    command: str
    N: int = 100
    s: float = 1.0
    a: float = 0.5
    b: float | None = None
    replicas: int | None = None
    base_seed: int = 0
    grid: tuple[int, ...] | None = None
    out: str | None = None
    fmt: str = "csv"
    timing: bool = False
    max_steps: int | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ParameterError(f"unknown command {self.command!r}")
        if self.fmt not in ("csv", "json"):
            raise ParameterError(f"format must be csv or json, got {self.fmt!r}")
        if self.replicas is not None and self.replicas < 1:
            raise ParameterError(f"replicas must be >= 1, got {self.replicas!r}")
        if self.grid is not None:
            if len(self.grid) == 0:
                raise ParameterError("sweep grid is empty")
            if any(y <= x for x, y in zip(self.grid, self.grid[1:])):
                raise ParameterError(f"sweep grid must be strictly increasing, got {self.grid}")
        if self.b is not None and not 0.0 < self.b <= 1.0:
            raise ParameterError(f"b must lie in (0, 1], got {self.b!r}")


# -- serialization --

def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(records: Sequence[EstimateRecord]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for record in records:
        data = asdict(record)
        lines.append(",".join(_cell(data[col]) for col in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def render_json(records: Sequence[EstimateRecord]) -> str:
    return json.dumps([asdict(record) for record in records], indent=2) + "\n"


def write_records(records: Sequence[EstimateRecord], path: str, fmt: str = "csv") -> None:
    text = render_csv(records) if fmt == "csv" else render_json(records)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)


# -- config files --

_CONFIG_KEYS = {
    "n", "s", "a", "b", "replicas", "seed", "grid", "out", "format", "timing", "max_steps",
}


def load_config_file(path: str) -> dict[str, str]:
    """Parse a flat key=value config file; '#' starts a comment."""
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected key=value, got {raw.rstrip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise ParameterError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = value
    return values


def parse_grid(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ParameterError(f"invalid grid {text!r}: {exc}") from None


# -- helpers --

def _floor_fraction(fraction: float, N: int) -> int:
    return int(math.floor(fraction * N + 1e-9))


def _ms_since(t0: float) -> int:
    return int(round((time.perf_counter() - t0) * 1000.0))


def _exact_u_or_none(N: int, s: float, k0: int, b_level: int) -> float | None:
    if N > EXACT_SOLVER_MAX_N:
        return None
    if k0 == 0:
        return 0.0   # the count can never reach b_level from 0
    return exact_absorption(N, s, k0, b_level).u


def _limit_weight_or_none(a: float, s: float) -> float | None:
    if 0.0 < a < 1.0 and s > 0.0:
        return limit_weight(a, s)
    if a == 1.0:
        return 1.0
    if a == 0.0:
        return 0.0
    return None


# -- commands --

def run_simulate(cfg: RunConfig) -> list[EstimateRecord]:
    """Monte-Carlo estimate of the mean fixed-founder weight at fixation.

    Runs ``replicas`` independent full-model replicas; lanes absorbed at 0
    or truncated contribute zero, matching the fixation indicator in the
    estimand.  The matching exact solve and large-N limit ride along in
    the same record whenever they are available.
    """
    params = ModelParams(N=cfg.N, s=cfg.s, a=cfg.a, base_seed=cfg.base_seed,
                         max_steps=cfg.max_steps)
    replicas = cfg.replicas if cfg.replicas is not None else DEFAULT_REPLICAS
    t0 = time.perf_counter()
    result = run_ensemble(params, replicas)
    wall_ms = _ms_since(t0)
    log.info("simulate: %d replicas in %d ms", replicas, wall_ms)

    if result.n_truncated > TRUNCATION_WARN_FRACTION * result.n_runs:
        log.warning(
            "simulate: %d of %d runs truncated at max_steps=%d; estimate is biased low",
            result.n_truncated, result.n_runs, params.effective_max_steps,
        )

    record = EstimateRecord(
        label="simulate",
        N=cfg.N, s=cfg.s, a=cfg.a, b=None,
        n_runs=result.n_runs,
        n_fixed=result.n_fixed,
        mean=result.mean,
        stderr=result.stderr,
        exact_value=_exact_u_or_none(cfg.N, cfg.s, params.initial_count, cfg.N),
        limit_value=_limit_weight_or_none(cfg.a, cfg.s),
        wall_time_ms=wall_ms if cfg.timing else None,
    )
    return [record]


def run_exact(cfg: RunConfig) -> list[EstimateRecord]:
    """Exact absorbed expectations for the configured (N, s, a, b)."""
    if cfg.N > EXACT_SOLVER_MAX_N:
        raise ParameterError(f"N={cfg.N} exceeds the exact-solver range {EXACT_SOLVER_MAX_N}")
    b = cfg.b if cfg.b is not None else 1.0
    k0 = _floor_fraction(cfg.a, cfg.N)
    if k0 < 1:
        raise ParameterError(f"a={cfg.a} gives an empty initial advantaged set at N={cfg.N}")
    b_level = cfg.N if b == 1.0 else _floor_fraction(b, cfg.N)

    t0 = time.perf_counter()
    values = exact_absorption(cfg.N, cfg.s, k0, b_level)
    wall_ms = _ms_since(t0)
    log.info("exact: N=%d solve in %d ms", cfg.N, wall_ms)

    if cfg.s > 0.0 and cfg.a < b < 1.0:
        lim_d = limit_d(cfg.a, b, cfg.s)
        lim_u, lim_v = limit_uv(cfg.a, b, cfg.s)
    elif cfg.s > 0.0 and b == 1.0 and 0.0 < cfg.a < 1.0:
        lim_u = limit_weight(cfg.a, cfg.s)
        lim_d, lim_v = 0.0, lim_u
    else:
        lim_d = lim_u = lim_v = None

    # Probability of reaching b_level before 0; at s=0 this is the
    # symmetric-walk value k0/b_level, i.e. essentially a when b is 1.
    p_fix = fixation_probability(cfg.N, cfg.s, k0, lower=0, upper=b_level)

    wall = wall_ms if cfg.timing else None
    common = dict(N=cfg.N, s=cfg.s, a=cfg.a, b=b, n_runs=0, n_fixed=0, stderr=None)
    return [
        EstimateRecord(label="exact_d", mean=values.d, exact_value=values.d,
                       limit_value=lim_d, wall_time_ms=wall, **common),
        EstimateRecord(label="exact_u", mean=values.u, exact_value=values.u,
                       limit_value=lim_u, wall_time_ms=wall, **common),
        EstimateRecord(label="exact_v", mean=values.v, exact_value=values.v,
                       limit_value=lim_v, wall_time_ms=wall, **common),
        EstimateRecord(label="exact_fixation", mean=p_fix, exact_value=p_fix,
                       limit_value=None, wall_time_ms=wall, **common),
    ]


def run_limit(cfg: RunConfig) -> list[EstimateRecord]:
    """Closed-form limit values for the configured (a, b, s)."""
    if cfg.s <= 0.0:
        raise ParameterError(f"limits require s > 0, got s={cfg.s}")
    if not 0.0 < cfg.a < 1.0:
        raise ParameterError(f"limits require 0 < a < 1, got a={cfg.a}")

    t0 = time.perf_counter()
    records = []
    common = dict(N=None, s=cfg.s, a=cfg.a, n_runs=0, n_fixed=0, stderr=None)
    lw = limit_weight(cfg.a, cfg.s)
    records.append(EstimateRecord(label="limit_weight", b=1.0, mean=lw,
                                  limit_value=lw, **common))
    ls = limit_s_infinity(cfg.a)
    records.append(EstimateRecord(label="limit_s_infinity", b=None, mean=ls,
                                  limit_value=ls, **common))
    if cfg.b is not None and cfg.a < cfg.b < 1.0:
        ld = limit_d(cfg.a, cfg.b, cfg.s)
        lu, lv = limit_uv(cfg.a, cfg.b, cfg.s)
        for label, value in (("limit_d", ld), ("limit_u", lu), ("limit_v", lv)):
            records.append(EstimateRecord(label=label, b=cfg.b, mean=value,
                                          limit_value=value, **common))
    wall_ms = _ms_since(t0)
    log.info("limit: evaluated in %d ms", wall_ms)
    if cfg.timing:
        for record in records:
            record.wall_time_ms = wall_ms
    return records


def run_sweep(cfg: RunConfig) -> list[EstimateRecord]:
    """Exact absorbed expectations over an N grid, against the shared limit.

    With ``replicas`` set, a Monte-Carlo estimate rides along per N; the
    |exact - limit| column gap shrinking along the grid is the finite-size
    convergence this command exists to expose.
    """
    if cfg.grid is None:
        raise ParameterError("sweep requires a grid of N values")
    b = cfg.b if cfg.b is not None else 1.0
    if cfg.s > 0.0 and 0.0 < cfg.a < 1.0:
        shared_limit = limit_weight(cfg.a, cfg.s) if b == 1.0 else limit_uv(cfg.a, b, cfg.s)[0]
    else:
        shared_limit = None

    records = []
    for N in cfg.grid:
        k0 = _floor_fraction(cfg.a, N)
        if k0 < 1:
            raise ParameterError(f"a={cfg.a} gives an empty initial advantaged set at N={N}")
        b_level = N if b == 1.0 else _floor_fraction(b, N)
        t0 = time.perf_counter()
        values = exact_absorption(N, cfg.s, k0, b_level)
        record = EstimateRecord(
            label="sweep", N=N, s=cfg.s, a=cfg.a, b=b,
            mean=values.u, exact_value=values.u, limit_value=shared_limit,
        )
        if cfg.replicas is not None:
            params = ModelParams(N=N, s=cfg.s, a=cfg.a, base_seed=cfg.base_seed,
                                 max_steps=cfg.max_steps)
            result = run_ensemble(params, cfg.replicas)
            record.n_runs = result.n_runs
            record.n_fixed = result.n_fixed
            record.mean = result.mean
            record.stderr = result.stderr
        wall_ms = _ms_since(t0)
        log.info("sweep: N=%d in %d ms", N, wall_ms)
        if cfg.timing:
            record.wall_time_ms = wall_ms
        records.append(record)
    return records


def run_verify(cfg: RunConfig) -> tuple[list[CheckResult], bool]:
    """Run the identity suite; results are independent of the base seed."""
    t0 = time.perf_counter()
    checks = run_identity_suite()
    log.info("verify: suite in %d ms", _ms_since(t0))
    return checks, all(check.passed for check in checks)


__all__ = [
    "CSV_COLUMNS",
    "COMMANDS",
    "EXACT_SOLVER_MAX_N",
    "EstimateRecord",
    "RunConfig",
    "render_csv",
    "render_json",
    "write_records",
    "load_config_file",
    "parse_grid",
    "run_simulate",
    "run_exact",
    "run_limit",
    "run_sweep",
    "run_verify",
]
