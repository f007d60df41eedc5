"""
Scenario ingestion and the coalition sweep over a load range.
"""
import json
import math
from itertools import combinations
from multiprocessing import Pool
from pathlib import Path
from typing import IO, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, ValidationError

from chp_power.core.config.constants import ReportConstants
from chp_power.core.config.settings import settings
from chp_power.core.exceptions import (
    DomainError,
    InstanceTooLargeError,
    ScenarioConfigError,
    ScenarioSchemaError,
    UsageError,
)
from chp_power.core.types import Megawatts
from chp_power.market.dispatch import restricted_cost
from chp_power.market.model import GeneratorCost, Market, tolerance
from chp_power.market.strategic import truthful_profit
from chp_power.schemas.scenario import ScenarioDocument
from chp_power.utils.logger import get_logger

logger = get_logger(__name__)


class Scenario(BaseModel):
    """Market plus the load range and coalition sizes of one experiment."""

    model_config = ConfigDict(frozen=True)

    label: str
    market: Market
    load_min: float
    load_max: float
    load_step: float
    max_coalition: int

    @property
    def loads(self) -> List[float]:
        """load_min, load_min + step, ... up to load_max inclusive."""
        count = int(math.floor((self.load_max - self.load_min) / self.load_step + 1e-9)) + 1
        return [float(v) for v in self.load_min + self.load_step * np.arange(count)]


class SweepRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    load: float
    coalition_size: int
    n_coalitions: int
    n_with_power: int
    pct_with_power: float
    mean_power: float
    mean_power_over_powerholders: float
    max_power: float


class SizeSummary(BaseModel):
    """Aggregate of one coalition size pooled over every load."""

    model_config = ConfigDict(frozen=True)

    coalition_size: int
    n_coalitions: int
    n_with_power: int
    pct_with_power: float
    mean_power: float
    mean_power_over_powerholders: float
    max_power: float


class LinearTrend(BaseModel):
    model_config = ConfigDict(frozen=True)

    slope: float
    intercept: float
    r_squared: float


class SweepResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: str
    rows: Tuple[SweepRow, ...]
    by_size: Tuple[SizeSummary, ...]
    trend: Optional[LinearTrend] = None
    pct_non_decreasing: bool
    mean_non_decreasing: bool


# Scenario ingestion
def _field_path(error: dict) -> str:
    return ".".join(str(part) for part in error.get("loc", ())) or "$"


def scenario_from_document(document: ScenarioDocument) -> Scenario:
    """Enforce the model requirements a well-formed document can still break."""
    capacity = document.capacity_mw
    for k, entry in enumerate(document.generators):
        if entry.capacity_mw is not None and entry.capacity_mw != capacity:
            raise ScenarioConfigError(
                f"generator {entry.name!r} has capacity {entry.capacity_mw:g} MW; "
                f"every generator must share {capacity:g} MW",
                {"generator": k + 1, "capacity_mw": entry.capacity_mw},
            )

    n = len(document.generators)
    if document.load_min_mw > document.load_max_mw:
        raise ScenarioConfigError(
            f"load_min_mw {document.load_min_mw:g} exceeds load_max_mw {document.load_max_mw:g}"
        )
    if document.max_coalition > n:
        raise ScenarioConfigError(f"max_coalition {document.max_coalition} exceeds the {n} generators")

    remaining = (n - document.max_coalition) * capacity
    if remaining < document.load_max_mw - tolerance(remaining, document.load_max_mw):
        raise ScenarioConfigError(
            f"without {document.max_coalition} generators only {remaining:g} MW remain "
            f"for a load of {document.load_max_mw:g} MW",
            {"remaining_mw": remaining, "load_max_mw": document.load_max_mw},
        )

    market = Market(
        capacity=capacity,
        generators=tuple(
            GeneratorCost(startup_cost=g.startup_cost, variable_cost=g.variable_cost)
            for g in document.generators
        ),
        names=tuple(g.name for g in document.generators),
    )
    return Scenario(
        label=document.label,
        market=market,
        load_min=document.load_min_mw,
        load_max=document.load_max_mw,
        load_step=document.load_step_mw,
        max_coalition=document.max_coalition,
    )


def load_scenario(source: Union[bytes, str, IO]) -> Scenario:
    """Parse and validate a scenario JSON document."""
    if hasattr(source, "read"):
        source = source.read()
    try:
        raw = json.loads(source)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ScenarioSchemaError("$", f"not valid JSON ({e})")

    try:
        document = ScenarioDocument.model_validate(raw)
    except ValidationError as e:
        errors = e.errors(include_url=False)
        first = errors[0]
        raise ScenarioSchemaError(_field_path(first), first.get("msg", "invalid value"), errors=errors)

    scenario = scenario_from_document(document)
    logger.info("scenario_loaded", label=scenario.label, generators=scenario.market.n)
    return scenario


def load_scenario_file(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"scenario file not found: {path}")
    with path.open("rb") as handle:
        return load_scenario(handle)


# Coalition enumeration
def _type_ids(market: Market) -> List[int]:
    """Generators with identical (s, v) share an id."""
    seen: Dict[Tuple[float, float], int] = {}
    return [
        seen.setdefault((g.startup_cost, g.variable_cost), len(seen)) for g in market.generators
    ]


def _empty_row(demand: Megawatts, size: int) -> SweepRow:
    return SweepRow(
        load=demand,
        coalition_size=size,
        n_coalitions=0,
        n_with_power=0,
        pct_with_power=0.0,
        mean_power=0.0,
        mean_power_over_powerholders=0.0,
        max_power=0.0,
    )


def coalition_powers(market: Market, demand: Megawatts, size: int) -> List[float]:
    """M(A) of every feasible coalition of ``size`` members, in combination order.

    c^A(y) depends only on the multiset of excluded cost pairs, so it is
    memoized per signature.
    """
    if size < 1:
        raise DomainError(f"coalition size must be >= 1, got {size}")
    total = math.comb(market.n, size)
    limit = settings.COALITION_ENUMERATION_LIMIT
    if total > limit:
        raise InstanceTooLargeError(f"coalitions of size {size}", total, limit)

    remaining = (market.n - size) * market.capacity
    if size > market.n or demand > remaining + tolerance(demand, remaining):
        return []

    base = restricted_cost(market, demand)
    benchmarks = [truthful_profit(market, demand, k) for k in range(market.n)]
    types = _type_ids(market)
    memo: Dict[Tuple[int, ...], float] = {}

    powers = []
    for group in combinations(range(market.n), size):
        signature = tuple(sorted(types[k] for k in group))
        power = memo.get(signature)
        if power is None:
            cost_without = restricted_cost(market, demand, group)
            power = cost_without - base - sum(benchmarks[k] for k in group)
            memo[signature] = power
        powers.append(power)
    return powers


def _row(demand: Megawatts, size: int, powers: Sequence[float]) -> SweepRow:
    if not powers:
        return _empty_row(demand, size)
    holders = [p for p in powers if p > tolerance(p)]
    return SweepRow(
        load=demand,
        coalition_size=size,
        n_coalitions=len(powers),
        n_with_power=len(holders),
        pct_with_power=len(holders) / len(powers),
        mean_power=sum(powers) / len(powers),
        mean_power_over_powerholders=sum(holders) / len(holders) if holders else 0.0,
        max_power=max(powers),
    )


def coalition_stats(market: Market, demand: Megawatts, size: int) -> SweepRow:
    """Aggregate market power of all coalitions of one size at one load."""
    return _row(demand, size, coalition_powers(market, demand, size))


def _sweep_load(task: Tuple[Market, float, int]) -> List[SweepRow]:
    market, demand, max_size = task
    rows = [coalition_stats(market, demand, size) for size in range(1, max_size + 1)]
    logger.debug("sweep_load_completed", load=demand, rows=len(rows))
    return rows


def _summarize(rows: Sequence[SweepRow], max_size: int) -> Tuple[SizeSummary, ...]:
    summaries = []
    for size in range(1, max_size + 1):
        block = [r for r in rows if r.coalition_size == size]
        n_coalitions = sum(r.n_coalitions for r in block)
        n_with = sum(r.n_with_power for r in block)
        power_sum = sum(r.mean_power * r.n_coalitions for r in block)
        holder_sum = sum(r.mean_power_over_powerholders * r.n_with_power for r in block)
        summaries.append(
            SizeSummary(
                coalition_size=size,
                n_coalitions=n_coalitions,
                n_with_power=n_with,
                pct_with_power=n_with / n_coalitions if n_coalitions else 0.0,
                mean_power=power_sum / n_coalitions if n_coalitions else 0.0,
                mean_power_over_powerholders=holder_sum / n_with if n_with else 0.0,
                max_power=max((r.max_power for r in block if r.n_coalitions), default=0.0),
            )
        )
    return tuple(summaries)


def linear_trend(sizes: Sequence[float], values: Sequence[float]) -> Optional[LinearTrend]:
    """Least-squares line through (size, value) with its R^2."""
    if len(sizes) < 2:
        return None
    x = np.asarray(sizes, dtype=float)
    y = np.asarray(values, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sum((y - (slope * x + intercept)) ** 2))
    spread = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - residual / spread if spread > 0 else 1.0
    return LinearTrend(slope=float(slope), intercept=float(intercept), r_squared=r_squared)


def _non_decreasing(values: Sequence[float]) -> bool:
    return all(b >= a - tolerance(a, b) for a, b in zip(values[:-1], values[1:]))


def sweep(
    scenario: Scenario,
    workers: Optional[int] = None,
    loads: Optional[Sequence[float]] = None,
    max_size: Optional[int] = None,
) -> SweepResult:
    """One row per (load, size), load-major, plus per-size aggregates."""
    workers = workers or settings.SWEEP_WORKERS
    loads = list(loads) if loads is not None else scenario.loads
    max_size = max_size or scenario.max_coalition
    tasks = [(scenario.market, demand, max_size) for demand in loads]

    if workers > 1 and len(tasks) > 1:
        with Pool(processes=workers) as pool:
            blocks = pool.map(_sweep_load, tasks)
    else:
        blocks = [_sweep_load(task) for task in tasks]

    rows = tuple(row for block in blocks for row in block)
    by_size = _summarize(rows, max_size)
    populated = [s for s in by_size if s.n_coalitions]
    trend = linear_trend([s.coalition_size for s in populated], [s.mean_power for s in populated])

    result = SweepResult(
        label=scenario.label,
        rows=rows,
        by_size=by_size,
        trend=trend,
        pct_non_decreasing=_non_decreasing([s.pct_with_power for s in populated]),
        mean_non_decreasing=_non_decreasing([s.mean_power for s in populated]),
    )
    logger.info("sweep_completed", label=scenario.label, loads=len(loads), rows=len(rows), workers=workers)
    return result


# Reports
def rows_frame(rows: Sequence[SweepRow]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            (
                r.load,
                r.coalition_size,
                r.n_coalitions,
                r.n_with_power,
                r.pct_with_power,
                r.mean_power,
                r.mean_power_over_powerholders,
                r.max_power,
            )
            for r in rows
        ],
        columns=list(ReportConstants.CSV_COLUMNS),
    )


def by_size_frame(summaries: Sequence[SizeSummary]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            (
                s.coalition_size,
                s.n_coalitions,
                s.n_with_power,
                s.pct_with_power,
                s.mean_power,
                s.mean_power_over_powerholders,
                s.max_power,
            )
            for s in summaries
        ],
        columns=list(ReportConstants.SIZE_SUMMARY_COLUMNS),
    )


def by_size_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ReportConstants.BY_SIZE_SUFFIX)


def write_sweep_csv(result: SweepResult, path: Union[str, Path]) -> Tuple[Path, Path]:
    """Write the rows to ``path`` and the per-size aggregates next to it."""
    path = Path(path)
    options = dict(index=False, float_format=ReportConstants.CSV_FLOAT_FORMAT, lineterminator="\n")
    rows_frame(result.rows).to_csv(path, **options)
    summary_path = by_size_path(path)
    by_size_frame(result.by_size).to_csv(summary_path, **options)
    logger.info("sweep_written", path=str(path), by_size=str(summary_path), rows=len(result.rows))
    return path, summary_path
