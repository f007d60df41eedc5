"""
Domain types of the equal-capacity pool: generator costs, markets and bid profiles.
"""
import math
from typing import FrozenSet, Iterable, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from chp_power.core.config.settings import settings
from chp_power.core.exceptions import DomainError
from chp_power.core.types import Megawatts, Money


def tolerance(*values: float) -> float:
    """Comparison threshold scaled by the magnitude of the compared values."""
    scale = max([1.0] + [abs(v) for v in values])
    return settings.TOLERANCE * scale


class GeneratorCost(BaseModel):
    """Step cost: a startup component plus a linear variable component."""

    model_config = ConfigDict(frozen=True)

    startup_cost: float = Field(..., ge=0, allow_inf_nan=False, description="s_i")
    variable_cost: float = Field(..., ge=0, allow_inf_nan=False, description="v_i")

    def evaluate(self, output: Megawatts) -> Money:
        return evaluate_cost(self, output)

    def with_variable_cost(self, variable_cost: float) -> "GeneratorCost":
        return GeneratorCost(startup_cost=self.startup_cost, variable_cost=variable_cost)


class Market(BaseModel):
    """A pool of generators sharing one capacity G."""

    model_config = ConfigDict(frozen=True)

    capacity: float = Field(..., gt=0, allow_inf_nan=False, description="G in MW")
    generators: Tuple[GeneratorCost, ...] = Field(..., min_length=1)
    names: Optional[Tuple[str, ...]] = None

    @model_validator(mode="after")
    def check_names(self) -> "Market":
        if self.names is not None and len(self.names) != len(self.generators):
            raise ValueError(
                f"names has {len(self.names)} entries for {len(self.generators)} generators"
            )
        return self

    @classmethod
    def from_costs(
        cls,
        capacity: float,
        startup_costs: Sequence[float],
        variable_costs: Sequence[float],
        names: Optional[Sequence[str]] = None,
    ) -> "Market":
        """Build a market from parallel cost lists."""
        if len(startup_costs) != len(variable_costs):
            raise DomainError("startup and variable cost lists differ in length")
        generators = tuple(
            GeneratorCost(startup_cost=s, variable_cost=v)
            for s, v in zip(startup_costs, variable_costs)
        )
        return cls(
            capacity=capacity,
            generators=generators,
            names=tuple(names) if names is not None else None,
        )

    @property
    def n(self) -> int:
        return len(self.generators)

    @property
    def total_capacity(self) -> Megawatts:
        return self.n * self.capacity

    def label(self, index: int) -> str:
        """Display name of a generator; 1-based position when unnamed."""
        if self.names is not None:
            return self.names[index]
        return str(index + 1)

    def full_costs(self) -> Tuple[Money, ...]:
        return tuple(cost.evaluate(self.capacity) for cost in self.generators)

    def check_index(self, index: int) -> int:
        if not 0 <= index < self.n:
            raise DomainError(f"generator index {index + 1} outside 1..{self.n}")
        return index


class BidProfile(BaseModel):
    """Reported variable costs; startup costs are never misreported."""

    model_config = ConfigDict(frozen=True)

    market: Market
    reported_variable_costs: Tuple[float, ...]

    @model_validator(mode="after")
    def check_reports(self) -> "BidProfile":
        if len(self.reported_variable_costs) != self.market.n:
            raise ValueError(
                f"{len(self.reported_variable_costs)} reports for {self.market.n} generators"
            )
        for value in self.reported_variable_costs:
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"reported variable cost must be finite and >= 0, got {value}")
        return self

    @classmethod
    def truthful(cls, market: Market) -> "BidProfile":
        return cls(
            market=market,
            reported_variable_costs=tuple(g.variable_cost for g in market.generators),
        )

    @classmethod
    def deviation(cls, market: Market, generator: int, reported_v: float) -> "BidProfile":
        """All generators truthful except one."""
        market.check_index(generator)
        reports = [g.variable_cost for g in market.generators]
        reports[generator] = reported_v
        return cls(market=market, reported_variable_costs=tuple(reports))

    @property
    def costs(self) -> Tuple[GeneratorCost, ...]:
        """Cost profile the operator sees."""
        return tuple(
            true.with_variable_cost(v) if v != true.variable_cost else true
            for true, v in zip(self.market.generators, self.reported_variable_costs)
        )

    @property
    def deviators(self) -> FrozenSet[int]:
        """Generators whose report differs from their true variable cost."""
        return frozenset(
            k
            for k, (true, v) in enumerate(zip(self.market.generators, self.reported_variable_costs))
            if v != true.variable_cost
        )


class MarginalSplit(BaseModel):
    """Demand written as (m - 1) full blocks plus one partial block of x MW."""

    model_config = ConfigDict(frozen=True)

    marginal_index: int = Field(..., ge=0, description="m")
    partial_output: float = Field(..., ge=0, description="x in MW")


def evaluate_cost(cost: GeneratorCost, output: Megawatts) -> Money:
    """f(0) = 0 and f(g) = s + v * g for g > 0."""
    if output < 0:
        raise DomainError(f"output must be non-negative, got {output}")
    if output == 0:
        return 0.0
    return cost.startup_cost + cost.variable_cost * output


def cost_profile(
    market: Market, bids: Optional[BidProfile] = None
) -> Tuple[Tuple[GeneratorCost, ...], FrozenSet[int]]:
    """Costs the operator clears against, and the generators that lose ties."""
    if bids is None:
        return market.generators, frozenset()
    if bids.market != market:
        raise DomainError("bid profile belongs to a different market")
    return bids.costs, bids.deviators


def rank_generators(
    costs: Sequence[GeneratorCost],
    capacity: float,
    deviators: FrozenSet[int] = frozenset(),
    excluded: Iterable[int] = (),
) -> Tuple[int, ...]:
    """Indices sorted by f(G); exact ties go to non-deviators, then lowest index."""
    skip = set(excluded)
    return tuple(
        sorted(
            (k for k in range(len(costs)) if k not in skip),
            key=lambda k: (costs[k].evaluate(capacity), k in deviators, k),
        )
    )


def merit_order(market: Market, bids: Optional[BidProfile] = None) -> Tuple[int, ...]:
    """Permutation of 0-based indices in ascending (reported) full-capacity cost.

    Truthful profiles break exact ties by ascending index. A generator whose
    reported variable cost differs from its true one goes behind every
    truthful generator it ties with, so a deviation never wins a tie.
    """
    costs, deviators = cost_profile(market, bids)
    return rank_generators(costs, market.capacity, deviators)
