"""
Pydantic schemas for scenario documents.
"""
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field


class GeneratorEntry(BaseModel):
    """One generator of a scenario file."""

    model_config = ConfigDict(extra="forbid")

    name: str = Field(..., min_length=1, description="Display label")
    startup_cost: float = Field(..., ge=0, allow_inf_nan=False, description="Startup cost s_i")
    variable_cost: float = Field(..., ge=0, allow_inf_nan=False, description="Variable cost v_i per MW")
    capacity_mw: Optional[float] = Field(
        None, gt=0, allow_inf_nan=False, description="Optional per-unit capacity; must equal capacity_mw"
    )


class ScenarioDocument(BaseModel):
    """Scenario file as stored on disk."""

    model_config = ConfigDict(extra="forbid")

    label: str = Field(..., description="Scenario label")
    capacity_mw: float = Field(..., gt=0, allow_inf_nan=False, description="Shared capacity G")
    generators: List[GeneratorEntry] = Field(..., min_length=1)
    load_min_mw: float = Field(..., ge=0, allow_inf_nan=False)
    load_max_mw: float = Field(..., ge=0, allow_inf_nan=False)
    load_step_mw: float = Field(..., gt=0, allow_inf_nan=False)
    max_coalition: int = Field(..., ge=1)
