"""Experiment configuration and report models.

Configs are strict: unknown keys fail validation, so a misspelt parameter
name can never be silently ignored.
"""

from __future__ import annotations

from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

Scenario = Literal["limit_beta1", "lln", "clt", "stationary_beta1", "stationary_beta_lt1"]


class ParamsSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    c1: float
    c2: float
    alpha: float
    beta: float
    ell: float = 0.0
    p: Union[float, List[float]] = Field(..., description="Loss probability or a grid of them.")

    @property
    def p_grid(self) -> List[float]:
        return list(self.p) if isinstance(self.p, list) else [self.p]

    @field_validator("p")
    @classmethod
    def _nonempty_grid(cls, v: Union[float, List[float]]) -> Union[float, List[float]]:
        if isinstance(v, list) and not v:
            raise ValueError("p grid must not be empty")
        return v


class ExplicitW0(BaseModel):
    model_config = ConfigDict(extra="forbid")

    explicit: float


class Thresholds(BaseModel):
    """Acceptance thresholds; all overridable per experiment file."""

    model_config = ConfigDict(extra="forbid")

    limit_ks_max: float = 0.10
    ks_monotone_slack: float = 0.02
    lln_slope_low: float = 0.35
    lln_slope_high: float = 0.65
    lln_r2_min: float = 0.9
    clt_variance_ratio_low: float = 0.85
    clt_variance_ratio_high: float = 1.15
    xi_em_variance_tol: float = 0.05
    stationary_ks_max: float = 0.10
    stationary_normal_ks_max: float = 0.05
    stationary_variance_tol: float = 0.15
    stationary_mean_tol: float = 0.1
    self_consistency_level: float = 0.01


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scenario: Scenario
    params: ParamsSpec
    w0_policy: Union[Literal["equilibrium"], ExplicitW0] = "equilibrium"
    integer_window: bool = False
    horizon: float = 10.0
    grid_dt: float = 0.1
    replicates: int = 2000
    # limit-process replicates in clt (Euler-Maruyama and exact OU); defaults to replicates
    em_replicates: Optional[int] = None
    seed: int = Field(0, ge=0, le=2**64 - 1)
    solver_dt: float = 1e-3
    burn_in: int = 1_000_000
    thin: int = 1000
    samples: int = 5000
    limit_burn_in: float = 50.0
    limit_spacing: float = 1.0
    output_path: Optional[str] = None
    thresholds: Thresholds = Field(default_factory=Thresholds)


class Check(BaseModel):
    name: str
    value: float
    threshold: float
    comparator: Literal["<=", ">=", "in"]
    upper: Optional[float] = None
    passed: bool


class GridPointReport(BaseModel):
    p: float
    metrics: Dict[str, float] = Field(default_factory=dict)
    diagnostics: Dict[str, float] = Field(default_factory=dict)
    # per-replicate (or per-sample) values for the CSV sample family
    samples: Dict[str, List[float]] = Field(default_factory=dict, exclude=True)


class ScenarioReport(BaseModel):
    scenario: Scenario
    version: str
    seed: int
    config: Dict[str, Any]
    constants: List[Dict[str, Optional[float]]] = Field(default_factory=list)
    grid: List[GridPointReport] = Field(default_factory=list)
    aggregate: Dict[str, float] = Field(default_factory=dict)
    checks: List[Check] = Field(default_factory=list)
    passed: bool = True
    timings: Dict[str, float] = Field(default_factory=dict, exclude=True)
