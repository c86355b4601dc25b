"""Pydantic request/response models for the JSON API.

Deep validation of plant/filter/simulation documents is delegated to the
session-module schema checks so the wire format and the `.flores` file format
stay identical; these models describe the envelope the service itself owns.
"""
from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class CreateSessionRequest(BaseModel):
    document: Optional[dict] = None
    demo: bool = False


class SessionEnvelope(BaseModel):
    session_id: str
    revision: int


class SessionStateResponse(SessionEnvelope):
    document: dict


class PlantRequest(BaseModel):
    plant: dict


class GridRequest(BaseModel):
    f_min_hz: float
    f_max_hz: float
    points_per_decade: int = 100


class RequirementsRequest(BaseModel):
    min_gm_db: Optional[float] = None
    min_pm_deg: Optional[float] = None
    min_mm: Optional[float] = None
    bw_range_hz: Optional[tuple[float, float]] = None


class ControllerCreateRequest(BaseModel):
    name: str = Field(min_length=1)


class FilterRequest(BaseModel):
    filter: dict


class FilterListRequest(BaseModel):
    filters: list[dict]


class PrefilterRequest(BaseModel):
    prefilter: dict


class ActiveControllerRequest(BaseModel):
    name: str


class SimulateRequest(BaseModel):
    config: dict
    controller: Optional[str] = None


class MarginsResponse(SessionEnvelope):
    controller: str
    controller_order: int
    gain_margin_db: Optional[float]
    gm_freq_hz: Optional[float]
    phase_margin_deg: Optional[float]
    pm_freq_hz: Optional[float]
    modulus_margin: float
    mm_freq_hz: float
    bandwidth_hz: Optional[float]
    closed_loop_bw_hz: Optional[float]
    gain_crossovers_hz: list[float]
    phase_crossovers_hz: list[float]
    flags: dict[str, Optional[bool]]


class PlotResponse(SessionEnvelope):
    subsystem: str
    view: str
    controller: str
    controller_order: int
    column_names: list[str]
    columns: dict[str, list[float]]


class SimulateResponse(SessionEnvelope):
    time_s: list[float]
    reference: list[float]
    output: list[float]
    control_effort: list[float]
    output_no_prefilter: Optional[list[float]] = None
    diverged: bool = False
    diverged_at_index: Optional[int] = None
    seeds: Optional[dict[str, int]] = None


class ExportResponse(SessionEnvelope):
    controller: str
    export: dict


class ErrorBody(BaseModel):
    error: str
    detail: Any
