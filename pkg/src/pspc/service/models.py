"""Request and response bodies for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

Width = Literal[8, 16, 32, 64]


class NetlistSource(BaseModel):
    """Either the text of a netlist or the key of a built-in design."""
    design: Optional[str] = None
    format: Optional[Literal["blif", "json"]] = None
    text: Optional[str] = None
    top: Optional[str] = None

    @model_validator(mode="after")
    def _one_source(self) -> "NetlistSource":
        if (self.design is None) == (self.text is None):
            raise ValueError("provide exactly one of design or text")
        if self.text is not None and self.format is None:
            raise ValueError("text needs a format (blif or json)")
        return self


class CompileRequest(BaseModel):
    source: NetlistSource
    isa: str = "arm-m4"
    width: Width = 32
    output: Literal["c", "bitprog"] = "c"


class CompileResponse(BaseModel):
    design: str
    isa: str
    width: int
    output: Literal["c", "bitprog"]
    text: str
    ops_per_tick: int


class SimulateRequest(BaseModel):
    source: NetlistSource
    isa: str = "arm-m4"
    width: Width = 32
    engine: Literal["leveled", "bitprog", "event", "all"] = "bitprog"
    ticks: Optional[int] = Field(default=None, ge=1, le=100_000)
    stimulus_csv: Optional[str] = None
    seed: int = 1


class SimulateResponse(BaseModel):
    design: str
    engine: str
    width: int
    ticks: int
    trace_csv: str
    ops: list[int]
    engines_agree: Optional[bool] = None


class StatsRequest(BaseModel):
    source: NetlistSource


class StatsResponse(BaseModel):
    design: str
    n_nets: int
    cells: dict[str, int]
    depth: int
    ops_per_tick: int


class ReportRequest(BaseModel):
    source: NetlistSource
    isa: str = "arm-m4"
    width: Width = 32
    ticks: int = Field(default=64, ge=1, le=100_000)
    seed: int = 1


class TransposeRequest(BaseModel):
    values: list[int]
    bits: int = Field(default=8, ge=1, le=64)
    invert: bool = False
    lanes: Optional[int] = Field(default=None, ge=1, le=64)

    @model_validator(mode="after")
    def _lanes_when_inverting(self) -> "TransposeRequest":
        if self.invert and self.lanes is None:
            raise ValueError("invert needs lanes")
        return self


class TransposeResponse(BaseModel):
    values: list[int]


class DesignInfo(BaseModel):
    key: str
    title: str
    ports: list[tuple[str, int, str]]
    notes: str = ""
