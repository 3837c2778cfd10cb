"""HTTP service exposing the compile/simulate/measure pipeline.

Thin wrapper: every endpoint parses the request into core objects, calls
the same functions the CLI uses, and returns a typed response.  Netlist
problems come back as 400 with the parser or validator diagnostics.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from ..bitprog import lower
from ..codegen import CodegenError, emit_source
from ..designs import DESIGNS
from ..frontend import ParseError, parse_blif, parse_synth_json
from ..isa import PROFILES
from ..levelizer import levelize
from ..metrics import build_report, event_driven_reference
from ..netlist import InvalidNetlistError, Netlist, netlist_stats
from ..runtime import (
    BitProgramMachine,
    LeveledMachine,
    SimulationError,
    Stimulus,
    slice_lanes,
    unslice_lanes,
)
from .models import (
    CompileRequest,
    CompileResponse,
    DesignInfo,
    NetlistSource,
    ReportRequest,
    SimulateRequest,
    SimulateResponse,
    StatsRequest,
    StatsResponse,
    TransposeRequest,
    TransposeResponse,
)


def _load_source(source: NetlistSource) -> Netlist:
    if source.design is not None:
        if source.design not in DESIGNS:
            raise HTTPException(404, f"unknown design {source.design!r}")
        return DESIGNS[source.design].build()
    try:
        if source.format == "blif":
            return parse_blif(source.text, source="<request>")
        return parse_synth_json(source.text, source="<request>", top=source.top)
    except ParseError as exc:
        raise HTTPException(400, {"error": "parse", "message": str(exc)}) from None
    except InvalidNetlistError as exc:
        raise HTTPException(400, {
            "error": "validation",
            "diagnostics": [str(d) for d in exc.report.diagnostics],
        }) from None


def _check_isa(isa: str) -> None:
    if isa not in PROFILES:
        raise HTTPException(400, f"unknown isa {isa!r}; known: {', '.join(sorted(PROFILES))}")


def create_app() -> FastAPI:
    app = FastAPI(title="pspc", description="bitsliced synchronous program compiler")

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/designs", response_model=list[DesignInfo])
    def designs() -> list[DesignInfo]:
        return [
            DesignInfo(key=d.key, title=d.title, ports=list(d.ports), notes=d.notes)
            for d in DESIGNS.values()
        ]

    @app.post("/compile", response_model=CompileResponse)
    def compile_(req: CompileRequest) -> CompileResponse:
        _check_isa(req.isa)
        netlist = _load_source(req.source)
        try:
            program = lower(levelize(netlist), req.isa, req.width)
            text = emit_source(program).text if req.output == "c" else program.to_text()
        except (CodegenError, InvalidNetlistError) as exc:
            raise HTTPException(400, str(exc)) from None
        return CompileResponse(
            design=netlist.name, isa=req.isa, width=req.width, output=req.output,
            text=text, ops_per_tick=len(program.instrs) + program.n_dffs,
        )

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest) -> SimulateResponse:
        _check_isa(req.isa)
        netlist = _load_source(req.source)
        program = levelize(netlist)
        engines = {
            "leveled": lambda: LeveledMachine(program, req.width),
            "bitprog": lambda: BitProgramMachine(lower(program, req.isa, req.width)),
            "event": lambda: event_driven_reference(netlist, req.width),
        }
        names = list(engines) if req.engine == "all" else [req.engine]
        machines = [(name, engines[name]()) for name in names]
        ports = machines[0][1].input_ports
        try:
            if req.stimulus_csv is not None:
                stim = Stimulus.from_csv(req.stimulus_csv, ports, req.width)
                ticks = req.ticks if req.ticks is not None else len(stim)
            else:
                ticks = req.ticks if req.ticks is not None else 64
                stim = Stimulus.random(ports, ticks, req.width, seed=req.seed)
            traces = []
            for name, machine in machines:
                machine.reset()
                traces.append(machine.run(stim, ticks))
        except SimulationError as exc:
            raise HTTPException(400, str(exc)) from None
        agree = None
        if len(traces) > 1:
            agree = all(traces[0].outputs_equal(t) for t in traces[1:])
        return SimulateResponse(
            design=netlist.name, engine=req.engine, width=req.width, ticks=ticks,
            trace_csv=traces[0].to_csv(), ops=list(traces[0].ops), engines_agree=agree,
        )

    @app.post("/stats", response_model=StatsResponse)
    def stats(req: StatsRequest) -> StatsResponse:
        netlist = _load_source(req.source)
        program = levelize(netlist)
        census = netlist_stats(netlist)
        return StatsResponse(
            design=netlist.name,
            n_nets=netlist.n_nets,
            cells={k.name: v for k, v in census.items() if v},
            depth=max((program.level[ci] for ci in program.schedule), default=0),
            ops_per_tick=len(program.schedule) + program.n_dffs,
        )

    @app.post("/report")
    def report(req: ReportRequest) -> dict:
        _check_isa(req.isa)
        netlist = _load_source(req.source)
        return build_report(netlist, req.isa, req.width, ticks=req.ticks, seed=req.seed)

    @app.post("/transpose", response_model=TransposeResponse)
    def transpose(req: TransposeRequest) -> TransposeResponse:
        try:
            if req.invert:
                out = unslice_lanes(req.values, req.lanes)
            else:
                out = slice_lanes(req.values, req.bits)
        except ValueError as exc:
            raise HTTPException(400, str(exc)) from None
        return TransposeResponse(values=out)

    return app


app = create_app()
