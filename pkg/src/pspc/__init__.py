"""pspc: compile gate-level synchronous netlists to branch-free lane-parallel
programs, run them, and measure them."""

from .bitprog import BitProgram, Instr, Operand, lower
from .codegen import CodegenError, InstructionBreakdown, SourceArtifact, emit_source, tally
from .designs import DESIGNS, build_gcd, build_pwm, build_simon_round
from .frontend import (
    ParseError,
    detect_format,
    emit_blif,
    emit_synth_json,
    load_netlist,
    parse_blif,
    parse_synth_json,
)
from .isa import PROFILES, IsaProfile, profile
from .levelizer import CombinationalCycleError, LeveledProgram, levelize, verify_levels
from .metrics import (
    EventDrivenMachine,
    MetricsError,
    OverheadReport,
    RepeatabilityReport,
    build_report,
    event_driven_reference,
    overhead,
    repeatability,
)
from .netlist import (
    Cell,
    CellKind,
    InvalidNetlistError,
    Netlist,
    NetlistBuilder,
    ValidationReport,
    input_ports,
    netlist_stats,
    output_ports,
    validate_netlist,
)
from .runtime import (
    BitProgramMachine,
    LeveledMachine,
    Machine,
    SimulationError,
    Stimulus,
    Trace,
    machine_for,
    slice_lanes,
    unslice_lanes,
)

__version__ = "0.1.0"

__all__ = [
    "BitProgram",
    "BitProgramMachine",
    "Cell",
    "CellKind",
    "CodegenError",
    "CombinationalCycleError",
    "DESIGNS",
    "EventDrivenMachine",
    "Instr",
    "InstructionBreakdown",
    "InvalidNetlistError",
    "IsaProfile",
    "LeveledMachine",
    "LeveledProgram",
    "Machine",
    "MetricsError",
    "Netlist",
    "NetlistBuilder",
    "Operand",
    "OverheadReport",
    "PROFILES",
    "ParseError",
    "RepeatabilityReport",
    "SimulationError",
    "SourceArtifact",
    "Stimulus",
    "Trace",
    "ValidationReport",
    "build_gcd",
    "build_pwm",
    "build_report",
    "build_simon_round",
    "detect_format",
    "emit_blif",
    "emit_source",
    "emit_synth_json",
    "event_driven_reference",
    "input_ports",
    "levelize",
    "load_netlist",
    "lower",
    "machine_for",
    "netlist_stats",
    "output_ports",
    "overhead",
    "parse_blif",
    "parse_synth_json",
    "profile",
    "repeatability",
    "slice_lanes",
    "tally",
    "unslice_lanes",
    "validate_netlist",
    "verify_levels",
]
