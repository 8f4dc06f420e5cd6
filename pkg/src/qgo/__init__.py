"""Quantum Go: rules with measurement collapse, simulated entangled-photon
bit sources, analytics, self-play bots and a live two-player service."""

from ._kernels import BACKEND
from .rules import (
    BLACK,
    WHITE,
    PASS,
    BoardConfig,
    CollapseRecord,
    GameState,
    IllegalMoveError,
    MoveOutcome,
    Place,
    QuantumStone,
    ScoreResult,
    apply_move,
    end_measure,
    format_coord,
    group_liberties,
    involved_stones,
    is_legal,
    legal_moves,
    new_game,
    parse_coord,
    resolve_collapse,
    score,
)
from .source import (
    BitsExhausted,
    BitSource,
    CoincidenceConfig,
    CoincidenceCounts,
    FileBitSource,
    ScriptedBitSource,
    SimulatedBitSource,
    StateParams,
    TimeTag,
    concurrence_pure,
    extract_bits,
    generate_timetags,
    open_bitsource,
    read_tags,
    sample_bit,
    visibility,
    write_tags,
)
from .analytics import (
    AISTrace,
    Correlogram,
    ais_bounds,
    ais_trace,
    autocorrelation,
    confidence_bound,
    enumerate_game_tree,
    quantum_branching,
)
from .kifu import (
    Kifu,
    KifuParseError,
    KifuRecorder,
    ReplayDivergenceError,
    parse,
    render_board,
    replay,
    serialize,
)
from .selfplay import SelfPlayReport, random_bot_move, run_selfplay

__version__ = "0.1.0"
