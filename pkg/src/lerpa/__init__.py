"""Lerpa: a self-play learning laboratory for a trick-taking betting game.

The package splits into a rules engine (`cards`), the binary observation
encoder (`encoding`), a small from-scratch neural network (`network`),
TD(lambda) learning agents (`agents`), the table orchestrator and log
analytics (`table`), and the seeded experiment battery (`experiments`,
`cli`).
"""

from .agents import FOLD, AgentParams, Decision, EligibilityTraces, RandomAgent, TdAgent
from .cards import (
    Card,
    ContractError,
    InputError,
    Settlement,
    Suit,
    TrickState,
    build_deck,
    deal,
    legal_moves,
    parse_card,
    resolve_trick,
    settle_hand,
)
from .encoding import (
    OBS_BITS,
    AgentView,
    HandSuitClass,
    OpponentStatus,
    PlayedSuitClass,
    PlayedValueClass,
    classify_hand_suits,
    encode_hand,
    encode_observation,
    encode_played_card,
    layout_table,
)
from .network import ForwardTrace, GradientSet, Mlp, scalar_prediction
from .table import (
    BluffEvent,
    HandRecord,
    PredealtSpec,
    SessionLog,
    Table,
    TableConfig,
    detect_bluffs,
    detect_equilibrium,
    load_predealt,
    make_table,
    play_hand,
    run_predealt,
    run_session,
    write_session_csv,
)

__version__ = "0.1.0"
