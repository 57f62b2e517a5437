"""Simulation of (N, N) secret sharing by relaying one qudit through MUB phase gates."""

from .mub import (
    MubLabel,
    PhaseGate,
    QuditState,
    apply_gate,
    check_dimension,
    classify,
    measure_in_basis,
    mub_vector,
    overlap_sq,
)
from .protocol import (
    ChannelTap,
    Interceptor,
    ProtocolConfig,
    RoundChoices,
    RoundRecord,
    SessionTranscript,
    announce_order,
    reconstruct_secret,
    run_round,
    run_session,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelTap",
    "Interceptor",
    "MubLabel",
    "PhaseGate",
    "ProtocolConfig",
    "QuditState",
    "RoundChoices",
    "RoundRecord",
    "SessionTranscript",
    "announce_order",
    "apply_gate",
    "check_dimension",
    "classify",
    "measure_in_basis",
    "mub_vector",
    "overlap_sq",
    "reconstruct_secret",
    "run_round",
    "run_session",
]
