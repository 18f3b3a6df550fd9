"""Operational shell: engine state, HTTP API, and the design-draft store."""

from .state import EngineState, load_engine_state
from .drafts import DesignDraft, DraftStore, VALID_STATUSES
from .api import create_app

__all__ = [
    "EngineState",
    "load_engine_state",
    "DesignDraft",
    "DraftStore",
    "VALID_STATUSES",
    "create_app",
]
