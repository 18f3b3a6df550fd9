"""Design-draft store: an append-only JSON-lines log replayed on boot.

No database at desk scale; a single-writer lock serializes appends, and
every mutation is one log line, so drafts survive restarts by replay.
"""

from __future__ import annotations

import datetime as dt
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..errors import DataValidationError

VALID_STATUSES = ["docket", "sample", "ordered", "rejected"]
_FORWARD = {"docket": 0, "sample": 1, "ordered": 2}


class IllegalTransition(Exception):
    def __init__(self, current, requested):
        self.current, self.requested = current, requested
        super().__init__(f"cannot move draft from '{current}' to '{requested}'")


@dataclass
class DesignDraft:
    draft_id: str
    attributes: dict
    category: Optional[str] = None
    launch_week: Optional[int] = None
    list_price: Optional[float] = None
    status: str = "docket"
    images: list[str] = field(default_factory=list)
    likes: int = 0
    feedback: list[dict] = field(default_factory=list)
    created_at: str = ""

    def to_dict(self) -> dict:
        return {
            "draft_id": self.draft_id,
            "attributes": self.attributes,
            "category": self.category,
            "launch_week": self.launch_week,
            "list_price": self.list_price,
            "status": self.status,
            "images": self.images,
            "likes": self.likes,
            "feedback": self.feedback,
            "created_at": self.created_at,
        }


def _check_transition(current: str, requested: str) -> None:
    """Forward along docket -> sample -> ordered, or sideways to rejected."""
    if requested not in VALID_STATUSES:
        raise DataValidationError(f"unknown status '{requested}'", field="status")
    if current == requested:
        return
    if current == "rejected" or current == "ordered":
        raise IllegalTransition(current, requested)
    if requested == "rejected":
        return
    if _FORWARD[requested] < _FORWARD[current]:
        raise IllegalTransition(current, requested)


class DraftStore:
    def __init__(self, log_path):
        self.log_path = Path(log_path)
        self._lock = threading.Lock()
        self._drafts: dict[str, DesignDraft] = {}
        self._serial = 0
        if self.log_path.exists():
            self._replay()

    def _replay(self) -> None:
        for line in self.log_path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                self._apply(json.loads(line))

    def _apply(self, event: dict) -> None:
        kind = event["event"]
        if kind == "create":
            data = event["draft"]
            draft = DesignDraft(**data)
            self._drafts[draft.draft_id] = draft
            self._serial = max(self._serial, int(draft.draft_id[1:]))
        elif kind == "feedback":
            d = self._drafts[event["draft_id"]]
            d.feedback.append({"author": event["author"], "text": event["text"], "ts": event["ts"]})
        elif kind == "like":
            self._drafts[event["draft_id"]].likes += 1
        elif kind == "status":
            self._drafts[event["draft_id"]].status = event["status"]

    def _append(self, event: dict) -> None:
        self.log_path.parent.mkdir(parents=True, exist_ok=True)
        with self.log_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event) + "\n")

    def create(self, attributes, category=None, launch_week=None, list_price=None, images=None) -> DesignDraft:
        with self._lock:
            self._serial += 1
            draft = DesignDraft(
                draft_id=f"D{self._serial:05d}",
                attributes=attributes,
                category=category,
                launch_week=launch_week,
                list_price=list_price,
                images=list(images or []),
                created_at=dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds"),
            )
            self._append({"event": "create", "draft": draft.to_dict()})
            self._drafts[draft.draft_id] = draft
            return draft

    def get(self, draft_id: str) -> Optional[DesignDraft]:
        return self._drafts.get(draft_id)

    def list(self, status: Optional[str] = None) -> list[DesignDraft]:
        drafts = sorted(self._drafts.values(), key=lambda d: d.draft_id)
        if status is not None:
            drafts = [d for d in drafts if d.status == status]
        return drafts

    def add_feedback(self, draft_id: str, author: str, text: str) -> DesignDraft:
        with self._lock:
            draft = self._require(draft_id)
            ts = dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")
            self._append({"event": "feedback", "draft_id": draft_id, "author": author, "text": text, "ts": ts})
            draft.feedback.append({"author": author, "text": text, "ts": ts})
            return draft

    def like(self, draft_id: str) -> DesignDraft:
        with self._lock:
            draft = self._require(draft_id)
            self._append({"event": "like", "draft_id": draft_id})
            draft.likes += 1
            return draft

    def set_status(self, draft_id: str, status: str) -> DesignDraft:
        with self._lock:
            draft = self._require(draft_id)
            _check_transition(draft.status, status)
            self._append({"event": "status", "draft_id": draft_id, "status": status})
            draft.status = status
            return draft

    def _require(self, draft_id: str) -> DesignDraft:
        draft = self._drafts.get(draft_id)
        if draft is None:
            raise KeyError(draft_id)
        return draft
