"""Dual-reviewer curation: append-only event log + in-memory projection.

The log is the single source of truth; every mutation appends one JSONL
event and updates the projection under one lock, so concurrent submissions
serialize and a crashed service replays to the same state.

Event types: ``item_added``, ``verdict``, ``revised``, ``adjudicated``.
"""
from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import (
    DuplicateVerdict,
    NoDualVerdicts,
    StaleRevision,
    TerminalState,
    UnknownItem,
)

PENDING, IN_REVIEW, CONFLICT, ACCEPTED, REJECTED = (
    "pending", "in_review", "conflict", "accepted", "rejected",
)
STATES = (PENDING, IN_REVIEW, CONFLICT, ACCEPTED, REJECTED)
TERMINAL = (ACCEPTED, REJECTED)

ACCEPT, REJECT = "accept", "reject"


@dataclass(frozen=True)
class Verdict:
    rater_id: str
    decision: str
    scores: dict | None
    revision: int
    seq: int
    timestamp: float


@dataclass
class CurationItem:
    item_id: str
    category: str
    record: dict
    state: str = PENDING
    revision: int = 0
    verdicts: list[Verdict] = field(default_factory=list)   # current revision
    history: list[Verdict] = field(default_factory=list)    # append-only
    accepted_seq: int | None = None

    def voted(self, rater_id: str) -> bool:
        return any(v.rater_id == rater_id for v in self.verdicts)

    def to_json(self) -> dict:
        return {
            "item_id": self.item_id,
            "category": self.category,
            "state": self.state,
            "revision": self.revision,
            "record": self.record,
            "verdicts": [
                {"rater_id": v.rater_id, "decision": v.decision, "scores": v.scores,
                 "revision": v.revision, "timestamp": v.timestamp}
                for v in self.verdicts
            ],
        }


def _validate_scores(scores: dict | None) -> dict | None:
    if scores is None:
        return None
    cleaned = {}
    for dim in ("correctness", "completeness", "clarity"):
        value = scores.get(dim)
        if value not in (1, 3, 5):
            raise ValueError(f"score {dim}={value!r} not in {{1,3,5}}")
        cleaned[dim] = value
    return cleaned


class CurationStore:
    def __init__(self, log_path: str | Path):
        self.log_path = Path(log_path)
        self._lock = threading.Lock()
        self._items: dict[str, CurationItem] = {}
        self._seq = 0
        if self.log_path.exists():
            self._replay()

    # -- persistence ----------------------------------------------------------

    def _replay(self) -> None:
        with open(self.log_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    self._apply(json.loads(line))

    def _append(self, event: dict) -> None:
        self.log_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")

    def _emit(self, event: dict) -> None:
        event["seq"] = self._seq
        self._seq += 1
        self._append(event)
        self._apply(event, replaying=False)

    # -- projection -------------------------------------------------------------

    def _apply(self, event: dict, replaying: bool = True) -> None:
        if replaying:
            self._seq = max(self._seq, event["seq"] + 1)
        kind = event["type"]
        if kind == "item_added":
            item = CurationItem(item_id=event["item_id"], category=event["category"],
                                record=event["record"])
            self._items[item.item_id] = item
            return
        item = self._items[event["item_id"]]
        if kind == "verdict":
            verdict = Verdict(
                rater_id=event["rater_id"], decision=event["decision"],
                scores=event.get("scores"), revision=event["revision"],
                seq=event["seq"], timestamp=event["ts"],
            )
            item.verdicts.append(verdict)
            item.history.append(verdict)
            decisions = {v.decision for v in item.verdicts}
            if ACCEPT in decisions and REJECT in decisions:
                item.state = CONFLICT
            elif len(item.verdicts) >= 2 and decisions == {ACCEPT}:
                item.state = ACCEPTED
                item.accepted_seq = event["seq"]
            elif len(item.verdicts) >= 2 and decisions == {REJECT}:
                item.state = REJECTED
            else:
                item.state = IN_REVIEW
        elif kind == "revised":
            item.revision = event["new_revision"]
            item.verdicts = []
            item.state = PENDING
        elif kind == "adjudicated":
            item.state = ACCEPTED if event["decision"] == ACCEPT else REJECTED
            if item.state == ACCEPTED:
                item.accepted_seq = event["seq"]

    # -- commands ---------------------------------------------------------------

    def add_items(self, records: list[dict]) -> list[str]:
        ids = []
        with self._lock:
            for record in records:
                item_id = record["record_id"]
                if item_id in self._items:
                    continue  # idempotent re-seeding
                self._emit({
                    "type": "item_added", "item_id": item_id,
                    "category": record["task_type"], "record": record,
                    "ts": time.time(),
                })
                ids.append(item_id)
        return ids

    def _checked_item(self, item_id: str, revision: int | None) -> CurationItem:
        item = self._items.get(item_id)
        if item is None:
            raise UnknownItem(f"no curation item {item_id!r}")
        if item.state in TERMINAL:
            raise TerminalState(f"item {item_id!r} is {item.state}")
        if revision is not None and revision != item.revision:
            raise StaleRevision(
                f"item {item_id!r} is at revision {item.revision}, submission named {revision}"
            )
        return item

    def submit_verdict(self, item_id: str, rater_id: str, decision: str,
                       scores: dict | None = None, revision: int | None = None) -> str:
        if decision not in (ACCEPT, REJECT):
            raise ValueError(f"decision must be accept or reject, got {decision!r}")
        scores = _validate_scores(scores)
        with self._lock:
            item = self._checked_item(item_id, revision)
            if item.voted(rater_id):
                raise DuplicateVerdict(
                    f"rater {rater_id!r} already voted on {item_id!r} at revision {item.revision}"
                )
            self._emit({
                "type": "verdict", "item_id": item_id, "rater_id": rater_id,
                "decision": decision, "scores": scores, "revision": item.revision,
                "ts": time.time(),
            })
            return item.state

    def revise(self, item_id: str, rater_id: str, revision: int | None = None) -> int:
        with self._lock:
            item = self._checked_item(item_id, revision)
            if item.state != CONFLICT:
                raise ValueError(f"only conflicted items can be revised; {item_id!r} is {item.state}")
            self._emit({
                "type": "revised", "item_id": item_id, "rater_id": rater_id,
                "new_revision": item.revision + 1, "ts": time.time(),
            })
            return item.revision

    def adjudicate(self, item_id: str, rater_id: str, decision: str,
                   revision: int | None = None) -> str:
        if decision not in (ACCEPT, REJECT):
            raise ValueError(f"decision must be accept or reject, got {decision!r}")
        with self._lock:
            item = self._checked_item(item_id, revision)
            if item.state != CONFLICT:
                raise ValueError(f"only conflicted items can be adjudicated; {item_id!r} is {item.state}")
            self._emit({
                "type": "adjudicated", "item_id": item_id, "rater_id": rater_id,
                "decision": decision, "revision": item.revision, "ts": time.time(),
            })
            return item.state

    # -- queries ------------------------------------------------------------------

    def get(self, item_id: str) -> CurationItem:
        item = self._items.get(item_id)
        if item is None:
            raise UnknownItem(f"no curation item {item_id!r}")
        return item

    def items(self) -> list[CurationItem]:
        return list(self._items.values())

    def queue_for(self, rater_id: str) -> list[CurationItem]:
        """Items the rater may act on: pending/in_review they have not voted
        on at the current revision, plus every conflict (revise/adjudicate)."""
        out = []
        for item in self._items.values():
            if item.state in (PENDING, IN_REVIEW) and not item.voted(rater_id):
                out.append(item)
            elif item.state == CONFLICT:
                out.append(item)
        return sorted(out, key=lambda i: i.item_id)

    def per_state_counts(self) -> dict[str, int]:
        counts = {state: 0 for state in STATES}
        for item in self._items.values():
            counts[item.state] += 1
        return counts

    def accepted_items(self) -> list[CurationItem]:
        accepted = [i for i in self._items.values() if i.state == ACCEPTED]
        return sorted(accepted, key=lambda i: (i.accepted_seq if i.accepted_seq is not None else 1 << 60))


def curation_agreement(items: list[CurationItem]) -> float:
    """Percent of dual-verdict items whose first two decisions match.

    Uses the append-only history, so the original independent review counts
    even after revisions.
    """
    matches = 0
    dual = 0
    for item in items:
        if len(item.history) < 2:
            continue
        dual += 1
        first, second = sorted(item.history, key=lambda v: v.seq)[:2]
        if first.decision == second.decision:
            matches += 1
    if dual == 0:
        raise NoDualVerdicts("no item carries two verdicts")
    return matches / dual * 100.0
