"""Append-only run journal: every provider interaction, one JSON line each.

Records carry monotonically increasing ``seq`` numbers. Each gateway call
emits exactly one request record and one terminal record (response or
error), paired by a shared ``call`` id. Records deliberately contain no
wall-clock values so that identical mock runs produce byte-identical
journals.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from .errors import RubricLearnError


class JournalError(RubricLearnError):
    pass


class Journal:
    """Thread-safe journal writer; appends serialize under one lock."""

    def __init__(self, path: str | Path | None = None, resume: bool = False):
        self.path = Path(path) if path is not None else None
        self.records: list[dict] = []
        self._lock = threading.Lock()
        self._seq = 0
        self._call = 0
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            if resume and self.path.exists():
                self.records = read_journal(self.path)
                self._seq = len(self.records)
                self._call = max(
                    (r["call"] for r in self.records if isinstance(r.get("call"), int)),
                    default=0,
                )
            else:
                self.path.write_text("", encoding="utf-8")

    def next_call_id(self) -> int:
        with self._lock:
            self._call += 1
            return self._call

    def append(self, event: str, **payload) -> dict:
        with self._lock:
            record = {"seq": self._seq, "event": event, **payload}
            self._seq += 1
            self.records.append(record)
            if self.path is not None:
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            return record


def read_journal(path: str | Path) -> list[dict]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            records.append(json.loads(line))
    return records


TERMINAL_EVENTS = {
    "chat_request": {"chat_response", "chat_error"},
    "embed_request": {"embed_response", "embed_error"},
}


def verify_journal(records: list[dict]) -> dict:
    """Replay a journal and check completeness.

    Sequence numbers must increase by one from zero, and every request call
    id must pair with exactly one terminal record. Returns counters.
    """
    requests: dict[int, str] = {}
    terminals: dict[int, str] = {}
    for i, record in enumerate(records):
        if record.get("seq") != i:
            raise JournalError(f"record {i}: seq {record.get('seq')!r} breaks monotonic order")
        event = record.get("event", "")
        call = record.get("call")
        if event in TERMINAL_EVENTS:
            if call in requests:
                raise JournalError(f"record {i}: duplicate request for call {call}")
            requests[call] = event
        elif event in ("chat_response", "chat_error", "embed_response", "embed_error"):
            if call not in requests:
                raise JournalError(f"record {i}: terminal {event} without a request (call {call})")
            if call in terminals:
                raise JournalError(f"record {i}: second terminal for call {call}")
            if event not in TERMINAL_EVENTS[requests[call]]:
                raise JournalError(f"record {i}: terminal {event} mismatches {requests[call]}")
            terminals[call] = event
    dangling = sorted(set(requests) - set(terminals))
    if dangling:
        raise JournalError(f"requests without terminal records: calls {dangling}")
    return {
        "records": len(records),
        "calls": len(requests),
        "errors": sum(1 for e in terminals.values() if e.endswith("_error")),
    }
