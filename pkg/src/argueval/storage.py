"""Append-only persistence for session event streams.

One file per session, one JSON record per line, plus a small index file.
Records are serialized with sorted keys so identical runs produce identical
bytes; nothing is ever rewritten, which keeps the audit trail tamper-evident
and makes replay trivial.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Callable

from .session import ReplayError, Session, SessionEvent, replay

INDEX_FILE = "index.json"


class EventLogStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _log_path(self, session_id: str) -> Path:
        if "/" in session_id or "\\" in session_id:
            raise ValueError(f"invalid session id {session_id!r}")
        return self.root / f"{session_id}.jsonl"

    def append(self, session_id: str, event: SessionEvent) -> None:
        line = json.dumps(event.to_record(), sort_keys=True, ensure_ascii=False)
        with self._lock:
            with open(self._log_path(session_id), "a", encoding="utf-8") as handle:
                handle.write(line + "\n")
                handle.flush()
            self._update_index(session_id, event.sequence + 1)

    def sink_for(self, session_id: str) -> Callable[[SessionEvent], None]:
        return lambda event: self.append(session_id, event)

    def read_events(self, session_id: str) -> list[SessionEvent]:
        path = self._log_path(session_id)
        if not path.exists():
            raise KeyError(f"no event log for session {session_id!r}")
        events = []
        for line_no, line in enumerate(path.read_text("utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                events.append(SessionEvent.from_record(json.loads(line)))
            except (json.JSONDecodeError, KeyError) as exc:
                raise ReplayError(f"{path.name} line {line_no}: corrupt record ({exc})")
        return events

    def load_session(self, session_id: str) -> Session:
        return replay(self.read_events(session_id))

    def exists(self, session_id: str) -> bool:
        return self._log_path(session_id).exists()

    def session_ids(self) -> list[str]:
        index_path = self.root / INDEX_FILE
        if not index_path.exists():
            return []
        return sorted(json.loads(index_path.read_text("utf-8"))["sessions"])

    def _update_index(self, session_id: str, event_count: int) -> None:
        index_path = self.root / INDEX_FILE
        index = {"sessions": {}}
        if index_path.exists():
            index = json.loads(index_path.read_text("utf-8"))
        index["sessions"][session_id] = {"events": event_count}
        index_path.write_text(
            json.dumps(index, sort_keys=True, ensure_ascii=False, indent=2) + "\n",
            "utf-8",
        )
