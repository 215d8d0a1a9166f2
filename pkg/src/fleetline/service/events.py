"""Append-only event log: line-delimited JSON with a gap-free sequence."""

import json
import os
from dataclasses import dataclass

from ..errors import CorruptLog

_FIELDS = frozenset({"seq", "ts", "kind", "payload"})


@dataclass(frozen=True)
class EventRecord:
    seq: int
    ts: int
    kind: str
    payload: dict


def encode_record(record: EventRecord) -> str:
    return json.dumps(
        {"seq": record.seq, "ts": record.ts, "kind": record.kind,
         "payload": record.payload},
        sort_keys=True, separators=(",", ":"), allow_nan=False)


def read_log(path):
    """Every record in order, or CorruptLog at the first bad one."""
    records = []
    expected = 1
    with open(path, "r", encoding="utf-8") as fp:
        for raw in fp:
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as err:
                raise CorruptLog(expected, f"unparseable record: {err}") from None
            if not isinstance(obj, dict) or set(obj) != _FIELDS:
                raise CorruptLog(expected, "record does not have exactly seq/ts/kind/payload")
            if obj["seq"] != expected:
                raise CorruptLog(expected, f"sequence gap: found {obj['seq']!r}")
            if (not isinstance(obj["ts"], int) or isinstance(obj["ts"], bool)
                    or not isinstance(obj["kind"], str)
                    or not isinstance(obj["payload"], dict)):
                raise CorruptLog(expected, "record field has the wrong type")
            records.append(EventRecord(expected, obj["ts"], obj["kind"], obj["payload"]))
            expected += 1
    return records


class EventLog:
    """Single-writer JSONL log; the caller serializes appends."""

    def __init__(self, path: str):
        self.path = path
        self._fp = None
        self._last_seq = 0

    def open(self) -> list:
        """Open for appending; returns the already-present records."""
        parent = os.path.dirname(self.path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        existing = read_log(self.path) if os.path.exists(self.path) else []
        self._last_seq = len(existing)
        self._fp = open(self.path, "a", encoding="utf-8")
        return existing

    @property
    def last_seq(self) -> int:
        return self._last_seq

    def append_batch(self, events, ts: int) -> list:
        """Write (kind, payload) pairs as one flush; returns the new records."""
        records = []
        for kind, payload in events:
            self._last_seq += 1
            records.append(EventRecord(self._last_seq, ts, kind, payload))
        self._fp.write("".join(encode_record(r) + "\n" for r in records))
        self._fp.flush()
        return records

    def close(self) -> None:
        if self._fp is not None:
            self._fp.close()
            self._fp = None
