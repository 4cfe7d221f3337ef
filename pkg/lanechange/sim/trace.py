"""Line-delimited episode traces.

Each line is one JSON object with a ``kind`` field: ``step`` records carry the
time, every vehicle and the step events; ``decision`` records carry the
proposed action, the safety-filter verdict and the executed action.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, TextIO

from .world import EGO_ID, StepEvents, WorldState


class TraceError(Exception):
    """Raised when a trace file cannot be read."""


class TraceWriter:
    """Append step and decision records to a ``.jsonl`` file."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle: Optional[TextIO] = self.path.open("w", encoding="utf-8")
        self.records_written = 0

    def __enter__(self) -> TraceWriter:
        return self

    def __exit__(self, *exc_info: Any) -> None:
        self.close()

    def close(self) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None

    def write_step(self, world: WorldState, events: StepEvents) -> None:
        vehicles = [
            [int(world.ids[i]), round(float(world.s[i]), 4), round(float(world.d[i]), 4),
             int(world.lane[i]), round(float(world.speed[i]), 4)]
            for i in range(world.vehicle_count)
        ]
        self._write({
            "kind": "step",
            "time": round(world.time, 6),
            "vehicles": vehicles,
            "events": events.to_record(),
        })

    def write_decision(self, record: Dict[str, Any]) -> None:
        self._write({"kind": "decision", **record})

    def _write(self, record: Dict[str, Any]) -> None:
        if self._handle is None:
            raise TraceError(f"Trace {self.path} is already closed.")
        self._handle.write(json.dumps(record, separators=(",", ":")) + "\n")
        self.records_written += 1


def read_trace(path: str | Path) -> List[Dict[str, Any]]:
    trace_path = Path(path)
    if not trace_path.exists():
        raise TraceError(f"Trace not found: {trace_path}")

    records: List[Dict[str, Any]] = []
    with trace_path.open("r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise TraceError(f"{trace_path}: line {line_number} is not valid JSON ({exc.msg}).") from exc
    return records


def trace_has_collision(records: Iterable[Dict[str, Any]]) -> bool:
    """True when any step logged a collision involving the ego."""
    return any(
        r.get("kind") == "step" and r["events"]["collision"] and EGO_ID in (r["events"]["collision_ids"] or ())
        for r in records
    )


def safety_rate_from_traces(paths: Iterable[str | Path]) -> float:
    """Fraction of traced episodes that never logged a collision."""
    outcomes = [trace_has_collision(read_trace(p)) for p in paths]
    if not outcomes:
        raise TraceError("No trace files given.")
    return 1.0 - sum(outcomes) / len(outcomes)
