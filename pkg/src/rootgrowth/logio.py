"""Line-delimited run logs.

Every record is one JSON object on its own line.  The first line is a header
(``format``/``version``/``config``), the last a ``summary``.  In between come
``attempt`` records (curve at the start of an attempt), ``step`` records (curve
and controls after each step) and ``event`` records (stop, breakdown, restart).

Floats are written with 17 significant digits so a write/read round trip is
bit-exact.  ``seq`` increases by one per record; ``step`` never decreases.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

import numpy as np

FORMAT = "rootgrowth-log"
VERSION = 1

# Record keys holding numeric vectors or arrays; restored as ndarrays on read.
_ARRAY_KEYS = frozenset({"nodes", "u", "omega", "tip", "append"})


class LogFormatError(ValueError):
    pass


def _format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = format(x, ".17g")
    # keep floats distinguishable from ints on the way back
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def _encode(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def encode_record(record: dict) -> str:
    return _encode(record)


def decode_record(line: str) -> dict:
    record = json.loads(line)
    for key in _ARRAY_KEYS & record.keys():
        if record[key] is not None:
            record[key] = np.array(record[key], dtype=float)
    return record


def _vector(value):
    if value is None:
        return None
    values = getattr(value, "values", value)
    return np.array(values, dtype=float)


@dataclass
class AttemptHistory:
    """Curves of one attempt in time order, starting with the restart curve."""

    index: int
    t_minus: float
    curves: list = field(default_factory=list)

    @property
    def final_curve(self) -> np.ndarray:
        return self.curves[-1]

    @property
    def tip_path(self) -> np.ndarray:
        return np.array([c[-1] for c in self.curves])


class SimulationLog:
    """In-memory record list, optionally mirrored to a text stream.

    With ``stream`` set, each record is written and flushed as soon as it is
    made, so an interrupted run leaves a readable prefix.  ``node_mode="tip"``
    stores only the appended node per step (enough for rigid runs, where the
    body never moves).
    """

    def __init__(self, config: dict | None = None, stream: IO[str] | None = None,
                 node_mode: str | None = None):
        self.config = config or {}
        if node_mode is None:
            node_mode = "tip" if self.config.get("mode") == "rigid" else "full"
        if node_mode not in ("full", "tip"):
            raise ValueError("node_mode must be 'full' or 'tip'")
        self.node_mode = node_mode
        self.records: list[dict] = []
        self._stream = stream
        self._step = 0
        self._append({"type": "header", "format": FORMAT, "version": VERSION,
                      "node_mode": node_mode, "config": self.config})

    def _append(self, record: dict) -> dict:
        record = {"seq": len(self.records), **record}
        self.records.append(record)
        if self._stream is not None:
            self._stream.write(encode_record(record) + "\n")
            self._stream.flush()
        return record

    # -- writers used by the simulation loop --------------------------------

    def attempt(self, index: int, curve, t_minus: float) -> None:
        self._append({"type": "attempt", "step": self._step, "attempt": int(index),
                      "t_minus": float(t_minus), "ds": float(curve.ds),
                      "nodes": np.array(curve.nodes)})

    def step(self, attempt: int, step: int, curve, info) -> None:
        if step < self._step:
            raise ValueError("step counter went backwards")
        self._step = int(step)
        record = {"type": "step", "step": self._step, "attempt": int(attempt),
                  "length": float(curve.length)}
        if self.node_mode == "full":
            record["nodes"] = np.array(curve.nodes)
        else:
            record["append"] = np.array(curve.tip)
        if info is not None:
            record.update(u=_vector(info.u), omega=_vector(info.omega),
                          steer_angle=float(info.steer_angle),
                          stage1_depth=float(info.stage1_depth), depth=float(info.depth),
                          iterations=int(info.solver_iterations),
                          constraints=int(info.constraints))
        self._append(record)

    def event(self, kind: str, **fields) -> None:
        clean = {k: (_vector(v) if isinstance(v, np.ndarray) else v) for k, v in fields.items()}
        self._append({"type": "event", "step": self._step, "kind": str(kind), **clean})

    def finish(self, status: str, reason: str, wall_time: float, error: str | None = None,
               curve=None) -> None:
        self._append({"type": "summary", "step": self._step, "status": str(status),
                      "reason": str(reason), "steps": self._step,
                      "wall_time": float(wall_time), "error": error,
                      "nodes": None if curve is None else np.array(curve.nodes)})

    # -- readers -------------------------------------------------------------

    @property
    def header(self) -> dict:
        return self.records[0]

    @property
    def summary(self) -> dict | None:
        last = self.records[-1]
        return last if last["type"] == "summary" else None

    @property
    def status(self) -> str | None:
        return None if self.summary is None else self.summary["status"]

    @property
    def step_count(self) -> int:
        return sum(1 for r in self.records if r["type"] == "step")

    def steps(self) -> list[dict]:
        return [r for r in self.records if r["type"] == "step"]

    def events(self, kind: str | None = None) -> list[dict]:
        return [r for r in self.records
                if r["type"] == "event" and (kind is None or r["kind"] == kind)]

    def attempts(self) -> list[AttemptHistory]:
        """Per-attempt node histories (time ordered)."""
        out: list[AttemptHistory] = []
        for r in self.records:
            if r["type"] == "attempt":
                out.append(AttemptHistory(r["attempt"], r["t_minus"], [r["nodes"]]))
            elif r["type"] == "step":
                hist = out[-1]
                if "nodes" in r:
                    hist.curves.append(r["nodes"])
                else:
                    hist.curves.append(np.vstack([hist.curves[-1], r["append"][None, :]]))
        return out

    def final_curves(self) -> list[np.ndarray]:
        return [a.final_curve for a in self.attempts()]

    def tip_paths(self) -> list[np.ndarray]:
        return [a.tip_path for a in self.attempts()]


def write_log(log: SimulationLog, path) -> None:
    path = Path(path)
    with path.open("w") as fh:
        for record in log.records:
            fh.write(encode_record(record) + "\n")


def _iter_lines(lines: Iterable[str], strict: bool):
    lines = [ln for ln in lines if ln.strip()]
    for i, line in enumerate(lines):
        try:
            yield decode_record(line)
        except json.JSONDecodeError:
            # a crash can leave the last line half written
            if strict or i != len(lines) - 1:
                raise LogFormatError(f"bad record on line {i + 1}") from None


def read_log(path, strict: bool = True) -> SimulationLog:
    """Load a log file.  With ``strict=False`` a truncated final line and a
    missing summary are tolerated (the prefix of an interrupted run)."""
    records = list(_iter_lines(Path(path).read_text().splitlines(), strict))
    if not records or records[0].get("type") != "header":
        raise LogFormatError("missing header record")
    header = records[0]
    if header.get("format") != FORMAT:
        raise LogFormatError(f"not a {FORMAT} file")
    if header.get("version") != VERSION:
        raise LogFormatError(f"unsupported log version {header.get('version')}")
    if strict and records[-1].get("type") != "summary":
        raise LogFormatError("missing summary record")
    log = SimulationLog.__new__(SimulationLog)
    log.config = header.get("config", {})
    log.node_mode = header.get("node_mode", "full")
    log.records = records
    log._stream = None
    log._step = max((r.get("step", 0) for r in records), default=0)
    return log
