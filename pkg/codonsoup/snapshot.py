"""
Snapshot documents, the event log, the metrics table and the run directory.

Floats are written with Python's shortest round-trip repr, so reading a
snapshot back yields bit-identical values.
"""

import csv
import io
import json
import logging
from collections import Counter
from pathlib import Path
from typing import IO, Any, Iterable, Sequence

from .analytics import EventKind, EventRecord, count_types, population
from .config import SimulationConfig, config_from_document
from .engine import MetricsRow, RunObserver, RunResult, SimulationState
from .exceptions import ConfigException, OutputException, SnapshotException
from .model import CodonState, CodonType, FieldSize, SplittingState, Vec2

logger = logging.getLogger(__name__)

SNAPSHOT_FORMAT = "codonsoup-snapshot"
SNAPSHOT_VERSION = 1
EVENT_SCHEMA = 1
METRICS_HEADER = ("step", "normalized_time", "free_codons", "strands", "complete_strands", "events_cum")


def _size(s: FieldSize) -> str:
    return s.name.lower()


def codon_to_record(c: CodonState) -> dict[str, Any]:
    """Return the snapshot record of one codon."""
    return {
        "id": c.codon_id,
        "type": int(c.codon_type),
        "x": c.position.x,
        "y": c.position.y,
        "angle": c.angle,
        "vx": c.velocity.x,
        "vy": c.velocity.y,
        "omega": c.angular_velocity,
        "field_size": [_size(s) for s in c.field_size],
        "bond": list(c.bond),
        "strand_location_state": c.strand_location_state,
        "splitting_state": str(c.splitting_state),
        "yellow_steps_large": c.yellow_steps_large,
        "z_steps": c.z_steps,
    }


def _float(r: dict[str, Any], key: str) -> float:
    v = r[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"{key} is not a number")
    return float(v)


def _int(r: dict[str, Any], key: str) -> int:
    v = r[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValueError(f"{key} is not an integer")
    return v


def record_to_codon(r: Any) -> CodonState:
    """Parse one snapshot record, raising ValueError on a malformed one."""
    if not isinstance(r, dict):
        raise ValueError("record is not an object")
    sizes = r["field_size"]
    bonds = r["bond"]
    if not isinstance(sizes, list) or len(sizes) != 4:
        raise ValueError("field_size wants 4 entries")
    if not isinstance(bonds, list) or len(bonds) != 3:
        raise ValueError("bond wants 3 entries")
    if any(b is not None and (isinstance(b, bool) or not isinstance(b, int)) for b in bonds):
        raise ValueError("bond entries must be codon ids or null")
    try:
        field_size = tuple(FieldSize[s.upper()] for s in sizes)
    except (KeyError, AttributeError):
        raise ValueError(f"bad field_size {sizes!r}") from None
    return CodonState(
        codon_id=_int(r, "id"),
        codon_type=CodonType(_int(r, "type")),
        position=Vec2(_float(r, "x"), _float(r, "y")),
        angle=_float(r, "angle"),
        velocity=Vec2(_float(r, "vx"), _float(r, "vy")),
        angular_velocity=_float(r, "omega"),
        field_size=field_size,  # type: ignore[arg-type]
        bond=tuple(bonds),  # type: ignore[arg-type]
        strand_location_state=_int(r, "strand_location_state"),
        splitting_state=SplittingState(r["splitting_state"]),
        yellow_steps_large=_int(r, "yellow_steps_large"),
        z_steps=_int(r, "z_steps"),
    )


def write_snapshot(state: SimulationState, cfg: SimulationConfig) -> str:
    """Serialize `state` and the config it runs under."""
    doc = {
        "format": SNAPSHOT_FORMAT,
        "version": SNAPSHOT_VERSION,
        "step": state.step,
        "normalized_time": cfg.normalized_time(state.step),
        "container": {"width": cfg.container_width, "height": cfg.container_height},
        "rng_seed": state.rng_seed,
        "config_digest": cfg.digest(),
        "config": cfg.to_document(),
        "codon_count": len(state.codons),
        "codons": [codon_to_record(c) for c in state.codons],
    }
    return json.dumps(doc, indent=1) + "\n"


def read_snapshot(text: str) -> tuple[SimulationState, SimulationConfig]:
    """Parse a snapshot document, checking its version, digest and records."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SnapshotException(f"truncated or malformed snapshot at line {e.lineno}: {e.msg}") from None
    if not isinstance(doc, dict) or doc.get("format") != SNAPSHOT_FORMAT:
        raise SnapshotException("not a codonsoup snapshot")
    if doc.get("version") != SNAPSHOT_VERSION:
        raise SnapshotException(f"snapshot version {doc.get('version')!r}, want {SNAPSHOT_VERSION}")
    for key in ("step", "rng_seed", "config", "config_digest", "codon_count", "codons"):
        if key not in doc:
            raise SnapshotException(f"snapshot lacks {key}")
    try:
        cfg = config_from_document(doc["config"])
    except ConfigException as e:
        raise SnapshotException(f"embedded config: {e}") from None
    if cfg.digest() != doc["config_digest"]:
        raise SnapshotException("embedded config does not match its digest")
    records = doc["codons"]
    if not isinstance(records, list) or len(records) != doc["codon_count"]:
        raise SnapshotException(f"snapshot declares {doc['codon_count']} codons but holds {len(records)}")
    codons = []
    for i, r in enumerate(records):
        try:
            c = record_to_codon(r)
        except (KeyError, ValueError, TypeError) as e:
            raise SnapshotException(f"codon record {i}: {e}") from None
        if c.codon_id != i:
            raise SnapshotException(f"codon record {i}: id {c.codon_id} out of order")
        if any(b is not None and not 0 <= b < len(records) for b in c.bond):
            raise SnapshotException(f"codon record {i}: bond to unknown codon")
        codons.append(c)
    return SimulationState(step=doc["step"], codons=tuple(codons), rng_seed=doc["rng_seed"]), cfg


def load_snapshot(path: str | Path) -> tuple[SimulationState, SimulationConfig]:
    """Read a snapshot file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise OutputException(str(path), e.strerror or "cannot read") from None
    return read_snapshot(text)


def event_line(e: EventRecord) -> str:
    """Serialize an event as one line of the event log."""
    return json.dumps(
        {"schema": EVENT_SCHEMA, "step": e.step, "kind": str(e.kind), "payload": e.payload},
        sort_keys=True,
    )


def read_events(lines: Iterable[str]) -> list[EventRecord]:
    """Parse the lines of an event log."""
    events = []
    for n, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
            if doc["schema"] != EVENT_SCHEMA:
                raise ValueError(f"schema {doc['schema']!r}")
            events.append(EventRecord(step=doc["step"], kind=EventKind(doc["kind"]), payload=doc["payload"]))
        except (json.JSONDecodeError, KeyError, ValueError, TypeError) as e:
            raise SnapshotException(f"event log line {n}: {e}") from None
    return events


def write_metrics(rows: Iterable[MetricsRow], out: IO[str]) -> None:
    """Write the metrics table with its header."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(METRICS_HEADER)
    w.writerows(rows)


def metrics_csv(rows: Iterable[MetricsRow]) -> str:
    """Return the metrics table as CSV text."""
    buf = io.StringIO()
    write_metrics(rows, buf)
    return buf.getvalue()


def summarize(result: RunResult) -> dict[str, Any]:
    """The end-of-run report: where it stopped, what happened and the strand population."""
    kinds = Counter(str(e.kind) for e in result.events)
    return {
        "step": result.state.step,
        "normalized_time": result.normalized_time,
        "rng_seed": result.config.rng_seed,
        "config_digest": result.config.digest(),
        "stopped_early": result.stopped_early,
        "stop_event": None if result.stop_event is None else json.loads(event_line(result.stop_event)),
        "events": dict(sorted(kinds.items())),
        "codon_types": {t.name.lower(): n for t, n in count_types(result.state.codons).items()},
        "population": dict(sorted(population(result.strands).items())),
    }


class RunDirectory(RunObserver):
    """
    Writes a run's artifacts under one directory::

        snapshots/step_000000000.json
        events.jsonl
        metrics.csv
        summary.json

    Every line is flushed as it is written, so a failed run leaves its outputs so far.
    """

    def __init__(self, root: str | Path):  # noqa
        self.root = Path(root)
        self._events: IO[str] | None = None
        self._metrics: IO[str] | None = None
        self._metrics_writer: Any = None
        try:
            (self.root / "snapshots").mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise OutputException(str(self.root), e.strerror or "cannot create") from None

    def snapshot_path(self, step: int) -> Path:
        return self.root / "snapshots" / f"step_{step:09d}.json"

    def _write(self, path: Path, text: str) -> None:
        try:
            path.write_text(text, encoding="utf-8")
        except OSError as e:
            raise OutputException(str(path), e.strerror or "cannot write") from None

    def _open(self, name: str) -> IO[str]:
        path = self.root / name
        try:
            return path.open("w", encoding="utf-8", newline="")
        except OSError as e:
            raise OutputException(str(path), e.strerror or "cannot open") from None

    def on_snapshot(self, state: SimulationState, cfg: SimulationConfig) -> None:
        path = self.snapshot_path(state.step)
        self._write(path, write_snapshot(state, cfg))
        logger.debug("wrote %s", path)

    def on_events(self, events: Sequence[EventRecord]) -> None:
        if self._events is None:
            self._events = self._open("events.jsonl")
        try:
            for e in events:
                self._events.write(event_line(e) + "\n")
            self._events.flush()
        except OSError as e:
            raise OutputException(str(self.root / "events.jsonl"), e.strerror or "cannot write") from None

    def on_metrics(self, row: MetricsRow) -> None:
        if self._metrics is None:
            self._metrics = self._open("metrics.csv")
            self._metrics_writer = csv.writer(self._metrics, lineterminator="\n")
            self._metrics_writer.writerow(METRICS_HEADER)
        try:
            self._metrics_writer.writerow(row)
            self._metrics.flush()
        except OSError as e:
            raise OutputException(str(self.root / "metrics.csv"), e.strerror or "cannot write") from None

    def on_finish(self, result: RunResult) -> None:
        if self._events is None:
            # an empty log still marks a finished run
            self._events = self._open("events.jsonl")
        self.close()
        self._write(self.root / "summary.json", json.dumps(summarize(result), indent=2, sort_keys=True) + "\n")

    def close(self) -> None:
        for f in (self._events, self._metrics):
            if f is not None:
                f.close()
