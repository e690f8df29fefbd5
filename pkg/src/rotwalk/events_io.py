"""Line-oriented JSON event logs plus report and manifest helpers.

An event log is one JSON record per line. The first record is a header
carrying the resolved configuration, the trajectory index, and the field
list; every following record is one collision event with the fields in
CollisionEvent declaration order. Floats go through repr, so values
round-trip bit exactly and logs are byte-stable across runs.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterator, Union

from .dynamics import CollisionEvent

__all__ = [
    "EVENTS_FORMAT",
    "EVENT_FIELDS",
    "EventWriter",
    "read_header",
    "read_events",
    "file_digest",
    "write_json",
]

EVENTS_FORMAT = "rotwalk-events"
EVENTS_VERSION = 1

EVENT_FIELDS = (
    "k",
    "t_before",
    "t_after",
    "tau",
    "x",
    "v_before",
    "v_after",
    "xi",
    "delta",
    "eta",
    "u",
    "e_after",
)

_VECTOR_FIELDS = frozenset({"x", "v_before", "v_after", "delta", "eta", "u", "e_after"})


def _encode(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"))


class EventWriter:
    """Event sink that appends JSON lines to a log file.

    Writes the header on open. Usable directly as the sink of
    run_trajectory; also a context manager.
    """

    def __init__(self, path: Union[str, Path], config: dict, trajectory_index: int = 0) -> None:
        self.path = Path(path)
        self.count = 0
        self._fh = open(self.path, "w", encoding="utf-8")
        header = {
            "format": EVENTS_FORMAT,
            "version": EVENTS_VERSION,
            "trajectory_index": trajectory_index,
            "fields": list(EVENT_FIELDS),
            "config": config,
        }
        self._fh.write(_encode(header) + "\n")

    def __call__(self, ev: CollisionEvent) -> None:
        record = {
            "k": ev.k,
            "t_before": ev.t_before,
            "t_after": ev.t_after,
            "tau": ev.tau,
            "x": list(ev.x),
            "v_before": list(ev.v_before),
            "v_after": list(ev.v_after),
            "xi": ev.xi,
            "delta": list(ev.delta),
            "eta": list(ev.eta),
            "u": list(ev.u),
            "e_after": list(ev.e_after),
        }
        self._fh.write(_encode(record) + "\n")
        self.count += 1

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()

    def __enter__(self) -> "EventWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def _corrupt(path: Path, index: int, problem: str) -> ValueError:
    return ValueError(f"{path}: record {index}: {problem}")


def read_header(path: Union[str, Path]) -> dict:
    """Parse and validate the header record of an event log."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        line = fh.readline()
    if not line.strip():
        raise _corrupt(path, 0, "missing header")
    try:
        header = json.loads(line)
    except json.JSONDecodeError as exc:
        raise _corrupt(path, 0, f"invalid JSON ({exc.msg})") from exc
    if not isinstance(header, dict) or header.get("format") != EVENTS_FORMAT:
        raise _corrupt(path, 0, "not a rotwalk event log")
    return header


def _vector(raw, path: Path, index: int, name: str) -> tuple:
    if not isinstance(raw, list) or len(raw) != 3:
        raise _corrupt(path, index, f"field {name!r} is not a 3-vector")
    return (float(raw[0]), float(raw[1]), float(raw[2]))


def read_events(path: Union[str, Path]) -> Iterator[CollisionEvent]:
    """Yield the events of a log in order.

    Raises ValueError naming the file and the offending record index on any
    malformed line (the header is record 0).
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        header_seen = False
        for index, line in enumerate(fh):
            if not line.strip():
                raise _corrupt(path, index, "blank record")
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise _corrupt(path, index, f"invalid JSON ({exc.msg})") from exc
            if index == 0:
                if not isinstance(record, dict) or record.get("format") != EVENTS_FORMAT:
                    raise _corrupt(path, 0, "not a rotwalk event log")
                header_seen = True
                continue
            if not isinstance(record, dict):
                raise _corrupt(path, index, "record is not an object")
            try:
                yield CollisionEvent(
                    k=int(record["k"]),
                    t_before=float(record["t_before"]),
                    t_after=float(record["t_after"]),
                    tau=float(record["tau"]),
                    x=_vector(record["x"], path, index, "x"),
                    v_before=_vector(record["v_before"], path, index, "v_before"),
                    v_after=_vector(record["v_after"], path, index, "v_after"),
                    xi=float(record["xi"]),
                    delta=_vector(record["delta"], path, index, "delta"),
                    eta=_vector(record["eta"], path, index, "eta"),
                    u=_vector(record["u"], path, index, "u"),
                    e_after=_vector(record["e_after"], path, index, "e_after"),
                )
            except KeyError as exc:
                raise _corrupt(path, index, f"missing field {exc.args[0]!r}") from exc
            except (TypeError, ValueError) as exc:
                if isinstance(exc, ValueError) and str(exc).startswith(str(path)):
                    raise
                raise _corrupt(path, index, "malformed field value") from exc
        if not header_seen:
            raise _corrupt(path, 0, "missing header")


def file_digest(path: Union[str, Path]) -> dict:
    """sha256 and size of a file, for manifests."""
    path = Path(path)
    digest = hashlib.sha256()
    size = 0
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
            size += len(chunk)
    return {"sha256": digest.hexdigest(), "bytes": size}


def write_json(path: Union[str, Path], obj: dict) -> None:
    """Write a JSON document with a stable layout (sorted keys off, two
    space indent, trailing newline)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")
