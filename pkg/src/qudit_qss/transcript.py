"""Line-delimited JSON transcripts.

Line 1 is a header (the only place a timestamp appears), then one object
per round, then a summary object.  The ``public`` view keeps only what was
said on the classical channel: recipients' ``y`` announcements, the
validity flag, and on check rounds the recipients' ``x`` reveals.
"""

from __future__ import annotations

import dataclasses
import json
from datetime import datetime, timezone
from typing import Iterable, Iterator, Optional, TextIO

from .protocol import ProtocolConfig, RoundRecord, SessionTranscript, finish_session

FORMAT = "qss-transcript/1"
VIEWS = ("full", "public")
PRIVATE_FIELDS = frozenset({"J", "a", "x1_secret"})


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def round_to_dict(index: int, r: RoundRecord, view: str = "full") -> dict:
    if view == "full":
        return {
            "round_index": index,
            "y": list(r.y),
            "J": r.J,
            "x": list(r.x),
            "a": r.a,
            "valid": r.valid,
            "check": r.is_check_round,
            "check_passed": r.check_passed,
            "x1_secret": r.x1_secret,
            "order": list(r.order),
            "alarm": r.alarm,
        }
    if view == "public":
        row = {
            "round_index": index,
            # recipients 2..N+1 in party order; the distributor's y_1 is never sent
            "y": list(r.y[1:]),
            "order": list(r.order),
            "valid": r.valid,
            "check": r.is_check_round,
            "check_passed": r.check_passed,
        }
        if r.is_check_round:
            row["x"] = list(r.x[1:])
        return row
    raise ValueError(f"unknown view {view!r}; choose from {VIEWS}")


def iter_lines(t: SessionTranscript, view: str = "full", created: Optional[str] = None) -> Iterator[str]:
    if created is None:
        created = datetime.now(timezone.utc).isoformat(timespec="seconds")
    yield _dumps({"header": {"format": FORMAT, "view": view, "created": created}})
    config = dataclasses.asdict(t.config)
    if view == "public":
        # the seed would replay every private draw
        config.pop("seed")
    yield _dumps({"config": config})
    for i, r in enumerate(t.rounds):
        yield _dumps(round_to_dict(i, r, view))
    summary = {"verdict": t.verdict}
    if view == "full":
        summary.update(
            observed_violation_rate=t.observed_violation_rate,
            n_rounds=len(t.rounds),
            n_valid=t.n_valid,
            n_checks=t.n_checks,
            alarms=t.alarms,
        )
    yield _dumps({"summary": summary})


def write_transcript(t: SessionTranscript, out: TextIO, view: str = "full", created: Optional[str] = None) -> None:
    for line in iter_lines(t, view, created):
        out.write(line + "\n")


def dumps_transcript(t: SessionTranscript, view: str = "full", created: Optional[str] = None) -> str:
    return "".join(line + "\n" for line in iter_lines(t, view, created))


def load_transcript(lines: Iterable[str]) -> SessionTranscript:
    """Rebuild a transcript from its full view."""
    config = None
    rounds = []
    for line in lines:
        if not line.strip():
            continue
        obj = json.loads(line)
        if "header" in obj:
            if obj["header"].get("view") != "full":
                raise ValueError("only full-view transcripts can be reloaded")
        elif "config" in obj:
            config = ProtocolConfig(**obj["config"])
        elif "round_index" in obj:
            rounds.append(RoundRecord(
                x=tuple(obj["x"]),
                y=tuple(obj["y"]),
                J=obj["J"],
                a=obj["a"],
                valid=obj["valid"],
                is_check_round=obj["check"],
                check_passed=obj["check_passed"],
                x1_secret=obj["x1_secret"],
                order=tuple(obj["order"]),
                alarm=obj.get("alarm", False),
            ))
    if config is None:
        raise ValueError("transcript has no config line")
    return finish_session(config, rounds)
