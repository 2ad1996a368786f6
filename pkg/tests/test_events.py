"""Event records, the log store, and wire message parsing."""

import json

import pytest

from meetingflow.errors import InvariantViolation, ProtocolError, UnknownEventKind
from meetingflow.events import (
    EventLogStore,
    EventRecord,
    WireMessage,
    check_session_id,
    read_log,
)


def rec(seq, kind="member_joined", **payload):
    return EventRecord(seq=seq, at=float(seq), kind=kind, payload=payload)


class TestEventRecord:
    def test_rejects_unknown_kind(self):
        with pytest.raises(InvariantViolation):
            EventRecord(seq=1, at=0.0, kind="made_up_kind", payload={})

    def test_rejects_nonpositive_seq(self):
        with pytest.raises(InvariantViolation):
            EventRecord(seq=0, at=0.0, kind="member_joined", payload={})

    def test_line_round_trip(self):
        record = rec(3, participant_id="bo", role="software_engineer")
        line = record.to_line()
        assert line.endswith("\n")
        assert EventRecord.from_dict(json.loads(line)) == record


class TestSessionIds:
    @pytest.mark.parametrize("bad", ["", "a/b", "../etc", "x" * 70, "sp ace", ".hidden"])
    def test_rejects_path_hostile_ids(self, bad):
        with pytest.raises(InvariantViolation):
            check_session_id(bad)

    def test_accepts_slugs(self):
        assert check_session_id("team-sync_01") == "team-sync_01"


class TestEventLogStore:
    def test_append_then_read(self, tmp_path):
        store = EventLogStore(tmp_path / "sessions")
        store.append("s1", rec(1, participant_id="a", role="program_manager"))
        store.append("s1", rec(2, participant_id="b", role="software_engineer"))
        records = store.read("s1")
        assert [r.seq for r in records] == [1, 2]
        assert records[1].payload["participant_id"] == "b"

    def test_one_canonical_json_line_per_event(self, tmp_path):
        store = EventLogStore(tmp_path)
        store.append("s1", rec(1, participant_id="a", role="program_manager"))
        raw = store.path("s1").read_text(encoding="utf-8")
        lines = raw.splitlines()
        assert len(lines) == 1
        assert lines[0] == json.dumps(json.loads(lines[0]), sort_keys=True, separators=(",", ":"))

    def test_read_rejects_unknown_kind(self, tmp_path):
        path = tmp_path / "bad.log"
        path.write_text('{"seq":1,"at":0.0,"kind":"mystery","payload":{}}\n', encoding="utf-8")
        with pytest.raises(UnknownEventKind):
            read_log(path)

    def test_read_rejects_broken_json(self, tmp_path):
        path = tmp_path / "bad.log"
        path.write_text("{not json}\n", encoding="utf-8")
        with pytest.raises(ProtocolError):
            read_log(path)

    def test_session_ids_sorted(self, tmp_path):
        store = EventLogStore(tmp_path)
        for sid in ("zz", "aa"):
            store.append(sid, rec(1, participant_id="a", role="program_manager"))
        assert store.session_ids() == ["aa", "zz"]


class TestWireMessage:
    def test_round_trip(self):
        msg = WireMessage(type="join", session_id="s1", payload={"role": "program_manager"})
        assert WireMessage.from_dict(json.loads(msg.to_json())) == msg

    def test_seq_included_when_set(self):
        msg = WireMessage(type="member_joined", session_id="s1", payload={}, seq=4)
        assert json.loads(msg.to_json())["seq"] == 4

    def test_unknown_extra_fields_ignored(self):
        parsed = WireMessage.from_dict(
            {"type": "join", "session_id": "s1", "payload": {}, "debug": True, "v": 2}
        )
        assert parsed.type == "join"

    @pytest.mark.parametrize(
        "data",
        [
            {"session_id": "s1", "payload": {}},
            {"type": "join", "payload": {}},
            {"type": "join", "session_id": "s1", "payload": "nope"},
            {"type": "join", "session_id": "s1", "seq": "four"},
            "not an object",
        ],
    )
    def test_malformed_rejected(self, data):
        with pytest.raises(ProtocolError):
            WireMessage.from_dict(data)
