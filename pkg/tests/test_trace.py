import pytest

from conftest import build_world
from lanechange.sim import TraceWriter, read_trace, safety_rate_from_traces, step
from lanechange.sim.trace import TraceError, trace_has_collision


def test_written_records_read_back(tmp_path):
    world = build_world([(0.0, 1, 10.0), (50.0, 0, 12.0)])
    nxt, events = step(world, 0.1)
    path = tmp_path / "sub" / "t.jsonl"
    with TraceWriter(path) as writer:
        writer.write_step(nxt, events)
        writer.write_decision({"time": 0.0, "proposed_action": 2})
    records = read_trace(path)
    assert [r["kind"] for r in records] == ["step", "decision"]
    assert records[0]["vehicles"][1][:4] == [1, 50.0 + 1.2, 2.0, 0]
    assert records[0]["events"]["collision"] is False
    assert not trace_has_collision(records)


def test_only_ego_collisions_count():
    def step_record(ids):
        return {"kind": "step", "events": {"collision": True, "collision_ids": ids}}

    assert trace_has_collision([step_record([0, 3])])
    assert not trace_has_collision([step_record([2, 3])])


def test_writing_after_close_fails(tmp_path):
    writer = TraceWriter(tmp_path / "t.jsonl")
    writer.close()
    with pytest.raises(TraceError):
        writer.write_decision({})


def test_bad_json_names_the_line(tmp_path):
    path = tmp_path / "t.jsonl"
    path.write_text('{"kind": "step"}\n{oops\n')
    with pytest.raises(TraceError, match="line 2"):
        read_trace(path)


def test_safety_rate_needs_files(tmp_path):
    with pytest.raises(TraceError):
        safety_rate_from_traces([])
    with pytest.raises(TraceError, match="not found"):
        read_trace(tmp_path / "missing.jsonl")
