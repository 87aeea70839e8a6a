import pytest

from fourslot.harness import (
    check_coherence, check_freshness, check_integrity, check_linearizable, check_write_order,
)
from fourslot.history import History, HistoryEvent, MalformedHistory


def make(writes=(), reads=(), initial=1):
    """History from (invoke, return, stamp) triples; payloads are derived from stamps."""
    events = []
    for inv, ret, stamp in writes:
        events.append(HistoryEvent(inv, "W", "write-invoke", stamp=stamp, payload=f"v{stamp}"))
        events.append(HistoryEvent(ret, "W", "write-return"))
    for inv, ret, stamp in reads:
        events.append(HistoryEvent(inv, "R", "read-invoke"))
        events.append(HistoryEvent(ret, "R", "read-return", stamp=stamp, payload=f"v{stamp}",
                                   aux=stamp))
    return History.from_events(events, f"v{initial}", initial)


def serial_reads(stamps):
    # writes 2..max(stamps), then reads far later, one after another
    top = max(stamps)
    writes = [(10 * k, 10 * k + 1, k) for k in range(2, top + 1)]
    return make(writes, [(1000 + 10 * k, 1001 + 10 * k, t) for k, t in enumerate(stamps)])


def test_coherence_examples():
    assert check_coherence(serial_reads([1, 1, 3, 3, 5])).ok
    v = check_coherence(serial_reads([1, 3, 2]))
    assert not v.ok and v.witness["index"] == 2


def test_freshness_serial_read_sees_latest():
    writes = [(k * 10, k * 10 + 1, k) for k in range(2, 9)]
    h = make(writes[:6], [(75, 76, 7)])       # after write 7, before write 8 starts
    assert check_freshness(h).ok
    h = make(writes, [(75, 76, 6)])
    assert not check_freshness(h).ok


@pytest.mark.parametrize("stamp,ok", [(5, False), (6, True), (7, True), (8, True), (9, False)])
def test_freshness_window_with_overlapping_writes(stamp, ok):
    writes = [(10, 11, 5), (20, 21, 6), (30, 40, 7), (45, 60, 8), (70, 71, 9)]
    h = make(writes, [(35, 50, stamp)])       # overlaps writes 7 and 8, write 6 precedes it
    assert check_freshness(h).ok is ok


def test_linearizable_examples():
    serial = make([(1, 2, 2), (5, 6, 3)], [(3, 4, 2), (7, 8, 3)])
    assert check_linearizable(serial).ok
    stale = make([(1, 2, 2), (5, 6, 3)], [(7, 8, 2)])
    assert not check_linearizable(stale).ok


def test_integrity_and_write_order():
    torn = History.from_events([
        HistoryEvent(1, "W", "write-invoke", stamp=2, payload="v2"),
        HistoryEvent(2, "W", "write-return"),
        HistoryEvent(3, "R", "read-invoke"),
        HistoryEvent(4, "R", "read-return", stamp=2, payload="v1"),
    ], "v1", 1)
    assert not check_integrity(torn).ok
    assert not check_write_order(make([(1, 2, 3), (3, 4, 3)])).ok


def test_dump_load_round_trip():
    h = make([(1, 4, 2)], [(2, 3, 1), (5, 6, 2)])
    text = h.dumps()
    assert text.splitlines()[0] == '{"initial_payload": "v1", "initial_stamp": 1}'
    assert text.splitlines()[1] == '[1, "W", "write-invoke", null, null, 2, "v2", null]'
    again = History.loads(text)
    assert again.events == h.events
    assert again.dumps() == text


@pytest.mark.parametrize("events", [
    [HistoryEvent(1, "W", "write-return")],
    [HistoryEvent(1, "R", "read-invoke"), HistoryEvent(2, "R", "read-invoke")],
    [HistoryEvent(1, "W", "slot-enter", 0, 0)],
    [HistoryEvent(1, "W", "write-invoke", stamp=2), HistoryEvent(2, "W", "slot-enter", 0, 0),
     HistoryEvent(3, "W", "slot-exit", 0, 1), HistoryEvent(4, "W", "write-return")],
    [HistoryEvent(1, "W", "read-invoke"), HistoryEvent(2, "W", "read-return", stamp=1)],
])
def test_malformed_histories_are_rejected(events):
    h = History.from_events(events, "v1", 1)
    with pytest.raises(MalformedHistory):
        h.validate()
    assert not check_coherence(h).ok


def test_bad_rows_are_rejected():
    with pytest.raises(MalformedHistory):
        History.from_events([HistoryEvent(1, "X", "write-invoke")])
    with pytest.raises(MalformedHistory):
        History.loads('{"initial_payload": 0}\n[1, 2]\n')
    with pytest.raises(MalformedHistory):
        History.loads("")
