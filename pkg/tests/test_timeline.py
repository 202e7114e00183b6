import pytest

from usagevalues.timeline import (TimeIndex, Timeline, successor,
                                  week_closed_block, week_open_block)


def test_successor_within_week():
    tl = Timeline(2, 3)
    assert successor(TimeIndex(0, 0), tl) == TimeIndex(0, 1)


def test_successor_week_rollover():
    tl = Timeline(2, 3)
    assert successor(TimeIndex(0, 2), tl) == TimeIndex(1, 0)


def test_successor_reaches_terminal():
    tl = Timeline(2, 3)
    assert successor(TimeIndex(1, 2), tl) == TimeIndex(2, 0) == tl.terminal


def test_successor_rejects_terminal():
    tl = Timeline(2, 3)
    with pytest.raises(IndexError):
        successor(tl.terminal, tl)


def test_open_block_examples():
    assert week_open_block(0, Timeline(3, 2)) == [TimeIndex(0, 0), TimeIndex(0, 1)]
    assert week_open_block(1, Timeline(3, 1)) == [TimeIndex(1, 0)]
    assert week_open_block(2, Timeline(3, 3)) == [
        TimeIndex(2, 0), TimeIndex(2, 1), TimeIndex(2, 2)]


def test_closed_block_examples():
    assert week_closed_block(0, Timeline(2, 2)) == [TimeIndex(0, 1), TimeIndex(1, 0)]
    assert week_closed_block(0, Timeline(2, 1)) == [TimeIndex(1, 0)]
    assert week_closed_block(1, Timeline(3, 3)) == [
        TimeIndex(1, 1), TimeIndex(1, 2), TimeIndex(2, 0)]


def test_block_ranges_checked():
    tl = Timeline(2, 2)
    with pytest.raises(IndexError):
        week_open_block(2, tl)
    with pytest.raises(IndexError):
        week_closed_block(-1, tl)


@pytest.mark.parametrize("w,h", [(1, 1), (2, 3), (4, 6), (3, 1)])
def test_closed_block_is_elementwise_successor(w, h):
    tl = Timeline(w, h)
    for wk in range(w):
        opened = week_open_block(wk, tl)
        closed = week_closed_block(wk, tl)
        assert len(opened) == len(closed) == h
        assert closed == [successor(t, tl) for t in opened]


@pytest.mark.parametrize("w,h", [(1, 1), (2, 3), (4, 6)])
def test_open_blocks_tile_the_timeline(w, h):
    tl = Timeline(w, h)
    seen = [t for wk in range(w) for t in week_open_block(wk, tl)]
    assert seen == list(tl.instants())
    assert len(seen) == tl.num_instants - 1


def test_invalid_dimensions_rejected():
    with pytest.raises(ValueError):
        Timeline(0, 5)
    with pytest.raises(ValueError):
        Timeline(3, 0)
