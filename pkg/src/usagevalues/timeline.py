"""Two-timescale index algebra: weeks crossed with hours, plus one terminal instant.

Weeks and hours are 0-indexed internally; CSV files label hours 1..H for
readability. The extended timeline appends a single terminal instant
(num_weeks, 0) so the state left by the last decision has a home.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple


class TimeIndex(NamedTuple):
    week: int
    hour: int


@dataclass(frozen=True)
class Timeline:
    num_weeks: int
    hours_per_week: int

    def __post_init__(self):
        if self.num_weeks < 1:
            raise ValueError("num_weeks must be >= 1")
        if self.hours_per_week < 1:
            raise ValueError("hours_per_week must be >= 1")

    @property
    def num_instants(self) -> int:
        """Instants of the extended timeline, terminal included."""
        return self.num_weeks * self.hours_per_week + 1

    @property
    def terminal(self) -> TimeIndex:
        return TimeIndex(self.num_weeks, 0)

    def is_terminal(self, t: TimeIndex) -> bool:
        return t == self.terminal

    def check(self, t: TimeIndex, allow_terminal: bool = False) -> None:
        if allow_terminal and self.is_terminal(t):
            return
        if not (0 <= t.week < self.num_weeks and 0 <= t.hour < self.hours_per_week):
            raise IndexError(f"{t} outside timeline {self.num_weeks}x{self.hours_per_week}")

    def instants(self):
        """All non-terminal instants in increasing order."""
        for w in range(self.num_weeks):
            for h in range(self.hours_per_week):
                yield TimeIndex(w, h)


def successor(t: TimeIndex, tl: Timeline) -> TimeIndex:
    """Next instant in the (week, hour) lexicographic order.

    The last hour of a week rolls over to the next week's opening instant;
    the last hour of the last week maps to the terminal instant. The
    terminal instant has no successor.
    """
    if tl.is_terminal(t):
        raise IndexError("terminal instant has no successor")
    tl.check(t)
    if t.hour + 1 < tl.hours_per_week:
        return TimeIndex(t.week, t.hour + 1)
    return TimeIndex(t.week + 1, 0)


def week_open_block(w: int, tl: Timeline) -> list[TimeIndex]:
    """Instants (w,0)..(w,H-1): the week's planning block, closed on the left."""
    if not 0 <= w < tl.num_weeks:
        raise IndexError(f"week {w} outside [0, {tl.num_weeks})")
    return [TimeIndex(w, h) for h in range(tl.hours_per_week)]


def week_closed_block(w: int, tl: Timeline) -> list[TimeIndex]:
    """Instants (w,1)..(w,H-1),(w+1,0): where the week's uncertainties and
    recourse controls live, closed on the right."""
    if not 0 <= w < tl.num_weeks:
        raise IndexError(f"week {w} outside [0, {tl.num_weeks})")
    return [successor(t, tl) for t in week_open_block(w, tl)]
