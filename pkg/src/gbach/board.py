"""Independent 6x6 board simulator used to validate Rush Hour witnesses.

It only reads the ``move(vehicle, row, col)`` events of a trace and keeps its
own occupancy grid; nothing here depends on the transition engine.
"""

from __future__ import annotations

from .errors import IllegalMove
from .rushhour import CASES, EXIT_COL, EXIT_ROW, SIZE


class Board:
    def __init__(self, vehicles):
        self.pos = {}  # tag -> (row, col)
        self.shape = {}  # tag -> (orientation, length)
        self.grid = [[None] * (SIZE + 1) for _ in range(SIZE + 1)]
        for v in vehicles:
            self.shape[v.tag] = (v.orientation, v.length)
            self._place(v.tag, v.row, v.col)

    def cells(self, tag, row, col):
        orientation, length = self.shape[tag]
        if orientation == "H":
            return [(row, col + k) for k in range(length)]
        return [(row + k, col) for k in range(length)]

    def _place(self, tag, row, col):
        self.pos[tag] = (row, col)
        for r, c in self.cells(tag, row, col):
            self.grid[r][c] = tag

    def move(self, tag, row, col, index=0):
        if tag not in self.pos:
            raise IllegalMove(index, f"unknown vehicle {tag}")
        r0, c0 = self.pos[tag]
        orientation, _ = self.shape[tag]
        dr, dc = row - r0, col - c0
        along = (dr == 0 and abs(dc) == 1) if orientation == "H" else (dc == 0 and abs(dr) == 1)
        if not along:
            raise IllegalMove(index, f"{tag} cannot go from {(r0, c0)} to {(row, col)}")
        target = self.cells(tag, row, col)
        for r, c in target:
            if not (1 <= r <= SIZE and 1 <= c <= SIZE):
                raise IllegalMove(index, f"{tag} would leave the grid at {(r, c)}")
            if self.grid[r][c] not in (None, tag):
                raise IllegalMove(index, f"{tag} runs into {self.grid[r][c]} at {(r, c)}")
        for r, c in self.cells(tag, r0, c0):
            self.grid[r][c] = None
        self._place(tag, row, col)

    def solved(self) -> bool:
        return self.pos.get("red_car") == (EXIT_ROW, EXIT_COL)

    def render(self) -> str:
        rows = []
        for r in range(1, SIZE + 1):
            rows.append(" ".join((self.grid[r][c] or ".")[0] for c in range(1, SIZE + 1)))
        return "\n".join(rows)


def move_events(trace) -> list:
    """``(step index, vehicle, row, col)`` for every move event of ``trace``."""
    out = []
    for i, (label, _) in enumerate(trace.steps, 1):
        for f in label.fired:
            if f.name == "move":
                tag, row, col = (str(a) for a in f.args)
                out.append((i, tag, int(row), int(col)))
    return out


def replay_moves(trace, case: int) -> Board:
    """Apply every move of ``trace`` to the case's starting board; raises IllegalMove."""
    board = Board(CASES[case])
    for index, tag, row, col in move_events(trace):
        board.move(tag, row, col, index)
    return board


def validate_solution(trace, case: int, strict: bool = False) -> bool:
    """True iff every move is legal and the red car ends at the exit."""
    try:
        board = replay_moves(trace, case)
    except IllegalMove:
        if strict:
            raise
        return False
    if not board.solved():
        if strict:
            raise IllegalMove(len(trace.steps), "red car is not at the exit")
        return False
    return True
