"""Rush Hour puzzles as coordination programs.

Each vehicle is a recursive procedure running in parallel with the others;
free cells are ``free(r, c)`` tokens on the store.  Moving a vehicle takes
the cell it enters, fires the ``move`` graphical primitive and frees the cell
it leaves.  The red car tells ``out`` once it reaches columns 5-6 of row 3.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidPlacement
from .logic import Cmp, Count, Num
from .parser import parse_program
from .syntax import Program
from .terms import Token

SIZE = 6
EXIT_ROW = 3
EXIT_COL = 5


@dataclass(frozen=True)
class VehicleSpec:
    kind: str  # car | truck
    orientation: str  # H | V
    row: int
    col: int
    tag: str  # identifier, also the vehicle's argument to ``move``

    @property
    def length(self) -> int:
        return 2 if self.kind == "car" else 3

    def cells(self) -> list:
        if self.orientation == "H":
            return [(self.row, self.col + k) for k in range(self.length)]
        return [(self.row + k, self.col) for k in range(self.length)]

    @property
    def is_red(self) -> bool:
        return self.tag == "red_car"

    def label(self) -> str:
        color = self.tag.split("_")[0].capitalize()
        return f"{self.orientation}{color}{self.kind.capitalize()}({self.row},{self.col})"


def _v(kind, orientation, row, col, tag):
    return VehicleSpec(kind, orientation, row, col, tag)


PURPLE_TRUCK_2_4 = _v("truck", "V", 2, 4, "purple_truck")
PURPLE_TRUCK = _v("truck", "V", 2, 1, "purple_truck")
RED_CAR = _v("car", "H", 3, 2, "red_car")
GREEN_CAR = _v("car", "H", 1, 1, "green_car")
ORANGE_CAR = _v("car", "V", 5, 1, "orange_car")
BLUE_TRUCK = _v("truck", "V", 2, 4, "blue_truck")
GREEN_TRUCK = _v("truck", "H", 6, 3, "green_truck")
YELLOW_TRUCK = _v("truck", "V", 1, 6, "yellow_truck")

CASES = {
    1: (PURPLE_TRUCK_2_4, RED_CAR),
    2: (PURPLE_TRUCK, RED_CAR, GREEN_CAR),
    3: (PURPLE_TRUCK, RED_CAR, GREEN_CAR, ORANGE_CAR),
    4: (PURPLE_TRUCK, RED_CAR, GREEN_CAR, ORANGE_CAR, BLUE_TRUCK),
    5: (PURPLE_TRUCK, RED_CAR, GREEN_CAR, ORANGE_CAR, BLUE_TRUCK, GREEN_TRUCK),
    6: (PURPLE_TRUCK, RED_CAR, GREEN_CAR, ORANGE_CAR, BLUE_TRUCK, GREEN_TRUCK, YELLOW_TRUCK),
}

VARIANTS = ("GL", "NoGL")

OUT = Token("out")
GOAL = Cmp("=", Count(OUT), Num(1))


def validate_placement(vehicles) -> None:
    seen = {}
    for v in vehicles:
        if v.orientation not in ("H", "V") or v.kind not in ("car", "truck"):
            raise InvalidPlacement(f"bad vehicle {v}")
        for cell in v.cells():
            r, c = cell
            if not (1 <= r <= SIZE and 1 <= c <= SIZE):
                raise InvalidPlacement(f"{v.tag} leaves the grid at {cell}")
            if cell in seen:
                raise InvalidPlacement(f"{v.tag} overlaps {seen[cell]} at {cell}")
            seen[cell] = v.tag
    reds = [v for v in vehicles if v.is_red]
    if len(reds) != 1 or reds[0].orientation != "H" or reds[0].row != EXIT_ROW or reds[0].kind != "car":
        raise InvalidPlacement("exactly one horizontal red car on the exit row is required")


def _eqns(name, pairs):
    return "eqn " + " ".join(f"{name}({a}) = {b}." for a, b in pairs)


_PROCS = """\
proc VCar(r: RCInt, c: RCInt, v: Vehicles) =
  (r > 1 -> get(free(pred(r), c)); move(v, pred(r), c); tell(free(succ(r), c)); VCar(pred(r), c, v))
  + (r < 5 -> get(free(down_car(r), c)); move(v, succ(r), c); tell(free(r, c)); VCar(succ(r), c, v)).

proc VTruck(r: RCInt, c: RCInt, v: Vehicles) =
  (r > 1 & r < 5 -> get(free(pred(r), c)); move(v, pred(r), c); tell(free(succ(succ(r)), c)); VTruck(pred(r), c, v))
  + (r < 4 -> get(free(down_truck(r), c)); move(v, succ(r), c); tell(free(r, c)); VTruck(succ(r), c, v)).

proc HCar(r: RCInt, c: RCInt, v: Vehicles) =
  (c > 1 -> get(free(r, pred(c))); move(v, r, pred(c)); tell(free(r, succ(c))); HCar(r, pred(c), v))
  + (c < 5 -> get(free(r, right_car(c))); move(v, r, succ(c)); tell(free(r, c)); HCar(r, succ(c), v)).

proc HTruck(r: RCInt, c: RCInt, v: Vehicles) =
  (c > 1 & c < 5 -> get(free(r, pred(c))); move(v, r, pred(c)); tell(free(r, succ(succ(c)))); HTruck(r, pred(c), v))
  + (c < 4 -> get(free(r, right_truck(c))); move(v, r, succ(c)); tell(free(r, c)); HTruck(r, succ(c), v)).

proc RedCar(c: RCInt) =
  c = 5 -> tell(out)
  <> ((c > 1 -> get(free(3, pred(c))); move(red_car, 3, pred(c)); tell(free(3, succ(c))); RedCar(pred(c)))
      + (c < 5 -> get(free(3, right_car(c))); move(red_car, 3, succ(c)); tell(free(3, c)); RedCar(succ(c)))).
"""


def _call(v: VehicleSpec) -> str:
    if v.is_red:
        return f"RedCar({v.col})"
    proc = ("H" if v.orientation == "H" else "V") + ("Car" if v.kind == "car" else "Truck")
    return f"{proc}({v.row}, {v.col}, {v.tag})"


def rush_hour_source(vehicles) -> str:
    """Source text of the program without guarded lists."""
    vehicles = tuple(vehicles)
    validate_placement(vehicles)
    occupied = {cell for v in vehicles for cell in v.cells()}
    ids = sorted({v.tag for v in vehicles} | {"red_car"})
    rng = range(1, SIZE + 1)
    lines = [
        "gprim move.",
        "",
        f"eset RCInt = {{{', '.join(map(str, rng))}}}.",
        f"eset Vehicles = {{{', '.join(ids)}}}.",
        "",
        "map pred : RCInt -> RCInt.",
        _eqns("pred", [(i, i - 1) for i in range(2, SIZE + 1)]),
        "map succ : RCInt -> RCInt.",
        _eqns("succ", [(i, i + 1) for i in range(1, SIZE)]),
        "map down_car : RCInt -> RCInt.",
        _eqns("down_car", [(i, i + 2) for i in range(1, SIZE - 1)]),
        "map down_truck : RCInt -> RCInt.",
        _eqns("down_truck", [(i, i + 3) for i in range(1, SIZE - 2)]),
        "map right_car : RCInt -> RCInt.",
        _eqns("right_car", [(i, i + 2) for i in range(1, SIZE - 1)]),
        "map right_truck : RCInt -> RCInt.",
        _eqns("right_truck", [(i, i + 3) for i in range(1, SIZE - 2)]),
        "",
        _PROCS,
    ]
    tells = [f"tell(free({r}, {c}))" for r in rng for c in rng if (r, c) not in occupied]
    lines.append("run " + ";\n    ".join(tells) + ";\n    (" + " || ".join(_call(v) for v in vehicles) + ").")
    lines.append("")
    lines.append("formula solved = Reach(#out = 1).")
    return "\n".join(lines) + "\n"


def generate_rush_hour(case: int, variant: str = "GL") -> Program:
    """Program for test case ``case`` (1-6) in variant ``GL`` or ``NoGL``."""
    if case not in CASES:
        raise ValueError(f"unknown case {case}; expected one of {sorted(CASES)}")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    prog = parse_program(rush_hour_source(CASES[case]), source=f"rushhour-{case}.gbach")
    if variant == "NoGL":
        return prog
    from .refinement import transform_to_guarded

    out, _ = transform_to_guarded(prog, GOAL)
    return out


def vehicle_count(case: int) -> int:
    return len(CASES[case])
