"""Braided Kirby diagrams used across the test suite."""

from unisurf.kirby import KirbyInput

KIRBY_CORPUS = {
    "empty": KirbyInput(0, (), (), ()),
    "unknot-2": KirbyInput(0, (1,), (-2,), ()),
    "unknot-1": KirbyInput(0, (1,), (-1,), ()),
    "unknot0": KirbyInput(0, (1,), (0,), ()),
    "unknot1": KirbyInput(0, (1,), (1,), ()),
    "unknot2": KirbyInput(0, (1,), (2,), ()),
    "hopf": KirbyInput(0, (1, 1), (0, 0), (("s", 0, 1), ("s", 0, 1))),
    "two-comp-s21": KirbyInput(0, (2, 1), (1, -1), (("s", 1, 1), ("s", 1, 1), ("s", 0, 1))),
    "one-handle": KirbyInput(1, (), (), ()),
    "handle-cancel": KirbyInput(1, (1,), (0,), (("h", 0, 0),)),
    "trefoil": KirbyInput(0, (2,), (3,), (("s", 0, 1),) * 3),
    "three-string": KirbyInput(0, (3,), (0,), (("s", 0, 1), ("s", 1, -1), ("s", 0, 1), ("s", 1, -1))),
}
