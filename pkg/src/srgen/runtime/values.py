"""Runtime values and statement outcomes."""
from __future__ import annotations

import math
from dataclasses import dataclass

INT_MIN = -(2 ** 63)
INT_MAX = 2 ** 63 - 1
ARITH = "arith"
STACK_OVERFLOW = "stack overflow"
MISSING_RETURN = "missing return"


class SubjectException(Exception):
    """An exception raised by subject code (``throw`` or a runtime fault)."""

    def __init__(self, text: str):
        super().__init__(text)
        self.text = text


class StepLimitExceeded(Exception):
    pass


class Obj:
    """An instance of the unit under test."""

    __slots__ = ("fields", "serial")

    def __init__(self, fields: dict, serial: int):
        self.fields = fields
        self.serial = serial

    def __repr__(self):
        return f"<obj#{self.serial}>"


def wrap_int(x: int) -> int:
    if INT_MIN <= x <= INT_MAX:
        return x
    return (x - INT_MIN) % (2 ** 64) + INT_MIN


def _trunc_div(a: int, b: int) -> int:
    if b == 0:
        raise SubjectException(ARITH)
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def int_div(a: int, b: int) -> int:
    return wrap_int(_trunc_div(a, b))


def int_mod(a: int, b: int) -> int:
    # sign follows the dividend
    return a - b * _trunc_div(a, b)


def real_div(a: float, b: float) -> float:
    if b == 0:
        raise SubjectException(ARITH)
    return a / b


def real_mod(a: float, b: float) -> float:
    if b == 0:
        raise SubjectException(ARITH)
    return math.fmod(a, b)


# -- statement outcomes ------------------------------------------------------

@dataclass(frozen=True)
class Normal:
    value: object = None


@dataclass(frozen=True)
class Raised:
    text: str


class _Marker:
    def __init__(self, name: str):
        self.name = name

    def __repr__(self):
        return self.name


SKIPPED = _Marker("SKIPPED")
TIMEOUT = _Marker("TIMEOUT")
