"""Multiplication counting for controller hot paths."""

from __future__ import annotations

import ast
import inspect
import textwrap


def static_multiplications(func) -> int:
    """Number of ``*`` operators in the source of ``func``.

    Only meaningful for straight-line code (no loops), such as the unrolled
    step kernels.
    """
    tree = ast.parse(textwrap.dedent(inspect.getsource(func)))
    count = 0
    for node in ast.walk(tree):
        if isinstance(node, (ast.BinOp, ast.AugAssign)) and isinstance(node.op, ast.Mult):
            count += 1
        if isinstance(node, (ast.For, ast.While, ast.comprehension)):
            raise ValueError(f"{func.__name__} contains a loop; count it dynamically")
    return count


class _Tally:
    def __init__(self):
        self.mul = 0


class CountingFloat(float):
    """A float that tallies the multiplications it takes part in."""

    tally: _Tally

    def _wrap(self, value):
        out = CountingFloat(value)
        out.tally = self.tally
        return out

    def __mul__(self, other):
        self.tally.mul += 1
        return self._wrap(float(self) * float(other))

    __rmul__ = __mul__

    def __add__(self, other):
        return self._wrap(float(self) + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(float(self) - float(other))

    def __rsub__(self, other):
        return self._wrap(float(other) - float(self))

    def __neg__(self):
        return self._wrap(-float(self))


def multiplications_per_step(controller, steps: int = 12) -> int:
    """Run ``steps`` steps with counting inputs; return the multiplies of the last one.

    The first steps make every delay line hold counting values, so later
    steps see the steady-state operation count.
    """
    tally = _Tally()

    def cf(v):
        x = CountingFloat(v)
        x.tally = tally
        return x

    controller.reset()
    last = 0
    for k in range(steps):
        before = tally.mul
        controller.step(cf(0.25 + k), cf(0.5 - k))
        last = tally.mul - before
    controller.reset()
    return last
