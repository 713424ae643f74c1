"""Smooth time functions f(t) given as sympy expressions.

Geodesic families are specified by one or two functions of t.  Keeping them
symbolic lets the closed-form coefficient functions be differentiated
exactly; numerics always go through lambdified callables.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Union

import numpy as np
import sympy as sp

T_SYM = sp.Symbol("t", real=True)

Expr = Union[str, float, int, sp.Expr]


class DomainError(ValueError):
    """A function (or combination) vanishes where it must not."""


def to_expr(f: Expr) -> sp.Expr:
    if isinstance(f, sp.Expr):
        return f
    return sp.sympify(f, locals={"t": T_SYM})


@dataclass(frozen=True)
class TimeFunction:
    expr: sp.Expr

    def __post_init__(self):
        expr = to_expr(self.expr)
        extra = expr.free_symbols - {T_SYM}
        if extra:
            raise ValueError(f"time function may only depend on t, found {sorted(map(str, extra))}")
        object.__setattr__(self, "expr", expr)

    @classmethod
    def of(cls, f: Union["TimeFunction", Expr]) -> "TimeFunction":
        return f if isinstance(f, TimeFunction) else cls(f)

    def derivative_expr(self, n: int) -> sp.Expr:
        return sp.diff(self.expr, T_SYM, n) if n else self.expr

    @cached_property
    def _fns(self) -> list[Callable]:
        return [_lambdify(self.derivative_expr(n)) for n in range(5)]

    def __call__(self, t):
        return self._fns[0](t)

    def d(self, n: int) -> Callable:
        """Callable for the n-th derivative (n <= 4)."""
        return self._fns[n]

    def __str__(self) -> str:
        return str(self.expr)


def _lambdify(expr: sp.Expr) -> Callable:
    fn = sp.lambdify(T_SYM, expr, "numpy")
    if expr.is_constant():
        value = float(expr)
        return lambda t: value + 0.0 * np.asarray(t, dtype=float)
    return fn


@dataclass(frozen=True)
class FunctionPair:
    """(f1, f2) with u = f2'/f1', v = f1' f2 - f2' f1, w = f1'' f2' - f2'' f1'."""

    f1: TimeFunction
    f2: TimeFunction = field(default_factory=lambda: TimeFunction(0))

    def __post_init__(self):
        object.__setattr__(self, "f1", TimeFunction.of(self.f1))
        object.__setattr__(self, "f2", TimeFunction.of(self.f2))

    def u(self, t):
        return self.f2.d(1)(t) / self.f1.d(1)(t)

    def v(self, t):
        return self.f1.d(1)(t) * self.f2(t) - self.f2.d(1)(t) * self.f1(t)

    def vdot(self, t):
        return self.f1.d(2)(t) * self.f2(t) - self.f2.d(2)(t) * self.f1(t)

    def w(self, t):
        return self.f1.d(2)(t) * self.f2.d(1)(t) - self.f2.d(2)(t) * self.f1.d(1)(t)

    @property
    def u_expr(self):
        return self.f2.derivative_expr(1) / self.f1.derivative_expr(1)

    @property
    def v_expr(self):
        f1, f2 = self.f1, self.f2
        return f1.derivative_expr(1) * f2.expr - f2.derivative_expr(1) * f1.expr

    @property
    def w_expr(self):
        f1, f2 = self.f1, self.f2
        return f1.derivative_expr(2) * f2.derivative_expr(1) - f2.derivative_expr(2) * f1.derivative_expr(1)


def require_nonvanishing(fn: Callable, t, name: str, tol: float = 1e-14, positive: bool = False) -> None:
    """Raise DomainError at the first t where fn is (near) zero, or not positive if asked."""
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    vals = np.atleast_1d(np.asarray(fn(ts), dtype=float)) * np.ones_like(ts)
    bad = np.abs(vals) < tol
    if positive:
        bad |= vals <= 0
    if np.any(bad):
        raise DomainError(f"{name} is {'not positive' if positive else 'zero'} at t = {float(ts[np.argmax(bad)])!r}")


def require_no_sign_change(fn: Callable, t_span, name: str, samples: int = 2001, positive: bool = False) -> None:
    """Scan a span for zeros or sign changes of fn."""
    ts = np.linspace(t_span[0], t_span[1], samples)
    vals = np.asarray(fn(ts), dtype=float) * np.ones_like(ts)
    flips = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    if len(flips):
        raise DomainError(f"{name} changes sign near t = {float(ts[flips[0]])!r}")
    require_nonvanishing(fn, ts, name, positive=positive)
