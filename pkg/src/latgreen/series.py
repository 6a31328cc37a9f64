"""Truncated power-series algebra over exact rationals.

A PowerSeries holds coefficients c_0..c_N of sum c_n z^n; N is the
truncation order, i.e. the last index at which the coefficients are
known to be correct.  All arithmetic is exact (fractions.Fraction) and
never pretends to know more than it does: the product of series valid
to orders N1 and N2 is valid to min(N1, N2), and that is the order of
the result.

A LogSeries represents sum_j f_j(z) log(z)^j / j! with PowerSeries
parts f_j.  This is the normalization in which a Frobenius basis at a
MUM point reads y_0 = f_0, y_1 = y_0 log z + g, y_2 = y_0 log^2 z/2 +
g log z + h, ..., i.e. part j of y_k is the same power series for
every k >= j.  theta = z d/dz acts part-wise as f_j -> theta f_j +
f_{j+1}, which is all the ODE machinery needs.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import (
    BadConstantTerm,
    BadInnerConstant,
    NotReversible,
    ZeroConstantTerm,
)

Q = Fraction
Scalar = Union[int, Fraction]


def _q(x: Scalar) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


class PowerSeries:
    """Exact rational power series truncated at a fixed order."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Scalar], order: int | None = None):
        cs = [_q(c) for c in coeffs]
        if order is not None:
            if order < 0:
                raise ValueError("order must be >= 0")
            if len(cs) < order + 1:
                cs.extend([Q(0)] * (order + 1 - len(cs)))
            else:
                cs = cs[: order + 1]
        if not cs:
            cs = [Q(0)]
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    # -- construction helpers ------------------------------------------------

    @staticmethod
    def constant(c: Scalar, order: int) -> "PowerSeries":
        return PowerSeries([_q(c)], order=order)

    @staticmethod
    def one(order: int) -> "PowerSeries":
        return PowerSeries.constant(1, order)

    @staticmethod
    def zero(order: int) -> "PowerSeries":
        return PowerSeries.constant(0, order)

    @staticmethod
    def var(order: int) -> "PowerSeries":
        """The series z itself."""
        return PowerSeries([0, 1], order=order)

    # -- basic queries -------------------------------------------------------

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int) -> Fraction:
        if n < 0 or n > self.order:
            raise IndexError(f"coefficient {n} outside truncation order {self.order}")
        return self.coeffs[n]

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def valuation(self) -> int | None:
        """Index of the first nonzero coefficient, None for the zero series."""
        for i, c in enumerate(self.coeffs):
            if c != 0:
                return i
        return None

    def agrees_with(self, other: "PowerSeries", through: int) -> bool:
        if through > min(self.order, other.order):
            raise ValueError("comparison beyond common truncation order")
        return self.coeffs[: through + 1] == other.coeffs[: through + 1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PowerSeries):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        head = ", ".join(str(c) for c in self.coeffs[:6])
        tail = ", ..." if self.order >= 6 else ""
        return f"PowerSeries([{head}{tail}]; order={self.order})"

    # -- ring operations -----------------------------------------------------

    def truncate(self, order: int) -> "PowerSeries":
        if order > self.order:
            raise ValueError("cannot extend a truncated series")
        return PowerSeries(self.coeffs[: order + 1])

    def __add__(self, other: "PowerSeries | Scalar") -> "PowerSeries":
        if isinstance(other, (int, Fraction)):
            cs = list(self.coeffs)
            cs[0] += _q(other)
            return PowerSeries(cs)
        n = min(self.order, other.order)
        return PowerSeries([self.coeffs[i] + other.coeffs[i] for i in range(n + 1)])

    __radd__ = __add__

    def __neg__(self) -> "PowerSeries":
        return PowerSeries([-c for c in self.coeffs])

    def __sub__(self, other: "PowerSeries | Scalar") -> "PowerSeries":
        if isinstance(other, (int, Fraction)):
            return self + (-_q(other))
        return self + (-other)

    def __rsub__(self, other: Scalar) -> "PowerSeries":
        return (-self) + _q(other)

    def __mul__(self, other: "PowerSeries | Scalar") -> "PowerSeries":
        if isinstance(other, (int, Fraction)):
            k = _q(other)
            return PowerSeries([c * k for c in self.coeffs])
        n = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        out = [Q(0)] * (n + 1)
        for i in range(min(len(a), n + 1)):
            ai = a[i]
            if ai == 0:
                continue
            for j in range(min(len(b), n + 1 - i)):
                if b[j] != 0:
                    out[i + j] += ai * b[j]
        return PowerSeries(out)

    __rmul__ = __mul__

    def __truediv__(self, other: "PowerSeries | Scalar") -> "PowerSeries":
        if isinstance(other, (int, Fraction)):
            k = _q(other)
            if k == 0:
                raise ZeroDivisionError("division of series by zero scalar")
            return self * (1 / k)
        return self.div(other)

    def div(self, other: "PowerSeries") -> "PowerSeries":
        if other.coeffs[0] == 0:
            raise ZeroConstantTerm("series division needs a unit constant term")
        n = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        inv_b0 = 1 / b[0]
        out = [Q(0)] * (n + 1)
        for i in range(n + 1):
            acc = a[i]
            for j in range(1, min(i, other.order) + 1):
                if b[j] != 0:
                    acc -= b[j] * out[i - j]
            out[i] = acc * inv_b0
        return PowerSeries(out)

    def shift(self, l: int) -> "PowerSeries":
        """Multiply by z^l (l >= 0).  Order grows by l: coefficients stay valid."""
        if l < 0:
            raise ValueError("shift exponent must be >= 0")
        return PowerSeries([Q(0)] * l + list(self.coeffs))

    def pow(self, k: int) -> "PowerSeries":
        if k < 0:
            return PowerSeries.one(self.order).div(self.pow(-k))
        result = PowerSeries.one(self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    # -- calculus ------------------------------------------------------------

    def theta(self) -> "PowerSeries":
        """z d/dz, coefficient-wise n*c_n.  Preserves the truncation order."""
        return PowerSeries([n * c for n, c in enumerate(self.coeffs)])

    def derivative(self) -> "PowerSeries":
        """d/dz; the result is valid one order lower."""
        if self.order == 0:
            return PowerSeries([Q(0)])
        return PowerSeries([n * self.coeffs[n] for n in range(1, self.order + 1)])

    def integrate(self) -> "PowerSeries":
        """Formal antiderivative with zero constant term; valid one order higher."""
        out = [Q(0)] * (self.order + 2)
        for n, c in enumerate(self.coeffs):
            out[n + 1] = c / (n + 1)
        return PowerSeries(out)

    def exp(self) -> "PowerSeries":
        if self.coeffs[0] != 0:
            raise BadConstantTerm("exp needs a series with zero constant term")
        n = self.order
        a = self.coeffs
        out = [Q(0)] * (n + 1)
        out[0] = Q(1)
        # f' = a' f  =>  n f_n = sum_{j=1..n} j a_j f_{n-j}
        for m in range(1, n + 1):
            acc = Q(0)
            for j in range(1, m + 1):
                if a[j] != 0:
                    acc += j * a[j] * out[m - j]
            out[m] = acc / m
        return PowerSeries(out)

    def log(self) -> "PowerSeries":
        if self.coeffs[0] != 1:
            raise BadConstantTerm("log needs a series with constant term 1")
        n = self.order
        a = self.coeffs
        out = [Q(0)] * (n + 1)
        # a g' = a'  =>  m a_0 g_m = m a_m - sum_{j=1..m-1} j g_j a_{m-j}
        for m in range(1, n + 1):
            acc = m * a[m]
            for j in range(1, m):
                if a[m - j] != 0:
                    acc -= j * out[j] * a[m - j]
            out[m] = acc / m
        return PowerSeries(out)

    def sqrt(self) -> "PowerSeries":
        if self.coeffs[0] != 1:
            raise BadConstantTerm("sqrt implemented for constant term 1 only")
        return (self.log() * Q(1, 2)).exp()

    # -- composition ---------------------------------------------------------

    def compose(self, inner: "PowerSeries") -> "PowerSeries":
        """a(b(z)) for b(0) = 0, by Horner evaluation in series arithmetic."""
        if inner.coeffs[0] != 0:
            raise BadInnerConstant("composition needs inner constant term 0")
        n = min(self.order, inner.order)
        b = PowerSeries(inner.coeffs[: n + 1])
        result = PowerSeries.constant(self.coeffs[n], n)
        for i in range(n - 1, -1, -1):
            result = result * b + self.coeffs[i]
        return result

    def reversion(self) -> "PowerSeries":
        """Compositional inverse b with a(b(q)) = q; needs a_0 = 0, a_1 != 0.

        Newton iteration b <- b - (a(b) - q)/(a'(b)), doubling the valid
        order each pass.
        """
        if self.coeffs[0] != 0 or self.order < 1 or self.coeffs[1] == 0:
            raise NotReversible("reversion needs a(0)=0 and a'(0) invertible")
        n = self.order
        b = PowerSeries([0, 1 / self.coeffs[1]], order=n)
        da = self.derivative()  # valid to n-1, enough: used inside compose at order n
        order_ok = 1
        while order_ok < n:
            ab = self.compose(b)
            err = ab - PowerSeries.var(n)
            dab = PowerSeries(da.coeffs, order=n).compose(b)
            b = b - err.div(dab)
            order_ok = min(2 * order_ok, n)
        check = self.compose(b)
        assert check.agrees_with(PowerSeries.var(n), n), "reversion did not verify"
        return b

    # -- conversions ---------------------------------------------------------

    def scale_variable(self, lam: Scalar) -> "PowerSeries":
        """z -> lam*z, i.e. c_n -> c_n lam^n."""
        lam = _q(lam)
        out, p = [], Q(1)
        for c in self.coeffs:
            out.append(c * p)
            p *= lam
        return PowerSeries(out)


class LogSeries:
    """sum_j parts[j] * log(z)^j / j! with exact PowerSeries parts.

    All parts are kept at a common truncation order (the minimum of the
    inputs).  The list of parts is normalized so the top part is nonzero
    unless the whole object is zero.
    """

    __slots__ = ("parts",)

    def __init__(self, parts: Sequence[PowerSeries]):
        if not parts:
            raise ValueError("need at least one part")
        n = min(p.order for p in parts)
        ps = [PowerSeries(p.coeffs[: n + 1]) for p in parts]
        while len(ps) > 1 and ps[-1].is_zero():
            ps.pop()
        self.parts: tuple[PowerSeries, ...] = tuple(ps)

    @staticmethod
    def from_power_series(p: PowerSeries) -> "LogSeries":
        return LogSeries([p])

    @property
    def order(self) -> int:
        return self.parts[0].order

    @property
    def log_degree(self) -> int:
        return len(self.parts) - 1

    def part(self, j: int) -> PowerSeries:
        if j < len(self.parts):
            return self.parts[j]
        return PowerSeries.zero(self.order)

    def is_zero(self) -> bool:
        return all(p.is_zero() for p in self.parts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LogSeries):
            return NotImplemented
        return self.parts == other.parts

    def __hash__(self) -> int:
        return hash(self.parts)

    def __repr__(self) -> str:
        return f"LogSeries(log_degree={self.log_degree}, order={self.order})"

    def __add__(self, other: "LogSeries") -> "LogSeries":
        m = max(len(self.parts), len(other.parts))
        n = min(self.order, other.order)
        parts = []
        for j in range(m):
            a = self.part(j).truncate(n) if self.part(j).order > n else self.part(j)
            b = other.part(j).truncate(n) if other.part(j).order > n else other.part(j)
            parts.append(a + b)
        return LogSeries(parts)

    def __neg__(self) -> "LogSeries":
        return LogSeries([-p for p in self.parts])

    def __sub__(self, other: "LogSeries") -> "LogSeries":
        return self + (-other)

    def scale(self, c: Scalar) -> "LogSeries":
        return LogSeries([p * _q(c) for p in self.parts])

    def __mul__(self, other: "LogSeries | PowerSeries | Scalar") -> "LogSeries":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, PowerSeries):
            other = LogSeries([other])
        # (sum f_j L^j/j!)(sum g_k L^k/k!) : part m = sum_{j+k=m} C(m,j) f_j g_k
        from math import comb

        parts = []
        top = self.log_degree + other.log_degree
        for m in range(top + 1):
            acc: PowerSeries | None = None
            for j in range(m + 1):
                k = m - j
                if j > self.log_degree or k > other.log_degree:
                    continue
                term = (self.parts[j] * other.parts[k]) * comb(m, j)
                acc = term if acc is None else acc + term
            if acc is None:
                acc = PowerSeries.zero(min(self.order, other.order))
            parts.append(acc)
        return LogSeries(parts)

    __rmul__ = __mul__

    def theta(self) -> "LogSeries":
        """z d/dz: part j -> theta(f_j) + f_{j+1} (log-lowering included)."""
        parts = []
        for j in range(len(self.parts)):
            p = self.parts[j].theta()
            if j + 1 < len(self.parts):
                p = p + self.parts[j + 1]
            parts.append(p)
        return LogSeries(parts)

    def shift(self, l: int) -> "LogSeries":
        """Multiply by z^l; every part shifts, truncated back to a common order."""
        shifted = [p.shift(l) for p in self.parts]
        return LogSeries([PowerSeries(s.coeffs[: self.order + 1]) for s in shifted])

    def truncate(self, order: int) -> "LogSeries":
        return LogSeries([p.truncate(order) for p in self.parts])
