"""Exact truncated algebra: nilpotent polynomials in P, Laurent polynomials in z,
and multivariate truncated series.

Everything here works over ``fractions.Fraction``; no floats.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Mapping, Sequence, Tuple, Union

Scalar = Union[int, Fraction]


def frac(x) -> Fraction:
    """Parse ints, Fractions and strings like "3/8" into a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def fpart(x: Fraction) -> Fraction:
    """Fractional part <x> in [0, 1)."""
    return x - (x.numerator // x.denominator)


class TruncationMismatch(ValueError):
    pass


class NilpotentPoly:
    """Polynomial in P modulo P^m with rational coefficients."""

    __slots__ = ("coeffs", "m")

    def __init__(self, coeffs: Iterable[Scalar], m: int):
        if m < 1:
            raise ValueError("truncation order must be positive")
        c = [frac(a) for a in coeffs][:m]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs: Tuple[Fraction, ...] = tuple(c)
        self.m = m

    @classmethod
    def const(cls, a: Scalar, m: int) -> "NilpotentPoly":
        return cls([a], m)

    @classmethod
    def P(cls, m: int) -> "NilpotentPoly":
        return cls([0, 1], m)

    def __getitem__(self, i: int) -> Fraction:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def _check(self, other: "NilpotentPoly"):
        if self.m != other.m:
            raise TruncationMismatch(f"P-truncation {self.m} vs {other.m}")

    def _lift(self, other) -> "NilpotentPoly":
        if isinstance(other, NilpotentPoly):
            self._check(other)
            return other
        return NilpotentPoly.const(other, self.m)

    def __add__(self, other):
        o = self._lift(other)
        n = max(len(self.coeffs), len(o.coeffs))
        return NilpotentPoly([self[i] + o[i] for i in range(n)], self.m)

    __radd__ = __add__

    def __neg__(self):
        return NilpotentPoly([-a for a in self.coeffs], self.m)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, NilpotentPoly):
            a = frac(other)
            return NilpotentPoly([a * c for c in self.coeffs], self.m)
        self._check(other)
        out = [Fraction(0)] * min(self.m, len(self.coeffs) + len(other.coeffs))
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                if i + j >= self.m:
                    break
                out[i + j] += a * b
        return NilpotentPoly(out, self.m)

    __rmul__ = __mul__

    def inverse(self) -> "NilpotentPoly":
        a0 = self[0]
        if a0 == 0:
            raise ZeroDivisionError("constant term is zero; not a unit mod P^m")
        # Newton-free back substitution: b_k = -(sum_{i>=1} a_i b_{k-i}) / a0
        b = [Fraction(1) / a0]
        for k in range(1, self.m):
            s = sum((self[i] * b[k - i] for i in range(1, k + 1)), Fraction(0))
            b.append(-s / a0)
        return NilpotentPoly(b, self.m)

    def __truediv__(self, other):
        if isinstance(other, NilpotentPoly):
            return self * other.inverse()
        return self * (Fraction(1) / frac(other))

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = NilpotentPoly.const(1, self.m)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, NilpotentPoly):
            return self.m == other.m and self.coeffs == other.coeffs
        try:
            return self.coeffs == NilpotentPoly.const(other, self.m).coeffs
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash((self.coeffs, self.m))

    def retruncate(self, m: int) -> "NilpotentPoly":
        """Explicit change of truncation (never done implicitly)."""
        return NilpotentPoly(self.coeffs, m)

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            parts.append(str(a) if i == 0 else f"{a}*P" if i == 1 else f"{a}*P^{i}")
        return " + ".join(parts)

    def to_json(self):
        return [str(a) for a in self.coeffs]


def poly_mul(a: NilpotentPoly, b: NilpotentPoly) -> NilpotentPoly:
    return a * b


def poly_inverse(a: NilpotentPoly) -> NilpotentPoly:
    return a.inverse()


class LaurentZ:
    """Finite Laurent polynomial in z with NilpotentPoly coefficients."""

    __slots__ = ("terms", "m")

    def __init__(self, terms: Mapping[int, NilpotentPoly], m: int):
        self.m = m
        t = {}
        for k, v in terms.items():
            if not isinstance(v, NilpotentPoly):
                v = NilpotentPoly.const(v, m)
            elif v.m != m:
                raise TruncationMismatch(f"P-truncation {v.m} vs {m}")
            if not v.is_zero():
                t[int(k)] = v
        self.terms: Dict[int, NilpotentPoly] = t

    @classmethod
    def const(cls, a, m: int, zpow: int = 0) -> "LaurentZ":
        if not isinstance(a, NilpotentPoly):
            a = NilpotentPoly.const(a, m)
        return cls({zpow: a}, m)

    @classmethod
    def z(cls, m: int, k: int = 1) -> "LaurentZ":
        return cls.const(1, m, k)

    def is_zero(self) -> bool:
        return not self.terms

    def _lift(self, other) -> "LaurentZ":
        if isinstance(other, LaurentZ):
            if other.m != self.m:
                raise TruncationMismatch(f"P-truncation {self.m} vs {other.m}")
            return other
        return LaurentZ.const(other, self.m)

    def __add__(self, other):
        o = self._lift(other)
        t = dict(self.terms)
        for k, v in o.terms.items():
            t[k] = t[k] + v if k in t else v
        return LaurentZ(t, self.m)

    __radd__ = __add__

    def __neg__(self):
        return LaurentZ({k: -v for k, v in self.terms.items()}, self.m)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return LaurentZ({k: v * other for k, v in self.terms.items()}, self.m)
        o = self._lift(other)
        t: Dict[int, NilpotentPoly] = {}
        for a, va in self.terms.items():
            for b, vb in o.terms.items():
                p = va * vb
                t[a + b] = t[a + b] + p if a + b in t else p
        return LaurentZ(t, self.m)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = LaurentZ.const(1, self.m)
        for _ in range(n):
            out = out * self
        return out

    def __getitem__(self, k: int) -> NilpotentPoly:
        return self.terms.get(k, NilpotentPoly([], self.m))

    def at_z(self, z: Scalar = 1) -> NilpotentPoly:
        z = frac(z)
        out = NilpotentPoly([], self.m)
        for k, v in self.terms.items():
            out = out + v * (z ** k)
        return out

    def __eq__(self, other):
        try:
            o = self._lift(other)
        except (TypeError, TruncationMismatch):
            return False
        return self.terms == o.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({v})*z^{k}" for k, v in sorted(self.terms.items()))

    def to_json(self):
        return {str(k): v.to_json() for k, v in sorted(self.terms.items())}


Exps = Tuple[int, ...]


class MultiSeries:
    """Truncated multivariate series with exact rational coefficients.

    ``vars`` names the variables; ``laurent`` (optional) names the one variable
    allowed negative exponents and excluded from the degree bound (z).
    Terms of total graded degree > ``bound`` are dropped.
    """

    __slots__ = ("vars", "laurent", "bound", "terms", "_li")

    def __init__(self, vars: Sequence[str], bound: int, terms: Mapping[Exps, Scalar] = (),
                 laurent: str | None = None):
        self.vars = tuple(vars)
        self.laurent = laurent
        self._li = self.vars.index(laurent) if laurent is not None else -1
        self.bound = bound
        t: Dict[Exps, Fraction] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for e, c in items:
            e = tuple(e)
            if len(e) != len(self.vars):
                raise ValueError("exponent length does not match variables")
            c = frac(c)
            if c == 0 or self.degree(e) > bound:
                continue
            for i, x in enumerate(e):
                if x < 0 and i != self._li:
                    raise ValueError(f"negative exponent in non-Laurent variable {self.vars[i]}")
            t[e] = t.get(e, Fraction(0)) + c
            if t[e] == 0:
                del t[e]
        self.terms = t

    def degree(self, e: Exps) -> int:
        return sum(x for i, x in enumerate(e) if i != self._li)

    def _same(self, other: "MultiSeries"):
        if self.vars != other.vars or self.laurent != other.laurent:
            raise ValueError("incompatible variable sets")

    def _new(self, terms, bound=None):
        return MultiSeries(self.vars, self.bound if bound is None else bound, terms, self.laurent)

    @classmethod
    def monomial(cls, vars, bound, exps: Mapping[str, int], coeff: Scalar = 1, laurent=None):
        e = tuple(exps.get(v, 0) for v in vars)
        return cls(vars, bound, {e: coeff}, laurent)

    def zero(self):
        return self._new({})

    def one(self):
        return self._new({(0,) * len(self.vars): 1})

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        if not isinstance(other, MultiSeries):
            other = self.one() * frac(other)
        self._same(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, 0) + c
        return self._new(t, min(self.bound, other.bound))

    __radd__ = __add__

    def __neg__(self):
        return self._new({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, MultiSeries):
            a = frac(other)
            return self._new({e: c * a for e, c in self.terms.items()})
        self._same(other)
        bound = min(self.bound, other.bound)
        t: Dict[Exps, Fraction] = {}
        for e1, c1 in self.terms.items():
            d1 = self.degree(e1)
            for e2, c2 in other.terms.items():
                if d1 + self.degree(e2) > bound:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, 0) + c1 * c2
        return self._new(t, bound)

    __rmul__ = __mul__

    def truncate(self, bound: int) -> "MultiSeries":
        return self._new(self.terms, min(bound, self.bound))

    def coeff(self, exps: Mapping[str, int]) -> Fraction:
        e = tuple(exps.get(v, 0) for v in self.vars)
        return self.terms.get(e, Fraction(0))

    def deriv(self, var: str) -> "MultiSeries":
        i = self.vars.index(var)
        t = {}
        for e, c in self.terms.items():
            if e[i] != 0:
                e2 = list(e)
                e2[i] -= 1
                t[tuple(e2)] = c * e[i]
        return self._new(t)

    def shift(self, var: str, k: int) -> "MultiSeries":
        """Multiply by var^k (k may be negative only for the Laurent variable)."""
        i = self.vars.index(var)
        t = {}
        for e, c in self.terms.items():
            e2 = list(e)
            e2[i] += k
            t[tuple(e2)] = c
        return self._new(t)

    def homogeneous(self, deg: int) -> "MultiSeries":
        return self._new({e: c for e, c in self.terms.items() if self.degree(e) == deg})

    def filter(self, pred) -> "MultiSeries":
        return self._new({e: c for e, c in self.terms.items() if pred(dict(zip(self.vars, e)))})

    def substitute(self, subs: Mapping[str, "MultiSeries"]) -> "MultiSeries":
        """Replace graded variables by series with zero constant term (composition)."""
        out = self.zero()
        cache: Dict[Tuple[str, int], MultiSeries] = {}

        def power(v, k):
            if (v, k) not in cache:
                cache[(v, k)] = self.one() if k == 0 else power(v, k - 1) * subs[v]
            return cache[(v, k)]

        for e, c in self.terms.items():
            term = self.one() * c
            for v, k in zip(self.vars, e):
                if k == 0:
                    continue
                if v in subs:
                    term = term * power(v, k)
                else:
                    term = term * self.monomial(self.vars, self.bound, {v: k}, 1, self.laurent)
            out = out + term
        return out

    def __eq__(self, other):
        if not isinstance(other, MultiSeries):
            return NotImplemented
        return self.vars == other.vars and self.terms == other.terms

    def __hash__(self):
        return hash((self.vars, tuple(sorted(self.terms.items()))))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items()):
            mono = "*".join(v if k == 1 else f"{v}^{k}" for v, k in zip(self.vars, e) if k)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def series_mul(a: MultiSeries, b: MultiSeries) -> MultiSeries:
    return a * b


def series_add(a: MultiSeries, b: MultiSeries) -> MultiSeries:
    return a + b


def series_truncate(a: MultiSeries, bound: int) -> MultiSeries:
    return a.truncate(bound)


def exp_series(vars, bound, var: str, laurent: str | None = None, zpow: int = 0) -> MultiSeries:
    """e^{var * laurent^zpow} truncated at ``bound``; used for e^{t0/z}."""
    terms = {}
    f = Fraction(1)
    for k in range(bound + 1):
        e = {var: k}
        if laurent is not None:
            e[laurent] = zpow * k
        terms[tuple(e.get(v, 0) for v in vars)] = f
        f /= (k + 1)
    return MultiSeries(vars, bound, terms, laurent)


def rising(x: Fraction, n: int) -> Fraction:
    """Pochhammer (x)_n = Gamma(x+n)/Gamma(x) for integer n >= 0."""
    if n < 0:
        raise ValueError("negative gap")
    out = Fraction(1)
    for i in range(n):
        out *= x + i
    return out


def gamma_ratio(a: Fraction, b: Fraction) -> Fraction:
    """Exact Gamma(a)/Gamma(b) when a - b is an integer and both are positive."""
    gap = a - b
    if gap.denominator != 1:
        raise ValueError(f"non-integral Gamma gap {gap}")
    g = int(gap)
    if g >= 0:
        return rising(b, g)
    return 1 / rising(a, -g)


def multi_indices(n: int, total: int) -> Iterable[Tuple[int, ...]]:
    """All n-tuples of nonnegative ints with sum <= total."""
    if n == 0:
        yield ()
        return
    for first in range(total + 1):
        for rest in multi_indices(n - 1, total - first):
            yield (first,) + rest
