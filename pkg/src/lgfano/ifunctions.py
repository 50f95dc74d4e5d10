"""Exact truncated I-functions on both sides of the correspondence.

Conventions
-----------
* GW side: ``ExponentSum`` over the variable q. The term keyed (f, n) stands
  for ``c * q^{n + P/z} 1_f`` (or ``q^{n+P}`` when z = 1). The shift by P is
  never expanded into logarithms.
* LG side: ``ExponentSum`` over t (or q = t^{-d}); sector keys are the
  integers k of phi_k and P-truncation is 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, floor
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

from .algebra import LaurentZ, MultiSeries, NilpotentPoly, fpart, gamma_ratio, multi_indices
from .geometry import InvalidInput, WeightSystem, narrow_set

Sector = Union[Fraction, int]


class NotGorenstein(InvalidInput):
    pass


@dataclass
class ExponentSum:
    variable: str                      # "q", "t" or "u"
    terms: Dict[Tuple[Sector, Fraction], LaurentZ]
    ptrunc: Dict[Sector, int]          # P-truncation per sector
    log_shift: str = "none"            # "P/z", "P" or "none": what D adds to the exponent
    order: Optional[Fraction] = None   # largest exponent kept (by magnitude)
    convention: Optional[str] = None   # LG slice exponent convention, "small" or "big"

    def sectors(self):
        return sorted(self.ptrunc)

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: (kv[0][1], str(kv[0][0])))

    def coeff(self, sector, e) -> LaurentZ:
        e = Fraction(e)
        return self.terms.get((sector, e), LaurentZ({}, self.ptrunc.get(sector, 1)))

    def exponents(self):
        return sorted({e for _, e in self.terms})

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.terms.values())

    def nonzero_terms(self):
        return {k: v for k, v in self.terms.items() if not v.is_zero()}

    def __add__(self, other: "ExponentSum") -> "ExponentSum":
        if other.variable != self.variable or other.log_shift != self.log_shift:
            raise ValueError("incompatible exponent sums")
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t[k] + v if k in t else v
        p = dict(self.ptrunc)
        p.update(other.ptrunc)
        return ExponentSum(self.variable, t, p, self.log_shift, self.order, self.convention)

    def scale(self, a) -> "ExponentSum":
        return ExponentSum(self.variable, {k: v * a for k, v in self.terms.items()}, dict(self.ptrunc),
                           self.log_shift, self.order, self.convention)

    def at_z(self, z) -> "ExponentSum":
        """Specialize z to a rational number; P-shift becomes P/z -> P only for z=1."""
        z = Fraction(z)
        shift = self.log_shift
        if shift == "P/z":
            if z != 1:
                raise ValueError("only z=1 keeps the q^{P/z} bookkeeping exact")
            shift = "P"
        t = {k: LaurentZ.const(v.at_z(z), v.m) for k, v in self.terms.items()}
        return ExponentSum(self.variable, t, dict(self.ptrunc), shift, self.order, self.convention)

    def to_json(self):
        out = []
        for (s, e), c in self.items():
            if c.is_zero():
                continue
            out.append({"sector": str(s), "exponent": str(e), "coefficient": c.to_json()})
        return {"variable": self.variable, "log_shift": self.log_shift,
                "ptrunc": {str(k): v for k, v in sorted(self.ptrunc.items(), key=lambda x: str(x[0]))},
                "terms": out}


# ---------------------------------------------------------------------------
# GW side

def sector_fixed(ws: WeightSystem, f: Fraction) -> List[int]:
    return [j for j, w in enumerate(ws.weights) if (w * f).denominator == 1]


def default_ptrunc(ws: WeightSystem, f: Fraction) -> int:
    """dim of the sector's fixed locus inside the hypersurface, plus one."""
    Ng = len(sector_fixed(ws, f))
    in_G = (f * ws.degree).denominator == 1
    return Ng - 1 if in_G else Ng


def _b_range(x: Fraction) -> List[Fraction]:
    """0 < b <= x with <b> = <x>."""
    fr = fpart(x)
    b = fr if fr > 0 else Fraction(1)
    out = []
    while b <= x:
        out.append(b)
        b += 1
    return out


def _linear(a: Fraction, b: Fraction, m: int, formal_z: bool) -> LaurentZ:
    """a*P + b*z."""
    P = NilpotentPoly.P(m) * a
    if formal_z:
        return LaurentZ({0: P, 1: NilpotentPoly.const(b, m)}, m)
    return LaurentZ.const(P + b, m)


def _linear_inv(a: Fraction, b: Fraction, m: int, formal_z: bool) -> LaurentZ:
    """(a*P + b*z)^{-1}, finite because P is nilpotent."""
    if not formal_z:
        return LaurentZ.const((NilpotentPoly.P(m) * a + b).inverse(), m)
    terms = {}
    for i in range(m):
        terms[-(i + 1)] = NilpotentPoly([0] * i + [(-a) ** i / b ** (i + 1)], m)
    return LaurentZ(terms, m)


def gw_n_values(ws: WeightSystem, order) -> List[Fraction]:
    order = Fraction(order)
    ns = set()
    for w in ws.weights:
        k = 0
        while Fraction(k, w) <= order:
            ns.add(Fraction(k, w))
            k += 1
    return sorted(ns)


def gw_coefficient(ws: WeightSystem, n: Fraction, m: int, formal_z: bool = True) -> LaurentZ:
    d = ws.degree
    c = LaurentZ.z(m) if formal_z else LaurentZ.const(1, m)
    for b in _b_range(n * d):
        c = c * _linear(Fraction(d), b, m, formal_z)
    for w in ws.weights:
        for b in _b_range(n * w):
            c = c * _linear_inv(Fraction(w), b, m, formal_z)
    return c


def gw_small_i(ws: WeightSystem, order, z: str = "formal",
               p_trunc: Optional[Mapping[Fraction, int]] = None) -> ExponentSum:
    """Small GW I-function up to q-exponent ``order``.

    z="formal" keeps z as a Laurent variable (prefactor z q^{P/z});
    z="one" sets z=1.
    """
    if Fraction(order) <= 0:
        raise ValueError("order must be positive")
    formal = z == "formal"
    terms, ptr = {}, {}
    for n in gw_n_values(ws, order):
        f = fpart(-n)
        m = (p_trunc or {}).get(f, default_ptrunc(ws, f))
        if m <= 0:
            continue
        ptr[f] = m
        terms[(f, n)] = gw_coefficient(ws, n, m, formal)
    return ExponentSum("q", terms, ptr, "P/z" if formal else "P", Fraction(order))


# ---------------------------------------------------------------------------
# LG side

def _require_gorenstein(ws: WeightSystem, allow: bool):
    if not allow and not ws.gorenstein:
        raise NotGorenstein(f"{ws.label()} is not Gorenstein")


def small_coefficient(ws: WeightSystem, n: int) -> Tuple[Fraction, int]:
    """Rational part and z-power of the slice term of index n = dl + k:
    z t^{n}/(z^n n!) prod_j Gamma(q_j(n+1))/Gamma(q_j + <q_j n>) z^{floor(q_j n)}."""
    c = Fraction(1, factorial(n))
    zp = 1 - n
    for q in ws.charges:
        c *= gamma_ratio(q * (n + 1), q + fpart(q * n))
        zp += floor(q * n)
    return c, zp


def fjrw_small_i(ws: WeightSystem, order: int, convention: str = "small", z: str = "formal",
                 annihilate: bool = True, allow_non_gorenstein: bool = False) -> ExponentSum:
    """Small FJRW I-function in t. ``convention`` selects t^{dl+k+1} ("small")
    or the slice exponents t^{dl+k} ("big"). With ``annihilate=False`` the
    non-narrow phi_k are kept (the input the translation formula needs)."""
    _require_gorenstein(ws, allow_non_gorenstein)
    d = ws.degree
    ks = narrow_set(ws) if annihilate else list(range(d))
    terms, ptr = {}, {}
    shift = 1 if convention == "small" else 0
    if convention not in ("small", "big"):
        raise ValueError("convention must be 'small' or 'big'")
    for k in ks:
        ptr[k] = 1
        for l in range(order + 1):
            n = d * l + k
            c, zp = small_coefficient(ws, n)
            coef = LaurentZ.const(c, 1, zp) if z == "formal" else LaurentZ.const(c, 1)
            terms[(k, Fraction(n + shift))] = coef
    return ExponentSum("t", terms, ptr, "none", Fraction(d * order + d), convention)


def lg_t_form(ws: WeightSystem, order: int, allow_non_gorenstein: bool = True) -> ExponentSum:
    """I_FJRW^small(t, -1) (small exponent convention), as used at the LG point
    in the general-type case."""
    return fjrw_small_i(ws, order, "small", "formal", True, allow_non_gorenstein).at_z(-1)


def lg_q_form(ws: WeightSystem, order: int, allow_non_gorenstein: bool = True) -> ExponentSum:
    """I_FJRW^small(q^{-1/d}, -1): exponents -(l + (k+1)/d) in q."""
    s = lg_t_form(ws, order, allow_non_gorenstein)
    d = ws.degree
    terms = {(k, -e / d): c for (k, e), c in s.terms.items()}
    return ExponentSum("q", terms, dict(s.ptrunc), "none", Fraction(order + 1))


# ---------------------------------------------------------------------------
# big I-functions (MultiSeries components keyed by phi index)

@dataclass
class BigIFunction:
    vars: Tuple[str, ...]              # t-variable names followed by "z"
    bound: int
    components: Dict[int, MultiSeries] = field(default_factory=dict)

    def comp(self, k: int) -> MultiSeries:
        if k not in self.components:
            return MultiSeries(self.vars, self.bound, {}, "z")
        return self.components[k]

    def __add__(self, other: "BigIFunction") -> "BigIFunction":
        keys = set(self.components) | set(other.components)
        return BigIFunction(self.vars, min(self.bound, other.bound),
                            {k: self.comp(k) + other.comp(k) for k in keys})

    def __sub__(self, other):
        return self + other.scaled(-1)

    def scaled(self, a) -> "BigIFunction":
        return BigIFunction(self.vars, self.bound, {k: v * a for k, v in self.components.items()})

    def times(self, s: MultiSeries) -> "BigIFunction":
        return BigIFunction(self.vars, self.bound, {k: v * s for k, v in self.components.items()})

    def deriv(self, var: str) -> "BigIFunction":
        return BigIFunction(self.vars, self.bound, {k: v.deriv(var) for k, v in self.components.items()})

    def shift_z(self, k: int) -> "BigIFunction":
        return BigIFunction(self.vars, self.bound, {i: v.shift("z", k) for i, v in self.components.items()})

    def truncate(self, bound: int) -> "BigIFunction":
        return BigIFunction(self.vars, bound, {k: v.truncate(bound) for k, v in self.components.items()})

    def cleaned(self) -> "BigIFunction":
        return BigIFunction(self.vars, self.bound, {k: v for k, v in self.components.items() if not v.is_zero()})

    def __eq__(self, other):
        a, b = self.cleaned(), other.cleaned()
        return a.vars == b.vars and a.components == b.components

    def to_json(self):
        out = {}
        for k, s in sorted(self.components.items()):
            out[str(k)] = [{"exps": dict(zip(self.vars, e)), "coeff": str(c)} for e, c in sorted(s.terms.items())]
        return out


def t_vars(indices: Iterable[int]) -> Tuple[str, ...]:
    return tuple(f"t{i}" for i in indices) + ("z",)


def fjrw_big_i(ws: WeightSystem, order: int, allow_non_gorenstein: bool = False) -> BigIFunction:
    _require_gorenstein(ws, allow_non_gorenstein)
    nar = narrow_set(ws)
    return _big_sum(ws, order, nar, lam=Fraction(0), keep=set(nar))


def twisted_big_i(ws: WeightSystem, order: int, lam) -> BigIFunction:
    """lambda-twisted big I over all d variables t_0^i; every phi component kept.

    Setting lam = 0 and dropping the non-narrow variables and components gives
    fjrw_big_i.
    """
    return _big_sum(ws, order, list(range(ws.degree)), lam=Fraction(lam), keep=set(range(ws.degree)))


def _big_sum(ws, order, idx, lam: Fraction, keep) -> BigIFunction:
    d = ws.degree
    vars_ = t_vars(idx)
    comps: Dict[int, Dict[tuple, Fraction]] = {}
    for k in multi_indices(len(idx), order):
        h = sum(i * ki for i, ki in zip(idx, k))
        ht = h % d
        if ht not in keep:
            continue
        coef = Fraction(1)
        for ki in k:
            coef /= factorial(ki)
        # z * prod z^{-k_i} * prod_j prod_b (lam + (q_j + b) z)
        zpoly = {1 - sum(k): coef}
        for q in ws.charges:
            x = q * h
            b = fpart(x)
            while b < x:
                new = {}
                for p, c in zpoly.items():
                    new[p + 1] = new.get(p + 1, 0) + c * (q + b)
                    if lam:
                        new[p] = new.get(p, 0) + c * lam
                zpoly = new
                b += 1
        bucket = comps.setdefault(ht, {})
        for p, c in zpoly.items():
            if c:
                bucket[tuple(k) + (p,)] = c
    return BigIFunction(vars_, order, {h: MultiSeries(vars_, order, t, "z") for h, t in comps.items()})


def untwisted_j(ws: WeightSystem, order: int, indices: Optional[Iterable[int]] = None) -> BigIFunction:
    """J^un(t, z) = sum_k z^{1-|k|} prod t_i^{k_i}/k_i! phi_{h(k)}."""
    idx = list(range(ws.degree)) if indices is None else list(indices)
    vars_ = t_vars(idx)
    comps: Dict[int, Dict[tuple, Fraction]] = {}
    for k in multi_indices(len(idx), order):
        h = sum(i * ki for i, ki in zip(idx, k)) % ws.degree
        c = Fraction(1)
        for ki in k:
            c /= factorial(ki)
        comps.setdefault(h, {})[tuple(k) + (1 - sum(k),)] = c
    return BigIFunction(vars_, order, {h: MultiSeries(vars_, order, t, "z") for h, t in comps.items()})


def big_from_small(ws: WeightSystem, small: ExponentSum, order: int) -> BigIFunction:
    """Rebuild the big I from a small one through translation, Gamma class and
    annihilation. ``small`` must be in z-formal form; pass it with
    ``annihilate=False`` so that non-narrow slice terms are available."""
    _require_gorenstein(ws, False)
    d = ws.degree
    nar = narrow_set(ws)
    if 1 not in nar:
        raise InvalidInput("the slice variable t_0^1 is not narrow")
    others = [i for i in nar if i != 1]
    idx = sorted(nar)
    vars_ = t_vars(idx)
    pos = {i: p for p, i in enumerate(idx)}
    if small.convention not in ("small", "big"):
        raise ValueError("small I must record its exponent convention")
    shift = 1 if small.convention == "small" else 0    # normalise to slice exponents t^n
    comps: Dict[int, Dict[tuple, Fraction]] = {}
    for (k, e), c in small.terms.items():
        n = int(e) - shift
        if n > order:
            continue
        for kk in multi_indices(len(others), order - n):
            hp = sum(i * ki for i, ki in zip(others, kk))
            ht = (n + hp) % d
            if ht not in nar:
                continue            # annihilation
            fac = Fraction(1)
            zshift = -sum(kk)
            for ki in kk:
                fac /= factorial(ki)
            for q in ws.charges:
                big = gamma_ratio(q + q * (n + hp), q + fpart(q * (n + hp)))
                sm = gamma_ratio(q + q * n, q + fpart(q * n))
                fac *= big / sm
                zshift += floor(q * (n + hp)) - floor(q * n)
            exps = [0] * len(idx)
            exps[pos[1]] = n
            for i, ki in zip(others, kk):
                exps[pos[i]] += ki
            bucket = comps.setdefault(ht, {})
            for zp, v in c.terms.items():
                key = tuple(exps) + (zp + zshift,)
                bucket[key] = bucket.get(key, 0) + v[0] * fac
    return BigIFunction(vars_, order, {h: MultiSeries(vars_, order, t, "z") for h, t in comps.items()})


def grading(ws: WeightSystem, k: int) -> Fraction:
    """Gr(phi_k) = deg/2 = sum <k w_j / d>."""
    return sum((fpart(Fraction(k * w, ws.degree)) for w in ws.weights), Fraction(0))


def restore_z(ws: WeightSystem, small_at_z1: ExponentSum) -> ExponentSum:
    """Recover I(t, z) from I(t, 1) via z^{1 - r/d - Gr} I(t z^{r/d}, 1)."""
    r, d = ws.r, ws.degree
    terms = {}
    for (k, e), c in small_at_z1.terms.items():
        if set(c.terms) - {0}:
            raise ValueError("input must be specialised at z = 1")
        zp = 1 - Fraction(r, d) - grading(ws, k) + Fraction(r, d) * e
        if zp.denominator != 1:
            raise ValueError(f"non-integral z power {zp} at t^{e} phi_{k}")
        terms[(k, e)] = LaurentZ.const(c[0], c.m, int(zp))
    return ExponentSum(small_at_z1.variable, terms, dict(small_at_z1.ptrunc), small_at_z1.log_shift,
                       small_at_z1.order, small_at_z1.convention)
