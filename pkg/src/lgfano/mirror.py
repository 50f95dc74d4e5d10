"""J-function extraction from the big FJRW I-function and invariant readout."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Dict, List, Optional, Sequence, Tuple

from .algebra import MultiSeries
from .geometry import WeightSystem, fjrw_degree
from .ifunctions import BigIFunction


class ExtractionError(RuntimeError):
    pass


InvKey = Tuple[Tuple[int, ...], int, int]   # (sorted insertions h, descendant a, epsilon)


@dataclass
class MirrorResult:
    ws: WeightSystem
    order: int
    j_series: BigIFunction
    c_series: Dict[int, MultiSeries]
    tau_map: Dict[int, MultiSeries]
    invariants_table: Dict[InvKey, Fraction] = field(default_factory=dict)

    def to_json(self):
        return {"order": self.order,
                "J": self.j_series.to_json(),
                "c": {str(i): repr(s) for i, s in sorted(self.c_series.items())},
                "tau": {str(i): repr(s) for i, s in sorted(self.tau_map.items())},
                "invariants": [{"insertions": list(h), "descendant": a, "epsilon": e, "value": str(v)}
                               for (h, a, e), v in sorted(self.invariants_table.items())]}


def _nar_of(big: BigIFunction) -> List[int]:
    return [int(v[1:]) for v in big.vars if v != "z"]


def _combine(big: BigIFunction, dI: Dict[int, BigIFunction], c: Dict[int, MultiSeries]) -> BigIFunction:
    F = big
    for i, ci in c.items():
        if not ci.is_zero():
            F = F + dI[i].times(ci)
    return F


def extract_j(big: BigIFunction, order: int, cancel_order: Optional[Sequence[int]] = None,
              ws: Optional[WeightSystem] = None) -> MirrorResult:
    """Remove positive z powers degree by degree: F = I + sum_i c_i z dI/dt_i.

    ``cancel_order`` permutes the order in which phi components are treated
    inside one degree (the result must not depend on it).
    """
    if big.bound < order:
        raise ExtractionError("big I truncated below the requested order")
    nar = _nar_of(big)
    vars_ = big.vars
    zi = vars_.index("z")
    big = big.truncate(order)
    dI = {i: big.deriv(f"t{i}").shift_z(1) for i in nar}
    c = {i: MultiSeries(vars_, order, {}, "z") for i in nar}
    seq = list(cancel_order) if cancel_order is not None else list(nar)
    for n in range(order + 1):
        F = _combine(big, dI, c)
        for i in seq:
            comp = F.comp(i).homogeneous(n)
            fix = {}
            for e, v in comp.terms.items():
                p = e[zi]
                if p < 1:
                    continue
                if n == 0 and i == 0 and p == 1 and v == 1:
                    continue    # the dilaton term z phi_0
                if p > 1 and n == 0:
                    raise ExtractionError("offender at degree 0 cannot be cancelled")
                e2 = list(e)
                e2[zi] -= 1
                fix[tuple(e2)] = -v
            if fix:
                c[i] = c[i] + MultiSeries(vars_, order, fix, "z")
    J = _combine(big, dI, c).truncate(order)
    # sanity: no z^{>=1} except z phi_0 at degree 0
    for k, s in J.components.items():
        for e, v in s.terms.items():
            if e[zi] >= 1 and not (k == 0 and e[zi] == 1 and s.degree(e) == 0):
                raise ExtractionError(f"uncancelled offender in phi_{k}: {e}")
    tau = {}
    for i in nar:
        s = J.comp(i)
        tau[i] = MultiSeries(vars_, order, {e: v for e, v in s.terms.items() if e[zi] == 0}, "z")
    return MirrorResult(ws, order, J, c, tau)


def invert_mirror_map(tau: Dict[int, MultiSeries], order: int) -> Dict[str, MultiSeries]:
    """t as a series in tau (same variable names), by fixed-point iteration."""
    names = [f"t{i}" for i in tau]
    any_s = next(iter(tau.values()))
    ident = {v: MultiSeries.monomial(any_s.vars, order, {v: 1}, 1, "z") for v in names}
    higher = {f"t{i}": s - ident[f"t{i}"] for i, s in tau.items()}
    for v, h in higher.items():
        for e in h.terms:
            if h.degree(e) < 2:
                raise ExtractionError("mirror map is not identity to first order")
    t = dict(ident)
    for _ in range(order):
        t = {v: ident[v] - higher[v].substitute(t) for v in names}
    return t


def j_in_tau(res: MirrorResult) -> BigIFunction:
    tinv = invert_mirror_map(res.tau_map, res.order)
    J = res.j_series
    return BigIFunction(J.vars, J.bound, {k: s.substitute(tinv) for k, s in J.components.items()})


def read_invariants(res: MirrorResult, ws: WeightSystem) -> Dict[InvKey, Fraction]:
    """Coefficient of prod tau^k z^{-a-1} phi^eps times prod k! is
    <phi_h..., tau_a(phi_eps)>, with phi^eps = phi_{d-2-eps}."""
    d = ws.degree
    Jt = j_in_tau(res)
    nar = _nar_of(Jt)
    zi = Jt.vars.index("z")
    table: Dict[InvKey, Fraction] = {}
    for m, s in Jt.components.items():
        eps = (d - 2 - m) % d
        for e, v in s.terms.items():
            p = e[zi]
            if p >= 0:
                continue
            a = -p - 1
            ins, mult = [], 1
            for i, k in zip(nar, e[:zi]):
                ins += [i] * k
                mult *= factorial(k)
            table[(tuple(ins), a, eps)] = v * mult
    res.invariants_table = table
    return table


def invariant(table: Dict[InvKey, Fraction], insertions, a: int, eps: int) -> Fraction:
    return table.get((tuple(sorted(insertions)), a, eps), Fraction(0))


def dimension_defect(ws: WeightSystem, insertions, a: int, eps: int) -> Fraction:
    """sum(a_i + deg/2) - (n - 3 + N - 2 sum q) over all n insertion points."""
    n = len(insertions) + 1
    lhs = sum((fjrw_degree(ws, h) / 2 for h in insertions), Fraction(0)) + a + fjrw_degree(ws, eps) / 2
    rhs = n - 3 + ws.N - 2 * sum(ws.charges)
    return lhs - rhs


# ---------------------------------------------------------------------------
# psi-class integrals on M_{0,n}

def untwisted_oracle(ws: WeightSystem, insertions: Sequence[int], descendants: Sequence[int]) -> Fraction:
    """Untwisted genus-zero invariant <tau_{a_1}(phi_{h_1}) ... tau_{a_n}(phi_{h_n})>.

    Closed form (n-3)!/prod a_i! on M_{0,n}; nonzero only when
    sum h_i + 2 = 0 mod d.
    """
    n = len(insertions)
    if n != len(descendants) or n < 3:
        return Fraction(0)
    if (sum(insertions) + 2) % ws.degree != 0:
        return Fraction(0)
    return psi_multinomial(tuple(descendants))


def psi_multinomial(a: Tuple[int, ...]) -> Fraction:
    n = len(a)
    if n < 3 or sum(a) != n - 3 or min(a) < 0:
        return Fraction(0)
    v = Fraction(factorial(n - 3))
    for x in a:
        v /= factorial(x)
    return v


def psi_literal_display(a: Tuple[int, ...]) -> Fraction:
    """The alternative reading with numerator sum(a) instead of (sum a)!."""
    n = len(a)
    if n < 3 or sum(a) != n - 3:
        return Fraction(0)
    v = Fraction(sum(a)) if sum(a) else Fraction(1)
    for x in a:
        v /= factorial(x)
    return v


@lru_cache(maxsize=None)
def psi_recursive(a: Tuple[int, ...]) -> Fraction:
    """int_{M_{0,n}} prod psi_i^{a_i} by the string and dilaton equations."""
    a = tuple(sorted(a))
    n = len(a)
    if n < 3 or sum(a) != n - 3 or a[0] < 0:
        return Fraction(0)
    if n == 3:
        return Fraction(1)
    if a[0] == 0:
        rest = list(a[1:])
        total = Fraction(0)
        for i, x in enumerate(rest):
            if x > 0:
                b = rest.copy()
                b[i] -= 1
                total += psi_recursive(tuple(b))
        return total
    if a[0] == 1:
        return (n - 1 - 2) * psi_recursive(a[1:])
    raise AssertionError("unreachable: genus zero always has a zero exponent")


def untwisted_j_from_oracle(ws: WeightSystem, order: int) -> Dict[Tuple[int, Tuple[int, ...], int], Fraction]:
    """Coefficients of J^un(t,z) predicted from invariants:
    key (phi index, multi-index k over 0..d-1, z power) -> value."""
    from .algebra import multi_indices
    d = ws.degree
    out = {}
    for k in multi_indices(d, order):
        n = sum(k)
        hs = [i for i, ki in enumerate(k) for _ in range(ki)]
        mult = Fraction(1)
        for ki in k:
            mult /= factorial(ki)
        if n == 0:
            out[(0, k, 1)] = Fraction(1)
            continue
        if n == 1:
            out[(hs[0], k, 0)] = Fraction(1)
            continue
        for m in range(d):
            eps = (d - 2 - m) % d
            for a in range(0, n):
                if (sum(hs) + eps + 2) % d:
                    continue
                val = psi_recursive(tuple([0] * n + [a]))
                if val:
                    out[(m, k, -a - 1)] = val * mult
    return out
