"""Picard-Fuchs operators, exact application to exponent sums, massive vacua
and formal monodromy at the LG point."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath

from .algebra import LaurentZ, NilpotentPoly, frac
from .geometry import InvalidInput, WeightSystem, narrow_set
from .ifunctions import ExponentSum, default_ptrunc, gw_n_values

from math import comb

# ---------------------------------------------------------------------------
# polynomials in one variable, coefficient lists over Fraction

Poly = List[Fraction]


def p_trim(a: Poly) -> Poly:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def p_add(a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return p_trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def p_mul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return p_trim(out)


def p_scale(a: Poly, c) -> Poly:
    return p_trim([x * c for x in a])


def p_eval(a: Poly, x):
    out = 0
    for c in reversed(a):
        out = out * x + c
    return out


def p_compose_linear(a: Poly, c1, c0) -> Poly:
    """a(c1*x + c0)."""
    out: Poly = []
    lin = [frac(c0), frac(c1)]
    pw: Poly = [Fraction(1)]
    for c in a:
        out = p_add(out, p_scale(pw, c))
        pw = p_mul(pw, lin)
    return out


def p_str(a: Poly, var: str = "D") -> str:
    parts = []
    for i in range(len(a) - 1, -1, -1):
        c = a[i]
        if c == 0:
            continue
        parts.append(f"{c}" if i == 0 else f"{c}*{var}" if i == 1 else f"{c}*{var}^{i}")
    return " + ".join(parts) if parts else "0"


# ---------------------------------------------------------------------------

class DiffOperator:
    """Finite sum of monomials x^a z^k D^i (x^a written on the left), D = x d/dx."""

    def __init__(self, var: str, terms: Dict[Tuple[int, int, int], Fraction], note: str = ""):
        self.var = var
        self.terms = {k: frac(v) for k, v in terms.items() if v != 0}
        self.note = note

    @classmethod
    def D(cls, var="q"):
        return cls(var, {(0, 0, 1): Fraction(1)})

    @classmethod
    def scalar(cls, c, var="q", zpow: int = 0):
        return cls(var, {(0, zpow, 0): frac(c)})

    @classmethod
    def power(cls, a: int, var="q"):
        return cls(var, {(a, 0, 0): Fraction(1)})

    @classmethod
    def linear(cls, c1, c0, var="q", zpow: int = 0):
        """(c1 D + c0) z^zpow."""
        return cls(var, {(0, zpow, 1): frac(c1), (0, zpow, 0): frac(c0)})

    def _chk(self, o):
        if o.var != self.var:
            raise ValueError(f"variable mismatch {self.var} vs {o.var}")

    def __add__(self, o: "DiffOperator"):
        self._chk(o)
        t = dict(self.terms)
        for k, v in o.terms.items():
            t[k] = t.get(k, 0) + v
        return DiffOperator(self.var, t)

    def __neg__(self):
        return DiffOperator(self.var, {k: -v for k, v in self.terms.items()})

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, o):
        """Composition self o other; scalars multiply."""
        if not isinstance(o, DiffOperator):
            return DiffOperator(self.var, {k: v * frac(o) for k, v in self.terms.items()})
        self._chk(o)
        t: Dict[Tuple[int, int, int], Fraction] = {}
        for (a, z1, i), c1 in self.terms.items():
            for (b, z2, j), c2 in o.terms.items():
                # D^i x^b = x^b (D + b)^i
                for l in range(i + 1):
                    coef = c1 * c2 * comb(i, l) * Fraction(b) ** (i - l)
                    if coef:
                        key = (a + b, z1 + z2, l + j)
                        t[key] = t.get(key, 0) + coef
        return DiffOperator(self.var, t)

    __rmul__ = lambda self, o: self * o  # scalars only

    @property
    def order(self) -> int:
        return max((i for _, _, i in self.terms), default=0)

    def powers(self) -> List[int]:
        return sorted({a for a, _, _ in self.terms})

    def poly(self, a: int, zpow: int = 0) -> Poly:
        """Coefficient polynomial in D of x^a z^zpow."""
        n = self.order + 1
        return p_trim([self.terms.get((a, zpow, i), Fraction(0)) for i in range(n)])

    def poly_z1(self, a: int) -> Poly:
        out: Poly = []
        for (b, z, i), c in self.terms.items():
            if b == a:
                out = p_add(out, [0] * i + [c])
        return out

    def change_variable(self, r: int, new_var: str) -> "DiffOperator":
        """Substitute x = y^r, so D_x = D_y / r and x^a = y^{r a}."""
        return DiffOperator(new_var, {(a * r, z, i): c / Fraction(r) ** i for (a, z, i), c in self.terms.items()},
                            self.note)

    def __eq__(self, o):
        return isinstance(o, DiffOperator) and self.var == o.var and self.terms == o.terms

    def __str__(self):
        parts = []
        zs = sorted({z for _, z, _ in self.terms})
        for a in self.powers():
            for z in zs:
                p = self.poly(a, z)
                if not p:
                    continue
                pre = "" if a == 0 else f"{self.var}^{a} * "
                zz = "" if z == 0 else f"z^{z} * "
                parts.append(f"{pre}{zz}({p_str(p)})")
        return " + ".join(parts)

    def to_json(self):
        return {"variable": self.var, "text": str(self), "order": self.order, "note": self.note}


def _prod(factors: Sequence[DiffOperator], var: str) -> DiffOperator:
    out = DiffOperator.scalar(1, var)
    for f in factors:
        out = out * f
    return out


def build_pf(ws: WeightSystem, form: str = "q", z: bool = False) -> DiffOperator:
    """Picard-Fuchs operators.

    forms: "q" (full), "q-reduced", "t-general-type", "u-massive",
    "u-massive-full", "tau-regularized-fano", "tau-regularized-gt".
    ``z=True`` keeps z in the q-forms (factors w z D - c z).
    """
    w, d, N = ws.weights, ws.degree, ws.N
    r, kap = ws.r, ws.kappa
    if d == 1 or all(x == d for x in w):
        raise InvalidInput("degenerate weight system")
    zp = 1 if z else 0
    if form == "q":
        A = _prod([DiffOperator.linear(wj, -c, "q", zp) for wj in w for c in range(wj)], "q")
        B = _prod([DiffOperator.linear(d, c, "q", zp) for c in range(1, d + 1)], "q")
        return DiffOperator("q", (A - DiffOperator.power(1, "q") * B).terms, "full operator")
    if form == "q-reduced":
        # full = D o reduced: one Euler factor D removed on the left
        lead = 1
        for wj in w:
            lead *= wj
        A = _prod([DiffOperator.D("q")] * (N - 1)
                  + [DiffOperator.linear(wj, -c, "q") for wj in w for c in range(1, wj)], "q") * lead
        B = _prod([DiffOperator.linear(d, c, "q") for c in range(1, d)], "q") * d
        return DiffOperator("q", (A - DiffOperator.power(1, "q") * B).terms, "reduced: full = D o reduced")
    if form in ("u-massive", "u-massive-full"):
        if kap >= 0:
            raise InvalidInput("massive form needs a Fano input (kappa < 0)")
        base = build_pf(ws, "q-reduced" if form == "u-massive" else "q")
        return base.change_variable(r, "u")
    if form == "t-general-type":
        A = _prod([DiffOperator.linear(-Fraction(wj, d), -c, "t") for wj in w for c in range(wj)], "t")
        B = _prod([DiffOperator.linear(-1, c, "t") for c in range(1, d + 1)], "t")
        return DiffOperator("t", (DiffOperator.power(d, "t") * A - B).terms, "LG point, general type")
    if form == "tau-regularized-fano":
        if kap >= 0:
            raise InvalidInput("regularized Fano form needs kappa < 0")
        A = _prod([DiffOperator.linear(-Fraction(wj, r), -c, "tau") for wj in w for c in range(wj)], "tau")
        B = _prod([DiffOperator.linear(1, -c, "tau") for c in range(r)]
                  + [DiffOperator.linear(-Fraction(d, r), c, "tau") for c in range(1, d + 1)], "tau")
        return DiffOperator("tau", (A - DiffOperator.power(-r, "tau") * B).terms, "regularized, Fano")
    if form == "tau-regularized-gt":
        if kap <= 0:
            raise InvalidInput("regularized general-type form needs kappa > 0")
        A = _prod([DiffOperator.linear(1, -c, "tau") for c in range(kap)]
                  + [DiffOperator.linear(Fraction(wj, kap), -c, "tau") for wj in w for c in range(wj)], "tau")
        B = _prod([DiffOperator.linear(Fraction(d, kap), c, "tau") for c in range(1, d + 1)], "tau")
        return DiffOperator("tau", (A - DiffOperator.power(kap, "tau") * B).terms, "regularized, general type")
    raise ValueError(f"unknown form {form}")


def apply(op: DiffOperator, f: ExponentSum, exponent_scale: Fraction = Fraction(1)) -> ExponentSum:
    """Apply op exactly, using D x^{e+P} = (e+P) x^{e+P}.

    ``exponent_scale`` handles a series stored in a power of the operator's
    variable (unused by default).
    """
    out: Dict[Tuple, LaurentZ] = {}
    for (sec, e), c in f.terms.items():
        m = c.m
        if f.log_shift == "P/z":
            x = LaurentZ.const(e, m) + LaurentZ({-1: NilpotentPoly.P(m)}, m)
        elif f.log_shift == "P":
            x = LaurentZ.const(NilpotentPoly.P(m) + e, m)
        else:
            x = LaurentZ.const(e, m)
        pw = [LaurentZ.const(1, m)]
        for _ in range(op.order):
            pw.append(pw[-1] * x)
        for (a, zp, i), k in op.terms.items():
            term = pw[i] * c * LaurentZ.const(k, m, zp)
            key = (sec, e + a)
            out[key] = out[key] + term if key in out else term
    return ExponentSum(f.variable, out, dict(f.ptrunc), f.log_shift, f.order, f.convention)


@dataclass
class AnnihilationReport:
    interior_zero: bool
    frontier: List[str]
    nonzero_interior: List[str]
    checked_terms: int

    def to_json(self):
        return self.__dict__


def annihilation_report(op: DiffOperator, f: ExponentSum, frontier_exponents) -> AnnihilationReport:
    """Nonzero coefficients of op(f) split into interior and the truncation frontier."""
    res = apply(op, f)
    frontier_exponents = set(frontier_exponents)
    bad, front = [], []
    for (s, e), c in res.items():
        if c.is_zero():
            continue
        (front if e in frontier_exponents else bad).append(f"{s}:{e}")
    return AnnihilationReport(not bad, front, bad, len(res.terms))


def gw_frontier(ws: WeightSystem, order, op: DiffOperator) -> List[Fraction]:
    """Exponents that receive contributions from terms beyond the truncation."""
    shifts = [a for a in op.powers() if a > 0]
    ns = gw_n_values(ws, order + max(shifts, default=0) + 1)
    order = Fraction(order)
    return [n for n in ns if n > order - max(shifts, default=0) and n <= order + max(shifts, default=0)]


def lg_frontier(ws: WeightSystem, order: int, op: DiffOperator) -> List[Fraction]:
    """Exponents -(l + (k+1)/d) of the q-form LG series that see the cut at l = order."""
    shift = max((a for a in op.powers() if a > 0), default=0)
    d = ws.degree
    return [Fraction(-(d * l + k + 1), d) for k in range(d)
            for l in range(max(0, order - int(shift) + 1), order + 1)]


# ---------------------------------------------------------------------------
# massive vacua

def _root_constant(ws: WeightSystem) -> Fraction:
    """C' = d^d prod w^{-w}, so that (alpha/r)^r = C'."""
    c = Fraction(ws.degree) ** ws.degree
    for wj in ws.weights:
        c /= Fraction(wj) ** wj
    return c


def _exact_root(x: Fraction, r: int) -> Optional[Fraction]:
    def iroot(n):
        lo, hi = 0, 1
        while hi ** r <= n:
            hi *= 2
        while lo < hi - 1:
            mid = (lo + hi) // 2
            if mid ** r <= n:
                lo = mid
            else:
                hi = mid
        return lo if lo ** r == n else None
    a, b = iroot(x.numerator), iroot(x.denominator)
    return None if a is None or b is None else Fraction(a, b)


@dataclass
class Recursion:
    """sum_j c_j(K) a_{K-j} = 0 with c_j polynomials in K, normalised so the
    a_K coefficient is monic in K; ``scaled`` stores the same recursion for
    b_n = alpha^n a_n, whose coefficients are always rational."""
    scaled: List[Poly]
    alpha_exact: Optional[Fraction]

    def in_a(self) -> List[Poly]:
        if self.alpha_exact is None:
            raise ValueError("alpha is irrational; use the scaled recursion")
        # b_{K-j} = alpha^{K-j} a_{K-j}; divide by alpha^K
        return [p_scale(c, self.alpha_exact ** (-j)) for j, c in enumerate(self.scaled)]


@dataclass
class MassiveSolution:
    root_index: int
    alpha_exact: Optional[Fraction]
    alpha: mpmath.mpc
    lambda_exp: Fraction
    scaled_coeffs: List[Fraction]      # b_n = alpha^n a_n, exact
    recursion: Recursion
    operator: str

    @property
    def coefficients(self):
        """a_n; exact Fractions when alpha is rational."""
        if self.alpha_exact is not None:
            return [b / self.alpha_exact ** n for n, b in enumerate(self.scaled_coeffs)]
        return [mpmath.mpf(b.numerator) / b.denominator / self.alpha ** n for n, b in enumerate(self.scaled_coeffs)]

    def to_json(self):
        return {"root_index": self.root_index,
                "alpha": str(self.alpha_exact) if self.alpha_exact is not None else mpmath.nstr(self.alpha, 30),
                "lambda": str(self.lambda_exp), "operator": self.operator,
                "a": [str(a) if isinstance(a, Fraction) else mpmath.nstr(a, 25) for a in self.coefficients],
                "recursion_scaled": [[str(c) for c in p] for p in self.recursion.scaled]}


def conjugated_coefficients(op_u: DiffOperator, C: Fraction, r: int) -> Dict[int, Poly]:
    """R_m(s) such that e^{-alpha u} L e^{alpha u} u^s = sum_m alpha^m R_m(s) u^{s+m},
    using alpha^r = r^r C to remove the alpha dependence."""
    alpha_r = Fraction(r) ** r * C
    R: Dict[int, Poly] = {}
    for a in op_u.powers():
        if a % r:
            raise ValueError("u-form must only involve powers u^{r k}")
        p = op_u.poly_z1(a)
        # state: j -> polynomial in s for the alpha^j u^{s+j} component
        acc: Dict[int, Poly] = {}
        cur: Dict[int, Poly] = {0: [Fraction(1)]}
        for i, ci in enumerate(p):
            if i > 0:
                nxt: Dict[int, Poly] = {}
                for j, poly in cur.items():
                    nxt[j] = p_add(nxt.get(j, []), p_mul(poly, [Fraction(j), Fraction(1)]))
                    nxt[j + 1] = p_add(nxt.get(j + 1, []), poly)
                cur = nxt
            if ci:
                for j, poly in cur.items():
                    acc[j] = p_add(acc.get(j, []), p_scale(poly, ci))
        # alpha^j u^{s+j+a} = alpha^{m} alpha^{-a} u^{s+m}, m = j + a
        for j, poly in acc.items():
            m = j + a
            R[m] = p_add(R.get(m, []), p_scale(poly, alpha_r ** (-(a // r))))
    return {m: p for m, p in R.items()}


def massive_solutions(ws: WeightSystem, terms: int = 20, operator: str = "reduced",
                      prec: int = 200) -> List[MassiveSolution]:
    if ws.kappa >= 0:
        raise InvalidInput("massive vacua need a Fano input (kappa < 0)")
    r = ws.r
    op = build_pf(ws, "u-massive" if operator == "reduced" else "u-massive-full")
    C = _root_constant(ws)
    R = conjugated_coefficients(op, C, r)
    M = max(m for m, p in R.items() if p)
    # the top power cancels by the root equation, so R_M must be linear in s
    lin = R[M]
    if len(lin) != 2:
        raise ArithmeticError(f"leading recursion coefficient is not linear in s: {lin}")
    lam = lin[0] / lin[1]          # R_M(-lam) = 0
    # recursion for b_K: sum_{n} R_{M-K+n}(-lam-n) b_n = 0
    scaled: List[Poly] = []
    for j in range(M + 1):
        # coefficient of b_{K-j}: R_{M-j}(-lam-K+j) as a polynomial in K
        scaled.append(p_compose_linear(R.get(M - j, []), -1, -lam + j))
    norm = scaled[0][-1] if scaled[0] else Fraction(1)
    scaled = [p_scale(c, 1 / norm) for c in scaled]
    b = [Fraction(1)]
    for K in range(1, terms + 1):
        den = p_eval(scaled[0], K)
        if den == 0:
            raise ArithmeticError("resonant massive recursion")
        s = Fraction(0)
        for j in range(1, len(scaled)):
            if K - j >= 0:
                s += p_eval(scaled[j], K) * b[K - j]
        b.append(-s / den)
    a_exact = _exact_root(C, r)
    alpha0_exact = None if a_exact is None else r * a_exact
    out = []
    with mpmath.workprec(prec):
        base = r * mpmath.root(mpmath.mpf(C.numerator) / C.denominator, r)
        for jroot in range(r):
            alpha = base * mpmath.expjpi(mpmath.mpf(2 * jroot) / r)
            exact = alpha0_exact if jroot == 0 else None
            if jroot > 0 and r == 2 and alpha0_exact is not None:
                exact = -alpha0_exact
            out.append(MassiveSolution(jroot, exact, mpmath.mpc(alpha), lam, b,
                                       Recursion(scaled, exact), operator))
    return out


def massive_residual(ws: WeightSystem, sol: MassiveSolution, operator: str = "reduced") -> List:
    """Coefficients of e^{-alpha u} L (e^{alpha u} sum a_n u^{-lam-n}) in the
    scaled basis; entries for K <= len(a)-1 must vanish."""
    op = build_pf(ws, "u-massive" if operator == "reduced" else "u-massive-full")
    R = conjugated_coefficients(op, _root_constant(ws), ws.r)
    M = max(m for m, p in R.items() if p)
    b = sol.scaled_coeffs
    res = []
    # coefficient of alpha^{M-K} u^{-lam+M-K}
    for K in range(len(b) + M):
        s = Fraction(0)
        for n, bn in enumerate(b):
            m = M - K + n
            if m in R and 0 <= m <= M:
                s += p_eval(R[m], -sol.lambda_exp - n) * bn
        res.append(s)
    return res


def reference_delpezzo_recursion() -> List[Poly]:
    """3^6 K a_K - (54(K-2)^2+162(K-2)+129) a_{K-1} + (K-1)^3 a_{K-2} = 0, K = n + 2."""
    c0 = [Fraction(0), Fraction(729)]
    c1 = p_scale(p_add(p_add(p_scale(p_mul([-2, 1], [-2, 1]), 54), p_scale([-2, 1], 162)), [129]), -1)
    c2 = p_mul(p_mul([-1, 1], [-1, 1]), [-1, 1])
    return [p_trim([Fraction(x) for x in c]) for c in (c0, c1, c2)]


def recursion_ratio(a: Sequence[Poly], b: Sequence[Poly]) -> Optional[Fraction]:
    """The constant c with a = c*b coefficientwise (None when not proportional)."""
    if len(a) != len(b):
        return None
    c = None
    for pa, pb in zip(a, b):
        pa, pb = p_trim(list(pa)), p_trim(list(pb))
        if len(pa) != len(pb):
            return None
        for x, y in zip(pa, pb):
            if y == 0 or x == 0:
                if x != y:
                    return None
                continue
            if c is None:
                c = Fraction(x) / Fraction(y)
            elif Fraction(x) / Fraction(y) != c:
                return None
    return c


# ---------------------------------------------------------------------------

@dataclass
class Monodromy:
    nar_turns: List[Tuple[int, Fraction]]     # (k, turn) with entry exp(2 pi i turn)
    massive_turn: Fraction                    # scalar per cyclic step
    r: int
    matrix: "mpmath.matrix"

    def to_json(self):
        return {"nar": [[k, str(t)] for k, t in self.nar_turns], "massive_turn": str(self.massive_turn),
                "r": self.r, "size": self.matrix.rows}


def formal_monodromy(ws: WeightSystem, prec: int = 200) -> Monodromy:
    """Formal monodromy under q -> e^{2 pi i} q (u -> e^{2 pi i / r} u)."""
    if ws.kappa >= 0:
        raise InvalidInput("formal monodromy at the LG point needs kappa < 0")
    d, r = ws.degree, ws.r
    nar = narrow_set(ws)
    turns = [(k, -Fraction(k + 1, d) % 1) for k in nar]
    lam = massive_solutions(ws, terms=0, prec=prec)[0].lambda_exp
    mturn = (-lam / r) % 1
    n = len(nar) + r
    with mpmath.workprec(prec):
        Mx = mpmath.zeros(n, n)
        for i, (_, t) in enumerate(turns):
            Mx[i, i] = mpmath.expjpi(2 * mpmath.mpf(t.numerator) / t.denominator)
        sc = mpmath.expjpi(2 * mpmath.mpf(mturn.numerator) / mturn.denominator)
        o = len(nar)
        for j in range(r):
            # f_j -> sc * f_{j+1}
            Mx[o + (j + 1) % r, o + j] = sc
    return Monodromy(turns, mturn, r, Mx)


# ---------------------------------------------------------------------------

@dataclass
class SolutionAudit:
    n_nar: int
    r: int
    reduced_order: int
    gw_rank: int
    ok: bool

    def to_json(self):
        return self.__dict__


def solution_audit(ws: WeightSystem) -> SolutionAudit:
    """#Nar + r against the reduced operator order and the number of
    (sector, P-power) components of the small GW I-function."""
    if ws.kappa >= 0:
        raise InvalidInput("audit is for Fano inputs")
    nar = narrow_set(ws)
    red = build_pf(ws, "q-reduced").order
    sectors = {}
    for n in gw_n_values(ws, 1):
        f = (-n) % 1
        m = default_ptrunc(ws, f)
        if m > 0:
            sectors[f] = m
    rank = sum(sectors.values())
    return SolutionAudit(len(nar), ws.r, red, rank, len(nar) + ws.r == rank)
