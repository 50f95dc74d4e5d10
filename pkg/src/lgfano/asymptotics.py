"""Borel regularization, ODE continuation along a ray, Laplace transform and the
rank-collapsing linear maps between the two I-functions.

All numerics use mpmath at a caller-chosen binary precision.  Error estimates
are returned next to every value; nothing here is interval-certified.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath

from .algebra import NilpotentPoly, fpart
from .geometry import InvalidInput, WeightSystem, narrow_set
from .ifunctions import default_ptrunc, gw_coefficient, gw_n_values, lg_q_form, lg_t_form
from .picardfuchs import DiffOperator, build_pf, massive_solutions


class PrecisionFailure(RuntimeError):
    """Raised when a requested accuracy cannot be reached at the given precision."""


# ---------------------------------------------------------------------------
# truncated P-polynomials with mpmath coefficients (P^m = 0)

def _nmul(a, b, m):
    out = [mpmath.mpf(0)] * m
    for i, x in enumerate(a):
        if x:
            for j in range(m - i):
                out[i + j] += x * b[j]
    return out


def _nexp(a, m):
    """exp(a) for a with vanishing constant term... plus the constant handled by mpmath.exp."""
    c0 = a[0]
    nil = [mpmath.mpf(0)] + list(a[1:])
    out = [mpmath.mpf(0)] * m
    out[0] = mpmath.mpf(1)
    term = list(out)
    for k in range(1, m):
        term = [x / k for x in _nmul(term, nil, m)]
        out = [x + y for x, y in zip(out, term)]
    e = mpmath.exp(c0)
    return [e * x for x in out]


def _falling(base, shift, j, m):
    """(s)(s-1)...(s-j+1) with s = base + shift*P."""
    out = [mpmath.mpf(1)] + [mpmath.mpf(0)] * (m - 1)
    for i in range(j):
        lin = [mpmath.mpf(base) - i] + ([mpmath.mpf(shift)] if m > 1 else []) + [mpmath.mpf(0)] * max(0, m - 2)
        out = _nmul(out, lin[:m], m)
    return out


def _inv_gamma_p(x: Fraction, scale: Fraction, m: int):
    """1/Gamma(x + scale*P) as a truncated P-polynomial."""
    xm = mpmath.mpf(x.numerator) / x.denominator
    sc = mpmath.mpf(scale.numerator) / scale.denominator
    log_part = [-mpmath.loggamma(xm)] + [mpmath.mpf(0)] * (m - 1)
    for k in range(1, m):
        log_part[k] = -mpmath.psi(k - 1, xm) * sc ** k / math.factorial(k)
    return _nexp(log_part, m)


def _to_mp(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


# ---------------------------------------------------------------------------
# regularized series

@dataclass
class Branch:
    label: str
    m: int                       # P truncation (1 on the LG side)
    pshift: Fraction             # tau exponent is base + pshift*P
    terms: List[Tuple[Fraction, list]]   # (base exponent, P-coefficients)
    exact: List[Tuple[Fraction, object]] = field(default_factory=list)  # unregularized exact coefficients

    def value(self, tau, j: int = 0):
        """j-th tau-derivative of the branch, as a P-vector."""
        tau = mpmath.mpmathify(tau)
        m = self.m
        tot = [mpmath.mpc(0)] * m
        for base, c in self.terms:
            ff = _falling(_to_mp(base), _to_mp(self.pshift), j, m) if j else [mpmath.mpf(1)] + [0] * (m - 1)
            p = mpmath.power(tau, _to_mp(base) - j) if (base - j) != 0 else mpmath.mpf(1)
            v = _nmul(c, ff, m)
            for i in range(m):
                tot[i] += v[i] * p
        if self.pshift and m > 1:
            lg = mpmath.log(tau) * _to_mp(self.pshift)
            tot = _nmul(tot, _nexp([mpmath.mpf(0), lg] + [mpmath.mpf(0)] * (m - 2), m), m)
        return tot


@dataclass
class RegularizedSeries:
    ws: WeightSystem
    kind: str                    # "fano" | "gt"
    variable_power: int          # r (Fano) or kappa (general type)
    radius: object               # mpf
    radius_power_bound: Fraction # rho^power, exact
    branches: List[Branch]
    prec: int

    def solution_labels(self) -> List[str]:
        return [f"{b.label}:P{p}" for b in self.branches for p in range(b.m)]

    def values(self, tau, j: int = 0) -> list:
        out = []
        for b in self.branches:
            out += b.value(tau, j)
        return out

    def ratio_estimate(self, branch: int = 0, tail: int = 20):
        """Radius estimate from |c_l/c_{l+1}|^{1/power} over the last ``tail`` terms."""
        t = self.branches[branch].terms
        ests = []
        for (e0, c0), (e1, c1) in zip(t[-tail - 1:-1], t[-tail:]):
            if c0[0] and c1[0]:
                step = _to_mp(e1 - e0)
                ests.append(abs(c0[0] / c1[0]) ** (1 / step))
        if not ests:
            raise PrecisionFailure("no usable coefficients for the ratio test")
        return ests[-1]

    def to_json(self):
        return {"kind": self.kind, "radius": mpmath.nstr(self.radius, 20),
                "radius_power_bound": str(self.radius_power_bound), "power": self.variable_power,
                "branches": [{"label": b.label, "m": b.m, "terms": len(b.terms)} for b in self.branches]}


def fano_radius_bound(ws: WeightSystem) -> Fraction:
    """rho^r = r^r d^d prod w^{-w}."""
    r, d = ws.r, ws.degree
    v = Fraction(r) ** r * Fraction(d) ** d
    for w in ws.weights:
        v /= Fraction(w) ** w
    return v


def gt_radius_bound(ws: WeightSystem) -> Fraction:
    """rho^kappa = kappa^kappa d^{-d} prod w^w."""
    k, d = ws.kappa, ws.degree
    v = Fraction(k) ** k / Fraction(d) ** d
    for w in ws.weights:
        v *= Fraction(w) ** w
    return v


def _root(x: Fraction, p: int):
    return mpmath.root(_to_mp(x), p)


def regularize_fano(ws: WeightSystem, order: int = 120, prec: int = 200) -> RegularizedSeries:
    if ws.kappa >= 0:
        raise InvalidInput("Fano regularization needs kappa < 0")
    r, d = ws.r, ws.degree
    with mpmath.workprec(prec):
        s = lg_q_form(ws, order)
        branches = []
        for k in narrow_set(ws):
            terms, exact = [], []
            for l in range(order + 1):
                e = Fraction(-(d * l + k + 1), d)
                c = s.coeff(k, e)[0][0]
                expo = -r * e
                terms.append((expo, [_to_mp(c) / mpmath.gamma(1 + _to_mp(expo))]))
                exact.append((expo, c))
            branches.append(Branch(f"phi{k}", 1, Fraction(0), terms, exact))
        bound = fano_radius_bound(ws)
        return RegularizedSeries(ws, "fano", r, _root(bound, r), bound, branches, prec)


def gw_sector_coefficients(ws: WeightSystem, f: Fraction, count: int, m: Optional[int] = None):
    """Exact z=1 coefficients C_n(P) of q^{n+P} for the sector f = <-n>, n = n0, n0+1, ...

    Built by the telescoping ratio
    prod_{i=1}^{d}(dP + nd + i) / prod_j prod_{i=1}^{w_j}(w_j P + n w_j + i).
    """
    d = ws.degree
    m = default_ptrunc(ws, f) if m is None else m
    if m <= 0:
        return []
    n0 = fpart(-f) if f else Fraction(0)
    c = gw_coefficient(ws, n0, m, formal_z=False)[0]
    out = [(n0, c)]
    P = NilpotentPoly.P(m)
    n = n0
    for _ in range(count - 1):
        num = NilpotentPoly.const(1, m)
        for i in range(1, d + 1):
            num = num * (P * d + (n * d + i))
        den = NilpotentPoly.const(1, m)
        for w in ws.weights:
            for i in range(1, w + 1):
                den = den * (P * w + (n * w + i))
        c = c * num / den
        n += 1
        out.append((n, c))
    return out


def gw_sectors(ws: WeightSystem) -> List[Fraction]:
    fs = sorted({fpart(-n) for n in gw_n_values(ws, 1) if n < 1})
    return [f for f in fs if default_ptrunc(ws, f) > 0]


def regularize_gt(ws: WeightSystem, order: int = 60, prec: int = 200) -> RegularizedSeries:
    if ws.kappa <= 0:
        raise InvalidInput("general-type regularization needs kappa > 0")
    kap = ws.kappa
    with mpmath.workprec(prec):
        branches = []
        for f in gw_sectors(ws):
            m = default_ptrunc(ws, f)
            terms, exact = [], []
            for n, c in gw_sector_coefficients(ws, f, order + 1):
                base = kap * n
                ig = _inv_gamma_p(1 + base, Fraction(kap), m)
                cm = [_to_mp(c[i]) for i in range(m)]
                terms.append((base, _nmul(cm, ig, m)))
                exact.append((n, c))
            branches.append(Branch(f"f={f}", m, Fraction(kap), terms, exact))
        bound = gt_radius_bound(ws)
        return RegularizedSeries(ws, "gt", kap, _root(bound, kap), bound, branches, prec)


# ---------------------------------------------------------------------------
# linear ODE with polynomial coefficients in tau

def _stirling2(n):
    S = [[0] * (n + 1) for _ in range(n + 1)]
    S[0][0] = 1
    for i in range(1, n + 1):
        for j in range(1, i + 1):
            S[i][j] = j * S[i - 1][j] + S[i - 1][j - 1]
    return S


class PolyODE:
    """sum_j p_j(tau) f^{(j)} = 0, obtained from an Euler-form operator by
    theta^i = sum_j S(i,j) tau^j d^j and clearing negative tau powers."""

    def __init__(self, op: DiffOperator):
        if any(zp for (_, zp, _) in op.terms):
            raise InvalidInput("operator must not involve z")
        if any(Fraction(a).denominator != 1 for (a, _, _) in op.terms):
            raise InvalidInput("operator needs integral powers of its variable")
        self.op = op
        n = op.order
        amin = min(int(a) for (a, _, _) in op.terms)
        S = _stirling2(n)
        coeffs: Dict[Tuple[int, int], Fraction] = {}
        for (a, _, i), c in op.terms.items():
            for j in range(i + 1):
                if S[i][j]:
                    key = (j, int(a) - amin + j)
                    coeffs[key] = coeffs.get(key, Fraction(0)) + c * S[i][j]
        deg = max(e for (_, e) in coeffs)
        self.n = n
        self.exact = [[coeffs.get((j, e), Fraction(0)) for e in range(deg + 1)] for j in range(n + 1)]

    def poly(self, j):
        return [_to_mp(x) for x in self.exact[j]]

    def singular_points(self) -> list:
        lead = list(self.exact[self.n])
        while lead and lead[-1] == 0:
            lead.pop()
        zero = 0
        while lead and lead[0] == 0:
            lead.pop(0)
            zero += 1
        pts = [mpmath.mpc(0)] if zero else []
        if len(lead) > 1:
            roots = mpmath.polyroots([_to_mp(x) for x in reversed(lead)], maxsteps=200, extraprec=200)
            pts += [mpmath.mpc(x) for x in roots]
        return pts

    def shifted(self, c):
        """Coefficients of p_j(c + h) in h."""
        out = []
        for j in range(self.n + 1):
            p = self.poly(j)
            q = [mpmath.mpc(0)] * len(p)
            for k in range(len(p) - 1, -1, -1):
                # Horner: q <- q*(c+h) + p[k]
                new = [mpmath.mpc(0)] * len(p)
                for e, v in enumerate(q):
                    if v:
                        new[e] += v * c
                        if e + 1 < len(p):
                            new[e + 1] += v
                new[0] += p[k]
                q = new
            out.append(q)
        return out

    def taylor(self, c, init: Sequence[Sequence], K: int):
        """Taylor coefficients b_0..b_{K-1} at c for each initial vector
        (b_0..b_{n-1}) in ``init``."""
        P = self.shifted(c)
        n = self.n
        lead = P[n][0]
        if abs(lead) == 0:
            raise PrecisionFailure("Taylor step centred on a singular point")
        sols = []
        for b0 in init:
            b = [mpmath.mpc(x) for x in b0] + [mpmath.mpc(0)] * (K - n)
            for M in range(0, K - n):
                acc = mpmath.mpc(0)
                for j in range(n + 1):
                    Pj = P[j]
                    for e in range(min(M, len(Pj) - 1) + 1):
                        if j == n and e == 0:
                            continue
                        pe = Pj[e]
                        if not pe:
                            continue
                        k = M - e + j
                        acc += pe * b[k] * mpmath.ff(k, j)
                b[M + n] = -acc / (lead * mpmath.ff(M + n, n))
            sols.append(b)
        return sols

    def residual(self, f_derivs, tau):
        """sum_j p_j(tau) f^{(j)}(tau) for given derivative values."""
        return sum(mpmath.polyval(list(reversed(self.poly(j))), tau) * f_derivs[j] for j in range(self.n + 1))


def _poly_eval(b, h, deriv=0):
    """sum_k b_k h^k (or its deriv-th derivative)."""
    acc = mpmath.mpc(0)
    for k in range(len(b) - 1, deriv - 1, -1):
        acc = acc * h + b[k] * (mpmath.ff(k, deriv) if deriv else 1)
    return acc


# ---------------------------------------------------------------------------
# continuation along a ray

@dataclass
class LaplaceProfile:
    theta: object                 # ray angle (mpf)
    tau0: object                  # series patch endpoint (distance along the ray)
    T: object = None              # far endpoint, grown on demand
    prec: int = 200
    step_fraction: float = 0.5
    tol_bits: int = 0             # 0 -> prec//2

    @property
    def omega(self):
        return mpmath.expj(self.theta)

    def eps(self):
        return mpmath.mpf(2) ** (-(self.tol_bits or self.prec // 2))


def choose_ray(ode: PolyODE, u_arg=0) -> object:
    """Angle in (-pi/2, pi/2) + ... maximising the angular distance to the nonzero singularities."""
    sing = [s for s in ode.singular_points() if abs(s) > 0]
    if not sing:
        return mpmath.mpf(0)
    best, best_val = None, -1
    for k in range(-89, 90):
        th = mpmath.pi * k / 180 - u_arg
        if abs(th + u_arg) >= mpmath.pi / 2:
            continue
        dist = min(abs(mpmath.arg(s * mpmath.expj(-th))) for s in sing)
        tie = abs(dist - best_val) < 1e-12
        if dist > best_val + mpmath.mpf(10) ** -12 or (tie and (abs(th), -th) < (abs(best), -best)):
            best, best_val = th, dist
    # snap to a rational multiple of pi when close
    for den in (1, 2, 3, 4, 6, 8, 12):
        for num in sorted(range(-den, den + 1), key=lambda v: (abs(v), -v)):
            cand = mpmath.pi * num / den
            if abs(cand - best) < mpmath.pi / 170:
                cand_dist = min(abs(mpmath.arg(s * mpmath.expj(-cand))) for s in sing)
                if cand_dist >= best_val - mpmath.mpf(10) ** -12:
                    return cand
    return best


@dataclass
class Segment:
    x: object          # start (distance along the ray)
    H: object          # length
    basis: list        # Taylor coefficients of each fundamental column
    sol: list          # Taylor coefficients of each tracked solution


@dataclass
class Continuation:
    reg: RegularizedSeries
    ode: PolyODE
    profile: LaplaceProfile
    seeds: list                    # per solution: b-vector at tau0
    segments: List[Segment]
    wronskian: List[object]
    singularities: list
    K: int

    def _seg_at(self, x):
        for s in self.segments:
            if s.x <= x <= s.x + s.H:
                return s
        raise ValueError("point outside the continued range")

    def values(self, x):
        s = self._seg_at(x)
        h = self.profile.omega * (x - s.x)
        return [_poly_eval(b, h) for b in s.sol]

    def extend(self, T):
        pr = self.profile
        w = pr.omega
        while self.segments[-1].x + self.segments[-1].H < T:
            last = self.segments[-1]
            xn = last.x + last.H
            hn = w * last.H
            init_basis = [[_poly_eval(b, hn, i) / math.factorial(i) for i in range(self.ode.n)] for b in last.basis]
            init_sol = [[_poly_eval(b, hn, i) / math.factorial(i) for i in range(self.ode.n)] for b in last.sol]
            self._push(xn, init_basis, init_sol)
        pr.T = max(T, pr.T or 0)

    def _push(self, x, init_basis, init_sol):
        pr = self.profile
        c = pr.omega * x
        dist = min(abs(c - s) for s in self.singularities)
        H = dist * pr.step_fraction
        basis = self.ode.taylor(c, init_basis, self.K)
        sol = self.ode.taylor(c, init_sol, self.K)
        self.wronskian.append(mpmath.det(mpmath.matrix([[b[i] for i in range(self.ode.n)] for b in basis])))
        self.segments.append(Segment(x, H, basis, sol))


def _seed_vector(reg: RegularizedSeries, tau, n):
    """b-vectors (f^{(i)}/i!) of every tracked solution at tau."""
    ders = [reg.values(tau, i) for i in range(n)]
    return [[ders[i][s] / math.factorial(i) for i in range(n)] for s in range(len(ders[0]))]


def regularized_operator(ws: WeightSystem) -> DiffOperator:
    return build_pf(ws, "tau-regularized-fano" if ws.kappa < 0 else "tau-regularized-gt")


def continue_ode(reg: RegularizedSeries, ws: WeightSystem, profile: Optional[LaplaceProfile] = None,
                 T=None) -> Continuation:
    ode = PolyODE(regularized_operator(ws))
    with mpmath.workprec(reg.prec):
        if profile is None:
            profile = LaplaceProfile(choose_ray(ode), reg.radius / 2, None, reg.prec)
        sing = ode.singular_points()
        if not any(abs(s) == 0 for s in sing):
            sing.append(mpmath.mpc(0))
        for s in sing:
            if abs(s) > 0 and abs(mpmath.arg(s * mpmath.expj(-profile.theta))) < mpmath.mpf(10) ** -20:
                raise InvalidInput("integration ray passes through a singular point")
        K = int(profile.prec * 0.8) + 30
        tau0 = profile.omega * profile.tau0
        seeds = _seed_vector(reg, tau0, ode.n)
        unit = [[mpmath.mpc(1 if i == j else 0) for i in range(ode.n)] for j in range(ode.n)]
        cont = Continuation(reg, ode, profile, seeds, [], [], sing, K)
        cont._push(profile.tau0, unit, seeds)
        if T is not None:
            cont.extend(T)
        return cont


def overlap_check(reg: RegularizedSeries, ws: WeightSystem, profile: LaplaceProfile) -> object:
    """Continue from tau0/2 to tau0 and compare with the series at tau0 (max relative gap)."""
    with mpmath.workprec(reg.prec):
        half = LaplaceProfile(profile.theta, profile.tau0 / 2, None, profile.prec, profile.step_fraction)
        c = continue_ode(reg, ws, half, profile.tau0)
        got = c.values(profile.tau0)
        want = reg.values(profile.omega * profile.tau0)
        return max(abs(g - w) / max(abs(w), mpmath.mpf(10) ** -30) for g, w in zip(got, want))


# ---------------------------------------------------------------------------
# Laplace transform  II(u) = u * int_0^{inf e^{i theta}} e^{-u tau} f(tau) dtau

@dataclass
class LaplaceValue:
    u: object
    values: list
    error: list
    tail_bound: object
    T: object
    panels: int

    def to_json(self):
        return {"u": mpmath.nstr(self.u, 15), "values": [mpmath.nstr(v, 25) for v in self.values],
                "error": [mpmath.nstr(e, 5) for e in self.error], "tail_bound": mpmath.nstr(self.tail_bound, 5),
                "T": mpmath.nstr(self.T, 10), "panels": self.panels}


def _exp_moments(A, H, K):
    """J_k = int_0^H e^{-A s} s^k ds for k < K (forward below |A|H, backward above)."""
    J = [mpmath.mpc(0)] * K
    eAH = mpmath.exp(-A * H)
    k0 = min(K - 1, int(abs(A) * H))
    J[0] = (1 - eAH) / A if A != 0 else H
    Hk = mpmath.mpf(1)
    for k in range(1, k0 + 1):
        Hk *= H
        J[k] = (k * J[k - 1] - Hk * eAH) / A
    if k0 < K - 1:
        top = K - 1
        J[top] = mpmath.gammainc(top + 1, 0, A * H) / mpmath.power(A, top + 1)
        Hk = mpmath.power(H, top)
        for k in range(top, k0 + 1, -1):
            J[k - 1] = (A * J[k] + Hk * eAH) / k
            Hk /= H
    return J


def _ode_part(cont: Continuation, u, x_end):
    """u * int_{tau0}^{x_end} along the ray, exactly on each Taylor segment."""
    w = cont.profile.omega
    A = u * w
    tot = [mpmath.mpc(0)] * len(cont.seeds)
    trunc = mpmath.mpf(0)
    used = 0
    for seg in cont.segments:
        L = min(seg.H, x_end - seg.x)
        if L <= 0:
            break
        K = len(seg.sol[0])
        J = _exp_moments(A, L, K)
        pre = u * w * mpmath.exp(-A * seg.x)
        wk = [mpmath.mpc(1)] * K
        for k in range(1, K):
            wk[k] = wk[k - 1] * w
        for i, b in enumerate(seg.sol):
            tot[i] += pre * mpmath.fdot([b[k] * wk[k] for k in range(K)], J)
            trunc += abs(pre) * abs(b[-1]) * L ** (K - 1) * L
        used += 1
    return tot, used, trunc


def _log_moment(b, j, X):
    """int_0^X y^{b-1} log^j y dy."""
    lx = mpmath.log(X)
    tot = mpmath.mpc(0)
    for l in range(j + 1):
        tot += (-1) ** l * mpmath.ff(j, l) * lx ** (j - l) / mpmath.power(b, l + 1)
    return mpmath.power(X, b) * tot


def _patch_series(reg: RegularizedSeries, u, tau0):
    """u int_0^{tau0} e^{-u tau} f(tau) dtau for P-dependent branches: with y = u tau,
    sum_n C_n(P) u^{-s-kP} int_0^X e^{-y} y^{s+kP} dy, e^{-y} expanded in powers of y."""
    X = u * tau0
    if abs(X) > 30:
        return None
    eps = mpmath.mpf(2) ** (-mpmath.mp.prec)
    out, err = [], []
    lu = mpmath.log(u)
    for br in reg.branches:
        m, k = br.m, _to_mp(br.pshift)
        tot = [mpmath.mpc(0)] * m
        last = mpmath.mpf(0)
        for base, c in br.terms:
            s = _to_mp(base)
            # moments M_j = int_0^X e^{-y} y^s log^j y dy
            M = [mpmath.mpc(0)] * m
            fact = mpmath.mpf(1)
            i = 0
            while True:
                incr = [(-1) ** i / fact * _log_moment(s + i + 1, j, X) for j in range(m)]
                M = [a + b for a, b in zip(M, incr)]
                if i > abs(X) and max(abs(x) for x in incr) < eps * max(abs(x) for x in M):
                    break
                i += 1
                fact *= i
            # y^{kP} = sum_j (k log y)^j P^j / j!
            G = [M[j] * k ** j / math.factorial(j) for j in range(m)]
            uP = _nexp([-s * lu, -k * lu] + [mpmath.mpf(0)] * (m - 2), m) if m > 1 else [mpmath.power(u, -s)]
            v = _nmul(_nmul(c, G, m), uP, m)
            tot = [a + b for a, b in zip(tot, v)]
            last = max(abs(x) for x in v)
        out += tot
        err += [last * 4] * m
    return out, err


def _patch_exact(reg: RegularizedSeries, u, tau0):
    """u int_0^{tau0} e^{-u tau} tau^s/Gamma(1+s) termwise (no P dependence)."""
    out, err = [], []
    X = u * tau0
    for b in reg.branches:
        tot = mpmath.mpc(0)
        last = mpmath.mpf(0)
        for e, c in b.terms:
            s = _to_mp(e)
            t = c[0] * mpmath.gammainc(s + 1, 0, X) / mpmath.power(u, s)
            tot += t
            last = abs(t)
        out.append(tot)
        err.append(last * 4)
    return out, err


def _tail_bound(cont: Continuation, u, T):
    """Bound of |u int_T^inf e^{-u tau} f| from polynomial growth fitted on [T/2, T]."""
    w = cont.profile.omega
    a = mpmath.re(u * w)
    if a <= 0:
        raise PrecisionFailure("u outside the half-plane of convergence for this ray")
    f1 = max(abs(v) for v in cont.values(T))
    f0 = max(abs(v) for v in cont.values(T / 2))
    p = max(mpmath.mpf(0), mpmath.log(max(f1, mpmath.mpf(10) ** -300) / max(f0, mpmath.mpf(10) ** -300)) / mpmath.log(2)) + 1
    if a * T <= 2 * p:
        return mpmath.inf
    # int_T^inf x^p e^{-a x} <= T^p e^{-aT}/(a - p/T)
    return abs(u) * f1 * mpmath.exp(-a * T) / (a - p / T)


def laplace(reg: RegularizedSeries, ws: WeightSystem, profile: Optional[LaplaceProfile] = None, u=1,
            cont: Optional[Continuation] = None) -> LaplaceValue:
    """u times the Laplace transform of every tracked solution along the ray."""
    with mpmath.workprec(reg.prec):
        if cont is None:
            cont = continue_ode(reg, ws, profile)
        pr = cont.profile
        u = mpmath.mpmathify(u)
        w = pr.omega
        eps = pr.eps()
        a = mpmath.re(u * w)
        if a <= 0:
            raise InvalidInput("u outside the admissible sector for this ray")
        plain = all(b.m == 1 and not b.pshift for b in reg.branches)
        got = _patch_exact(reg, u, w * pr.tau0) if plain else _patch_series(reg, u, w * pr.tau0)
        if got is None:
            cache = {}

            def fvals(x):
                if x not in cache:
                    cache[x] = reg.values(w * x)
                return cache[x]

            got = ([], [])
            for i in range(len(cont.seeds)):
                v, e = mpmath.quad(lambda x: mpmath.exp(-u * w * x) * fvals(x)[i], [0, pr.tau0], error=True)
                got[0].append(v * u * w)
                got[1].append(abs(e * u))
        patch, perr = got
        scale = max(abs(x) for x in patch) or mpmath.mpf(1)
        T = max(pr.tau0 * 2, pr.tau0 + 40 / a)
        for _ in range(80):
            cont.extend(T)
            tb = _tail_bound(cont, u, T)
            if tb < eps * scale:
                break
            T *= mpmath.mpf(1.3)
        else:
            raise PrecisionFailure("tail bound not reached")
        ode, used, trunc = _ode_part(cont, u, T)
        vals = [p + f for p, f in zip(patch, ode)]
        floor_ = mpmath.mpf(2) ** (-reg.prec + 30) * max(abs(v) for v in vals)
        errs = [pe + trunc + tb + floor_ for pe in perr]
        return LaplaceValue(u, vals, errs, tb, T, used)


def halving_check(reg, ws, cont, u) -> dict:
    """Halving every continuation step changes each value by less than the reported estimate."""
    base = laplace(reg, ws, u=u, cont=cont)
    pr = cont.profile
    half = LaplaceProfile(pr.theta, pr.tau0, None, pr.prec, pr.step_fraction / 2, pr.tol_bits)
    finer = laplace(reg, ws, u=u, cont=continue_ode(reg, ws, half))
    diffs = [abs(a - b) for a, b in zip(base.values, finer.values)]
    ok = all(dv <= e for dv, e in zip(diffs, base.error))
    return {"u": mpmath.nstr(base.u, 10), "ok": ok,
            "diff": [mpmath.nstr(x, 5) for x in diffs], "estimate": [mpmath.nstr(x, 5) for x in base.error]}


def laplace_property_check(alpha=2, beta=-1, s=Fraction(1, 3), u=3, prec=120) -> dict:
    """u L[(alpha theta_tau + beta) f](u) = (-alpha theta_u + beta)(u L[f])(u) for f = tau^s e^{-tau}."""
    with mpmath.workprec(prec):
        s_ = _to_mp(s)
        f = lambda t: t ** s_ * mpmath.exp(-t)
        II = lambda uu: uu * mpmath.quad(lambda t: mpmath.exp(-uu * t) * f(t), [0, mpmath.inf])
        # theta_tau f = tau^s (s - tau) e^{-tau}
        lhs = u * mpmath.quad(lambda t: mpmath.exp(-u * t) * (alpha * (t ** s_ * (s_ - t) * mpmath.exp(-t)) + beta * f(t)),
                              [0, mpmath.inf])
        rhs = -alpha * u * mpmath.diff(II, u) + beta * II(u)
        return {"lhs": mpmath.nstr(lhs, 20), "rhs": mpmath.nstr(rhs, 20),
                "rel": mpmath.nstr(abs(lhs - rhs) / abs(rhs), 5), "ok": abs(lhs - rhs) <= abs(rhs) * mpmath.mpf(10) ** -20}


# ---------------------------------------------------------------------------
# direct evaluation of the convergent I-functions

def gw_components(ws: WeightSystem, q, prec: int = 200, tol_bits: Optional[int] = None) -> Tuple[List[str], list]:
    """I_GW^small(q, 1) componentwise in (sector, P^p), by direct summation (Fano inputs)."""
    if ws.kappa >= 0:
        raise InvalidInput("direct GW summation converges only for Fano inputs")
    with mpmath.workprec(prec):
        q = mpmath.mpmathify(q)
        lq = mpmath.log(q)
        eps = mpmath.mpf(2) ** (-(tol_bits or prec))
        labels, vals = [], []
        d = ws.degree
        for f in gw_sectors(ws):
            m = default_ptrunc(ws, f)
            n0 = fpart(-f) if f else Fraction(0)
            c0 = gw_coefficient(ws, n0, m, formal_z=False)[0]
            c = [_to_mp(c0[i]) for i in range(m)]
            n = n0
            tot = [mpmath.mpf(0)] * m
            biggest = mpmath.mpf(0)
            small_run = 0
            while True:
                term = [x * mpmath.power(q, _to_mp(n)) for x in c]
                tot = [a + b for a, b in zip(tot, term)]
                mag = max(abs(x) for x in term)
                biggest = max(biggest, max(abs(x) for x in tot))
                small_run = small_run + 1 if mag < eps * biggest else 0
                if small_run >= 3 and n > 2:
                    break
                num = [mpmath.mpf(1)] + [mpmath.mpf(0)] * (m - 1)
                for i in range(1, d + 1):
                    num = _nmul(num, ([mpmath.mpf(_to_mp(n) * d + i), mpmath.mpf(d)] + [0] * m)[:m], m)
                for w in ws.weights:
                    for i in range(1, w + 1):
                        lin = ([mpmath.mpf(_to_mp(n) * w + i), mpmath.mpf(w)] + [0] * m)[:m]
                        num = _nmul(num, _ninv(lin, m), m)
                c = _nmul(c, num, m)
                n += 1
            # times q^P = exp(P log q)
            qP = _nexp([mpmath.mpf(0), lq] + [mpmath.mpf(0)] * (m - 2), m) if m > 1 else [mpmath.mpf(1)]
            tot = _nmul(tot, qP, m)
            for p in range(m):
                labels.append(f"f={f}:P{p}")
                vals.append(tot[p])
        return labels, vals


def _ninv(a, m):
    inv0 = 1 / a[0]
    out = [mpmath.mpf(0)] * m
    out[0] = inv0
    for k in range(1, m):
        s = sum(a[i] * out[k - i] for i in range(1, min(k, len(a) - 1) + 1))
        out[k] = -s * inv0
    return out


def fjrw_components(ws: WeightSystem, t, order: Optional[int] = None, prec: int = 200) -> Tuple[List[str], list]:
    """I_FJRW^small(t, -1) per narrow branch (general-type inputs converge for all t)."""
    with mpmath.workprec(prec):
        t = mpmath.mpmathify(t)
        if order is None:
            order = 40
        s = lg_t_form(ws, order)
        labels, vals = [], []
        for k in narrow_set(ws):
            tot = mpmath.mpc(0)
            for (kk, e), c in s.terms.items():
                if kk == k:
                    tot += _to_mp(c[0][0]) * mpmath.power(t, _to_mp(e))
            labels.append(f"phi{k}")
            vals.append(tot)
        return labels, vals


def fjrw_ratio_test(ws: WeightSystem, order: int = 40) -> dict:
    """|c_{n+d}/c_n| along each branch of I_FJRW^small(t,-1); tends to 0 when the series is entire."""
    s = lg_t_form(ws, order)
    out = {}
    d = ws.degree
    for k in narrow_set(ws):
        cs = [s.coeff(k, Fraction(d * l + k + 1))[0][0] for l in range(order + 1)]
        ratios = [abs(float(cs[i + 1] / cs[i])) for i in range(len(cs) - 1) if cs[i]]
        out[f"phi{k}"] = ratios
    return out


def fjrw_monodromy_phases(ws: WeightSystem, order: int = 20) -> Dict[int, Fraction]:
    """Exact phase picked up by each branch under t -> e^{2 pi i/d} t (as a fraction of a turn)."""
    s = lg_t_form(ws, order)
    d = ws.degree
    out = {}
    for k in narrow_set(ws):
        phases = {fpart(e / d) for (kk, e), c in s.terms.items() if kk == k and not c.is_zero()}
        if len(phases) != 1:
            raise AssertionError(f"branch {k} is not an eigenfunction of the monodromy")
        out[k] = phases.pop()
    return out


# ---------------------------------------------------------------------------
# collapse maps

@dataclass
class CollapseMap:
    matrix: object              # mpmath matrix, target x source
    source_labels: List[str]
    target_labels: List[str]
    singular_values: list
    rank: int
    gap: object
    residual: object            # held-out, relative
    fit_residual: object
    uniqueness: object          # distance between two disjoint-sample fits
    halving: list
    wronskian_min: object

    def to_json(self):
        M = self.matrix
        return {"source": self.source_labels, "target": self.target_labels,
                "matrix": [[mpmath.nstr(M[i, j], 20) for j in range(M.cols)] for i in range(M.rows)],
                "singular_values": [mpmath.nstr(s, 10) for s in self.singular_values],
                "rank": self.rank, "gap": mpmath.nstr(self.gap, 5),
                "heldout_relative_residual": mpmath.nstr(self.residual, 5),
                "fit_relative_residual": mpmath.nstr(self.fit_residual, 5),
                "uniqueness_distance": mpmath.nstr(self.uniqueness, 5),
                "halving": self.halving, "wronskian_min": mpmath.nstr(self.wronskian_min, 5)}


def _lstsq(S_rows, T_rows):
    """Solve min sum_k |L s_k - t_k|^2 / |t_k|^2 for L (rows independent)."""
    nsrc = len(S_rows[0])
    ntgt = len(T_rows[0])
    colscale = [max(abs(r[j]) for r in S_rows) for j in range(nsrc)]
    L = mpmath.matrix(ntgt, nsrc)
    for i in range(ntgt):
        A = mpmath.matrix(len(S_rows), nsrc)
        b = mpmath.matrix(len(S_rows), 1)
        for k, (s, t) in enumerate(zip(S_rows, T_rows)):
            wgt = 1 / max(abs(x) for x in t)
            for j in range(nsrc):
                A[k, j] = s[j] * wgt / colscale[j]
            b[k] = t[i] * wgt
        x, _ = mpmath.qr_solve(A, b)
        for j in range(nsrc):
            L[i, j] = x[j] / colscale[j]
    return L


def _rel_residual(L, S_rows, T_rows):
    worst = mpmath.mpf(0)
    for s, t in zip(S_rows, T_rows):
        pred = L * mpmath.matrix(s)
        err = max(abs(pred[i] - t[i]) for i in range(len(t)))
        worst = max(worst, err / max(abs(x) for x in t))
    return worst


def _finish_map(S_fit, T_fit, S_alt, T_alt, S_hold, T_hold, src, tgt, halving, wmin) -> CollapseMap:
    L = _lstsq(S_fit, T_fit)
    L2 = _lstsq(S_alt, T_alt)
    diff = mpmath.mnorm(L - L2, "f") / mpmath.mnorm(L, "f")
    sv = mpmath.svd(L, compute_uv=False)
    sv = sorted([abs(x) for x in sv], reverse=True)
    top = sv[0]
    floor_ = max(diff, mpmath.mpf(2) ** (-mpmath.mp.prec // 2)) * top
    rank = sum(1 for x in sv if x > 1e6 * floor_)
    gap = sv[rank - 1] / floor_ if rank else mpmath.mpf(0)
    return CollapseMap(L, src, tgt, sv, rank, gap, _rel_residual(L, S_hold, T_hold),
                       _rel_residual(L, S_fit, T_fit), diff, halving, wmin)


def default_fano_samples():
    fit = [mpmath.mpf(1) + mpmath.mpf(k) / 4 for k in range(0, 12, 2)]
    alt = [mpmath.mpf(1) + mpmath.mpf(k) / 4 + mpmath.mpf(1) / 8 for k in range(0, 12, 2)]
    hold = [mpmath.mpf(13) / 10, mpmath.mpf(21) / 10, mpmath.mpf(29) / 10, mpmath.mpf(37) / 10]
    return fit, alt, hold


def collapse_map_fano(ws: WeightSystem, samples=None, prec: int = 300, order: Optional[int] = None) -> CollapseMap:
    """L_GW with L_GW . I_GW(q,1) = II_FJRW(u = q^{1/r}) on the sampled q."""
    if ws.kappa >= 0:
        raise InvalidInput("collapse_map_fano needs kappa < 0")
    fit, alt, hold = samples or default_fano_samples()
    with mpmath.workprec(prec):
        reg = regularize_fano(ws, order or int(prec * 0.75), prec)
        cont = continue_ode(reg, ws)
        r = ws.r

        def row(q):
            q = mpmath.mpf(q)
            lab, s = gw_components(ws, q, prec)
            lv = laplace(reg, ws, u=mpmath.root(q, r), cont=cont)
            return lab, s, lv.values

        rows = {}
        for q in list(fit) + list(alt) + list(hold):
            rows[q] = row(q)
        src = rows[fit[0]][0]
        tgt = [b.label for b in reg.branches]
        pick = lambda qs, i: [rows[q][i] for q in qs]
        halving = [halving_check(reg, ws, cont, mpmath.root(fit[0], r))]
        wmin = min(abs(w) for w in cont.wronskian)
        return _finish_map(pick(fit, 1), pick(fit, 2), pick(alt, 1), pick(alt, 2), pick(hold, 1),
                           pick(hold, 2), src, tgt, halving, wmin)


def default_gt_samples():
    fit = [mpmath.mpf(1) + mpmath.mpf(k) / 5 for k in range(0, 10)]
    alt = [mpmath.mpf(1) + mpmath.mpf(k) / 5 + mpmath.mpf(1) / 10 for k in range(0, 10)]
    hold = [mpmath.mpf(13) / 10 + mpmath.mpf(1) / 30, mpmath.mpf(17) / 10 + mpmath.mpf(1) / 30,
            mpmath.mpf(23) / 10 + mpmath.mpf(1) / 30]
    return fit, alt, hold


def collapse_map_gt(ws: WeightSystem, samples=None, prec: int = 200, order: Optional[int] = None) -> CollapseMap:
    """L_FJRW with L_FJRW . I_FJRW(t,-1) = II_GW(u = t^{d/kappa}) on the sampled t."""
    if ws.kappa <= 0:
        raise InvalidInput("collapse_map_gt needs kappa > 0")
    fit, alt, hold = samples or default_gt_samples()
    with mpmath.workprec(prec):
        reg = regularize_gt(ws, order or max(40, prec // 3), prec)
        cont = continue_ode(reg, ws)
        e = Fraction(ws.degree, ws.kappa)

        def row(t):
            t = mpmath.mpf(t)
            lab, s = fjrw_components(ws, t, None, prec)
            lv = laplace(reg, ws, u=mpmath.power(t, _to_mp(e)), cont=cont)
            return lab, s, lv.values

        rows = {t: row(t) for t in list(fit) + list(alt) + list(hold)}
        src = rows[fit[0]][0]
        tgt = reg.solution_labels()
        pick = lambda ts, i: [rows[t][i] for t in ts]
        halving = [halving_check(reg, ws, cont, mpmath.power(fit[0], _to_mp(e)))]
        wmin = min(abs(w) for w in cont.wronskian)
        return _finish_map(pick(fit, 1), pick(fit, 2), pick(alt, 1), pick(alt, 2), pick(hold, 1),
                           pick(hold, 2), src, tgt, halving, wmin)


# ---------------------------------------------------------------------------
# Watson's lemma

def asymptotic_terms(reg: RegularizedSeries, branch: int, u, count: int) -> list:
    """First ``count`` terms c u^{-s} of the expansion of II on one branch (Fano side)."""
    b = reg.branches[branch]
    return [_to_mp(c) * mpmath.power(u, -_to_mp(e)) for e, c in b.exact[:count]]


def watson_check(reg: RegularizedSeries, ws: WeightSystem, us=(10, 20, 40), M: int = 5,
                 cont: Optional[Continuation] = None, C_max: float = 10) -> dict:
    """For m = 0..M: C_m(u) = |II(u) - S_m(u)| / |term_{m+1}(u)|; checks C <= C_max."""
    if reg.kind != "fano":
        raise InvalidInput("watson_check compares against the exact LG expansion (Fano side)")
    with mpmath.workprec(reg.prec):
        cont = cont or continue_ode(reg, ws)
        table = []
        ok = True
        for u in us:
            lv = laplace(reg, ws, u=u, cont=cont)
            for bi, b in enumerate(reg.branches):
                terms = asymptotic_terms(reg, bi, mpmath.mpf(u), M + 2)
                for m in range(M + 1):
                    S = sum(terms[:m + 1])
                    err = abs(lv.values[bi] - S)
                    nxt = abs(terms[m + 1])
                    C = err / nxt
                    ok = ok and C <= C_max and lv.error[bi] < err
                    table.append({"u": u, "branch": b.label, "m": m, "error": mpmath.nstr(err, 6),
                                  "next_term": mpmath.nstr(nxt, 6), "C": mpmath.nstr(C, 6)})
        # divergence visibility at a small u, where optimal truncation sits inside the stored terms
        u0 = mpmath.mpf(1)
        lv = laplace(reg, ws, u=u0, cont=cont)
        terms = asymptotic_terms(reg, 0, u0, len(reg.branches[0].exact))
        errs = []
        S = mpmath.mpf(0)
        for t in terms:
            S += t
            errs.append(abs(lv.values[0] - S))
        imin = min(range(len(errs)), key=lambda i: errs[i])
        diverges = errs[-1] > errs[imin] * 10
        # e^{-u} is asymptotic to zero: smaller than any fixed power at the largest u
        ul = mpmath.mpf(us[-1])
        flat = mpmath.exp(-ul) < ul ** -(M + 1)
        return {"ok": ok and diverges and flat, "table": table, "optimal_truncation": imin,
                "divergent_tail": diverges, "exp_small_vs_power": flat}


# ---------------------------------------------------------------------------
# leading growth for unit weights

def steepest_leading(ws: WeightSystem, us=None, prec: int = 300) -> dict:
    """I_GW(u^r,1) u^{(N-2)/2} e^{-alpha u} against C Gamma(1+P)^N/Gamma(1+dP)."""
    if any(w != 1 for w in ws.weights) or ws.degree >= ws.N:
        raise InvalidInput("steepest_leading needs unit weights and d < N")
    N, d, r = ws.N, ws.degree, ws.r
    us = us or [mpmath.mpf(1) + mpmath.mpf(k) / 10 for k in range(11)]
    with mpmath.workprec(prec):
        alpha = mpmath.mpf(r) * mpmath.root(mpmath.mpf(d) ** d, r)
        lam = mpmath.mpf(N - 2) / 2
        m = default_ptrunc(ws, Fraction(0))
        # expected direction: Gamma(1+P)^N / Gamma(1+dP)
        lg1 = [mpmath.mpf(0)] + [(-1) ** k * mpmath.zeta(k) / k if k > 1 else -mpmath.euler
                                 for k in range(1, m)]
        gN = _nexp([N * x for x in lg1], m)
        gd = _nexp([x * d ** k for k, x in enumerate(lg1)], m)
        want = _nmul(gN, _ninv(gd, m), m)
        want = [x / want[0] for x in want]
        sols = massive_solutions(ws, terms=12, prec=prec)
        ms = sols[0]
        rows = []
        p0 = []
        corrected = []
        for u in us:
            _, vals = gw_components(ws, mpmath.power(u, r), prec)
            v = [x * mpmath.power(u, lam) * mpmath.exp(-alpha * u) for x in vals]
            series = sum(c * mpmath.power(u, -k) for k, c in enumerate(ms.coefficients))
            p0.append(v[0])
            corrected.append(v[0] / series)
            rows.append({"u": mpmath.nstr(u, 6), "P_components": [mpmath.nstr(x, 12) for x in v],
                         "direction": [mpmath.nstr(x / v[0], 12) for x in v]})
        spread = lambda xs: (max(xs) - min(xs)) / abs(sum(xs) / len(xs))
        dir_err = max(abs(rows_dir - w) for rows_dir, w in zip(
            [mpmath.mpf(x) for x in rows[-1]["direction"]], want))
        return {"alpha": mpmath.nstr(alpha, 20), "lambda": mpmath.nstr(lam, 5),
                "expected_direction": [mpmath.nstr(x, 12) for x in want],
                "P0_relative_variation": float(spread(p0)),
                "P0_over_massive_series_variation": float(spread(corrected)),
                "direction_error_at_last_u": float(dir_err),
                "ok_1pct": spread(p0) < mpmath.mpf("0.01"),
                "rows": rows}
