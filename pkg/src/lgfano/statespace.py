"""Modified Chen-Ruan and FJRW state spaces (graded dimensions)."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, List, Mapping, Optional, Tuple

from .geometry import (GroupElement, InvalidInput, SymmetryGroup, WeightSystem, coset_decomposition,
                       cr_age, fjrw_age, lambda_phases, twisted_element)


class BroadDataUnavailable(InvalidInput):
    pass


class CorrespondenceMismatch(AssertionError):
    pass


@dataclass(frozen=True)
class SectorContribution:
    sector: str          # phase vector of the group element
    coset: str
    f: Optional[Fraction]
    kind: str            # "hyperplane-power" | "primitive" | "broad" | "narrow" | "correction"
    bidegree: Tuple[Fraction, Fraction]
    dimension: int

    @property
    def n(self) -> int:
        d = self.bidegree[0] - self.bidegree[1]
        assert d.denominator == 1, "modified degree must be integral"
        return int(d)

    def to_json(self):
        return {"sector": self.sector, "coset": self.coset,
                "f": None if self.f is None else str(self.f), "kind": self.kind,
                "bidegree": [str(self.bidegree[0]), str(self.bidegree[1])],
                "dimension": self.dimension}


@dataclass
class StateSpaceReport:
    side: str
    contributions: List[SectorContribution]
    correction_dim: int

    @property
    def graded_dims(self) -> Dict[int, int]:
        out: Counter = Counter()
        for c in self.contributions:
            out[c.n] += c.dimension
        out[0] += self.correction_dim
        return {n: v for n, v in sorted(out.items()) if v}

    @property
    def total(self) -> int:
        return sum(self.graded_dims.values())

    def to_json(self):
        return {"side": self.side, "graded_dims": {str(k): v for k, v in self.graded_dims.items()},
                "correction_dim": self.correction_dim, "total": self.total,
                "contributions": [c.to_json() for c in self.contributions]}


@dataclass
class MilnorData:
    dims: Dict[Fraction, int]                 # charge (exponent/d) -> dim
    invariant_dims: Dict[Fraction, int] = field(default_factory=dict)  # form charge l -> dim

    @property
    def total(self) -> int:
        return sum(self.dims.values())


# --- integer polynomial helpers (coefficient lists, index = exponent) -------

def _pmul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _pdivexact(num, den):
    num = list(num)
    q = [0] * (len(num) - len(den) + 1)
    for i in range(len(q) - 1, -1, -1):
        c = num[i + len(den) - 1]
        if c % den[-1]:
            raise InvalidInput("non-polynomial Milnor quotient")
        c //= den[-1]
        q[i] = c
        for j, y in enumerate(den):
            num[i + j] -= c * y
    if any(num):
        raise InvalidInput("non-polynomial Milnor quotient")
    return q


def _tpow_minus_one(k):
    return [-1] + [0] * (k - 1) + [1]


def poincare_polynomial(weights, d) -> List[int]:
    """Coefficients of prod (t^{d-w}-1)/(t^w-1)."""
    if any(w >= d for w in weights):
        raise InvalidInput("Milnor ring needs all weights < d")
    num, den = [1], [1]
    for w in weights:
        num = _pmul(num, _tpow_minus_one(d - w))
        den = _pmul(den, _tpow_minus_one(w))
    return _pdivexact(num, den)


def milnor_poincare(ws: WeightSystem, coords=None) -> MilnorData:
    """Graded Milnor ring of W (or its restriction to ``coords``), with the
    J-invariant forms. A form x^m dx has charge l = (e + sum w)/d; it is
    J-invariant iff l is an integer."""
    idx = range(ws.N) if coords is None else coords
    w = [ws.weights[j] for j in idx]
    d = ws.degree
    if not w:
        return MilnorData({Fraction(0): 1}, {Fraction(0): 1})
    poly = poincare_polynomial(w, d)
    dims = {Fraction(e, d): c for e, c in enumerate(poly) if c}
    inv: Dict[Fraction, int] = {}
    for e, c in enumerate(poly):
        ell = Fraction(e + sum(w), d)
        if c and ell.denominator == 1:
            inv[ell] = inv.get(ell, 0) + c
    return MilnorData(dims, inv)


def fermat_invariant_dims(ws: WeightSystem, G: SymmetryGroup, gamma: GroupElement) -> MilnorData:
    """G-invariant forms prod_{fixed} x_j^{m_j} dx_j with 0 <= m_j <= d/w_j - 2."""
    if not ws.is_fermat:
        raise InvalidInput("Fermat enumeration needs a Fermat polynomial")
    F = gamma.fixed()
    d = ws.degree
    ranges = [range(d // ws.weights[j] - 1) for j in F]
    dims: Dict[Fraction, int] = {}
    inv: Dict[Fraction, int] = {}
    for ms in product(*ranges):
        ell = sum((Fraction((m + 1) * ws.weights[j], d) for m, j in zip(ms, F)), Fraction(0))
        dims[ell] = dims.get(ell, 0) + 1
        ok = True
        for h in G.generators:
            s = sum(((m + 1) * h.phases[j] for m, j in zip(ms, F)), Fraction(0))
            if s.denominator != 1:
                ok = False
                break
        if ok:
            inv[ell] = inv.get(ell, 0) + 1
    return MilnorData(dims, inv)


def broad_forms(ws: WeightSystem, G: SymmetryGroup, gamma: GroupElement,
                overrides: Optional[Mapping[str, Mapping]] = None) -> Dict[Fraction, int]:
    """Invariant form charges -> dimension for the sector of ``gamma``."""
    if not gamma.fixed():
        return {Fraction(0): 1}
    if overrides and gamma.key() in overrides:
        return {Fraction(k): int(v) for k, v in overrides[gamma.key()].items() if int(v)}
    if G.is_cyclic_j:
        return milnor_poincare(ws, gamma.fixed()).invariant_dims
    if ws.is_fermat:
        return fermat_invariant_dims(ws, G, gamma).invariant_dims
    raise BroadDataUnavailable(f"broad dimensions for sector {gamma.key()} must be supplied")


def cr_state_space(ws: WeightSystem, G: SymmetryGroup, overrides=None) -> StateSpaceReport:
    d = ws.degree
    contribs: List[SectorContribution] = []
    reps = coset_decomposition(ws, G)
    for g in reps:
        for f in lambda_phases(ws, g):
            gam = twisted_element(ws, g, f)
            Ng = len(gam.fixed())
            a = cr_age(ws, g, f)
            in_G = (f * d).denominator == 1
            npow = Ng - 1 if in_G else Ng
            for i in range(npow):
                contribs.append(SectorContribution(gam.key(), g.key(), f, "hyperplane-power",
                                                   (a + i, a + i), 1))
            if in_G:
                for ell, dim in sorted(broad_forms(ws, G, gam, overrides).items()):
                    contribs.append(SectorContribution(gam.key(), g.key(), f, "primitive",
                                                       (Ng - 1 - ell + a, ell - 1 + a), dim))
    corr = (len(G) // d) * ws.kappa if ws.kappa > 0 else 0
    return StateSpaceReport("CR", contribs, corr)


def fjrw_state_space(ws: WeightSystem, G: SymmetryGroup, overrides=None) -> StateSpaceReport:
    sq = sum(ws.charges)
    contribs = []
    for gam in G.elements:
        a = fjrw_age(gam)
        Ng = len(gam.fixed())
        kind = "narrow" if Ng == 0 else "broad"
        for ell, dim in sorted(broad_forms(ws, G, gam, overrides).items()):
            contribs.append(SectorContribution(gam.key(), "", None, kind,
                                               (Ng - ell + a - sq, ell + a - sq), dim))
    corr = (len(G) // ws.degree) * ws.r if ws.r > 0 else 0
    return StateSpaceReport("FJRW", contribs, corr)


@dataclass
class CorrespondenceReport:
    cr: StateSpaceReport
    fjrw: StateSpaceReport
    ledger: Dict[str, int]
    ok: bool

    def to_json(self):
        return {"ok": self.ok, "cr": self.cr.to_json(), "fjrw": self.fjrw.to_json(), "ledger": self.ledger}


def verify_correspondence(ws: WeightSystem, G: SymmetryGroup, overrides=None,
                          raise_on_mismatch: bool = True) -> CorrespondenceReport:
    from .diagram import build_diagram
    cr = cr_state_space(ws, G, overrides)
    lg = fjrw_state_space(ws, G, overrides)
    internal = empty = 0
    for g in coset_decomposition(ws, G):
        dg = build_diagram(ws, G, g)
        internal += dg.n_internal
        empty += dg.n_empty
    ledger = {"internal_dots": internal, "empty_rays": empty, "difference": internal - empty,
              "expected": (len(G) // ws.degree) * ws.r}
    ok = cr.graded_dims == lg.graded_dims and ledger["difference"] == ledger["expected"]
    if not ok and raise_on_mismatch:
        raise CorrespondenceMismatch(f"CR {cr.graded_dims} vs FJRW {lg.graded_dims}, ledger {ledger}")
    return CorrespondenceReport(cr, lg, ledger, ok)
