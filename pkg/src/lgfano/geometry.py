"""Weight systems, diagonal symmetry groups, sectors and ages."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, List, Optional, Tuple

from .algebra import frac, fpart


class InvalidInput(ValueError):
    """Raised for malformed weight systems or groups (CLI exit code 1)."""


@dataclass(frozen=True)
class WeightSystem:
    weights: Tuple[int, ...]
    degree: int
    monomials: Optional[Tuple[Tuple[int, ...], ...]] = None

    def __post_init__(self):
        w = tuple(int(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if not w or any(x <= 0 for x in w) or self.degree <= 0:
            raise InvalidInput("weights and degree must be positive integers")
        g = 0
        for x in w:
            g = gcd(g, x)
        if g != 1:
            raise InvalidInput(f"gcd of weights is {g}, expected 1")
        if self.monomials is not None:
            mons = tuple(tuple(int(b) for b in row) for row in self.monomials)
            object.__setattr__(self, "monomials", mons)
            for row in mons:
                if len(row) != len(w):
                    raise InvalidInput("monomial exponent row has wrong length")
                if sum(b * x for b, x in zip(row, w)) != self.degree:
                    raise InvalidInput(f"monomial {row} is not quasi-homogeneous of degree {self.degree}")

    @property
    def N(self) -> int:
        return len(self.weights)

    @property
    def charges(self) -> Tuple[Fraction, ...]:
        return tuple(Fraction(x, self.degree) for x in self.weights)

    @property
    def kappa(self) -> int:
        return self.degree - sum(self.weights)

    @property
    def r(self) -> int:
        """Fano index (negative for general type)."""
        return -self.kappa

    @property
    def gorenstein(self) -> bool:
        return all(self.degree % x == 0 for x in self.weights)

    @property
    def is_fermat(self) -> bool:
        if self.monomials is None:
            return self.gorenstein
        if not self.gorenstein or len(self.monomials) != self.N:
            return False
        want = {tuple(self.degree // w if i == j else 0 for i in range(self.N))
                for j, w in enumerate(self.weights)}
        return set(self.monomials) == want

    def label(self) -> str:
        return f"({','.join(map(str, self.weights))};{self.degree})"


def kappa(ws: WeightSystem) -> int:
    return ws.kappa


@dataclass(frozen=True, order=True)
class GroupElement:
    phases: Tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(fpart(frac(p)) for p in self.phases))

    @classmethod
    def identity(cls, n: int) -> "GroupElement":
        return cls((Fraction(0),) * n)

    def __add__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(tuple(a + b for a, b in zip(self.phases, other.phases)))

    def __neg__(self):
        return GroupElement(tuple(-a for a in self.phases))

    def scale(self, k: int) -> "GroupElement":
        return GroupElement(tuple(a * k for a in self.phases))

    def is_identity(self) -> bool:
        return all(p == 0 for p in self.phases)

    def order(self) -> int:
        n = 1
        for p in self.phases:
            n = n * p.denominator // gcd(n, p.denominator)
        return n

    def fixed(self) -> Tuple[int, ...]:
        """Indices of coordinates fixed by this element."""
        return tuple(j for j, p in enumerate(self.phases) if p == 0)

    def key(self) -> str:
        return ",".join(str(p) for p in self.phases)


def j_element(ws: WeightSystem) -> GroupElement:
    return GroupElement(ws.charges)


def fjrw_age(g: GroupElement) -> Fraction:
    return sum(g.phases, Fraction(0))


class SymmetryGroup:
    """Finite group of diagonal symmetries, closed from generators."""

    def __init__(self, ws: WeightSystem, generators: Iterable[GroupElement] = (), cap: int = 100_000):
        self.ws = ws
        J = j_element(ws)
        gens = [J] + [g if isinstance(g, GroupElement) else GroupElement(tuple(g)) for g in generators]
        for g in gens:
            if len(g.phases) != ws.N:
                raise InvalidInput("group generator has wrong number of phases")
            if ws.monomials is not None:
                for row in ws.monomials:
                    if fpart(sum(b * p for b, p in zip(row, g.phases))) != 0:
                        raise InvalidInput(f"generator {g.key()} does not preserve W")
            elif ws.is_fermat:
                for j, p in enumerate(g.phases):
                    if fpart(p * (ws.degree // ws.weights[j])) != 0:
                        raise InvalidInput(f"generator {g.key()} does not preserve the Fermat polynomial")
        self.generators = tuple(gens)
        e = GroupElement.identity(ws.N)
        seen = {e}
        frontier = [e]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = x + g
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
                        if len(seen) > cap:
                            raise InvalidInput(f"group order exceeds cap {cap}")
            frontier = nxt
        self.elements: Tuple[GroupElement, ...] = tuple(sorted(seen))
        self._set = seen

    @classmethod
    def cyclic(cls, ws: WeightSystem) -> "SymmetryGroup":
        return cls(ws, ())

    def __len__(self):
        return len(self.elements)

    def __contains__(self, g: GroupElement) -> bool:
        return g in self._set

    @property
    def is_cyclic_j(self) -> bool:
        return len(self) == self.ws.degree


def narrow_set(ws: WeightSystem) -> List[int]:
    d = ws.degree
    return [k for k in range(d) if all(((k + 1) * w) % d != 0 for w in ws.weights)]


def narrow_by_fixed_locus(ws: WeightSystem) -> List[int]:
    """Same set computed from fixed coordinates of J^{k+1} (cross-check)."""
    J = j_element(ws)
    return [k for k in range(ws.degree) if not J.scale(k + 1).fixed()]


def fjrw_degree(ws: WeightSystem, k: int) -> Fraction:
    if not 0 <= k < ws.degree:
        raise ValueError("k out of range")
    return 2 * sum((fpart(Fraction(k * w, ws.degree)) for w in ws.weights), Fraction(0))


def fjrw_degree_sector(ws: WeightSystem, k: int) -> Fraction:
    """Degree of phi_k read from its sector J^{k+1}: 2(age - sum q)."""
    return 2 * (fjrw_age(j_element(ws).scale(k + 1)) - sum(ws.charges))


def lambda_phases(ws: WeightSystem, g: GroupElement) -> List[Fraction]:
    """Phases f with g_j * lambda^{-w_j} = 1 for at least one j (sorted)."""
    out = set()
    for th, w in zip(g.phases, ws.weights):
        for m in range(w):
            out.add(fpart((m - th) / w))
    return sorted(out)


def twisted_element(ws: WeightSystem, g: GroupElement, f: Fraction) -> GroupElement:
    """The element g * lambda-bar for lambda = exp(2 pi i f)."""
    return GroupElement(tuple(th + w * f for th, w in zip(g.phases, ws.weights)))


def cr_age(ws: WeightSystem, g: GroupElement, f: Fraction) -> Fraction:
    gam = twisted_element(ws, g, f)
    if not gam.fixed():
        raise ValueError(f"empty sector f={f}")
    return sum(gam.phases, Fraction(0)) - fpart(ws.degree * f)


def cr_age_hypersurface(ws: WeightSystem, f) -> Fraction:
    return cr_age(ws, GroupElement.identity(ws.N), frac(f))


def coset_decomposition(ws: WeightSystem, G: SymmetryGroup) -> List[GroupElement]:
    J = j_element(ws)
    if J not in G:
        raise InvalidInput("J_W is not in the group")
    reps: List[GroupElement] = []
    covered = set()
    for g in G.elements:
        if g in covered:
            continue
        reps.append(g)
        for k in range(ws.degree):
            covered.add(g + J.scale(k))
    if len(reps) * ws.degree != len(G):
        raise InvalidInput("coset count inconsistent with group order")
    return reps


def parse_phase_vector(s) -> GroupElement:
    if isinstance(s, str):
        parts = [p for p in s.replace("(", "").replace(")", "").split(",") if p.strip()]
    else:
        parts = list(s)
    return GroupElement(tuple(frac(p) for p in parts))
