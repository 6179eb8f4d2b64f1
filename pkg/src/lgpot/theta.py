"""Two-point invariant tables, structure constants and theta functions.

Tables are graded by anticanonical degree: N_{n,p} collects all classes
with D.beta = n + p.  A table knows the range it is complete on
(``p <= pmax`` and ``n + p <= max_grade``); inside that range an absent
entry means zero, outside it any lookup raises :class:`MissingEntryError`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping


class MissingEntryError(KeyError):
    """A table entry outside the table's known range was requested."""


def _frac_str(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class InvariantTable:
    def __init__(self, entries: Mapping[tuple[int, int], object], modulus: int,
                 max_grade: int, pmax: int):
        self.modulus = int(modulus)
        self.max_grade = int(max_grade)
        self.pmax = int(pmax)
        clean = {}
        for (n, p), v in entries.items():
            v = Fraction(v)
            if n < 1 or p < 1:
                raise ValueError(f"table entry ({n},{p}) must have n, p >= 1")
            if not self.covers(n, p):
                raise ValueError(f"table entry ({n},{p}) lies outside the table range")
            if v:
                clean[(n, p)] = v
        self.entries = clean

    def covers(self, n: int, p: int) -> bool:
        return 1 <= p <= self.pmax and n >= 1 and n + p <= self.max_grade

    def get(self, n: int, p: int) -> Fraction:
        if n < 1 or p < 1:
            return Fraction(0)
        if not self.covers(n, p):
            raise MissingEntryError(
                f"N_{{{n},{p}}} is outside the table (pmax={self.pmax}, max_grade={self.max_grade})"
            )
        return self.entries.get((n, p), Fraction(0))

    __getitem__ = lambda self, key: self.get(*key)

    def column(self, p: int) -> dict[int, Fraction]:
        return {n: v for (n, q), v in self.entries.items() if q == p}

    def with_entry(self, n: int, p: int, value) -> "InvariantTable":
        entries = dict(self.entries)
        entries[(n, p)] = Fraction(value)
        return InvariantTable(entries, self.modulus, self.max_grade, self.pmax)

    def restricted(self, pmax: int | None = None, max_grade: int | None = None) -> "InvariantTable":
        pmax = self.pmax if pmax is None else min(pmax, self.pmax)
        max_grade = self.max_grade if max_grade is None else min(max_grade, self.max_grade)
        entries = {(n, p): v for (n, p), v in self.entries.items() if p <= pmax and n + p <= max_grade}
        return InvariantTable(entries, self.modulus, max_grade, pmax)

    def grading_ok(self) -> bool:
        if not self.modulus:
            return not self.entries
        return all((n + p) % self.modulus == 0 for (n, p) in self.entries)

    def __eq__(self, other):
        if not isinstance(other, InvariantTable):
            return NotImplemented
        return (self.entries, self.modulus, self.max_grade, self.pmax) == (
            other.entries, other.modulus, other.max_grade, other.pmax)

    def __repr__(self):
        return f"InvariantTable({len(self.entries)} entries, pmax={self.pmax}, max_grade={self.max_grade})"

    def to_dict(self) -> dict:
        return {
            "dgrades_modulus": self.modulus,
            "max_grade": self.max_grade,
            "pmax": self.pmax,
            "entries": [
                {"n": n, "p": p, "num": str(v.numerator), "den": str(v.denominator)}
                for (n, p), v in sorted(self.entries.items(), key=lambda kv: (kv[0][1], kv[0][0]))
            ],
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "InvariantTable":
        entries = {}
        for e in doc["entries"]:
            key = (int(e["n"]), int(e["p"]))
            if key in entries:
                raise ValueError(f"duplicate table entry {key}")
            entries[key] = Fraction(int(e["num"]), int(e["den"]))
        pmax = int(doc.get("pmax", max([p for _, p in entries] or [1])))
        max_grade = int(doc.get("max_grade", max([n + p for n, p in entries] or [1])))
        return cls(entries, int(doc["dgrades_modulus"]), max_grade, pmax)


def wdvv_extend_table(col1: InvariantTable, pmax: int, nmax: int) -> InvariantTable:
    """Fill columns 2..pmax from column 1 with the p1 = 1 WDVV recursion.

    Every column is filled on the whole grade range of ``col1``; the range
    must reach ``nmax + pmax`` so that column pmax holds n <= nmax.
    """
    if pmax < 1:
        raise ValueError("pmax must be at least 1")
    G = col1.max_grade
    if G < nmax + pmax:
        raise MissingEntryError(
            f"column 1 is known through grade {G}; need {nmax + pmax} for pmax={pmax}, nmax={nmax}"
        )
    N: dict[tuple[int, int], Fraction] = {
        (n, 1): v for (n, p), v in col1.entries.items() if p == 1
    }
    get = lambda n, p: N.get((n, p), Fraction(0))
    for p in range(1, pmax):
        for k in range(1, G - p):
            total = (k + 1) * get(k + 1, p) + (k + p) * get(k + p, 1)
            for m in range(1, k):
                total += m * (k - m) * get(m, 1) * get(k - m, p)
            for r in range(1, p):
                total -= (p - r) * get(p - r, 1) * k * get(k, r)
            value = total / k
            if value:
                N[(k, p + 1)] = value
    return InvariantTable(N, col1.modulus, G, pmax)


@dataclass(frozen=True)
class StructureConstant:
    p1: int
    p2: int
    r: int
    value: Fraction

    @property
    def tpow(self) -> int:
        return self.p1 + self.p2 - self.r


def structure_constants(table: InvariantTable, p1: int, p2: int, r: int) -> StructureConstant:
    """N_{p1,p2,-r} in terms of two-point invariants (inputs in any order)."""
    a, b = sorted((p1, p2))
    if r < 0:
        raise ValueError("r must be nonnegative")
    if r == a + b:
        value = Fraction(1)
    elif r >= b:
        value = Fraction(0)
    elif r >= a:
        value = (b - r) * table.get(b - r, a)
    else:
        value = (a - r) * table.get(a - r, b) + (b - r) * table.get(b - r, a)
    return StructureConstant(p1, p2, r, value)


@dataclass(frozen=True)
class ThetaSeries:
    """x^{-p} + sum_n terms[n] t^{n+p} x^n."""

    p: int
    terms: dict[int, Fraction] = field(default_factory=dict)

    def laurent(self) -> dict[tuple[int, int], Fraction]:
        """Coefficients keyed by (power of x, power of t)."""
        out = {(-self.p, 0): Fraction(1)}
        for n, c in self.terms.items():
            out[(n, n + self.p)] = c
        return out

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "principal": f"x^-{self.p}",
            "terms": [
                {"xpow": n, "tpow": n + self.p, "num": str(c.numerator), "den": str(c.denominator)}
                for n, c in sorted(self.terms.items())
            ],
        }


def theta_series(table: InvariantTable, p: int, nmax: int) -> ThetaSeries:
    terms = {}
    for n in range(1, nmax + 1):
        v = table.get(n, p)
        if v:
            terms[n] = n * v
    return ThetaSeries(p, terms)


@dataclass(frozen=True)
class Mismatch:
    tpow: int
    lhs: Fraction
    rhs: Fraction
    xpow: int | None = None

    def to_dict(self) -> dict:
        d = {}
        if self.xpow is not None:
            d["xpow"] = self.xpow
        d.update(tpow=self.tpow, lhs=_frac_str(self.lhs), rhs=_frac_str(self.rhs))
        return d


@dataclass(frozen=True)
class Report:
    passed: bool
    mismatches: tuple[Mismatch, ...] = ()

    @property
    def first(self) -> Mismatch | None:
        return self.mismatches[0] if self.mismatches else None

    def to_dict(self) -> dict:
        return {"pass": self.passed, "mismatches": [m.to_dict() for m in self.mismatches]}

    @classmethod
    def compare(cls, lhs: Mapping, rhs: Mapping) -> "Report":
        """Compare dicts keyed by (xpow, tpow); mismatches ordered by (tpow, xpow)."""
        bad = []
        for key in sorted(set(lhs) | set(rhs), key=lambda k: (k[1], k[0])):
            a, b = Fraction(lhs.get(key, 0)), Fraction(rhs.get(key, 0))
            if a != b:
                bad.append(Mismatch(xpow=key[0], tpow=key[1], lhs=a, rhs=b))
        return cls(not bad, tuple(bad))


def _truncated(theta: ThetaSeries, nmax: int) -> dict:
    return {k: v for k, v in theta.laurent().items() if k[1] <= nmax}


def product_sides(table: InvariantTable, p1: int, p2: int, nmax: int):
    """Both sides of theta_{p1} * theta_{p2} = sum_r N_{p1,p2,-r} t^{p1+p2-r} theta_r."""
    left = _truncated(theta_series(table, p1, max(nmax - p1, 0)), nmax)
    right_factor = _truncated(theta_series(table, p2, max(nmax - p2, 0)), nmax)
    lhs: dict = {}
    for (xa, ta), ca in left.items():
        for (xb, tb), cb in right_factor.items():
            if ta + tb <= nmax:
                key = (xa + xb, ta + tb)
                lhs[key] = lhs.get(key, 0) + ca * cb

    rhs: dict = {}
    for r in range(0, p1 + p2 + 1):
        sc = structure_constants(table, p1, p2, r)
        if not sc.value or sc.tpow > nmax:
            continue
        rhs[(-r, sc.tpow)] = rhs.get((-r, sc.tpow), 0) + sc.value
        if r == 0:
            # theta_0 = 1: N_{k,0} vanishes
            continue
        for k in range(1, nmax - sc.tpow - r + 1):
            v = table.get(k, r)
            if v:
                key = (k, sc.tpow + k + r)
                rhs[key] = rhs.get(key, 0) + sc.value * k * v
    return lhs, rhs


def verify_product(table: InvariantTable, p1: int, p2: int, nmax: int) -> Report:
    """Check the theta product rule on all coefficients with t-power <= nmax."""
    lhs, rhs = product_sides(table, p1, p2, nmax)
    return Report.compare(lhs, rhs)


def verify_wdvv(table: InvariantTable, p1: int, p2: int, kmax: int) -> Report:
    """Check the two-point WDVV identity at (p1, p2) for 1 <= k <= kmax."""
    lhs, rhs = {}, {}
    for k in range(1, kmax + 1):
        left = (k + p1) * table.get(k + p1, p2) + (k + p2) * table.get(k + p2, p1)
        for m in range(1, k):
            left += m * (k - m) * table.get(m, p1) * table.get(k - m, p2)
        right = Fraction(0)
        for r in range(1, p1 + p2 + 1):
            sc = structure_constants(table, p1, p2, r).value
            if sc:
                right += sc * k * table.get(k, r)
        key = (k, k + p1 + p2)
        lhs[key], rhs[key] = left, right
    return Report.compare(lhs, rhs)
