"""Toric geometries, curve classes, mirror maps and the proper potential.

Geometries are given by intersection data only: for each toric divisor
D_i its pairings with a curve basis e_1..e_r and its class in a nef basis
p_1..p_r dual to it, plus generators of the Mori cone and the coefficients
m_a of D = -K_X in the nef basis.
"""

from __future__ import annotations

import json
import os
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial, gcd
from pathlib import Path
from typing import Mapping, Sequence

from . import series as S
from .series import Context, Series


class GeometryError(ValueError):
    """Malformed geometry input; ``invariant`` names the violated check."""

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class SpecializationError(ValueError):
    """Raised when q^beta -> t^(D.beta) would collapse degree-zero towers."""


CORPUS_DIR = Path(__file__).parent / "corpus"


def corpus_dir() -> Path:
    env = os.environ.get("LGPOT_CORPUS")
    return Path(env) if env else CORPUS_DIR


@dataclass(frozen=True)
class ToricGeometry:
    name: str
    picard_rank: int
    divisor_names: tuple[str, ...]
    pairing_matrix: tuple[tuple[int, ...], ...]
    divisor_classes: tuple[tuple[int, ...], ...]
    mori_generators: tuple[tuple[int, ...], ...]
    anticanonical: tuple[int, ...]

    def __post_init__(self):
        r = self.picard_rank
        for attr in ("pairing_matrix", "divisor_classes", "mori_generators"):
            object.__setattr__(self, attr, tuple(tuple(int(x) for x in row) for row in getattr(self, attr)))
        object.__setattr__(self, "anticanonical", tuple(int(x) for x in self.anticanonical))
        object.__setattr__(self, "divisor_names", tuple(self.divisor_names))
        self._validate(r)

    def _validate(self, r: int):
        m = len(self.divisor_names)
        if r < 1:
            raise GeometryError("picard-rank", "picard_rank must be positive")
        if len(self.pairing_matrix) != m or len(self.divisor_classes) != m:
            raise GeometryError("shape", "one pairing row and one class row per divisor")
        for rows, what in ((self.pairing_matrix, "pairings"), (self.divisor_classes, "class")):
            for name, row in zip(self.divisor_names, rows):
                if len(row) != r:
                    raise GeometryError("shape", f"divisor {name}: {what} must have {r} entries")
        if len(self.anticanonical) != r:
            raise GeometryError("shape", f"anticanonical must have {r} entries")
        if not self.mori_generators:
            raise GeometryError("shape", "at least one Mori generator is required")
        for g in self.mori_generators:
            if len(g) != r:
                raise GeometryError("shape", f"Mori generator {list(g)} must have {r} entries")
        colsum = tuple(sum(col) for col in zip(*self.pairing_matrix))
        if colsum != self.anticanonical:
            raise GeometryError(
                "column-sums",
                f"pairing columns sum to {list(colsum)}, anticanonical is {list(self.anticanonical)}",
            )
        classsum = tuple(sum(col) for col in zip(*self.divisor_classes))
        if classsum != self.anticanonical:
            raise GeometryError(
                "class-sums",
                f"divisor classes sum to {list(classsum)}, anticanonical is {list(self.anticanonical)}",
            )
        if self.pairing_matrix != self.divisor_classes:
            # D_i . e_a is the p_a-coefficient of D_i when e is dual to p
            raise GeometryError("dual-basis", "pairings must equal nef-basis classes for a dual basis")
        for g in self.mori_generators:
            if any(x < 0 for x in g):
                raise GeometryError("nef-basis", f"Mori generator {list(g)} pairs negatively with a nef class")
            if self.ddeg(g) < 0:
                raise GeometryError("nef", f"D . {list(g)} < 0, anticanonical divisor is not nef")
            if not any(g):
                raise GeometryError("shape", "Mori generators must be nonzero")

    # basic data

    @property
    def n_divisors(self) -> int:
        return len(self.divisor_names)

    def pairings(self, coords: Sequence[int]) -> tuple[int, ...]:
        return tuple(sum(a * b for a, b in zip(row, coords)) for row in self.pairing_matrix)

    def ddeg(self, coords: Sequence[int]) -> int:
        return sum(a * b for a, b in zip(self.anticanonical, coords))

    @property
    def is_fano(self) -> bool:
        return all(self.ddeg(g) > 0 for g in self.mori_generators)

    @property
    def zero_degree_generators(self) -> tuple[tuple[int, ...], ...]:
        return tuple(g for g in self.mori_generators if self.ddeg(g) == 0)

    @property
    def dgrades_modulus(self) -> int:
        d = 0
        for g in self.mori_generators:
            d = gcd(d, self.ddeg(g))
        return d

    # I/O

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ToricGeometry":
        try:
            divisors = doc["divisors"]
            return cls(
                name=str(doc["name"]),
                picard_rank=int(doc["picard_rank"]),
                divisor_names=tuple(d["name"] for d in divisors),
                pairing_matrix=tuple(tuple(d["pairings"]) for d in divisors),
                divisor_classes=tuple(tuple(d["class"]) for d in divisors),
                mori_generators=tuple(tuple(g) for g in doc["mori_generators"]),
                anticanonical=tuple(doc["anticanonical"]),
            )
        except (KeyError, TypeError) as err:
            raise GeometryError("schema", f"missing or malformed field {err}") from None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "picard_rank": self.picard_rank,
            "divisors": [
                {"name": n, "pairings": list(p), "class": list(c)}
                for n, p, c in zip(self.divisor_names, self.pairing_matrix, self.divisor_classes)
            ],
            "mori_generators": [list(g) for g in self.mori_generators],
            "anticanonical": list(self.anticanonical),
        }

    @classmethod
    def load(cls, path) -> "ToricGeometry":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def load_corpus(name: str) -> ToricGeometry:
    """Load a bundled geometry by stem, e.g. ``load_corpus("p2")``."""
    return ToricGeometry.load(corpus_dir() / f"{name}.json")


@dataclass(frozen=True)
class CurveClass:
    coords: tuple[int, ...]
    pairings: tuple[int, ...]
    ddeg: int


def enumerate_classes(geom: ToricGeometry, max_ddeg: int, zero_deg_cap: int = 0,
                      include_zero: bool = False) -> list[CurveClass]:
    return list(_enumerate_classes(geom, max_ddeg, zero_deg_cap, include_zero))


@lru_cache(maxsize=64)
def _enumerate_classes(geom: ToricGeometry, max_ddeg: int, zero_deg_cap: int,
                       include_zero: bool) -> tuple[CurveClass, ...]:
    """Classes of the Mori monoid with D.beta <= max_ddeg.

    Breadth-first walk from 0; generators of D-degree zero are applied at
    most ``zero_deg_cap`` times each along a path.
    """
    r = geom.picard_rank
    gens = geom.mori_generators
    zero_idx = [i for i, g in enumerate(gens) if geom.ddeg(g) == 0]
    start = ((0,) * r, (0,) * len(zero_idx))
    seen_states = {start}
    found = {start[0]}
    queue = deque([start])
    while queue:
        coords, usage = queue.popleft()
        for gi, g in enumerate(gens):
            new_usage = usage
            if gi in zero_idx:
                k = zero_idx.index(gi)
                if usage[k] >= zero_deg_cap:
                    continue
                new_usage = usage[:k] + (usage[k] + 1,) + usage[k + 1:]
            new = tuple(a + b for a, b in zip(coords, g))
            if geom.ddeg(new) > max_ddeg:
                continue
            state = (new, new_usage)
            if state in seen_states:
                continue
            seen_states.add(state)
            found.add(new)
            queue.append(state)
    classes = [
        CurveClass(c, geom.pairings(c), geom.ddeg(c))
        for c in found
        if include_zero or any(c)
    ]
    classes.sort(key=lambda cl: (cl.ddeg, cl.coords))
    return tuple(classes)


def series_context(geom: ToricGeometry, cap: int, zero_deg_cap: int = 0,
                   prefix: str = "y") -> Context:
    """Series context whose variable a tracks e_a with weight D.e_a = m_a.

    Weight-zero variables get the largest exponent reached by an enumerated
    class (at least 1) as their exponent cap.
    """
    weights = geom.anticanonical
    var_caps: list[int | None] = [None] * geom.picard_rank
    if any(w == 0 for w in weights):
        classes = enumerate_classes(geom, cap, zero_deg_cap)
        for a, w in enumerate(weights):
            if w == 0:
                var_caps[a] = max([1] + [cl.coords[a] for cl in classes])
    names = tuple(f"{prefix}{a + 1}" for a in range(geom.picard_rank))
    return Context(weights, cap, tuple(var_caps), names)


def _factorial_quotient(top: int, bottoms) -> Fraction:
    den = 1
    for b in bottoms:
        den *= factorial(b)
    return Fraction(factorial(top), den)


def g_series(geom: ToricGeometry, cap: int, zero_deg_cap: int = 0) -> Series:
    """sum of (D.b - 1)!/prod (D_i.b)! y^b over b with all D_i.b >= 0, D.b >= 2."""
    ctx = series_context(geom, cap, zero_deg_cap)
    terms = {}
    for cl in enumerate_classes(geom, cap, zero_deg_cap):
        if cl.ddeg >= 2 and all(x >= 0 for x in cl.pairings):
            terms[cl.coords] = _factorial_quotient(cl.ddeg - 1, cl.pairings)
    return Series(ctx, terms)


def absolute_correction(geom: ToricGeometry, cap: int, zero_deg_cap: int = 0) -> list[Series]:
    """Absolute mirror-map correction, one series per nef-basis direction.

    Sums over classes with c_1.b = 0 and exactly one divisor D_j with
    D_j.b < 0, weighted by (-D_j.b - 1)!/prod_{i != j} (D_i.b)! and by the
    p_a-coefficient of D_j.
    """
    ctx = series_context(geom, cap, zero_deg_cap)
    per_dir: list[dict] = [{} for _ in range(geom.picard_rank)]
    for cl in enumerate_classes(geom, cap, zero_deg_cap):
        if cl.ddeg != 0:
            continue
        negative = [j for j, x in enumerate(cl.pairings) if x < 0]
        if len(negative) != 1:
            continue
        j = negative[0]
        coeff = _factorial_quotient(
            -cl.pairings[j] - 1, [x for i, x in enumerate(cl.pairings) if i != j]
        )
        for a in range(geom.picard_rank):
            c = geom.divisor_classes[j][a]
            if c:
                per_dir[a][cl.coords] = per_dir[a].get(cl.coords, 0) + c * coeff
    return [Series(ctx, t) for t in per_dir]


@dataclass(frozen=True)
class MirrorMap:
    """q_a = y_a * units[a](y); ``inverse`` holds y_a(q)."""

    units: tuple[Series, ...]
    forward: tuple[Series, ...]
    inverse: tuple[Series, ...] = field(repr=False)


def relative_mirror_map(geom: ToricGeometry, cap: int, zero_deg_cap: int = 0) -> MirrorMap:
    g = g_series(geom, cap, zero_deg_cap)
    corr = absolute_correction(geom, cap, zero_deg_cap)
    units, forward = [], []
    for a in range(geom.picard_rank):
        u = S.exp(g.scale(geom.anticanonical[a]) + corr[a])
        units.append(u)
        forward.append(u.shift(a))
    inverse = S.invert_map(forward)
    return MirrorMap(tuple(units), tuple(forward), tuple(inverse))


def proper_potential(geom: ToricGeometry, cap: int, zero_deg_cap: int = 0) -> Series:
    """exp(g(y(q))) in the q-variables; the potential itself is x^{-1} times this."""
    g = g_series(geom, cap, zero_deg_cap)
    mm = relative_mirror_map(geom, cap, zero_deg_cap)
    qctx = g.ctx.renamed([f"q{a + 1}" for a in range(geom.picard_rank)])
    y_of_q = [Series(qctx, y.terms) for y in mm.inverse]
    return S.exp(S.substitute(g, y_of_q))


def specialize(f: Series, geom: ToricGeometry | None = None) -> Series:
    """Apply q^b -> t^(D.b), i.e. collect coefficients by weighted degree.

    Refused when the geometry has Mori generators of D-degree zero: those
    towers would all land in t^0 and only their truncation is known.
    """
    if geom is not None and geom.zero_degree_generators:
        raise SpecializationError(
            f"{geom.name} has curve classes with D.beta = 0; collapsing q^beta -> t^(D.beta) "
            "would sum a truncated degree-zero tower"
        )
    ctx = Context((1,), f.cap, None, ("t",))
    out: dict = {}
    for exp, c in f.terms.items():
        d = f.ctx.degree(exp)
        out[(d,)] = out.get((d,), 0) + c
    return Series(ctx, out)


def two_point_invariants(potential: Series, geom: ToricGeometry | None = None):
    """Column p = 1 of the invariant table from the proper potential.

    N_{k-1,1} = [t^k] P / (k - 1) for k >= 2.
    """
    from .theta import InvariantTable

    flat = specialize(potential, geom)
    if flat.constant_term() != 1:
        raise ValueError("potential must have constant term 1")
    if flat[1]:
        raise ValueError(f"potential has a nonzero t^1 coefficient {flat[1]}")
    entries = {}
    for (k,), c in flat.terms.items():
        if k >= 2:
            entries[(k - 1, 1)] = c / (k - 1)
    modulus = geom.dgrades_modulus if geom is not None else _support_gcd(flat)
    return InvariantTable(entries, modulus=modulus, max_grade=flat.cap, pmax=1)


def _support_gcd(flat: Series) -> int:
    d = 0
    for (k,) in flat.terms:
        d = gcd(d, k)
    return d
