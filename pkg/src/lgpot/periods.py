"""Classical periods of Laurent polynomials and the one-variable pipeline."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Mapping, Sequence

from . import series as S
from .series import Context, Series


class PeriodError(ValueError):
    pass


@dataclass(frozen=True)
class LaurentPolynomial:
    nvars: int
    terms: tuple[tuple[tuple[int, ...], Fraction], ...]

    def __post_init__(self):
        seen = set()
        clean = []
        for exp, c in self.terms:
            exp = tuple(int(e) for e in exp)
            if len(exp) != self.nvars:
                raise ValueError(f"exponent {list(exp)} does not have {self.nvars} entries")
            if exp in seen:
                raise ValueError(f"duplicate exponent {list(exp)}")
            seen.add(exp)
            c = Fraction(c)
            if c:
                clean.append((exp, c))
        object.__setattr__(self, "terms", tuple(sorted(clean)))

    @classmethod
    def from_dict(cls, doc: Mapping) -> "LaurentPolynomial":
        return cls(
            int(doc["nvars"]),
            tuple((tuple(t["exp"]), Fraction(int(t["num"]), int(t["den"]))) for t in doc["terms"]),
        )

    def to_dict(self) -> dict:
        return {
            "nvars": self.nvars,
            "terms": [
                {"exp": list(e), "num": str(c.numerator), "den": str(c.denominator)}
                for e, c in self.terms
            ],
        }

    @classmethod
    def load(cls, path) -> "LaurentPolynomial":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def as_dict(self) -> dict[tuple[int, ...], Fraction]:
        return dict(self.terms)


def _times(a: dict, b: dict) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0) + ca * cb
    return {e: c for e, c in out.items() if c}


@dataclass(frozen=True)
class PeriodSequence:
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))
        if not self.coeffs or self.coeffs[0] != 1:
            raise PeriodError("period sequence must start with 1")

    def __getitem__(self, k: int) -> Fraction:
        return self.coeffs[k]

    def __len__(self):
        return len(self.coeffs)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def to_dict(self) -> dict:
        return {"coeffs": [str(c) for c in self.coeffs]}

    @classmethod
    def from_dict(cls, doc: Mapping) -> "PeriodSequence":
        return cls(tuple(Fraction(c) for c in doc["coeffs"]))


def classical_period(f: LaurentPolynomial, K: int, prune: bool = False) -> PeriodSequence:
    """pi_k = constant term of f**k for 0 <= k <= K.

    With ``prune`` set, a term of f**k is dropped when some coordinate of
    its exponent cannot be cancelled by K - k further factors; this bound
    is necessary for reaching zero, hence safe.
    """
    if K < 0:
        raise ValueError("K must be nonnegative")
    fd = f.as_dict()
    zero = (0,) * f.nvars
    lo = [min((e[j] for e in fd), default=0) for j in range(f.nvars)]
    hi = [max((e[j] for e in fd), default=0) for j in range(f.nvars)]
    power = {zero: Fraction(1)}
    coeffs = [Fraction(1)]
    for k in range(1, K + 1):
        power = _times(power, fd)
        if prune:
            left = K - k
            power = {
                e: c for e, c in power.items()
                if all(left * lo[j] <= -e[j] <= left * hi[j] for j in range(f.nvars))
            }
        coeffs.append(power.get(zero, Fraction(0)))
    return PeriodSequence(tuple(coeffs))


def t_context(cap: int, name: str = "t") -> Context:
    return Context((1,), cap, None, (name,))


def g_from_period(pi: PeriodSequence) -> Series:
    """g(t) = sum_{k>=2} pi_k t^k / k, so that 1 + t g'(t) recovers the period."""
    if len(pi) > 1 and pi[1]:
        raise PeriodError(f"pi_1 = {pi[1]} is nonzero; not the period of a Fano mirror")
    ctx = t_context(pi.order)
    return Series(ctx, {(k,): pi[k] / k for k in range(2, len(pi))})


def period_from_g(g: Series) -> PeriodSequence:
    """Inverse of :func:`g_from_period`: coefficients of 1 + t g'(t)."""
    coeffs = g.coefficients()
    return PeriodSequence(tuple([Fraction(1)] + [k * c for k, c in enumerate(coeffs)][1:]))


def potential_from_period(pi: PeriodSequence, cap: int) -> Series:
    """exp(g(Y(s))) where Y(s) inverts s = Y exp(g(Y)); graded by D-degree."""
    if cap > pi.order:
        raise PeriodError(f"period known to order {pi.order}, potential requested to {cap}")
    g = g_from_period(pi)
    g = Series(t_context(cap, "Y"), g.terms)
    forward = S.exp(g).shift(0)
    (Y,) = S.invert_map([forward])
    sctx = t_context(cap, "s")
    return S.exp(S.substitute(g, [Series(sctx, Y.terms)]))


def harmonic(m: int) -> Fraction:
    return sum((Fraction(1, j) for j in range(1, m + 1)), Fraction(0))


def v10_quantum_period(K: int) -> list[Fraction]:
    """Coefficients c_0..c_K of the unregularized V_10 quantum period."""
    inner = [Fraction(0)] * (K + 1)
    for n in range(K + 1):
        for l in range(n + 1):
            m = n - l
            c = Fraction(
                (-1) ** n * factorial(n) ** 2 * factorial(2 * n),
                factorial(l) ** 5 * factorial(m) ** 5,
            )
            inner[n] += c * (1 - 5 * (m - l) * harmonic(m))
    damp = [Fraction((-6) ** j, factorial(j)) for j in range(K + 1)]
    return [sum(damp[j] * inner[k - j] for j in range(k + 1)) for k in range(K + 1)]


def v10_regularized_period(K: int) -> PeriodSequence:
    """pi_k = k! c_k for the V_10 quantum period."""
    c = v10_quantum_period(K)
    return PeriodSequence(tuple(factorial(k) * ck for k, ck in enumerate(c)))


def compare_g(toric_g: Series, period_g: Series) -> "Report":
    """Exact coefficient comparison of two one-variable g-series."""
    from .theta import Mismatch, Report

    cap = min(toric_g.cap, period_g.cap)
    bad = []
    for k in range(cap + 1):
        a, b = toric_g[k], period_g[k]
        if a != b:
            bad.append(Mismatch(tpow=k, lhs=a, rhs=b))
    return Report(not bad, tuple(bad))


def sequence_support(coeffs: Sequence[Fraction]) -> list[int]:
    return [k for k, c in enumerate(coeffs) if c]
