"""Exact truncated multivariate power series over the rationals.

A :class:`Series` lives in a :class:`Context`: a fixed number of variables,
a positive weight per variable, and a truncation order ``cap`` on the
weighted total degree.  Weight-zero variables are allowed but must carry
their own exponent cap.  Monomials outside these bounds form a monomial
ideal, so every operation below is exact on the retained coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

try:
    from gmpy2 import mpq as _fast_rational
except ImportError:  # pragma: no cover
    _fast_rational = None

Exponent = tuple[int, ...]


class ContextMismatch(ValueError):
    """Raised when two series with different contexts are combined."""


@dataclass(frozen=True)
class Context:
    weights: tuple[int, ...]
    cap: int
    var_caps: tuple[int | None, ...] | None = None
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        weights = tuple(int(w) for w in self.weights)
        object.__setattr__(self, "weights", weights)
        if self.cap < 0:
            raise ValueError("cap must be nonnegative")
        if any(w < 0 for w in weights):
            raise ValueError("weights must be nonnegative")
        var_caps = self.var_caps
        if var_caps is None:
            var_caps = (None,) * len(weights)
        var_caps = tuple(None if c is None else int(c) for c in var_caps)
        if len(var_caps) != len(weights):
            raise ValueError("one exponent cap per variable expected")
        for w, c in zip(weights, var_caps):
            if w == 0 and c is None:
                raise ValueError("weight-zero variables need an exponent cap")
        object.__setattr__(self, "var_caps", var_caps)
        names = self.names
        if names is None:
            names = tuple(f"y{i + 1}" for i in range(len(weights)))
        if len(names) != len(weights):
            raise ValueError("one name per variable expected")
        object.__setattr__(self, "names", tuple(names))

    @property
    def nvars(self) -> int:
        return len(self.weights)

    def key(self):
        # names are display metadata only
        return (self.weights, self.cap, self.var_caps)

    def compatible(self, other: "Context") -> bool:
        return self.key() == other.key()

    def degree(self, exp: Exponent) -> int:
        return sum(w * e for w, e in zip(self.weights, exp))

    def admits(self, exp: Exponent) -> bool:
        if self.degree(exp) > self.cap:
            return False
        for e, c in zip(exp, self.var_caps):
            if c is not None and e > c:
                return False
        return True

    def nilpotency_bound(self) -> int:
        """Upper bound on the plain total degree of any retained monomial."""
        positive = [w for w in self.weights if w > 0]
        bound = self.cap // min(positive) if positive else 0
        bound += sum(c for w, c in zip(self.weights, self.var_caps) if w == 0)
        return bound

    def with_cap(self, cap: int) -> "Context":
        return Context(self.weights, cap, self.var_caps, self.names)

    def renamed(self, names: Sequence[str]) -> "Context":
        return Context(self.weights, self.cap, self.var_caps, tuple(names))


class Series:
    """Immutable sparse truncated power series with Fraction coefficients."""

    __slots__ = ("ctx", "terms", "_degrees")

    def __init__(self, ctx: Context, terms: Mapping[Exponent, object] | None = None):
        self.ctx = ctx
        clean: dict[Exponent, Fraction] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != ctx.nvars or any(e < 0 for e in exp):
                raise ValueError(f"bad exponent {exp} for {ctx.nvars} variables")
            c = Fraction(c)
            if c and ctx.admits(exp):
                clean[exp] = clean.get(exp, 0) + c
        self.terms = {e: c for e, c in clean.items() if c}
        self._degrees = None

    @classmethod
    def _raw(cls, ctx: Context, terms: dict[Exponent, Fraction]) -> "Series":
        # trusted constructor: terms already admitted and free of zeros
        obj = cls.__new__(cls)
        obj.ctx = ctx
        obj.terms = terms
        obj._degrees = None
        return obj

    # construction helpers

    @classmethod
    def zero(cls, ctx: Context) -> "Series":
        return cls._raw(ctx, {})

    @classmethod
    def constant(cls, ctx: Context, c=1) -> "Series":
        return cls(ctx, {(0,) * ctx.nvars: c})

    @classmethod
    def variable(cls, ctx: Context, i: int) -> "Series":
        exp = [0] * ctx.nvars
        exp[i] = 1
        return cls(ctx, {tuple(exp): 1})

    @classmethod
    def monomial(cls, ctx: Context, exp: Sequence[int], c=1) -> "Series":
        return cls(ctx, {tuple(exp): c})

    @classmethod
    def from_coefficients(cls, ctx: Context, coeffs: Sequence) -> "Series":
        """One-variable series from a dense coefficient list."""
        if ctx.nvars != 1:
            raise ValueError("from_coefficients needs a one-variable context")
        return cls(ctx, {(k,): c for k, c in enumerate(coeffs)})

    # inspection

    @property
    def nvars(self) -> int:
        return self.ctx.nvars

    @property
    def cap(self) -> int:
        return self.ctx.cap

    def coefficient(self, exp: Sequence[int]) -> Fraction:
        return self.terms.get(tuple(exp), Fraction(0))

    def __getitem__(self, exp) -> Fraction:
        if isinstance(exp, int):
            exp = (exp,)
        return self.coefficient(exp)

    def constant_term(self) -> Fraction:
        return self.coefficient((0,) * self.nvars)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficients(self) -> list[Fraction]:
        """Dense coefficient list of a one-variable series, up to cap."""
        if self.nvars != 1:
            raise ValueError("coefficients() needs a one-variable series")
        w = self.ctx.weights[0]
        top = self.cap // w if w else self.ctx.var_caps[0]
        return [self.coefficient((k,)) for k in range(top + 1)]

    def sorted_terms(self) -> list[tuple[Exponent, Fraction]]:
        return sorted(self.terms.items())

    def _packed(self):
        """(degree, packed exponent, coefficient) triples sorted by degree."""
        if self._degrees is None:
            deg = self.ctx.degree
            pack = _packer(self.ctx)[0]
            conv = _to_fast if _fast_rational is not None else (lambda c: c)
            self._degrees = sorted(
                ((deg(e), pack(e), conv(c)) for e, c in self.terms.items()), key=lambda t: t[0]
            )
        return self._degrees

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return self.ctx.compatible(other.ctx) and self.terms == other.terms

    def __hash__(self):
        return hash((self.ctx.key(), frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "Series(0)"
        parts = []
        for exp, c in self.sorted_terms():
            mono = "*".join(
                n if e == 1 else f"{n}^{e}"
                for n, e in zip(self.ctx.names, exp)
                if e
            )
            parts.append(f"{c}*{mono}" if mono else str(c))
        return "Series(" + " + ".join(parts) + ")"

    # arithmetic

    def _check(self, other: "Series"):
        if not self.ctx.compatible(other.ctx):
            raise ContextMismatch(f"incompatible series contexts {self.ctx.key()} vs {other.ctx.key()}")

    def _coerce(self, other) -> "Series":
        if isinstance(other, Series):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return Series.constant(self.ctx, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return Series._raw(self.ctx, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return add(self, -other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return add(other, -self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, Series):
            return mul(self, other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / Fraction(other))
        if isinstance(other, Series):
            return mul(self, reciprocal(other))
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            return reciprocal(self) ** (-k)
        result = Series.constant(self.ctx, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def scale(self, c) -> "Series":
        c = Fraction(c)
        if not c:
            return Series.zero(self.ctx)
        return Series._raw(self.ctx, {e: v * c for e, v in self.terms.items()})

    def truncate(self, cap: int) -> "Series":
        """Reinterpret in the same context with a smaller cap."""
        if cap > self.cap:
            raise ValueError("truncate can only lower the cap")
        ctx = self.ctx.with_cap(cap)
        return Series(ctx, self.terms)

    def divide_by_variable(self, i: int) -> "Series":
        """Exact division by ``y_i``; every term must contain ``y_i``."""
        out = {}
        for exp, c in self.terms.items():
            if exp[i] == 0:
                raise ValueError(f"term {exp} is not divisible by variable {i}")
            e = list(exp)
            e[i] -= 1
            out[tuple(e)] = c
        return Series._raw(self.ctx, out)

    def derivative(self, i: int) -> "Series":
        out = {}
        for exp, c in self.terms.items():
            if exp[i]:
                e = list(exp)
                e[i] -= 1
                out[tuple(e)] = c * exp[i]
        return Series._raw(self.ctx, out)

    def shift(self, i: int, k: int = 1) -> "Series":
        """Multiply by ``y_i**k``, dropping terms pushed past the bounds."""
        out = {}
        for exp, c in self.terms.items():
            e = list(exp)
            e[i] += k
            e = tuple(e)
            if self.ctx.admits(e):
                out[e] = c
        return Series._raw(self.ctx, out)

    # serialization

    def to_dict(self) -> dict:
        doc = {
            "vars": list(self.ctx.names),
            "weights": list(self.ctx.weights),
            "cap": self.ctx.cap,
        }
        if any(c is not None for c in self.ctx.var_caps):
            doc["var_caps"] = list(self.ctx.var_caps)
        doc["terms"] = [
            {"exp": list(e), "num": str(c.numerator), "den": str(c.denominator)}
            for e, c in self.sorted_terms()
        ]
        return doc

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Series":
        ctx = Context(
            tuple(doc["weights"]),
            int(doc["cap"]),
            tuple(doc["var_caps"]) if doc.get("var_caps") is not None else None,
            tuple(doc["vars"]),
        )
        terms = {}
        for t in doc["terms"]:
            exp = tuple(int(e) for e in t["exp"])
            if exp in terms:
                raise ValueError(f"duplicate exponent {list(exp)} in series terms")
            terms[exp] = Fraction(int(t["num"]), int(t["den"]))
        return cls(ctx, terms)


def _to_fast(c: Fraction):
    return _fast_rational(c.numerator, c.denominator)


def _from_fast(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    return Fraction(int(c.numerator), int(c.denominator))


def add(a: Series, b: Series) -> Series:
    a._check(b)
    out = dict(a.terms)
    for e, c in b.terms.items():
        v = out.get(e, 0) + c
        if v:
            out[e] = v
        else:
            out.pop(e, None)
    return Series._raw(a.ctx, out)


_PACKERS: dict = {}


def _packer(ctx: Context):
    """Pack exponent vectors into one integer so exponent addition is int addition."""
    key = ctx.key()
    if key not in _PACKERS:
        n = ctx.nvars
        bits = (2 * ctx.nilpotency_bound() + 1).bit_length() + 1
        mask = (1 << bits) - 1
        shifts = [bits * i for i in range(n)]

        def pack(exp):
            v = 0
            for e, sh in zip(exp, shifts):
                v |= e << sh
            return v

        def unpack(v):
            return tuple((v >> sh) & mask for sh in shifts)

        limited = tuple((shifts[i], c) for i, c in enumerate(ctx.var_caps) if c is not None)
        _PACKERS[key] = (pack, unpack, limited, mask)
    return _PACKERS[key]


def mul(a: Series, b: Series) -> Series:
    """Cauchy product truncated to the common context."""
    a._check(b)
    ctx = a.ctx
    if not a.terms or not b.terms:
        return Series.zero(ctx)
    cap = ctx.cap
    _, unpack, limited, mask = _packer(ctx)
    bs = b._packed()
    out: dict = {}
    get = out.get
    for da, ea, ca in a._packed():
        room = cap - da
        for db, eb, cb in bs:
            if db > room:
                break
            e = ea + eb
            if limited:
                for sh, c in limited:
                    if (e >> sh) & mask > c:
                        break
                else:
                    out[e] = get(e, 0) + ca * cb
                continue
            out[e] = get(e, 0) + ca * cb
    return Series._raw(ctx, {unpack(e): _from_fast(c) for e, c in out.items() if c})


def _require_no_constant(f: Series, opname: str):
    if f.constant_term():
        raise ValueError(f"{opname} needs a series with zero constant term")


def _power_sum(f: Series, coeff) -> Series:
    """Sum of coeff(k) * f**k over k >= 1 until the powers vanish."""
    result = Series.zero(f.ctx)
    power = f
    k = 1
    while power.terms:
        c = coeff(k)
        if c:
            result = add(result, power.scale(c))
        power = mul(power, f)
        k += 1
    return result


def exp(f: Series) -> Series:
    """exp(f) for f with zero constant term."""
    _require_no_constant(f, "exp")
    one = Series.constant(f.ctx, 1)
    result = one
    term = one
    k = 1
    while True:
        term = mul(term, f).scale(Fraction(1, k))
        if not term.terms:
            return result
        result = add(result, term)
        k += 1


def log1p(f: Series) -> Series:
    """log(1 + f) for f with zero constant term."""
    _require_no_constant(f, "log1p")
    return _power_sum(f, lambda k: Fraction((-1) ** (k + 1), k))


def log(u: Series) -> Series:
    """log of a unit series with constant term 1."""
    if u.constant_term() != 1:
        raise ValueError("log needs constant term 1")
    return log1p(u - 1)


def reciprocal(u: Series) -> Series:
    """1/u for a series with nonzero constant term."""
    c0 = u.constant_term()
    if not c0:
        raise ZeroDivisionError("series with zero constant term is not invertible")
    h = (u.scale(1 / c0) - 1)
    inv = Series.constant(u.ctx, 1) + _power_sum(h, lambda k: (-1) ** k)
    return inv.scale(1 / c0)


def substitute(f: Series, images: Sequence[Series]) -> Series:
    """Replace variable i of f by images[i], evaluated in the images' context."""
    if len(images) != f.nvars:
        raise ValueError(f"expected {f.nvars} images, got {len(images)}")
    if f.nvars == 0:
        raise ValueError("substitute needs at least one variable")
    target = images[0].ctx
    for img in images:
        if not img.ctx.compatible(target):
            raise ContextMismatch("substitution images must share a context")
        if img.constant_term():
            raise ValueError("substitution image has a nonzero constant term")

    # Horner scheme in each variable, recursing on the remaining ones
    powers: list[dict[int, Series]] = [{} for _ in images]

    def power(i: int, k: int) -> Series:
        cache = powers[i]
        if k not in cache:
            if k == 0:
                cache[k] = Series.constant(target, 1)
            else:
                cache[k] = mul(power(i, k - 1), images[i])
        return cache[k]

    def evaluate(terms: dict[Exponent, Fraction], i: int) -> Series:
        if i == f.nvars:
            (c,) = terms.values()
            return Series.constant(target, c)
        groups: dict[int, dict[Exponent, Fraction]] = {}
        for exp, c in terms.items():
            groups.setdefault(exp[i], {})[exp] = c
        result = Series.zero(target)
        for k in sorted(groups):
            inner = evaluate(groups[k], i + 1)
            if inner.terms:
                result = add(result, mul(inner, power(i, k)) if k else inner)
        return result

    if not f.terms:
        return Series.zero(target)
    return evaluate(f.terms, 0)


def invert_map(maps: Sequence[Series]) -> list[Series]:
    """Functional inverse of q_i = y_i * u_i(y) with u_i(0) = 1.

    Fixed-point iteration y_i <- q_i / u_i(y); each pass fixes at least one
    more order, so the loop stops once an iterate repeats.
    """
    n = len(maps)
    if n == 0:
        raise ValueError("invert_map needs at least one map")
    ctx = maps[0].ctx
    for m in maps:
        if not m.ctx.compatible(ctx):
            raise ContextMismatch("maps must share a context")
    if n != ctx.nvars:
        raise ValueError("number of maps must equal the number of variables")
    units = []
    for i, m in enumerate(maps):
        try:
            u = m.divide_by_variable(i)
        except ValueError as err:
            raise ValueError(f"map {i} is not of the form y_{i}*(1 + ...): {err}") from None
        if u.constant_term() != 1:
            raise ValueError(f"map {i} does not start with y_{i} (coefficient {u.constant_term()})")
        units.append(u)
    qs = [Series.variable(ctx, i) for i in range(n)]
    ys = list(qs)
    for _ in range(ctx.nilpotency_bound() + 2):
        new = [mul(qs[i], reciprocal(substitute(units[i], ys))) for i in range(n)]
        if new == ys:
            return new
        ys = new
    raise RuntimeError("fixed-point inversion did not converge")


def random_series(rng, ctx: Context, density: float = 0.5, constant: bool = False,
                  num_range: int = 9, den_range: int = 4) -> Series:
    """Random series with small rational coefficients (test helper)."""
    terms = {}
    for exp in monomials(ctx):
        if not constant and not any(exp):
            continue
        if rng.random() < density:
            num = rng.randint(-num_range, num_range)
            den = rng.randint(1, den_range)
            terms[exp] = Fraction(num, den)
    return Series(ctx, terms)


def monomials(ctx: Context) -> Iterable[Exponent]:
    """All retained monomials of a context, in lexicographic order."""
    def rec(i: int, room: int, prefix: list[int]):
        if i == ctx.nvars:
            yield tuple(prefix)
            return
        w, c = ctx.weights[i], ctx.var_caps[i]
        top = room // w if w else c
        if c is not None:
            top = min(top, c)
        for e in range(top + 1):
            prefix.append(e)
            yield from rec(i + 1, room - w * e, prefix)
            prefix.pop()

    yield from rec(0, ctx.cap, [])
