"""Exact coefficients: rational functions of spectral parameters over Q(i).

A :class:`ParamScalar` is stored as a reduced fraction whose numerator is a
sparse polynomial with Gaussian-rational coefficients and whose denominator
is a product of monic linear forms in the parameters.  Every denominator the
pole constructions produce (``a - b``, ``lambda - c``, ``a``) is of this
kind, and keeping it factored makes reduction a matter of exact divisibility
tests instead of multivariate gcds.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from functools import lru_cache
from numbers import Rational
from typing import Dict, Iterable, Mapping, Tuple

__all__ = [
    "GaussRat",
    "ParamScalar",
    "ParamError",
    "PoleCollision",
    "I_UNIT",
]


class ParamError(ValueError):
    """Raised for unsupported coefficient arithmetic."""


class PoleCollision(ParamError):
    """A substitution made a stored denominator vanish."""


class GaussRat:
    """Exact element of Q(i)."""

    __slots__ = ("re", "im", "_hash")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)
        self._hash = hash((self.re, self.im))

    @classmethod
    def coerce(cls, x) -> "GaussRat":
        if isinstance(x, GaussRat):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real).limit_denominator(10**12),
                       Fraction(x.imag).limit_denominator(10**12))
        if isinstance(x, (int, Rational)):
            return cls(Fraction(x))
        if isinstance(x, str):
            return cls(Fraction(x))
        raise TypeError(f"cannot coerce {x!r} to a Gaussian rational")

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if not isinstance(other, GaussRat):
            try:
                other = GaussRat.coerce(other)
            except TypeError:
                return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return self._hash

    def __lt__(self, other: "GaussRat") -> bool:
        # arbitrary total order, only used to sort canonical keys
        return (self.re, self.im) < (other.re, other.im)

    def __add__(self, o):
        o = GaussRat.coerce(o)
        return GaussRat(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = GaussRat.coerce(o)
        return GaussRat(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return GaussRat.coerce(o) - self

    def __neg__(self):
        return GaussRat(-self.re, -self.im)

    def __mul__(self, o):
        o = GaussRat.coerce(o)
        if not self.im and not o.im:
            return GaussRat(self.re * o.re)
        return GaussRat(self.re * o.re - self.im * o.im,
                        self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def inverse(self) -> "GaussRat":
        if not self:
            raise ZeroDivisionError("inverse of zero")
        if not self.im:
            return GaussRat(1 / self.re)
        n = self.re * self.re + self.im * self.im
        return GaussRat(self.re / n, -self.im / n)

    def __truediv__(self, o):
        return self * GaussRat.coerce(o).inverse()

    def __rtruediv__(self, o):
        return GaussRat.coerce(o) * self.inverse()

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def is_real(self) -> bool:
        return not self.im

    def __repr__(self):
        return f"GaussRat({self})"

    def __str__(self):
        def frac(f: Fraction) -> str:
            return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"

        def imag(f: Fraction) -> str:
            n, d = f.numerator, f.denominator
            head = "i" if n == 1 else "-i" if n == -1 else f"{n}i"
            return head if d == 1 else f"{head}/{d}"

        if not self.im:
            return frac(self.re)
        if not self.re:
            return imag(self.im)
        im = imag(self.im)
        sep = " - " if im.startswith("-") else " + "
        return f"({frac(self.re)}{sep}{im.lstrip('-')})"


ZERO = GaussRat(0)
ONE = GaussRat(1)
I_UNIT = GaussRat(0, 1)

# Polynomials: dict mapping monomial -> GaussRat, where a monomial is a sorted
# tuple of (variable, exponent) pairs; () is the constant monomial.
Mono = Tuple[Tuple[str, int], ...]
Poly = Dict[Mono, GaussRat]


def _mono_mul(m1: Mono, m2: Mono) -> Mono:
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for v, e in m2:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def _padd(p: Poly, q: Poly, sign: int = 1) -> Poly:
    out = dict(p)
    for m, c in q.items():
        s = out.get(m)
        v = c if sign > 0 else -c
        if s is not None:
            v = s + v
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def _pmul(p: Poly, q: Poly) -> Poly:
    if len(p) == 1 and () in p:
        c = p[()]
        return {m: c * d for m, d in q.items()} if c != ONE else dict(q)
    if len(q) == 1 and () in q:
        c = q[()]
        return {m: c * d for m, d in p.items()} if c != ONE else dict(p)
    out: Poly = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = _mono_mul(m1, m2)
            v = c1 * c2
            s = out.get(m)
            if s is not None:
                v = s + v
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def _pscale(p: Poly, c: GaussRat) -> Poly:
    if c == ONE:
        return dict(p)
    return {m: c * d for m, d in p.items()} if c else {}


def _pvars(p: Poly) -> set:
    return {v for m in p for v, _ in m}


def _pdegree(p: Poly) -> int:
    return max((sum(e for _, e in m) for m in p), default=0)


def _split_var(p: Poly, var: str) -> Dict[int, Poly]:
    """Write ``p`` as a polynomial in ``var`` with coefficients in the others."""
    out: Dict[int, Poly] = {}
    for m, c in p.items():
        k = 0
        rest = []
        for v, e in m:
            if v == var:
                k = e
            else:
                rest.append((v, e))
        out.setdefault(k, {})[tuple(rest)] = c
    return out


def _linear_root(f: Poly) -> Tuple[str, Poly]:
    """For monic linear ``f = x + r`` return ``(x, -r)``."""
    lead = min(v for m in f for v, _ in m)
    root = {m: -c for m, c in f.items() if m != ((lead, 1),)}
    return lead, root


def _divide_linear(p: Poly, f: Poly):
    """Exact quotient ``p / f`` for monic linear ``f``, or ``None``."""
    x, s = _linear_root(f)
    parts = _split_var(p, x)
    n = max(parts)
    if n == 0:
        return None
    # synthetic division by (x - s) in the coefficient ring of the other variables
    quot: Dict[int, Poly] = {}
    carry: Poly = {}
    for k in range(n, 0, -1):
        ck = _padd(parts.get(k, {}), carry)
        quot[k - 1] = ck
        carry = _pmul(ck, s)
    remainder = _padd(parts.get(0, {}), carry)
    if remainder:
        return None
    out: Poly = {}
    for k, coeff in quot.items():
        xm = ((x, k),) if k else ()
        for m, c in coeff.items():
            if c:
                out[_mono_mul(m, xm)] = c
    return out


def _normalize_linear(f: Poly) -> Tuple[GaussRat, Poly]:
    """Return ``(c, g)`` with ``f = c * g`` and ``g`` monic in its least variable."""
    lead = min(v for m in f for v, _ in m)
    c = f[((lead, 1),)]
    inv = c.inverse()
    return c, {m: d * inv for m, d in f.items()}


def _freeze(p: Poly) -> Tuple:
    return tuple(sorted(p.items(), key=lambda kv: kv[0]))


class ParamScalar:
    """Immutable exact rational function in named parameters.

    ``num`` is a polynomial, ``den`` maps frozen monic linear forms to
    positive exponents.  The fraction is kept reduced, so structural equality
    is mathematical equality.
    """

    __slots__ = ("num", "den", "_key", "_hash")

    def __init__(self, num: Poly, den: Mapping[Tuple, int] = (), _reduced: bool = False):
        num = {m: c for m, c in num.items() if c}
        den = dict(den)
        if not num:
            den = {}
        elif not _reduced and den:
            num, den = _cancel(num, den)
        self.num = num
        self.den = den
        self._key = (_freeze(num), tuple(sorted(den.items())))
        self._hash = hash(self._key)

    # constructors -----------------------------------------------------------
    @classmethod
    def const(cls, c) -> "ParamScalar":
        c = GaussRat.coerce(c)
        return cls({(): c} if c else {})

    @classmethod
    def var(cls, name: str) -> "ParamScalar":
        return cls({((name, 1),): ONE})

    @classmethod
    def coerce(cls, x) -> "ParamScalar":
        if isinstance(x, ParamScalar):
            return x
        return cls.const(x)

    # predicates -------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self):
        return bool(self.num)

    def is_constant(self) -> bool:
        return not self.den and all(m == () for m in self.num)

    def is_polynomial(self) -> bool:
        return not self.den

    def constant_value(self) -> GaussRat:
        if not self.is_constant():
            raise ParamError(f"{self} is not a constant")
        return self.num.get((), ZERO)

    def variables(self) -> set:
        out = _pvars(self.num)
        for f, _ in self.den.items():
            out |= {v for m, _ in f for v, _ in m}
        return out

    def __eq__(self, other):
        if not isinstance(other, ParamScalar):
            try:
                other = ParamScalar.coerce(other)
            except TypeError:
                return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return self._hash

    def sort_key(self):
        return self._key

    # arithmetic -------------------------------------------------------------
    def __add__(self, other):
        other = ParamScalar.coerce(other)
        if not other.num:
            return self
        if not self.num:
            return other
        return _add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return ParamScalar({m: -c for m, c in self.num.items()}, self.den, _reduced=True)

    def __sub__(self, other):
        return self + (-ParamScalar.coerce(other))

    def __rsub__(self, other):
        return ParamScalar.coerce(other) - self

    def __mul__(self, other):
        other = ParamScalar.coerce(other)
        if not self.num or not other.num:
            return ParamScalar({})
        if other._key == _ONE_KEY:
            return self
        if self._key == _ONE_KEY:
            return other
        return _mul(self, other)

    __rmul__ = __mul__

    def inverse(self) -> "ParamScalar":
        if not self.num:
            raise ZeroDivisionError("inverse of zero coefficient")
        scale, factors = _factor_linear(self.num)
        den: Dict[Tuple, int] = {}
        for f, e in factors.items():
            den[f] = den.get(f, 0) + e
        num: Poly = {(): scale.inverse()}
        # old denominator factors move to the numerator
        for f, e in self.den.items():
            fp = dict(f)
            for _ in range(e):
                num = _pmul(num, fp)
        return ParamScalar(num, den)

    def __truediv__(self, other):
        other = ParamScalar.coerce(other)
        if other.is_constant():
            return self * ParamScalar.const(other.constant_value().inverse())
        return self * other.inverse()

    def __rtruediv__(self, other):
        return ParamScalar.coerce(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = ParamScalar.const(1)
        for _ in range(k):
            out = out * self
        return out

    # evaluation -------------------------------------------------------------
    def evaluate(self, values: Mapping[str, complex]) -> complex:
        def peval(p) -> complex:
            total = 0j
            for m, c in p:
                t = complex(c)
                for v, e in m:
                    t *= values[v] ** e
                total += t
            return total

        val = peval(self.num.items())
        for f, e in self.den.items():
            d = peval(f)
            val /= d ** e
        return val

    def substitute(self, name: str, value) -> "ParamScalar":
        """Replace the parameter ``name`` by ``value`` (a ParamScalar)."""
        value = ParamScalar.coerce(value)
        if name not in self.variables():
            return self

        def psub(p) -> ParamScalar:
            total = ParamScalar({})
            for m, c in p:
                term = ParamScalar.const(c)
                rest = []
                for v, e in m:
                    if v == name:
                        term = term * value ** e
                    else:
                        rest.append((v, e))
                total = total + term * ParamScalar({tuple(rest): ONE})
            return total

        out = psub(self.num.items())
        for f, e in self.den.items():
            d = psub(f)
            if d.is_zero():
                raise PoleCollision(
                    f"pole collision: denominator {_fmt_poly(dict(f))} vanishes at {name} = {value}")
            out = out / d ** e
        return out

    def degree_in(self, name: str) -> int:
        """Degree of the numerator in ``name`` (requires no ``name`` in the denominator)."""
        for f in self.den:
            if any(v == name for m, _ in f for v, _ in m):
                raise ParamError(f"{self} has {name} in its denominator")
        return max((e for m in self.num for v, e in m if v == name), default=0)

    def laurent_terms(self, names: Iterable[str]):
        """Yield ``(exponents, GaussRat)`` for a polynomial in ``names`` only."""
        names = tuple(names)
        if self.den:
            raise ParamError(f"expected a polynomial coefficient, got {self}")
        for m, c in self.num.items():
            d = dict(m)
            if set(d) - set(names):
                raise ParamError(f"coefficient {self} involves parameters outside {names}")
            yield tuple(d.get(n, 0) for n in names), c

    # printing ---------------------------------------------------------------
    def __repr__(self):
        return f"ParamScalar({self})"

    def __str__(self):
        if not self.num:
            return "0"
        num = _fmt_poly(self.num)
        if not self.den:
            return num
        facs = []
        for f, e in sorted(self.den.items()):
            s = f"({_fmt_poly(dict(f))})"
            facs.append(s if e == 1 else f"{s}^{e}")
        den = "*".join(facs)
        if len(facs) > 1:
            den = f"({den})"
        if len(self.num) > 1:
            num = f"({num})"
        return f"{num}/{den}"


_ONE_KEY = ParamScalar({(): ONE})._key


def _fmt_mono(m: Mono) -> str:
    return "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)


def _fmt_poly(p: Poly) -> str:
    if not p:
        return "0"
    items = sorted(p.items(), key=lambda kv: (-sum(e for _, e in kv[0]), kv[0]))
    out = []
    for m, c in items:
        if not m:
            s = str(c)
        elif c == ONE:
            s = _fmt_mono(m)
        elif c == -ONE:
            s = "-" + _fmt_mono(m)
        else:
            s = f"{c}*{_fmt_mono(m)}"
        out.append(s)
    text = out[0]
    for s in out[1:]:
        text += f" - {s[1:]}" if s.startswith("-") else f" + {s}"
    return text


def _cancel(num: Poly, den: Dict[Tuple, int]):
    if all(m == () for m in num):
        return num, den
    den = dict(den)
    for f in list(den):
        fp = dict(f)
        while den[f] > 0:
            q = _divide_linear(num, fp)
            if q is None:
                break
            num = q
            den[f] -= 1
        if den[f] == 0:
            del den[f]
    return num, den


def _divisors(n: int):
    n, out, d = abs(n), set(), 1
    while d * d <= n:
        if n % d == 0:
            out |= {d, n // d}
        d += 1
    return sorted(out)


def _rational_roots(p: Poly, v: str):
    """Rational roots of a univariate polynomial with real rational coefficients."""
    coef = {}
    for m, c in p.items():
        if c.im:
            return []
        coef[m[0][1] if m else 0] = c.re
    lcm = 1
    for c in coef.values():
        lcm = lcm * c.denominator // gcd(lcm, c.denominator)
    ints = {k: int(c * lcm) for k, c in coef.items()}
    low = min(ints)
    a0, an = ints[low], ints[max(ints)]
    out = [Fraction(0)] if low > 0 else []
    for num in _divisors(a0):
        for den in _divisors(an):
            for r in (Fraction(num, den), Fraction(-num, den)):
                if r not in out and sum(c * r ** k for k, c in ints.items()) == 0:
                    out.append(r)
    return out


def _factor_linear(p: Poly):
    """Factor ``p`` as ``scale * prod(f^e)`` with monic linear ``f``."""
    factors: Dict[Tuple, int] = {}
    scale = ONE
    work = dict(p)

    def add(f: Poly):
        c, g = _normalize_linear(f)
        key = _freeze(g)
        factors[key] = factors.get(key, 0) + 1
        return c

    while True:
        if all(m == () for m in work):
            scale = scale * work[()]
            return scale, factors
        deg = _pdegree(work)
        if len(work) == 1:
            (m, c), = work.items()
            for v, e in m:
                for _ in range(e):
                    add({((v, 1),): ONE})
            return scale * c, factors
        if deg == 1:
            scale = scale * add(work)
            return scale, factors
        # peel candidate linear factors: single variables and differences
        vs = sorted(_pvars(work))
        cands = [{((v, 1),): ONE} for v in vs]
        cands += [{((v, 1),): ONE, ((w, 1),): -ONE} for i, v in enumerate(vs) for w in vs[i + 1:]]
        cands += [{((v, 1),): ONE, ((w, 1),): ONE} for i, v in enumerate(vs) for w in vs[i + 1:]]
        if len(vs) == 1:
            cands += [{((vs[0], 1),): ONE, (): GaussRat(-r)} for r in _rational_roots(work, vs[0])]
        for f in cands:
            q = _divide_linear(work, f)
            if q is not None:
                add(f)
                work = q
                break
        else:
            raise ParamError(
                f"cannot divide by {_fmt_poly(p)}: denominators must factor into linear forms")


@lru_cache(maxsize=1 << 16)
def _add(x: ParamScalar, y: ParamScalar) -> ParamScalar:
    if x.den == y.den:
        return ParamScalar(_padd(x.num, y.num), x.den)
    den = dict(x.den)
    for f, e in y.den.items():
        if den.get(f, 0) < e:
            den[f] = e
    nx = x.num
    for f, e in den.items():
        for _ in range(e - x.den.get(f, 0)):
            nx = _pmul(nx, dict(f))
    ny = y.num
    for f, e in den.items():
        for _ in range(e - y.den.get(f, 0)):
            ny = _pmul(ny, dict(f))
    return ParamScalar(_padd(nx, ny), den)


@lru_cache(maxsize=1 << 16)
def _mul(x: ParamScalar, y: ParamScalar) -> ParamScalar:
    den = dict(x.den)
    for f, e in y.den.items():
        den[f] = den.get(f, 0) + e
    return ParamScalar(_pmul(x.num, y.num), den)
