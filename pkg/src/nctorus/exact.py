"""Exact arithmetic: rationals, Gaussian rationals, rational functions in s.

Every residue integral the engine produces lives in pi * Q(s), where s is the
spectral variable of the modular conjugation.  pi is a formal prefactor and is
never stored numerically; the numbers below are exact.

Canonical forms, enforced on construction:

* rationals: reduced, positive denominator (``fractions.Fraction``);
* Gaussian rationals: componentwise canonical;
* rational functions: gcd(num, den) = 1, monic denominator, zero is 0/1.

Monic denominators make equality (and in particular "is this identically
zero?") a syntactic check, which is what the vanishing theorems reduce to.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd as _int_gcd

Rat = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)


# ---------------------------------------------------------------------------
# Gaussian rationals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussRat:
    """A Gaussian rational re + i*im with exact rational components."""

    re: Fraction = ZERO
    im: Fraction = ZERO

    @staticmethod
    def of(re, im=0) -> "GaussRat":
        return GaussRat(Fraction(re), Fraction(im))

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __add__(self, other: "GaussRat") -> "GaussRat":
        return GaussRat(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "GaussRat") -> "GaussRat":
        return GaussRat(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "GaussRat":
        return GaussRat(-self.re, -self.im)

    def __mul__(self, other: "GaussRat") -> "GaussRat":
        return GaussRat(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def __truediv__(self, other: "GaussRat") -> "GaussRat":
        n = other.re * other.re + other.im * other.im
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussRat(
            (self.re * other.re + self.im * other.im) / n,
            (self.im * other.re - self.re * other.im) / n,
        )

    def scale(self, r: Fraction) -> "GaussRat":
        return GaussRat(self.re * r, self.im * r)

    def conj(self) -> "GaussRat":
        return GaussRat(self.re, -self.im)

    def is_real(self) -> bool:
        return self.im == 0

    def __str__(self) -> str:
        if not self.im:
            return str(self.re)
        if not self.re:
            if self.im == 1:
                return "i"
            if self.im == -1:
                return "-i"
            return f"{self.im} i"
        sign = "+" if self.im > 0 else "-"
        mag = abs(self.im)
        istr = "i" if mag == 1 else f"{mag} i"
        return f"({self.re} {sign} {istr})"


G_ZERO = GaussRat()
G_ONE = GaussRat(ONE)
G_I = GaussRat(ZERO, ONE)


# ---------------------------------------------------------------------------
# Dense univariate polynomials over Q
# ---------------------------------------------------------------------------

class Poly:
    """Dense polynomial in s over Q, coefficients stored low degree first."""

    __slots__ = ("c",)

    def __init__(self, coeffs=()):
        c = [Fraction(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.c = tuple(c)

    @staticmethod
    def const(x) -> "Poly":
        return Poly([Fraction(x)])

    @staticmethod
    def s_power(n: int) -> "Poly":
        return Poly([0] * n + [1])

    @property
    def degree(self) -> int:
        # degree of the zero polynomial is -1 by convention
        return len(self.c) - 1

    def is_zero(self) -> bool:
        return not self.c

    def lead(self) -> Fraction:
        return self.c[-1] if self.c else ZERO

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.c, other.c
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, x in enumerate(b):
            out[i] += x
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly([-x for x in self.c])

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        if not self.c or not other.c:
            return Poly()
        out = [ZERO] * (len(self.c) + len(other.c) - 1)
        for i, x in enumerate(self.c):
            if not x:
                continue
            for j, y in enumerate(other.c):
                out[i + j] += x * y
        return Poly(out)

    def scale(self, r: Fraction) -> "Poly":
        return Poly([x * r for x in self.c])

    def shift(self, n: int) -> "Poly":
        """Multiply by s**n (n >= 0)."""
        if self.is_zero():
            return self
        return Poly((0,) * n + self.c)

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        q = [ZERO] * max(0, len(self.c) - len(other.c) + 1)
        r = list(self.c)
        d = other.degree
        lead = other.lead()
        while len(r) - 1 >= d and any(r):
            while r and r[-1] == 0:
                r.pop()
            if len(r) - 1 < d:
                break
            k = len(r) - 1 - d
            f = r[-1] / lead
            q[k] = f
            for i, x in enumerate(other.c):
                r[k + i] -= f * x
        return Poly(q), Poly(r)

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        return self.scale(1 / self.lead())

    def gcd(self, other: "Poly") -> "Poly":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a.divmod(b)[1]
        return a.monic() if not a.is_zero() else a

    def eval(self, x: Fraction) -> Fraction:
        out = ZERO
        for coef in reversed(self.c):
            out = out * x + coef
        return out

    def reversed(self) -> "Poly":
        """Coefficient reversal: s**deg * p(1/s)."""
        return Poly(tuple(reversed(self.c)))

    def content_lcm(self) -> int:
        """LCM of coefficient denominators."""
        out = 1
        for x in self.c:
            out = out * x.denominator // _int_gcd(out, x.denominator)
        return out

    def int_content(self) -> int:
        """GCD of numerators, assuming integer coefficients."""
        out = 0
        for x in self.c:
            out = _int_gcd(out, abs(x.numerator))
        return out

    def __str__(self) -> str:
        return self.format("s")

    def format(self, var: str) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for e in range(self.degree, -1, -1):
            a = self.c[e]
            if a == 0:
                continue
            sign = "-" if a < 0 else "+"
            mag = abs(a)
            if e == 0:
                body = str(mag)
            else:
                head = "" if mag == 1 else f"{mag}"
                body = f"{head}{var}" if e == 1 else f"{head}{var}^{e}"
            parts.append((sign, body))
        first_sign, first_body = parts[0]
        out = ("-" if first_sign == "-" else "") + first_body
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out


# ---------------------------------------------------------------------------
# Rational functions in s
# ---------------------------------------------------------------------------

class RatFun:
    """Element of Q(s), reduced, with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None, _canonical=False):
        if den is None:
            den = Poly([1])
        if _canonical:
            self.num, self.den = num, den
            return
        if den.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        if num.is_zero():
            self.num, self.den = Poly(), Poly([1])
            return
        g = num.gcd(den)
        if g.degree > 0:
            num = num.divmod(g)[0]
            den = den.divmod(g)[0]
        lead = den.lead()
        self.num = num.scale(1 / lead)
        self.den = den.scale(1 / lead)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def const(x) -> "RatFun":
        return RatFun(Poly.const(Fraction(x)))

    @staticmethod
    def s_power(n: int) -> "RatFun":
        if n >= 0:
            return RatFun(Poly.s_power(n), _canonical=True)
        return RatFun(Poly([1]), Poly.s_power(-n), _canonical=True)

    # -- predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.degree <= 0 and self.den.degree == 0

    def as_rat(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"not a constant rational function: {self}")
        if self.num.is_zero():
            return ZERO
        return self.num.c[0] / self.den.c[0]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RatFun)
            and self.num == other.num
            and self.den == other.den
        )

    def __hash__(self):
        return hash((self.num, self.den))

    def __bool__(self) -> bool:
        return not self.is_zero()

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "RatFun") -> "RatFun":
        return RatFun(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    def __sub__(self, other: "RatFun") -> "RatFun":
        return RatFun(
            self.num * other.den - other.num * self.den, self.den * other.den
        )

    def __neg__(self) -> "RatFun":
        return RatFun(-self.num, self.den, _canonical=True)

    def __mul__(self, other: "RatFun") -> "RatFun":
        return RatFun(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "RatFun") -> "RatFun":
        if other.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RatFun(self.num * other.den, self.den * other.num)

    def scale(self, r: Fraction) -> "RatFun":
        return RatFun(self.num.scale(r), self.den, _canonical=True) if r else RF_ZERO

    def __pow__(self, n: int) -> "RatFun":
        if n == 0:
            return RF_ONE
        base = self if n > 0 else RF_ONE / self
        out = RF_ONE
        for _ in range(abs(n)):
            out = out * base
        return out

    # -- substitution -------------------------------------------------------

    def inverse_s(self) -> "RatFun":
        """Canonical form of f(1/s)."""
        p, q = self.num.degree, self.den.degree
        if self.is_zero():
            return self
        num = self.num.reversed()
        den = self.den.reversed()
        if q > p:
            num = num.shift(q - p)
        elif p > q:
            den = den.shift(p - q)
        return RatFun(num, den)

    def eval(self, x: Fraction) -> Fraction:
        d = self.den.eval(x)
        if d == 0:
            raise ZeroDivisionError(f"evaluation at a pole: s = {x}")
        return self.num.eval(x) / d

    # -- display ------------------------------------------------------------

    def _integerized(self) -> tuple[Poly, Poly]:
        lcm = 1
        for m in (self.num.content_lcm(), self.den.content_lcm()):
            lcm = lcm * m // _int_gcd(lcm, m)
        num = self.num.scale(Fraction(lcm))
        den = self.den.scale(Fraction(lcm))
        g = _int_gcd(num.int_content(), den.int_content())
        if g > 1:
            num = num.scale(Fraction(1, g))
            den = den.scale(Fraction(1, g))
        return num, den

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        num, den = self._integerized()
        if den.degree == 0 and den.c[0] == 1:
            return num.format("s")
        ns = num.format("s")
        if num.degree > 0:
            ns = f"({ns})"
        ds = den.format("s")
        if den.degree > 0 or ds.startswith("-"):
            ds = f"({ds})"
        return f"{ns}/{ds}"

    def __repr__(self) -> str:
        return f"RatFun({self})"


RF_ZERO = RatFun(Poly())
RF_ONE = RatFun(Poly([1]))
RF_S = RatFun(Poly([0, 1]))


# ---------------------------------------------------------------------------
# Spec-level operation wrappers
# ---------------------------------------------------------------------------

def ratfun_arith(op: str, f: RatFun, g: RatFun) -> RatFun:
    """Exact field arithmetic on Q(s); result in canonical form."""
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f * g
    if op == "div":
        return f / g
    raise ValueError(f"unknown operation {op!r}")


def ratfun_substitute(f: RatFun, sub) -> "RatFun | Fraction":
    """Substitute into f: either the formal s -> 1/s or an exact number."""
    if sub == "inverse_s":
        return f.inverse_s()
    return f.eval(Fraction(sub))


# ---------------------------------------------------------------------------
# Parsing of the serialized "p(s)/q(s)" form
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(\d+|s|\^|\+|-|/|\(|\))")


def _tokenize(text: str) -> list[str]:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"bad rational-function syntax near {text[pos:]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


def _parse_poly(tokens: list[str], i: int) -> tuple[Poly, int]:
    out = Poly()
    sign = 1
    expect_term = True
    while i < len(tokens):
        t = tokens[i]
        if t == "+" or t == "-":
            if not expect_term and t == "+":
                sign = 1
            elif not expect_term and t == "-":
                sign = -1
            elif t == "-":
                sign = -sign
            i += 1
            expect_term = True
            continue
        if t == ")" or t == "/":
            break
        coef = Fraction(1)
        power = 0
        seen = False
        if t.isdigit():
            coef = Fraction(int(t))
            i += 1
            seen = True
            if i < len(tokens) and tokens[i] == "/":
                # rational constant like 3/16 inside a numerator-only value
                if i + 1 < len(tokens) and tokens[i + 1].isdigit():
                    nxt = tokens[i + 1]
                    # only treat as a fraction when not followed by '('
                    coef = coef / int(nxt)
                    i += 2
        if i < len(tokens) and tokens[i] == "s":
            power = 1
            i += 1
            seen = True
            if i < len(tokens) and tokens[i] == "^":
                power = int(tokens[i + 1])
                i += 2
        if not seen:
            raise ValueError(f"bad rational-function term near {tokens[i:]}")
        out = out + Poly.s_power(power).scale(sign * coef)
        sign = 1
        expect_term = False
    return out, i


def parse_ratfun(text: str) -> RatFun:
    """Parse the engine serialization "p(s)/q(s)" (integer coefficients)."""
    text = text.strip()
    tokens = _tokenize(text)
    i = 0
    if tokens and tokens[0] == "(":
        num, i = _parse_poly(tokens, 1)
        if i >= len(tokens) or tokens[i] != ")":
            raise ValueError(f"unbalanced parentheses in {text!r}")
        i += 1
    else:
        num, i = _parse_poly(tokens, 0)
    if i == len(tokens):
        return RatFun(num)
    if tokens[i] != "/":
        raise ValueError(f"trailing tokens in {text!r}")
    i += 1
    if tokens[i] == "(":
        den, j = _parse_poly(tokens, i + 1)
        if j >= len(tokens) or tokens[j] != ")":
            raise ValueError(f"unbalanced parentheses in {text!r}")
        j += 1
    else:
        den, j = _parse_poly(tokens, i)
    if j != len(tokens):
        raise ValueError(f"trailing tokens in {text!r}")
    return RatFun(num, den)
