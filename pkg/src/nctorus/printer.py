r"""Linear LaTeX-like syntax for symbols: printer and round-trip parser.

Terms print as e.g. ``3/2 \sigma^1 k \delta_2(k) \xi_2`` or
``-2 b_0^2 k \delta_1(k) b_0 k \xi_2^4``; sums join with `` + `` / `` - ``.
The parser accepts the same syntax (plus harmless whitespace variations),
which is what the reference data files are written in.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .algebra import NcSymbol, NcTerm, gen_sort_key
from .exact import G_ONE, GaussRat


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

def _pow(base: str, e: int) -> str:
    if e == 1:
        return base
    if 0 <= e <= 9:
        return f"{base}^{e}"
    return f"{base}^{{{e}}}"


def format_generator(g) -> str:
    kind = g[0]
    if kind == "K":
        return _pow("k", g[1])
    if kind == "B0":
        return _pow("b_0", g[1])
    if kind == "DK":
        return f"\\delta_{g[1]}(k)"
    if kind == "DDK":
        return f"\\delta_{g[1]}(\\delta_{g[2]}(k))"
    if kind == "U":
        return f"u_{g[1]}"
    if kind == "V":
        return f"v_{g[1]}"
    if kind == "W":
        return f"w_{g[1]}"
    if kind == "DU":
        return f"\\delta_{g[1]}(u_{g[2]})"
    if kind == "DV":
        return f"\\delta_{g[1]}(v_{g[2]})"
    if kind == "DW":
        return f"\\delta_{g[1]}(w_{g[2]})"
    if kind == "FREE":
        return g[1]
    raise ValueError(f"unknown generator {g}")


def format_word(word) -> str:
    return " ".join(format_generator(g) for g in word)


def _format_coeff(c: GaussRat) -> tuple[str, str]:
    """Return (sign, magnitude-body); body may be empty for a bare 1."""
    if c.im == 0:
        sign = "-" if c.re < 0 else "+"
        mag = abs(c.re)
        body = "" if mag == 1 else str(mag)
        return sign, body
    if c.re == 0:
        sign = "-" if c.im < 0 else "+"
        mag = abs(c.im)
        body = "i" if mag == 1 else f"{mag} i"
        return sign, body
    return "+", f"({c})"


def format_term(t: NcTerm, xi_first: bool = False) -> str:
    sign, coeff = _format_coeff(t.coeff)
    factors = []
    if t.sigma:
        factors.append(f"\\sigma^{t.sigma}")
    xi = []
    if t.xi[0]:
        xi.append(_pow("\\xi_1", t.xi[0]))
    if t.xi[1]:
        xi.append(_pow("\\xi_2", t.xi[1]))
    word = [format_generator(g) for g in t.word]
    factors += xi + word if xi_first else word + xi
    body = " ".join(x for x in [coeff] + factors if x)
    if not body:
        body = "1"
    return ("-" if sign == "-" else "") + body


def format_symbol(S: NcSymbol, xi_first: bool = False) -> str:
    terms = S.sorted_terms()
    if not terms:
        return "0"
    out = format_term(terms[0], xi_first)
    for t in terms[1:]:
        s = format_term(t, xi_first)
        if s.startswith("-"):
            out += " - " + s[1:]
        else:
            out += " + " + s
    return out


def format_symbol_by_degree(S: NcSymbol, xi_first: bool = False) -> str:
    lines = []
    for d in sorted(S.degrees(), reverse=True):
        lines.append(f"degree {d}:")
        lines.append("  " + format_symbol(S.part(d), xi_first))
    return "\n".join(lines) if lines else "0"


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_SPEC = [
    ("FRAC", r"\\frac\{(-?\d+)\}\{(\d+)\}"),
    ("SIGMA", r"\\sigma\^(\d)"),
    ("XI", r"\\xi_([12])"),
    ("B0", r"b_0"),
    ("DELTA", r"\\delta_([12])"),
    ("KGEN", r"k"),
    ("COEFF_NAME", r"[uvw]_([12])"),
    ("IMAG", r"i\b"),
    ("NAME", r"[A-Za-z][A-Za-z0-9]*"),
    ("NUM", r"\d+"),
    ("CARET", r"\^"),
    ("LPAR", r"\("),
    ("RPAR", r"\)"),
    ("LBRACE", r"\{"),
    ("RBRACE", r"\}"),
    ("PLUS", r"\+"),
    ("MINUS", r"-"),
    ("SLASH", r"/"),
    ("WS", r"[\s,]+"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{n}>{p})" for n, p in _TOKEN_SPEC))


def _tokens(text: str):
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ValueError(f"cannot tokenize symbol text near {text[pos:pos+30]!r}")
        pos = m.end()
        if m.lastgroup != "WS":
            yield m
    yield None


class _Parser:
    def __init__(self, text: str):
        self.toks = list(_tokens(text))
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str):
        tok = self.next()
        if tok is None or tok.lastgroup != kind:
            raise ValueError(f"expected {kind}, got {tok.group() if tok else 'EOF'}")
        return tok

    # exponent after an optional caret, default 1
    def exponent(self) -> int:
        tok = self.peek()
        if tok is None or tok.lastgroup != "CARET":
            return 1
        self.next()
        tok = self.next()
        if tok.lastgroup == "LBRACE":
            sign = 1
            tok = self.next()
            if tok.lastgroup == "MINUS":
                sign = -1
                tok = self.next()
            if tok.lastgroup != "NUM":
                raise ValueError("bad exponent")
            val = sign * int(tok.group())
            self.expect("RBRACE")
            return val
        if tok.lastgroup == "MINUS":
            return -int(self.expect("NUM").group())
        if tok.lastgroup != "NUM":
            raise ValueError("bad exponent")
        return int(tok.group())

    def parse_symbol(self, commutative: bool = False) -> NcSymbol:
        terms = []
        sign = 1
        first = True
        while self.peek() is not None:
            tok = self.peek()
            if tok.lastgroup == "PLUS":
                self.next()
                sign = 1
                first = False
                continue
            if tok.lastgroup == "MINUS":
                self.next()
                sign = -sign
                continue
            coeff, sigma, xi, word = self.parse_term()
            if sign < 0:
                coeff = -coeff
            terms.append(((sigma, xi, tuple(word)), coeff))
            sign = 1
            first = False
        if first:
            raise ValueError("empty symbol text")
        return NcSymbol(terms, commutative)

    def parse_term(self):
        coeff = G_ONE
        sigma = 0
        e1 = e2 = 0
        word: list = []
        saw_factor = False
        while True:
            tok = self.peek()
            if tok is None or tok.lastgroup in ("PLUS", "MINUS", "RPAR"):
                break
            kind = tok.lastgroup
            if kind == "NUM":
                self.next()
                num = Fraction(int(tok.group()))
                nxt = self.peek()
                if nxt is not None and nxt.lastgroup == "SLASH":
                    self.next()
                    den = int(self.expect("NUM").group())
                    num /= den
                coeff = coeff * GaussRat(num)
            elif kind == "FRAC":
                self.next()
                m = re.fullmatch(r"\\frac\{(-?\d+)\}\{(\d+)\}", tok.group())
                coeff = coeff * GaussRat(Fraction(int(m.group(1)), int(m.group(2))))
            elif kind == "IMAG":
                self.next()
                coeff = coeff * GaussRat(Fraction(0), Fraction(1))
            elif kind == "SIGMA":
                self.next()
                from .algebra import sigma_mul

                phase, sigma = sigma_mul(sigma, int(tok.group()[-1]))
                coeff = coeff * phase
            elif kind == "XI":
                self.next()
                e = self.exponent()
                if tok.group()[-1] == "1":
                    e1 += e
                else:
                    e2 += e
            elif kind == "B0":
                self.next()
                word.extend([("B0", 1)] * self.exponent())
            elif kind == "KGEN":
                self.next()
                word.append(("K", self.exponent()))
            elif kind == "DELTA":
                self.next()
                word.extend(self.parse_delta(int(tok.group()[-1])))
            elif kind == "COEFF_NAME":
                self.next()
                text = tok.group()
                gen = (text[0].upper(), int(text[-1]))
                word.extend([gen] * self.exponent())
            elif kind == "NAME":
                self.next()
                word.extend([("FREE", tok.group())] * self.exponent())
            else:
                raise ValueError(f"unexpected token {tok.group()!r} in term")
            saw_factor = True
        if not saw_factor:
            raise ValueError("empty term")
        return coeff, sigma, (e1, e2), word

    def parse_delta(self, j: int) -> list:
        """Parse the argument of \\delta_j( ... ) and an optional power."""
        self.expect("LPAR")
        tok = self.next()
        if tok.lastgroup == "KGEN":
            self.expect("RPAR")
            gen = ("DK", j)
        elif tok.lastgroup == "DELTA":
            inner = int(tok.group()[-1])
            self.expect("LPAR")
            if self.next().lastgroup != "KGEN":
                raise ValueError("only delta(delta(k)) is supported")
            self.expect("RPAR")
            self.expect("RPAR")
            gen = ("DDK", min(j, inner), max(j, inner))
        elif tok.lastgroup == "COEFF_NAME":
            text = tok.group()
            self.expect("RPAR")
            gen = ("D" + text[0].upper(), j, int(text[-1]))
        else:
            raise ValueError(f"bad delta argument {tok.group()!r}")
        return [gen] * self.exponent()


def parse_symbol(text: str, commutative: bool = False) -> NcSymbol:
    """Parse the linear symbol syntax back into a canonical symbol."""
    return _Parser(text).parse_symbol(commutative)
