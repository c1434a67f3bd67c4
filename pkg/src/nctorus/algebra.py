"""Graded noncommutative algebra of pseudodifferential symbols.

A symbol is a finite sum of terms

    coeff * sigma * xi1^e1 xi2^e2 * word

where coeff is a Gaussian rational, sigma is one of the four Pauli basis
elements {1, s1, s2, s3}, the xi's are central fibre variables, and word is a
product of generators split into two commutation classes:

* commutant class: k powers ``K(n)``, leading-inverse powers ``B0(p)`` for
  b0 = (xi1^2 + k^2 xi2^2)^(-1), first derivatives ``DK(i)`` = delta_i(k) and
  second derivatives ``DDK(i,j)``;
* algebra class: one-form coefficients u_i, v_i, w_i, their derivatives, and
  free symbolic coefficients.

The two classes commute with each other; k and b0 commute between themselves
but not with delta_i(k); algebra generators are mutually noncommuting.  The
homogeneity degree of a term is e1 + e2 - 2*(total b0 power).

b0 is opaque: its defining relation b0*(xi1^2 + k^2 xi2^2) = 1 enters only
through the derivative rules and through :func:`is_zero_symbol`, which
decides vanishing exactly by clearing b0 denominators block by block.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from .exact import G_I, G_ONE, G_ZERO, GaussRat

# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

# Generators are plain tuples, e.g. ("K", 3), ("B0", 2), ("DK", 1),
# ("DDK", 1, 2), ("U", 1), ("DV", 2, 1), ("FREE", "a").

Gen = tuple

_COMMUTANT_KINDS = {"K", "B0", "DK", "DDK"}
_SLOT_KINDS = {"DK", "DDK"}
_KIND_ORDER = {
    "FREE": 0, "U": 1, "V": 2, "W": 3, "DU": 4, "DV": 5, "DW": 6,
    "B0": 7, "K": 8, "DK": 9, "DDK": 10,
}


def K(n: int) -> Gen:
    return ("K", n)


def B0(p: int) -> Gen:
    return ("B0", p)


def DK(i: int) -> Gen:
    return ("DK", i)


def DDK(i: int, j: int) -> Gen:
    return ("DDK", min(i, j), max(i, j))


def U(n: int) -> Gen:
    return ("U", n)


def V(n: int) -> Gen:
    return ("V", n)


def W(n: int) -> Gen:
    return ("W", n)


def DU(j: int, n: int) -> Gen:
    return ("DU", j, n)


def DV(j: int, n: int) -> Gen:
    return ("DV", j, n)


def DW(j: int, n: int) -> Gen:
    return ("DW", j, n)


def FREE(name: str) -> Gen:
    return ("FREE", name)


def is_commutant(g: Gen) -> bool:
    return g[0] in _COMMUTANT_KINDS


def is_slot(g: Gen) -> bool:
    return g[0] in _SLOT_KINDS


def is_scalar_block(g: Gen) -> bool:
    return g[0] in ("K", "B0")


def gen_sort_key(g: Gen):
    return (_KIND_ORDER[g[0]],) + tuple(g[1:])


class UnsupportedDerivation(ValueError):
    """Raised for derivations the model does not support (e.g. delta^3 of k)."""


# ---------------------------------------------------------------------------
# Word normalization
# ---------------------------------------------------------------------------

def _merge_scalar_run(run: list[Gen]) -> list[Gen]:
    # canonical block order: k power first, then b0 power.  The order fixes
    # which side of a merged block the Leibniz rule expands on, and with k
    # first the parametrix recursion reproduces the reference displays
    # term-for-term (b0-first differs by rearrangements across the relation).
    b = sum(g[1] for g in run if g[0] == "B0")
    k = sum(g[1] for g in run if g[0] == "K")
    out = []
    if k:
        out.append(("K", k))
    if b:
        out.append(("B0", b))
    return out


def word_normalize(word: Iterable[Gen], commutative: bool = False) -> tuple:
    """Deterministic canonical form of a generator word.

    Algebra-class generators move (stably) in front of commutant-class ones;
    maximal runs of the mutually commuting k/b0 atoms merge into a single
    (b0 power, k power) block; zero powers vanish.  In commutative mode every
    generator commutes and the whole word is sorted.
    """
    word = list(word)
    if commutative:
        algebra = sorted((g for g in word if not is_commutant(g)), key=gen_sort_key)
        scalars = _merge_scalar_run([g for g in word if is_scalar_block(g)])
        slots = sorted((g for g in word if is_slot(g)), key=gen_sort_key)
        return tuple(algebra + scalars + slots)
    algebra = [g for g in word if not is_commutant(g)]
    commutant = [g for g in word if is_commutant(g)]
    out: list[Gen] = []
    run: list[Gen] = []
    for g in commutant:
        if is_scalar_block(g):
            run.append(g)
        else:
            out.extend(_merge_scalar_run(run))
            run = []
            out.append(g)
    out.extend(_merge_scalar_run(run))
    return tuple(algebra + out)


def word_degree_shift(word: Iterable[Gen]) -> int:
    """Contribution of the word to the homogeneity degree: -2 per b0 power."""
    return -2 * sum(g[1] for g in word if g[0] == "B0")


# ---------------------------------------------------------------------------
# Pauli basis
# ---------------------------------------------------------------------------

SIGMA_ID, SIGMA_1, SIGMA_2, SIGMA_3 = 0, 1, 2, 3

_SIGMA_MUL: dict[tuple[int, int], tuple[GaussRat, int]] = {}
for _x in range(4):
    _SIGMA_MUL[(0, _x)] = (G_ONE, _x)
    _SIGMA_MUL[(_x, 0)] = (G_ONE, _x)
    if _x:
        _SIGMA_MUL[(_x, _x)] = (G_ONE, 0)
for (_a, _b, _c) in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
    _SIGMA_MUL[(_a, _b)] = (G_I, _c)
    _SIGMA_MUL[(_b, _a)] = (-G_I, _c)


def sigma_mul(a: int, b: int) -> tuple[GaussRat, int]:
    return _SIGMA_MUL[(a, b)]


# ---------------------------------------------------------------------------
# Terms and symbols
# ---------------------------------------------------------------------------

TermKey = tuple  # (sigma, (e1, e2), word)


@dataclass(frozen=True)
class NcTerm:
    coeff: GaussRat
    sigma: int
    xi: tuple[int, int]
    word: tuple

    @property
    def degree(self) -> int:
        return self.xi[0] + self.xi[1] + word_degree_shift(self.word)

    def key(self) -> TermKey:
        return (self.sigma, self.xi, self.word)

    def sort_key(self):
        return (self.sigma, self.xi, tuple(map(gen_sort_key, self.word)), len(self.word))


class NcSymbol:
    """A graded sum of noncommutative symbol terms."""

    __slots__ = ("t", "commutative")

    def __init__(self, terms=None, commutative: bool = False, _normalized=False):
        self.commutative = commutative
        self.t: dict[TermKey, GaussRat] = {}
        if terms is None:
            return
        items = terms.items() if isinstance(terms, dict) else terms
        for key, coeff in items:
            if not coeff:
                continue
            if not _normalized:
                sigma, xi, word = key
                key = (sigma, tuple(xi), word_normalize(word, commutative))
            cur = self.t.get(key)
            new = coeff + cur if cur is not None else coeff
            if new:
                self.t[key] = new
            elif cur is not None:
                del self.t[key]

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero(commutative: bool = False) -> "NcSymbol":
        return NcSymbol(commutative=commutative)

    @staticmethod
    def unit(commutative: bool = False) -> "NcSymbol":
        return NcSymbol.term(G_ONE, commutative=commutative)

    @staticmethod
    def term(
        coeff: GaussRat,
        sigma: int = SIGMA_ID,
        xi: tuple[int, int] = (0, 0),
        word: Iterable[Gen] = (),
        commutative: bool = False,
    ) -> "NcSymbol":
        return NcSymbol([((sigma, tuple(xi), tuple(word)), coeff)], commutative)

    # -- inspection ----------------------------------------------------------

    def is_empty(self) -> bool:
        return not self.t

    def terms(self) -> Iterator[NcTerm]:
        for (sigma, xi, word), coeff in self.t.items():
            yield NcTerm(coeff, sigma, xi, word)

    def sorted_terms(self) -> list[NcTerm]:
        return sorted(self.terms(), key=NcTerm.sort_key)

    def __len__(self) -> int:
        return len(self.t)

    def degrees(self) -> list[int]:
        return sorted({t.degree for t in self.terms()})

    def part(self, d: int) -> "NcSymbol":
        out = {k: c for k, c in self.t.items() if _key_degree(k) == d}
        return NcSymbol(out, self.commutative, _normalized=True)

    def truncate_below(self, cutoff: int) -> "NcSymbol":
        out = {k: c for k, c in self.t.items() if _key_degree(k) >= cutoff}
        return NcSymbol(out, self.commutative, _normalized=True)

    def max_degree(self) -> int:
        if not self.t:
            raise ValueError("empty symbol has no degree")
        return max(_key_degree(k) for k in self.t)

    def sigma_component(self, sigma: int) -> "NcSymbol":
        out = {k: c for k, c in self.t.items() if k[0] == sigma}
        return NcSymbol(out, self.commutative, _normalized=True)

    # -- linear structure ----------------------------------------------------

    def _assert_compatible(self, other: "NcSymbol"):
        if self.commutative != other.commutative:
            raise ValueError("mixing commutative and noncommutative symbols")

    def __add__(self, other: "NcSymbol") -> "NcSymbol":
        self._assert_compatible(other)
        out = dict(self.t)
        for k, c in other.t.items():
            new = out.get(k, G_ZERO) + c
            if new:
                out[k] = new
            elif k in out:
                del out[k]
        return NcSymbol(out, self.commutative, _normalized=True)

    def __sub__(self, other: "NcSymbol") -> "NcSymbol":
        return self + (-other)

    def __neg__(self) -> "NcSymbol":
        return NcSymbol({k: -c for k, c in self.t.items()}, self.commutative, _normalized=True)

    def scale(self, factor) -> "NcSymbol":
        if isinstance(factor, (int, Fraction)):
            factor = GaussRat(Fraction(factor))
        if not factor:
            return NcSymbol.zero(self.commutative)
        return NcSymbol(
            {k: c * factor for k, c in self.t.items()}, self.commutative, _normalized=True
        )

    # -- multiplication ------------------------------------------------------

    def __mul__(self, other: "NcSymbol") -> "NcSymbol":
        self._assert_compatible(other)
        acc: dict[TermKey, GaussRat] = {}
        for (s1, x1, w1), c1 in self.t.items():
            for (s2, x2, w2), c2 in other.t.items():
                phase, sig = sigma_mul(s1, s2)
                coeff = c1 * c2 * phase
                if not coeff:
                    continue
                key = (
                    sig,
                    (x1[0] + x2[0], x1[1] + x2[1]),
                    word_normalize(w1 + w2, self.commutative),
                )
                cur = acc.get(key)
                new = coeff + cur if cur is not None else coeff
                if new:
                    acc[key] = new
                elif cur is not None:
                    del acc[key]
        return NcSymbol(acc, self.commutative, _normalized=True)

    # -- equality ------------------------------------------------------------

    def same_terms(self, other: "NcSymbol") -> bool:
        """Literal term-for-term equality of canonical words (no b0 relation)."""
        return self.t == other.t

    def equals(self, other: "NcSymbol") -> bool:
        """Semantic equality modulo the b0 defining relation."""
        return (self - other).is_zero()

    def is_zero(self) -> bool:
        return is_zero_symbol(self)

    def __repr__(self) -> str:
        from .printer import format_symbol

        return format_symbol(self)


def _key_degree(key: TermKey) -> int:
    _, xi, word = key
    return xi[0] + xi[1] + word_degree_shift(word)


def term_multiply(t1: NcTerm, t2: NcTerm, commutative: bool = False) -> NcTerm:
    """Product of two terms: Pauli phase, xi exponents add, words concatenate."""
    phase, sigma = sigma_mul(t1.sigma, t2.sigma)
    return NcTerm(
        t1.coeff * t2.coeff * phase,
        sigma,
        (t1.xi[0] + t2.xi[0], t1.xi[1] + t2.xi[1]),
        word_normalize(t1.word + t2.word, commutative),
    )


# ---------------------------------------------------------------------------
# Derivations
# ---------------------------------------------------------------------------

def _delta_generator(j: int, g: Gen) -> list[tuple[GaussRat, tuple[int, int], tuple]]:
    """delta_j of a single generator, as (coefficient, xi, word) summands."""
    kind = g[0]
    if kind == "K":
        n = g[1]
        out = []
        if n > 0:
            for a in range(n):
                word = (("K", a),) if a else ()
                word += (("DK", j),)
                b = n - 1 - a
                if b:
                    word += (("K", b),)
                out.append((G_ONE, (0, 0), word))
        else:
            m = -n
            for a in range(m):
                word = (("K", -a - 1), ("DK", j), ("K", -(m - a)))
                out.append((-G_ONE, (0, 0), word))
        return out
    if kind == "B0":
        p = g[1]
        out = []
        for a in range(p):
            left = a + 1
            right = p - a
            for middle in ((("DK", j), ("K", 1)), (("K", 1), ("DK", j))):
                word = (("B0", left),) + middle + (("B0", right),)
                out.append((-G_ONE, (0, 2), word))
        return out
    if kind == "DK":
        return [(G_ONE, (0, 0), (DDK(g[1], j),))]
    if kind == "U":
        return [(G_ONE, (0, 0), (("DU", j, g[1]),))]
    if kind == "V":
        return [(G_ONE, (0, 0), (("DV", j, g[1]),))]
    if kind == "W":
        return [(G_ONE, (0, 0), (("DW", j, g[1]),))]
    raise UnsupportedDerivation(f"delta_{j} of generator {g} is out of model")


def delta(j: int, S: NcSymbol) -> NcSymbol:
    """The derivation delta_j, extended to symbols by the Leibniz rule.

    xi monomials and Pauli factors are constants; b0 differentiates through
    its defining relation, k through the noncommutative power rule.  Second
    derivatives of one-form coefficients and third derivatives of k signal
    out-of-model input.
    """
    if j not in (1, 2):
        raise ValueError("derivation index must be 1 or 2")
    acc: dict[TermKey, GaussRat] = {}
    for (sigma, xi, word), coeff in S.t.items():
        for pos, g in enumerate(word):
            for factor, xi_add, repl in _delta_generator(j, g):
                key = (
                    sigma,
                    (xi[0] + xi_add[0], xi[1] + xi_add[1]),
                    word_normalize(word[:pos] + repl + word[pos + 1:], S.commutative),
                )
                new = acc.get(key, G_ZERO) + coeff * factor
                if new:
                    acc[key] = new
                elif key in acc:
                    del acc[key]
    return NcSymbol(acc, S.commutative, _normalized=True)


def dxi(j: int, S: NcSymbol) -> NcSymbol:
    """Formal derivative in xi_j; lowers the homogeneity degree by one."""
    if j not in (1, 2):
        raise ValueError("xi index must be 1 or 2")
    acc: dict[TermKey, GaussRat] = {}

    def put(key, coeff):
        new = acc.get(key, G_ZERO) + coeff
        if new:
            acc[key] = new
        elif key in acc:
            del acc[key]

    for (sigma, xi, word), coeff in S.t.items():
        e = xi[j - 1]
        if e:
            nxi = (xi[0] - 1, xi[1]) if j == 1 else (xi[0], xi[1] - 1)
            put((sigma, nxi, word), coeff.scale(Fraction(e)))
        for pos, g in enumerate(word):
            if g[0] != "B0":
                continue
            p = g[1]
            repl = (("B0", p + 1),) if j == 1 else (("K", 2), ("B0", p + 1))
            nxi = (xi[0] + 1, xi[1]) if j == 1 else (xi[0], xi[1] + 1)
            key = (
                sigma,
                nxi,
                word_normalize(word[:pos] + repl + word[pos + 1:], S.commutative),
            )
            put(key, coeff.scale(Fraction(-2 * p)))
    return NcSymbol(acc, S.commutative, _normalized=True)


def sigma_trace(S: NcSymbol) -> NcSymbol:
    """Matrix trace over the Pauli factor: identity doubles, the rest dies."""
    out = {
        (SIGMA_ID, k[1], k[2]): c.scale(Fraction(2))
        for k, c in S.t.items()
        if k[0] == SIGMA_ID
    }
    return NcSymbol(out, S.commutative, _normalized=True)


def homogeneous_part(S: NcSymbol, d: int) -> list[NcTerm]:
    """The degree-d terms, canonical and merged; empty list if absent."""
    return S.part(d).sorted_terms()


# ---------------------------------------------------------------------------
# Zero test modulo the b0 defining relation
# ---------------------------------------------------------------------------
#
# Split a commutant word at its slot generators: the scalar blocks between
# slots commute internally, and k-material at different positions never
# interacts, so a word  m0 slot1 m1 slot2 m2 ...  is faithfully modelled by
# the commutative monomial  m0(x0) m1(x1) m2(x2) ...  in one fresh variable
# per block, with b0 at block i standing for 1/(xi1^2 + x_i^2 xi2^2).  A
# linear combination of same-pattern words vanishes iff the corresponding
# multivariate rational function vanishes, which is decided exactly by
# clearing the common denominator and comparing Laurent polynomials.

def _split_blocks(word):
    """Commutant word -> (algebra prefix, slot kinds, [(k_pow, b0_pow)])."""
    algebra = []
    slots = []
    blocks = [[0, 0]]
    for g in word:
        if not is_commutant(g):
            algebra.append(g)
        elif g[0] == "K":
            blocks[-1][0] += g[1]
        elif g[0] == "B0":
            blocks[-1][1] += g[1]
        else:
            slots.append(g)
            blocks.append([0, 0])
    return tuple(algebra), tuple(slots), [tuple(b) for b in blocks]


def _mono_mul(m1: tuple, m2: tuple) -> tuple:
    return tuple(a + b for a, b in zip(m1, m2))


def _poly_add_into(acc: dict, poly: dict, factor: GaussRat):
    for mono, c in poly.items():
        new = acc.get(mono, G_ZERO) + c * factor
        if new:
            acc[mono] = new
        elif mono in acc:
            del acc[mono]


def _poly_mul(p1: dict, p2: dict) -> dict:
    out: dict = {}
    for m1, c1 in p1.items():
        for m2, c2 in p2.items():
            mono = _mono_mul(m1, m2)
            new = out.get(mono, G_ZERO) + c1 * c2
            if new:
                out[mono] = new
            elif mono in out:
                del out[mono]
    return out


def _b0_inverse_power(block_index: int, e: int, nvars: int) -> dict:
    """(xi1^2 + x_i^2 xi2^2)**e as a Laurent-polynomial dict."""
    out = {(0,) * nvars: G_ONE}
    if not e:
        return out
    base: dict = {}
    m1 = [0] * nvars
    m1[0] = 2
    base[tuple(m1)] = G_ONE
    m2 = [0] * nvars
    m2[1] = 2
    m2[2 + block_index] = 2
    base[tuple(m2)] = G_ONE
    for _ in range(e):
        out = _poly_mul(out, base)
    return out


def is_zero_symbol(S: NcSymbol) -> bool:
    """Exact zero test for a symbol, modulo b0 (xi1^2 + k^2 xi2^2) = 1.

    Terms are bucketed by Pauli factor, algebra prefix and slot sequence;
    inside a bucket the scalar blocks are cleared over the common b0
    denominator and the resulting Laurent polynomials must cancel.
    """
    buckets: dict[tuple, list] = {}
    for (sigma, xi, word), coeff in S.t.items():
        algebra, slots, blocks = _split_blocks(word)
        buckets.setdefault((sigma, algebra, slots), []).append((xi, blocks, coeff))
    for (sigma, algebra, slots), entries in buckets.items():
        nblocks = len(slots) + 1
        nvars = 2 + nblocks  # xi1, xi2, x_0 .. x_{nblocks-1}
        pmax = [max(b[i][1] for _, b, _ in entries) for i in range(nblocks)]
        acc: dict = {}
        for xi, blocks, coeff in entries:
            mono = [0] * nvars
            mono[0], mono[1] = xi
            for i, (kp, _) in enumerate(blocks):
                mono[2 + i] = kp
            poly = {tuple(mono): G_ONE}
            for i, (_, bp) in enumerate(blocks):
                if pmax[i] - bp:
                    poly = _poly_mul(
                        poly, _b0_inverse_power(i, pmax[i] - bp, nvars)
                    )
            _poly_add_into(acc, poly, coeff)
        if acc:
            return False
    return True
