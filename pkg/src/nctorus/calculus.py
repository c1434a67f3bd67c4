"""Pseudodifferential composition, parametrix recursion, operator builders.

Composition of symbols follows the expansion

    rho(P Q) = sum_alpha (1/alpha!) dxi^alpha(P) delta^alpha(Q)

over two-dimensional multi-indices alpha, truncated at a requested lowest
homogeneity degree.  The right parametrix is computed degree by degree from
the general recursion; the printed specializations for low depths fall out of
it rather than being transcribed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .algebra import (
    B0,
    DK,
    FREE,
    K,
    SIGMA_1,
    SIGMA_2,
    U,
    V,
    W,
    Gen,
    NcSymbol,
    delta,
    dxi,
)
from .exact import G_ONE, GaussRat, HALF


class CutoffError(ValueError):
    """Raised when a composition cannot reach the requested cutoff."""


_MAX_ALPHA_TOTAL = 64


def compose(P: NcSymbol, Q: NcSymbol, cutoff: int) -> NcSymbol:
    """Full symbol product of P and Q, keeping degrees >= cutoff."""
    P._assert_compatible(Q)
    if P.is_empty() or Q.is_empty():
        return NcSymbol.zero(P.commutative)
    bound = P.max_degree() + Q.max_degree() - cutoff
    if bound < 0:
        return NcSymbol.zero(P.commutative)
    if bound > _MAX_ALPHA_TOTAL:
        raise CutoffError(f"cutoff {cutoff} needs multi-indices of order {bound}")
    out = NcSymbol.zero(P.commutative)
    # dxi1^a1 applied to P, reused across a2; delta images of Q cached likewise
    p_rows: list[NcSymbol] = [P]
    for a1 in range(bound + 1):
        if a1:
            p_rows.append(dxi(1, p_rows[-1]))
        p_cur = p_rows[a1]
        if p_cur.is_empty():
            continue
        # only Q parts of degree >= cutoff - maxdeg(dxi^alpha P) can reach the
        # cutoff; truncating before each delta also keeps the derivation
        # orders inside the supported model
        q_cur = Q.truncate_below(cutoff - p_cur.max_degree())
        for _ in range(a1):
            q_cur = delta(1, q_cur)
        for a2 in range(bound + 1 - a1):
            if a2:
                p_cur = dxi(2, p_cur)
                if p_cur.is_empty():
                    break
                q_cur = delta(2, q_cur.truncate_below(cutoff - p_cur.max_degree()))
            if q_cur.is_empty():
                break
            coeff = Fraction(1, factorial(a1) * factorial(a2))
            out = out + (p_cur * q_cur).truncate_below(cutoff).scale(coeff)
    return out


# ---------------------------------------------------------------------------
# Operator symbols
# ---------------------------------------------------------------------------

def dirac_symbol(commutative: bool = False) -> NcSymbol:
    """Symbol of the rescaled Dirac operator: s1 xi1 + k s2 xi2 + (1/2) s2 delta_2(k)."""
    return (
        NcSymbol.term(G_ONE, SIGMA_1, (1, 0), (), commutative)
        + NcSymbol.term(G_ONE, SIGMA_2, (0, 1), (K(1),), commutative)
        + NcSymbol.term(GaussRat(HALF), SIGMA_2, (0, 0), (DK(2),), commutative)
    )


def dirac_squared_symbol(commutative: bool = False) -> NcSymbol:
    """Symbol of the square of the Dirac operator, via exact composition."""
    d = dirac_symbol(commutative)
    return compose(d, d, 0)


def leading_inverse_b0(commutative: bool = False) -> NcSymbol:
    """b0 = (xi1^2 + k^2 xi2^2)^(-1) as a symbol."""
    return NcSymbol.term(G_ONE, 0, (0, 0), (B0(1),), commutative)


def dirac_leading_inverse(commutative: bool = False) -> NcSymbol:
    """(s1 xi1 + k s2 xi2) b0, the degree -1 inverse symbol."""
    return (
        NcSymbol.term(G_ONE, SIGMA_1, (1, 0), (B0(1),), commutative)
        + NcSymbol.term(G_ONE, SIGMA_2, (0, 1), (K(1), B0(1)), commutative)
    )


class NotInvertibleError(ValueError):
    """Leading symbol is not invertible against the proposed inverse."""


def parametrix(P: NcSymbol, leading_inverse: NcSymbol, depth: int) -> NcSymbol:
    """Right parametrix of P down to homogeneity degree -depth.

    ``leading_inverse`` must invert the leading symbol exactly (this is
    checked through the b0 relation).  The result Q satisfies
    compose(P, Q, cutoff) = 1 + (terms of degree below the computed range).
    """
    h = P.max_degree()
    lead = P.part(h)
    if not (lead * leading_inverse - NcSymbol.unit(P.commutative)).is_zero():
        raise NotInvertibleError("leading symbol times proposed inverse is not 1")
    parts: dict[int, NcSymbol] = {-h: leading_inverse}
    for r in range(1, depth - h + 1):
        bracket = NcSymbol.zero(P.commutative)
        for i in range(r):
            q = parts[-h - i]
            rem = r - i
            for a1 in range(rem + 1):
                for a2 in range(rem + 1 - a1):
                    j = rem - a1 - a2
                    p_part = P.part(h - j)
                    if p_part.is_empty():
                        continue
                    term = p_part
                    for _ in range(a1):
                        term = dxi(1, term)
                    for _ in range(a2):
                        term = dxi(2, term)
                    if term.is_empty():
                        continue
                    dq = q
                    for _ in range(a1):
                        dq = delta(1, dq)
                    for _ in range(a2):
                        dq = delta(2, dq)
                    coeff = Fraction(1, factorial(a1) * factorial(a2))
                    bracket = bracket + (term * dq).scale(coeff)
        parts[-h - r] = -(leading_inverse * bracket)
    out = NcSymbol.zero(P.commutative)
    for sym in parts.values():
        out = out + sym
    return out


@lru_cache(maxsize=None)
def inverse_dirac_parametrix(depth: int = 3, commutative: bool = False) -> NcSymbol:
    """Parametrix of the Dirac symbol: degrees -1 .. -depth."""
    return parametrix(dirac_symbol(commutative), dirac_leading_inverse(commutative), depth)


@lru_cache(maxsize=None)
def inverse_dirac_squared_parametrix(depth: int = 4, commutative: bool = False) -> NcSymbol:
    """Parametrix of the squared-Dirac symbol: degrees -2 .. -depth."""
    return parametrix(
        dirac_squared_symbol(commutative), leading_inverse_b0(commutative), depth
    )


# ---------------------------------------------------------------------------
# One-forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OneForm:
    """A one-form c1 * s1 + c2 * (k s2), with algebra-class coefficient words.

    The k factor of the second component is structural.  ``None`` marks an
    absent component; the empty word is the unit coefficient.
    """

    c1: tuple[Gen, ...] | None = None
    c2: tuple[Gen, ...] | None = None

    @staticmethod
    def generic(name: str) -> "OneForm":
        maker = {"u": U, "v": V, "w": W}.get(name)
        if maker is not None:
            return OneForm((maker(1),), (maker(2),))
        return OneForm((FREE(name + "1"),), (FREE(name + "2"),))

    @staticmethod
    def of_free(name1: str | None, name2: str | None) -> "OneForm":
        c1 = (FREE(name1),) if name1 else None
        c2 = (FREE(name2),) if name2 else None
        return OneForm(c1, c2)

    def to_symbol(self, commutative: bool = False) -> NcSymbol:
        out = NcSymbol.zero(commutative)
        if self.c1 is not None:
            out = out + NcSymbol.term(G_ONE, SIGMA_1, (0, 0), self.c1, commutative)
        if self.c2 is not None:
            out = out + NcSymbol.term(
                G_ONE, SIGMA_2, (0, 0), self.c2 + (K(1),), commutative
            )
        return out

    def describe(self) -> str:
        from .printer import format_word

        parts = []
        if self.c1 is not None:
            parts.append((format_word(self.c1) or "1") + " s1")
        if self.c2 is not None:
            parts.append((format_word(self.c2) or "1") + " k s2")
        return " + ".join(parts) if parts else "0"


def one_form_product(forms: list, commutative: bool = False) -> NcSymbol:
    """Product of one-forms (or of general degree-0 matrix symbols).

    An odd number of one-forms multiplies out to a combination of s1 and s2
    alone; this is asserted, since the torsion pipeline relies on it.
    """
    if not forms:
        raise ValueError("empty product of one-forms")
    syms = [
        f.to_symbol(commutative) if isinstance(f, OneForm) else f for f in forms
    ]
    out = syms[0]
    for s in syms[1:]:
        out = out * s
    if all(isinstance(f, OneForm) for f in forms) and len(forms) % 2 == 1:
        bad = [t for t in out.terms() if t.sigma not in (SIGMA_1, SIGMA_2)]
        if bad:
            raise AssertionError(
                "odd product of one-forms left the span of s1 and s2"
            )
    return out


def anticommutator_with_dirac(
    u: OneForm, v: OneForm, commutative: bool = False
) -> NcSymbol:
    """Symbol of u {D, v}, an operator of order one, from first principles.

    {D, v} = D v + v D is computed as operator composition at symbol level;
    the derivative of the structural k inside v's second component is picked
    up automatically by the Leibniz rule.
    """
    d = dirac_symbol(commutative)
    vs = v.to_symbol(commutative)
    anticomm = compose(d, vs, 0) + vs * d
    return u.to_symbol(commutative) * anticomm
