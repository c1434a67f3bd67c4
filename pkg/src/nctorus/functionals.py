"""The four spectral-functional pipelines: metric, torsion, closedness, Einstein.

Convention used throughout (documented in every report header): the residue
of a symbol is

    (1/2) * integral over the unit circle of  tau ( Tr_sigma rho_{-2} )

i.e. the matrix trace is normalized to tr(1) = 1.  With this convention the
metric functional of generic one-forms evaluates to 2*pi*(k^-1 u1 v1 + k u2 v2)
and the torsion integrals carry the values quoted in the per-group lists.
The angular normalization of the full circle corresponds to the ``raw``
prefactor 4; the Einstein tables are emitted under ``table`` normalization
(prefactor 1) so their entries match the reference tables, and no vanishing
verdict depends on the choice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import (
    NcSymbol,
    NcTerm,
    SIGMA_ID,
    homogeneous_part,
    sigma_trace,
)
from .calculus import (
    OneForm,
    anticommutator_with_dirac,
    compose,
    inverse_dirac_parametrix,
    inverse_dirac_squared_parametrix,
    one_form_product,
)
from .exact import RatFun
from .residue import (
    GroupSum,
    ResidueTerm,
    angular_reduce,
    canonicalize_slots,
    group_and_sum,
    merge_residue_terms,
)

WRES_CONVENTION = (
    "Wres = (1/2) * S^1 angular integral of tau(Tr_sigma rho_-2); "
    "normalized matrix trace, full-circle angular measure (raw prefactor 4)"
)

HALF = Fraction(1, 2)


@dataclass
class FunctionalReport:
    """Grouped sums and verdicts for one functional evaluation."""

    functional: str
    inputs: str
    normalization: str
    groups: list[GroupSum]
    raw_groups: list[GroupSum] | None = None
    tables: list | None = None
    convention: str = WRES_CONVENTION
    extra: dict = field(default_factory=dict)

    @property
    def overall_zero(self) -> bool:
        return all(g.is_zero for g in self.groups)

    def nonzero_groups(self) -> list[GroupSum]:
        return [g for g in self.groups if not g.is_zero]

    def integral_keys(self) -> list:
        keys = []
        for g in self.groups:
            for rt in g.terms:
                if rt.key is not None:
                    keys.append(rt.key)
        return keys


def _reduce_traced(
    traced: NcSymbol, normalization: str, merged_pole: bool = False
) -> list[ResidueTerm]:
    terms = []
    for t in traced.sorted_terms():
        rt = angular_reduce(t, normalization, merged_pole)
        if rt is not None:
            terms.append(rt)
    return merge_residue_terms(terms)


def _wres_minus2(
    symbol: NcSymbol, normalization: str, merged_pole: bool = False
) -> list[ResidueTerm]:
    """Normalized sigma-trace of the degree -2 part, angularly reduced."""
    traced = sigma_trace(symbol.part(-2)).scale(HALF)
    return _reduce_traced(traced, normalization, merged_pole)


# ---------------------------------------------------------------------------
# Metric
# ---------------------------------------------------------------------------

def metric_functional(
    u: OneForm, v: OneForm, commutative: bool = False
) -> dict[tuple, tuple[int, RatFun]]:
    """Residue of u v against the squared-Dirac parametrix.

    Returns the exact coefficient map {coefficient word: (k power, pi-multiple)};
    words whose sigma-trace vanishes are absent.
    """
    uv = u.to_symbol(commutative) * v.to_symbol(commutative)
    c = inverse_dirac_squared_parametrix(4, commutative)
    rts = _wres_minus2(compose(uv, c, -2), "raw", merged_pole=commutative)
    out: dict[tuple, tuple[int, RatFun]] = {}
    for rt in rts:
        if rt.pattern[0] != "pure":
            raise AssertionError("metric pipeline produced a slot pattern")
        if rt.uv_word in out:
            prev = out[rt.uv_word]
            if prev[0] != rt.k_power:
                raise AssertionError("mixed k powers in the metric map")
            out[rt.uv_word] = (prev[0], prev[1] + rt.value)
        else:
            out[rt.uv_word] = (rt.k_power, rt.value)
    return {w: kv for w, kv in out.items() if not kv[1].is_zero()}


# ---------------------------------------------------------------------------
# Torsion and spectral closedness
# ---------------------------------------------------------------------------

def spectral_closedness(
    forms: list[OneForm], commutative: bool = False
) -> FunctionalReport:
    """Residue of (product of one-forms) * D |D|^-2; identically zero here.

    Odd-length products stay in the span of s1, s2 and meet the degree -2
    inverse-Dirac symbol head on; even-length products only produce identity
    and s3 components whose sigma-trace against it vanishes outright.
    """
    if not forms:
        raise ValueError("need at least one one-form")
    prod = one_form_product(forms, commutative)
    b = inverse_dirac_parametrix(3, commutative)
    rts = _wres_minus2(compose(prod, b, -2), "raw", merged_pole=commutative)
    groups = group_and_sum([canonicalize_slots(rt) for rt in rts])
    inputs = ", ".join(f.describe() for f in forms)
    return FunctionalReport(
        functional="closedness" if len(forms) != 3 else "torsion",
        inputs=inputs,
        normalization="raw",
        groups=groups,
    )


def torsion_functional(
    u: OneForm, v: OneForm, w: OneForm, commutative: bool = False
) -> FunctionalReport:
    """Residue of u v w D |D|^-2 for three one-forms."""
    report = spectral_closedness([u, v, w], commutative)
    report.functional = "torsion"
    return report


def torsion_symbolic(commutative: bool = False) -> FunctionalReport:
    """Torsion pipeline applied to a fully symbolic product a s1 + b (k s2).

    Since any product of three one-forms takes this shape with a, b in the
    coefficient algebra, the vanishing of this report proves the functional
    vanishes identically.
    """
    report = spectral_closedness([OneForm.of_free("a", "b")], commutative)
    report.functional = "torsion"
    report.inputs = "a s1 + b k s2 (symbolic coefficients)"
    return report


# ---------------------------------------------------------------------------
# Einstein
# ---------------------------------------------------------------------------

def einstein_functional(
    u: OneForm | None = None,
    v: OneForm | None = None,
    normalization: str = "table",
    commutative: bool = False,
    drop_rho0_index: int | None = None,
) -> FunctionalReport:
    """Residue of u {D, v} D D^-2, fully grouped.

    The composed degree -2 symbol is built from the general expansion (the
    second xi-derivative of the order-1 part and the xi-derivatives of the
    order-0 part vanish here, which the test suite checks separately).  The
    report groups: coefficient-derivative words (tensoriality), second
    derivatives of k, and the six first-derivative-pair tables.

    ``drop_rho0_index`` deletes one order-0 term before composing; it exists
    as a fault-injection hook for the negative-control test.
    """
    u = u or OneForm.generic("u")
    v = v or OneForm.generic("v")
    a = anticommutator_with_dirac(u, v, commutative)
    if drop_rho0_index is not None:
        rho0 = a.part(0).sorted_terms()
        victim = rho0[drop_rho0_index % len(rho0)]
        a = a - NcSymbol.term(
            victim.coeff, victim.sigma, victim.xi, victim.word, commutative
        )
    b = inverse_dirac_parametrix(3, commutative)
    rts = _wres_minus2(compose(a, b, -2), normalization, merged_pole=commutative)
    canonical = [canonicalize_slots(rt) for rt in rts]
    groups = group_and_sum(canonical)
    raw_groups = group_and_sum(rts)
    from .tables import tables_from_groups

    report = FunctionalReport(
        functional="einstein",
        inputs=f"u = {u.describe()}; v = {v.describe()}",
        normalization=normalization,
        groups=groups,
        raw_groups=raw_groups,
    )
    report.tables = tables_from_groups(groups)
    return report


def tensoriality_check(report: FunctionalReport) -> bool:
    """Every group whose word contains a coefficient derivative must vanish.

    This is the operational form of bilinearity of the functional over the
    algebra; vacuously true on an empty report.
    """
    for g in report.groups:
        if any(gen[0] in ("DU", "DV", "DW") for gen in g.uv_word) and not g.is_zero:
            return False
    return True


def second_derivative_groups(report: FunctionalReport) -> list[GroupSum]:
    return [
        g
        for g in report.groups
        if g.pattern[0] == "oneslot" and g.pattern[1][0] == "DDK"
    ]


def coefficient_derivative_groups(report: FunctionalReport) -> list[GroupSum]:
    return [
        g
        for g in report.groups
        if any(gen[0] in ("DU", "DV", "DW") for gen in g.uv_word)
    ]
