"""Residue tables: construction from grouped terms plus emission formats.

Six tables cover the first-derivative pairs of the Einstein residue, indexed
by the coefficient word and the canonical slot pair:

    1: u1 v1, (delta_1, delta_1)      2: u1 v1, (delta_2, delta_2)
    3: u1 v2, (delta_1, delta_2)      4: u2 v1, (delta_1, delta_2)
    5: u2 v2, (delta_1, delta_1)      6: u2 v2, (delta_2, delta_2)

Each row records the rotated term, its integral key and the evaluated
pi-multiple; the Result column of every table sums to zero exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .exact import RatFun, parse_ratfun
from .printer import format_term, format_word
from .residue import GroupSum, IntegralKey, ResidueTerm

_TABLE_INDEX = {
    ((("U", 1), ("V", 1)), (1, 1)): 1,
    ((("U", 1), ("V", 1)), (2, 2)): 2,
    ((("U", 1), ("V", 2)), (1, 2)): 3,
    ((("U", 2), ("V", 1)), (1, 2)): 4,
    ((("U", 2), ("V", 2)), (1, 1)): 5,
    ((("U", 2), ("V", 2)), (2, 2)): 6,
}


@dataclass
class TableRow:
    no: int
    coeff: Fraction
    xi: tuple[int, int]
    word: tuple
    key: IntegralKey
    value: RatFun

    def term_text(self) -> str:
        from .algebra import NcTerm
        from .exact import GaussRat

        t = NcTerm(GaussRat(self.coeff), 0, self.xi, self.word)
        return format_term(t, xi_first=True)

    def f_text(self) -> str:
        c = "" if self.coeff == 1 else ("-" if self.coeff == -1 else f"{self.coeff} ")
        return f"{c}{self.key}"


@dataclass
class Table:
    index: int
    uv_word: tuple
    slots: tuple[int, int]
    k_power: int
    rows: list[TableRow]

    @property
    def total(self) -> RatFun:
        out = RatFun.const(0)
        for r in self.rows:
            out = out + r.value
        return out

    def caption(self) -> str:
        uv = format_word(self.uv_word)
        i, j = self.slots
        return (
            f"Terms at {uv} of the form "
            f"C xi_1^2a xi_2^2b b_0^m k^a delta_{i}(k) b_0^n k^b delta_{j}(k)"
        )

    def row_triples(self) -> list[tuple]:
        """(coeff, m, n, beta, a, b, value) multiset for exact comparison."""
        return sorted(
            (r.coeff,) + r.key.as_tuple() + (str(r.value),) for r in self.rows
        )


def _row_sort_key(rt: ResidueTerm):
    k = rt.key
    return (k.m + k.n, k.m, k.beta, k.a, k.b, rt.coeff, rt.xi)


def tables_from_groups(groups: list[GroupSum]) -> list[Table]:
    out = []
    for g in groups:
        if g.pattern[0] != "twoslot":
            continue
        index = _TABLE_INDEX.get((g.uv_word, (g.pattern[1], g.pattern[2])))
        if index is None:
            continue
        rows = [
            TableRow(no, rt.coeff, rt.xi, rt.word, rt.key, rt.value)
            for no, rt in enumerate(sorted(g.terms, key=_row_sort_key), start=1)
        ]
        out.append(Table(index, g.uv_word, (g.pattern[1], g.pattern[2]), g.k_power, rows))
    return sorted(out, key=lambda t: t.index)


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------

def table_markdown(t: Table) -> str:
    lines = [
        f"### Table {t.index}: {t.caption()}  (k^{t.k_power})",
        "",
        "| No. | Terms | C x F(s,m,n,beta,a,b) | Result |",
        "| --- | --- | --- | --- |",
    ]
    for r in t.rows:
        lines.append(
            f"| {r.no} | {r.term_text()} | {r.f_text()} | pi * {r.value} |"
        )
    lines.append(f"| | sum | | pi * {t.total} |")
    return "\n".join(lines)


def table_latex(t: Table) -> str:
    lines = [
        "\\begin{longtable}{|c|c|c|c|}",
        f"\\caption{{{t.caption()}}}\\\\",
        "\\hline",
        "No. & Terms & $C \\times F(s,m,n,\\beta,a,b)$ & Result \\\\",
        "\\hline",
        "\\endhead",
    ]
    for r in t.rows:
        lines.append(
            f"{r.no} & ${r.term_text()}$ & ${r.f_text()}$ & $\\pi \\cdot {r.value}$ \\\\ \\hline"
        )
    lines.append(f" & sum & & $\\pi \\cdot {t.total}$ \\\\ \\hline")
    lines.append("\\end{longtable}")
    return "\n".join(lines)


def table_json_obj(t: Table) -> dict:
    return {
        "index": t.index,
        "coefficient_word": format_word(t.uv_word),
        "slots": list(t.slots),
        "k_power": t.k_power,
        "rows": [
            {
                "no": r.no,
                "term": r.term_text(),
                "coeff": str(r.coeff),
                "m": r.key.m,
                "n": r.key.n,
                "beta": r.key.beta,
                "a": r.key.a,
                "b": r.key.b,
                "result": str(r.value),
            }
            for r in t.rows
        ],
        "sum": str(t.total),
    }


# ---------------------------------------------------------------------------
# Reference comparison
# ---------------------------------------------------------------------------

def reference_triples(rows: list[dict]) -> list[tuple]:
    out = []
    for row in rows:
        value = parse_ratfun(row["result"])
        out.append(
            (
                Fraction(row["coeff"]),
                row["m"],
                row["n"],
                row["beta"],
                row["a"],
                row["b"],
                str(value),
            )
        )
    return sorted(out)


def compare_with_reference(t: Table, rows: list[dict]) -> list[str]:
    """Multiset diff of (coeff, key, value) triples; empty when identical."""
    from collections import Counter

    mine = Counter(t.row_triples())
    ref = Counter(reference_triples(rows))
    diffs = []
    for triple, count in sorted((ref - mine).items()):
        diffs.append(f"missing from engine table {t.index} (x{count}): {triple}")
    for triple, count in sorted((mine - ref).items()):
        diffs.append(f"extra in engine table {t.index} (x{count}): {triple}")
    return diffs
