"""dirgeo: a natural-deduction toolkit for the directed-line fragment of
ordered affine geometry: parse the UNDIR/rev language, check derivation
scripts, re-derive the fragment's theorems with a bounded prover, and
decide small entailments by finite-model enumeration."""

from .syntax import Formula, Term, parse_formula, parse_term, print_formula, print_term

__all__ = [
    "Formula",
    "Term",
    "parse_formula",
    "parse_term",
    "print_formula",
    "print_term",
]

__version__ = "0.1.0"
