"""Finite-structure semantics: evaluate, enumerate, find countermodels.

A structure interprets UNDIR as an n x n boolean table and rev as a function
table over the domain [0, n).  Enumeration order is fixed and documented:
size-ascending, then lexicographic over the rev table, then lexicographic
over the undir table read row-major with False < True.  find_countermodel
reports the first structure in that order satisfying every premise and
falsifying the goal.

Two evaluators exist on purpose: eval_formula is the plain recursive
Tarskian definition; the enumerator uses a bit-parallel numpy path that
evaluates all 2^(n*n) undir tables for one rev table at once.  Their
agreement is property-tested.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np

from .syntax import (
    And,
    Atom,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Term,
    Var,
    free_vars,
)

# Bit-parallel arrays for n=4 take 2^16 bytes per atom; beyond that fall
# back to the per-structure generator.
_BATCH_MAX_SIZE = 4


class UnassignedVariable(KeyError):
    pass


@dataclass(frozen=True)
class Structure:
    size: int
    undir: tuple[tuple[bool, ...], ...]
    rev: tuple[int, ...]

    def __post_init__(self):
        n = self.size
        assert len(self.rev) == n and all(0 <= r < n for r in self.rev)
        assert len(self.undir) == n and all(len(row) == n for row in self.undir)

    def describe(self) -> str:
        pairs = ", ".join(
            f"({i},{j})" for i in range(self.size) for j in range(self.size) if self.undir[i][j]
        )
        return f"size={self.size} rev=[{' '.join(map(str, self.rev))}] undir={{{pairs}}}"

    def to_record(self) -> dict:
        return {
            "size": self.size,
            "rev": list(self.rev),
            "undir": [[i, j] for i in range(self.size) for j in range(self.size) if self.undir[i][j]],
        }

    @classmethod
    def from_record(cls, record: Mapping) -> "Structure":
        n = record["size"]
        pairs = {tuple(p) for p in record["undir"]}
        table = tuple(tuple((i, j) in pairs for j in range(n)) for i in range(n))
        return cls(n, table, tuple(record["rev"]))


def eval_term(s: Structure, t: Term, a: Mapping[str, int]) -> int:
    if isinstance(t, Var):
        try:
            return a[t.name]
        except KeyError:
            raise UnassignedVariable(t.name) from None
    args = [eval_term(s, u, a) for u in t.args]
    if t.fn != "rev":
        raise ValueError(f"structure does not interpret function {t.fn!r}")
    return s.rev[args[0]]


def eval_formula(s: Structure, f: Formula, a: Mapping[str, int] | None = None) -> bool:
    """Classical truth value of f in s under assignment a."""
    a = dict(a or {})
    return _eval(s, f, a)


def _eval(s: Structure, f: Formula, a: dict) -> bool:
    if isinstance(f, Atom):
        if f.pred != "UNDIR":
            raise ValueError(f"structure does not interpret predicate {f.pred!r}")
        i = eval_term(s, f.args[0], a)
        j = eval_term(s, f.args[1], a)
        return s.undir[i][j]
    if isinstance(f, Not):
        return not _eval(s, f.body, a)
    if isinstance(f, And):
        return _eval(s, f.left, a) and _eval(s, f.right, a)
    if isinstance(f, Or):
        return _eval(s, f.left, a) or _eval(s, f.right, a)
    if isinstance(f, Implies):
        return (not _eval(s, f.left, a)) or _eval(s, f.right, a)
    if isinstance(f, (Forall, Exists)):
        want_all = isinstance(f, Forall)
        saved = a.get(f.var)
        had = f.var in a
        for d in range(s.size):
            a[f.var] = d
            v = _eval(s, f.body, a)
            if v != want_all:
                result = not want_all
                break
        else:
            result = want_all
        if had:
            a[f.var] = saved
        else:
            del a[f.var]
        return result
    raise TypeError(f"not a formula: {f!r}")


def structure_count(n: int) -> int:
    return (2 ** (n * n)) * (n ** n)


def enumerate_structures(n: int) -> Iterator[Structure]:
    """All structures of size n exactly once, in the documented order."""
    if n < 1:
        raise ValueError("domain size must be >= 1")
    for rev in itertools.product(range(n), repeat=n):
        for bits in itertools.product((False, True), repeat=n * n):
            table = tuple(tuple(bits[i * n + j] for j in range(n)) for i in range(n))
            yield Structure(n, table, rev)


# ---------------------------------------------------------------------------
# Bit-parallel evaluation: one boolean vector over all undir tables of size n
# for a fixed rev table.  Index i encodes the table whose row-major bit
# string is i written MSB-first, matching the enumeration order.


def _atom_tables(n: int) -> list[list[np.ndarray]]:
    count = 2 ** (n * n)
    idx = np.arange(count, dtype=np.uint32)
    tables = []
    for i in range(n):
        row = []
        for j in range(n):
            shift = n * n - 1 - (i * n + j)
            row.append(((idx >> shift) & 1).astype(bool))
        tables.append(row)
    return tables


def _batch_eval(f: Formula, rev: Sequence[int], atoms, a: dict, n: int) -> np.ndarray:
    if isinstance(f, Atom):
        if f.pred != "UNDIR":
            raise ValueError(f"structure does not interpret predicate {f.pred!r}")
        i = _assign_term(f.args[0], rev, a)
        j = _assign_term(f.args[1], rev, a)
        return atoms[i][j]
    if isinstance(f, Not):
        return ~_batch_eval(f.body, rev, atoms, a, n)
    if isinstance(f, And):
        return _batch_eval(f.left, rev, atoms, a, n) & _batch_eval(f.right, rev, atoms, a, n)
    if isinstance(f, Or):
        return _batch_eval(f.left, rev, atoms, a, n) | _batch_eval(f.right, rev, atoms, a, n)
    if isinstance(f, Implies):
        return ~_batch_eval(f.left, rev, atoms, a, n) | _batch_eval(f.right, rev, atoms, a, n)
    if isinstance(f, (Forall, Exists)):
        acc = None
        for d in range(n):
            a2 = dict(a)
            a2[f.var] = d
            v = _batch_eval(f.body, rev, atoms, a2, n)
            if acc is None:
                acc = v
            elif isinstance(f, Forall):
                acc = acc & v
            else:
                acc = acc | v
        return acc
    raise TypeError(f"not a formula: {f!r}")


def _assign_term(t: Term, rev: Sequence[int], a: Mapping[str, int]) -> int:
    if isinstance(t, Var):
        try:
            return a[t.name]
        except KeyError:
            raise UnassignedVariable(t.name) from None
    if t.fn != "rev":
        raise ValueError(f"structure does not interpret function {t.fn!r}")
    return rev[_assign_term(t.args[0], rev, a)]


def _structure_from_index(n: int, rev: Sequence[int], index: int) -> Structure:
    bits = format(index, f"0{n * n}b")
    table = tuple(tuple(bits[i * n + j] == "1" for j in range(n)) for i in range(n))
    return Structure(n, table, tuple(rev))


def _find_at_size(
    premises: Sequence[Formula],
    goal: Formula,
    n: int,
    rev_range: tuple[int, int] | None = None,
) -> tuple[int, int] | None:
    """First (rev index, undir index) with all premises true and goal false."""
    revs = list(itertools.product(range(n), repeat=n))
    lo, hi = rev_range if rev_range else (0, len(revs))
    atoms = _atom_tables(n)
    for ri in range(lo, hi):
        rev = revs[ri]
        mask = ~_batch_eval(goal, rev, atoms, {}, n)
        for p in premises:
            if not mask.any():
                break
            mask &= _batch_eval(p, rev, atoms, {}, n)
        hits = np.flatnonzero(mask)
        if hits.size:
            return ri, int(hits[0])
    return None


def find_countermodel(
    premises: Sequence[Formula], goal: Formula, max_n: int
) -> Structure | None:
    """Smallest structure (documented order) satisfying the premises and
    falsifying the goal, or None up to max_n."""
    for f in list(premises) + [goal]:
        if free_vars(f):
            raise ValueError("premises and goal must be closed")
    for n in range(1, max_n + 1):
        if n <= _BATCH_MAX_SIZE:
            hit = _find_at_size(premises, goal, n)
            if hit is not None:
                ri, ui = hit
                rev = list(itertools.product(range(n), repeat=n))[ri]
                return _structure_from_index(n, rev, ui)
        else:
            for s in enumerate_structures(n):
                if not eval_formula(s, goal) and all(eval_formula(s, p) for p in premises):
                    return s
    return None


def holds_in_all(formulas: Sequence[Formula], n: int) -> bool:
    """True iff every formula is true in every structure of size exactly n."""
    atoms = _atom_tables(n) if n <= _BATCH_MAX_SIZE else None
    if atoms is not None:
        for rev in itertools.product(range(n), repeat=n):
            for f in formulas:
                if not _batch_eval(f, rev, atoms, {}, n).all():
                    return False
        return True
    return all(
        eval_formula(s, f) for s in enumerate_structures(n) for f in formulas
    )


def equivalent_on_all(f: Formula, g: Formula, max_n: int) -> bool:
    """True iff f and g take the same truth value in every structure of
    size <= max_n (both closed)."""
    for n in range(1, max_n + 1):
        if n <= _BATCH_MAX_SIZE:
            atoms = _atom_tables(n)
            for rev in itertools.product(range(n), repeat=n):
                if (
                    _batch_eval(f, rev, atoms, {}, n) != _batch_eval(g, rev, atoms, {}, n)
                ).any():
                    return False
        else:
            for s in enumerate_structures(n):
                if eval_formula(s, f) != eval_formula(s, g):
                    return False
    return True


def direction_circle(n: int = 4) -> Structure:
    """The intended model: n directions, rev = half turn, undir = inequality."""
    if n % 2:
        raise ValueError("needs an even number of directions")
    table = tuple(tuple(i != j for j in range(n)) for i in range(n))
    rev = tuple((d + n // 2) % n for d in range(n))
    return Structure(n, table, rev)
