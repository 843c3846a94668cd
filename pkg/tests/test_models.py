import itertools
import random

import pytest

from dirgeo.geometry import axiom
from dirgeo.models import (
    Structure,
    UnassignedVariable,
    _atom_tables,
    _batch_eval,
    direction_circle,
    enumerate_structures,
    equivalent_on_all,
    eval_formula,
    find_countermodel,
    holds_in_all,
    structure_count,
)
from dirgeo.syntax import parse_formula
from helpers import closed_up, random_formula


def _struct(n, pairs, rev):
    table = tuple(tuple((i, j) in pairs for j in range(n)) for i in range(n))
    return Structure(n, table, tuple(rev))


INEQ2 = _struct(2, {(0, 1), (1, 0)}, rev=(1, 0))


class TestEval:
    def test_i5_on_inequality_model(self):
        assert eval_formula(INEQ2, axiom("I5")) is True

    def test_i8_fails_with_identity_rev(self):
        s = _struct(2, {(0, 1), (1, 0)}, rev=(0, 1))
        assert eval_formula(s, axiom("I8")) is False

    def test_direction_circle_satisfies_all(self):
        dc = direction_circle(4)
        for name in ("I5", "I6", "I7", "I8", "ODO"):
            assert eval_formula(dc, axiom(name)) is True, name

    def test_open_formula_needs_assignment(self):
        f = parse_formula("UNDIR x y")
        assert eval_formula(INEQ2, f, {"x": 0, "y": 1}) is True
        assert eval_formula(INEQ2, f, {"x": 0, "y": 0}) is False
        with pytest.raises(UnassignedVariable):
            eval_formula(INEQ2, f, {"x": 0})

    def test_rev_term_evaluation(self):
        f = parse_formula("UNDIR x [rev x]")
        assert eval_formula(INEQ2, f, {"x": 0}) is True

    @pytest.mark.parametrize("seed", range(15))
    def test_closed_formula_ignores_assignment(self, seed):
        rng = random.Random(4000 + seed)
        f = closed_up(random_formula(rng, depth=3))
        junk = {v: rng.randrange(2) for v in ("x", "y", "q", "r")}
        assert eval_formula(INEQ2, f) == eval_formula(INEQ2, f, junk)


class TestEnumeration:
    def test_counts(self):
        assert structure_count(1) == 2
        assert structure_count(2) == 64
        assert structure_count(3) == 13824
        assert sum(1 for _ in enumerate_structures(1)) == 2
        assert sum(1 for _ in enumerate_structures(2)) == 64

    def test_documented_order(self):
        first, second = itertools.islice(enumerate_structures(2), 2)
        assert first.rev == (0, 0) and not any(itertools.chain(*first.undir))
        assert second.rev == (0, 0) and second.undir == ((False, False), (False, True))
        everything = list(enumerate_structures(2))
        assert everything[-1].rev == (1, 1) and all(itertools.chain(*everything[-1].undir))

    def test_unique(self):
        seen = set(enumerate_structures(2))
        assert len(seen) == 64

    @pytest.mark.parametrize("seed", range(10))
    def test_batch_agrees_with_recursive_eval(self, seed):
        rng = random.Random(5000 + seed)
        f = closed_up(random_formula(rng, depth=3))
        n = 2
        atoms = _atom_tables(n)
        structures = list(enumerate_structures(n))
        for rev in itertools.product(range(n), repeat=n):
            got = _batch_eval(f, rev, atoms, {}, n)
            for idx in range(2 ** (n * n)):
                s = next(
                    t for t in structures if t.rev == rev and _undir_index(t) == idx
                )
                assert bool(got[idx]) == eval_formula(s, f)


def _undir_index(s: Structure) -> int:
    bits = "".join(
        "1" if s.undir[i][j] else "0" for i in range(s.size) for j in range(s.size)
    )
    return int(bits, 2)


class TestCountermodels:
    def test_w2_from_i5_i6(self):
        cm = find_countermodel([axiom("I5"), axiom("I6")], axiom("W2"), 4)
        assert cm == _struct(2, {(0, 1), (1, 0)}, rev=(0, 0))
        assert eval_formula(cm, axiom("I5")) and eval_formula(cm, axiom("I6"))
        assert not eval_formula(cm, axiom("W2"))

    def test_w3_from_i5_i6(self):
        cm = find_countermodel([axiom("I5"), axiom("I6")], axiom("W3"), 4)
        assert cm == _struct(3, {(0, 1), (1, 0), (1, 2), (2, 1)}, rev=(0, 0, 1))
        assert not eval_formula(cm, axiom("W3"))

    def test_involutive_size4_structure_also_refutes_w2(self):
        # a larger refutation with rev an involution; not the enumeration-first
        s = _struct(4, {(0, 1), (0, 2), (0, 3), (1, 0), (2, 0), (3, 0)}, rev=(1, 0, 3, 2))
        assert eval_formula(s, axiom("I5")) and eval_formula(s, axiom("I6"))
        assert not eval_formula(s, axiom("W2"))

    def test_no_countermodels_for_proved_entailments(self):
        assert find_countermodel([axiom("I6")], axiom("W1"), 3) is None
        assert find_countermodel([axiom("I6")], axiom("W4"), 3) is None
        assert find_countermodel([axiom("I7"), axiom("I8"), axiom("ODO")], axiom("I6"), 3) is None
        assert find_countermodel([axiom("I5"), axiom("ODO")], axiom("OO"), 3) is None

    def test_empty_premises_size_one(self):
        cm = find_countermodel([], axiom("I5"), 1)
        assert cm == _struct(1, {(0, 0)}, rev=(0,))

    def test_open_formula_rejected(self):
        with pytest.raises(ValueError):
            find_countermodel([], parse_formula("UNDIR x y"), 2)

    def test_uninterpreted_predicate_rejected_by_both_evaluators(self):
        from dirgeo.geometry import axiom
        from dirgeo.syntax import GEOMETRY_WITH_DEFS

        con = parse_formula("(Ax)(Ay)[CON x y -> CON x y]", GEOMETRY_WITH_DEFS)
        with pytest.raises(ValueError):
            eval_formula(INEQ2, con)
        with pytest.raises(ValueError):
            find_countermodel([], con, 2)

    def test_dir_opp_exclusion_follows_from_i8(self):
        claim = parse_formula("(Ax)(Ay)~[~UNDIR x y & ~UNDIR x [rev y]]")
        assert find_countermodel([axiom("I8")], claim, 3) is None
        assert find_countermodel([], claim, 2) is not None


class TestRecords:
    def test_roundtrip(self):
        s = _struct(3, {(0, 1), (2, 0)}, rev=(1, 2, 0))
        assert Structure.from_record(s.to_record()) == s

    def test_describe(self):
        s = _struct(2, {(0, 1)}, rev=(1, 0))
        assert s.describe() == "size=2 rev=[1 0] undir={(0,1)}"


class TestHelpers:
    def test_holds_in_all(self):
        taut = parse_formula("UNDIR x x -> UNDIR x x")
        assert holds_in_all([closed_up(taut)], 2)
        assert not holds_in_all([axiom("I5")], 2)

    def test_equivalent_on_all(self):
        f = parse_formula("(Ax)~UNDIR x x")
        g = parse_formula("~(Ex)UNDIR x x")
        assert equivalent_on_all(f, g, 3)
        assert not equivalent_on_all(axiom("I5"), axiom("I8"), 2)
