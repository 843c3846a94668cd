"""Bounded forward-chaining proof search for the fragment's theorems.

The strategy mirrors the shape of the bundled derivations: strip the goal's
quantifier prefix to fresh v-variables, assume antecedents and the negations
of leading disjuncts (conditional-proof shape), then saturate forward under
US / MP / MT / IMP / LDS / RDS / SIMP / DE.MORGAN / DISTRIBUTIVE-LAW with
instantiation terms drawn from the subterms of active formulas (optionally
wrapped in one extra rev), iterating the rev-nesting bound upward.  When
saturation stalls, stuck disjunctions are case-split up to the nesting
bound.  Everything is deterministic: fixed iteration orders, no randomness,
no wall-clock decisions.

A proved result is reconstructed into a Proof object and re-checked by the
kernel before being returned; the prover never self-certifies.
"""

from __future__ import annotations

import itertools
import time
from collections import deque
from dataclasses import dataclass

from .kernel import (
    Justification,
    Proof,
    ProofLine,
    Rule,
    check_proof,
)
from .syntax import (
    And,
    App,
    Atom,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Term,
    Var,
    bound_vars,
    canonical_key,
    flatten_or,
    free_vars,
    print_formula,
    rule_eq,
    substitute,
    term_vars,
)

POOL_SUBTERMS_ONLY = "subterms-only"
POOL_SUBTERMS_PLUS_REV = "subterms-plus-rev"


@dataclass(frozen=True)
class SearchConfig:
    max_depth: int = 2  # case-split nesting bound
    max_term_depth: int = 3  # rev-nesting bound on instantiation terms
    max_lines: int = 50000  # derived-formula budget for the whole call
    instantiation_pool: str = POOL_SUBTERMS_PLUS_REV


@dataclass
class SearchStats:
    lines_generated: int = 0
    instantiations_tried: int = 0
    wall_time: float = 0.0


@dataclass
class SearchResult:
    status: str  # proved | exhausted | budget-exceeded
    proof: Proof | None
    stats: SearchStats

    @property
    def proved(self) -> bool:
        return self.status == "proved"


class _Budget(Exception):
    pass


@dataclass
class _Node:
    formula: Formula
    rule: Rule
    cited: tuple["_Node", ...] = ()
    annot: tuple[tuple[Term, str], ...] = ()
    seq: int = 0
    extra: tuple["_Node", ...] = ()  # emission-only dependencies (case openings)


def _neg(f: Formula) -> Formula:
    return f.body if isinstance(f, Not) else Not(f)


def _strip1(f: Formula) -> Formula:
    if isinstance(f, Not) and isinstance(f.body, Not):
        return f.body.body
    return f


def _contra_keys(f: Formula) -> set:
    """Canonical keys of formulas that contradict f."""
    out = {canonical_key(Not(f))}
    if isinstance(f, Not):
        out.add(canonical_key(f.body))
    s = _strip1(f)
    if s is not f:
        out.add(canonical_key(Not(s)))
        if isinstance(s, Not):
            out.add(canonical_key(s.body))
    return out


def _term_depth(t: Term) -> int:
    if isinstance(t, Var):
        return 0
    return 1 + max(_term_depth(a) for a in t.args)


def _imp_result(f: Implies) -> Formula:
    def conjuncts(g: Formula) -> list[Formula]:
        if isinstance(g, And):
            return conjuncts(g.left) + conjuncts(g.right)
        return [g]

    out = f.right
    for a in reversed(conjuncts(f.left)):
        out = Or(_neg(a), out)
    return out


class _Engine:
    """Shared state for one prove() call."""

    def __init__(self, cfg: SearchConfig, branch_vars: frozenset[str]):
        self.cfg = cfg
        self.stats = SearchStats()
        self.seq = itertools.count(1)
        self.branch_vars = branch_vars
        self.pruned = False

    def node(self, formula: Formula, rule: Rule, cited=(), annot=(), extra=()) -> _Node:
        self.stats.lines_generated += 1
        if self.stats.lines_generated > self.cfg.max_lines:
            raise _Budget()
        return _Node(formula, rule, tuple(cited), tuple(annot), next(self.seq), tuple(extra))


class _Context:
    """One branch: canonical key -> node, with combination indexes."""

    def __init__(self, engine: _Engine):
        self.engine = engine
        self.nodes: dict = {}  # canonical key -> _Node
        self.order: list[_Node] = []
        self.by_antecedent: dict = {}  # key(A) -> [Implies nodes]
        self.mt_index: dict = {}  # contradiction key of consequent -> [Implies nodes]
        self.lds_index: dict = {}  # contradiction key of left disjunct -> [Or nodes]
        self.rds_index: dict = {}  # contradiction key of right disjunct -> [Or nodes]
        self.universals: list[_Node] = []
        self.tried_instantiations: set = set()  # (universal key, term)
        self.split_disjunctions: set = set()  # keys already case-split

    def clone(self) -> "_Context":
        c = _Context.__new__(_Context)
        c.engine = self.engine
        c.nodes = dict(self.nodes)
        c.order = list(self.order)
        c.by_antecedent = {k: list(v) for k, v in self.by_antecedent.items()}
        c.mt_index = {k: list(v) for k, v in self.mt_index.items()}
        c.lds_index = {k: list(v) for k, v in self.lds_index.items()}
        c.rds_index = {k: list(v) for k, v in self.rds_index.items()}
        c.universals = list(self.universals)
        c.tried_instantiations = set(self.tried_instantiations)
        c.split_disjunctions = set(self.split_disjunctions)
        return c

    def has(self, key) -> bool:
        return key in self.nodes

    def add(self, node: _Node, worklist) -> _Node:
        key = canonical_key(node.formula)
        if key in self.nodes:
            return self.nodes[key]
        self.nodes[key] = node
        self.order.append(node)
        worklist.append(node)
        return node

    # -- saturation ---------------------------------------------------------

    def saturate(self, targets: set, term_depth: int, seed) -> _Node | None:
        """Forward closure; returns the node for a target key if reached."""
        worklist = deque(seed)
        while True:
            while worklist:
                node = worklist.popleft()
                self._combine(node, worklist)
                for key in targets:
                    if key in self.nodes:
                        return self.nodes[key]
            if not self._instantiate_round(term_depth, worklist):
                break
        for key in targets:
            if key in self.nodes:
                return self.nodes[key]
        return None

    def _combine(self, node: _Node, worklist) -> None:
        eng = self.engine
        f = node.formula
        key = canonical_key(f)

        if isinstance(f, Forall):
            self.universals.append(node)
        if isinstance(f, Implies):
            self.by_antecedent.setdefault(canonical_key(f.left), []).append(node)
            for ck in _contra_keys(f.right):
                self.mt_index.setdefault(ck, []).append(node)
            # IMP normalization
            self.add(eng.node(_imp_result(f), Rule.IMP, (node,)), worklist)
            # MP / MT against already-derived lines
            minor = self.nodes.get(canonical_key(f.left))
            if minor is not None:
                self.add(eng.node(f.right, Rule.MP, (node, minor)), worklist)
            for ck in _contra_keys(f.right):
                other = self.nodes.get(ck)
                if other is not None:
                    self.add(eng.node(Not(f.left), Rule.MT, (node, other)), worklist)
        if isinstance(f, Or):
            for ck in _contra_keys(f.left):
                self.lds_index.setdefault(ck, []).append(node)
                unit = self.nodes.get(ck)
                if unit is not None:
                    self.add(eng.node(f.right, Rule.LDS, (node, unit)), worklist)
            for ck in _contra_keys(f.right):
                self.rds_index.setdefault(ck, []).append(node)
                unit = self.nodes.get(ck)
                if unit is not None:
                    self.add(eng.node(f.left, Rule.RDS, (node, unit)), worklist)
            if isinstance(f.left, And):
                dist = And(Or(f.left.left, f.right), Or(f.left.right, f.right))
                self.add(eng.node(dist, Rule.DISTRIBUTIVE_LAW, (node,)), worklist)
            if isinstance(f.right, And):
                dist = And(Or(f.left, f.right.left), Or(f.left, f.right.right))
                self.add(eng.node(dist, Rule.DISTRIBUTIVE_LAW, (node,)), worklist)
        if isinstance(f, And):
            for part in self._and_members(f):
                self.add(eng.node(part, Rule.SIMP, (node,)), worklist)
        if isinstance(f, Not) and isinstance(f.body, And):
            dm = Or(_neg(f.body.left), _neg(f.body.right))
            self.add(eng.node(dm, Rule.DE_MORGAN, (node,)), worklist)
        if isinstance(f, Not) and isinstance(f.body, Or):
            dm = And(_neg(f.body.left), _neg(f.body.right))
            self.add(eng.node(dm, Rule.DE_MORGAN, (node,)), worklist)

        # this node as MP minor / MT refuter / LDS-RDS unit for existing lines
        for impl in self.by_antecedent.get(key, ()):
            self.add(eng.node(impl.formula.right, Rule.MP, (impl, node)), worklist)
        for impl in self.mt_index.get(key, ()):
            self.add(eng.node(Not(impl.formula.left), Rule.MT, (impl, node)), worklist)
        for disj in self.lds_index.get(key, ()):
            self.add(eng.node(disj.formula.right, Rule.LDS, (disj, node)), worklist)
        for disj in self.rds_index.get(key, ()):
            self.add(eng.node(disj.formula.left, Rule.RDS, (disj, node)), worklist)
        return None

    @staticmethod
    def _and_members(f: Formula) -> list[Formula]:
        out = []
        stack = [f]
        while stack:
            g = stack.pop(0)
            if isinstance(g, And):
                out.extend((g.left, g.right))
                stack.extend((g.left, g.right))
        return out

    def _pool(self, term_depth: int) -> list[Term]:
        eng = self.engine
        seen: dict[Term, None] = {}

        def visit(t: Term):
            if t in seen:
                return
            if not term_vars(t) <= eng.branch_vars:
                if isinstance(t, App):
                    for a in t.args:
                        visit(a)
                return
            if _term_depth(t) > term_depth:
                eng.pruned = True
                if isinstance(t, App):
                    visit(t.args[0])
                return
            seen[t] = None
            if isinstance(t, App):
                for a in t.args:
                    visit(a)

        for node in self.order:
            for t in _formula_term_occurrences(node.formula):
                visit(t)
        if eng.cfg.instantiation_pool == POOL_SUBTERMS_PLUS_REV:
            for t in list(seen):
                wrapped = App("rev", (t,))
                if wrapped in seen:
                    continue
                if _term_depth(wrapped) > term_depth:
                    eng.pruned = True
                    continue
                seen[wrapped] = None
        return sorted(seen, key=_term_sort_key)

    def _instantiate_round(self, term_depth: int, worklist) -> bool:
        eng = self.engine
        pool = self._pool(term_depth)
        added = False
        for uni in list(self.universals):
            ukey = canonical_key(uni.formula)
            body = uni.formula.body
            var = uni.formula.var
            for t in pool:
                tk = (ukey, t)
                if tk in self.tried_instantiations:
                    continue
                self.tried_instantiations.add(tk)
                eng.stats.instantiations_tried += 1
                inst = substitute(body, {var: t})
                self.add(eng.node(inst, Rule.US, (uni,), ((t, var),)), worklist)
                added = True
        return added


def _formula_term_occurrences(f: Formula):
    if isinstance(f, Atom):
        yield from f.args
    elif isinstance(f, Not):
        yield from _formula_term_occurrences(f.body)
    elif isinstance(f, (And, Or, Implies)):
        yield from _formula_term_occurrences(f.left)
        yield from _formula_term_occurrences(f.right)
    elif isinstance(f, (Forall, Exists)):
        yield from _formula_term_occurrences(f.body)


def _term_sort_key(t: Term):
    return (_term_depth(t), print_formula(Atom("UNDIR", (t, t))))


# ---------------------------------------------------------------------------
# Goal decomposition: quantifier prefixes become fresh v-variables (restored
# by UG), implications and leading disjuncts become assumptions (restored by
# CP and CP+IMP).


@dataclass
class _Step:
    kind: str  # "ug" | "cp" | "cp_imp"
    assumption: Formula | None = None
    quantified: Formula | None = None


def _decompose(goal: Formula, taken: set[str]) -> tuple[list[_Step], list[Formula], Formula]:
    steps: list[_Step] = []
    assumptions: list[Formula] = []
    counter = itertools.count(1)

    def fresh() -> str:
        while True:
            name = f"v{next(counter)}"
            if name not in taken:
                taken.add(name)
                return name

    g = goal
    while True:
        if isinstance(g, Forall):
            steps.append(_Step("ug", quantified=g))
            sub: dict[str, Term] = {}
            while isinstance(g, Forall):
                sub[g.var] = Var(fresh())
                g = g.body
            g = substitute(g, sub)
            continue
        if isinstance(g, Implies):
            steps.append(_Step("cp", assumption=g.left))
            assumptions.append(g.left)
            g = g.right
            continue
        if isinstance(g, Or):
            parts = flatten_or(g)
            for d in parts[:-1]:
                a = _neg(d)
                steps.append(_Step("cp_imp", assumption=a))
                assumptions.append(a)
            g = parts[-1]
            if isinstance(g, (Forall, Implies, Or)):
                continue
        return steps, assumptions, g


# ---------------------------------------------------------------------------


def _search_target(
    ctx: _Context, target_key, term_depth: int, cases_left: int, seed: list[_Node]
) -> _Node | None:
    hit = ctx.saturate({target_key}, term_depth, seed)
    if hit is not None:
        return hit
    if cases_left <= 0:
        ctx.engine.pruned = ctx.engine.pruned or any(
            isinstance(n.formula, Or) and canonical_key(n.formula) not in ctx.split_disjunctions
            for n in ctx.order
        )
        return None
    for disj in list(ctx.order):
        f = disj.formula
        if not isinstance(f, Or):
            continue
        dkey = canonical_key(f)
        if dkey in ctx.split_disjunctions:
            continue
        if ctx.has(canonical_key(f.left)) or ctx.has(canonical_key(f.right)):
            continue  # not stuck: one side already holds
        ctx.split_disjunctions.add(dkey)
        eng = ctx.engine
        left_ctx = ctx.clone()
        left_asm = eng.node(f.left, Rule.CASE1, (disj,))
        wl: list[_Node] = []
        left_ctx.add(left_asm, wl)
        left_hit = _search_target(left_ctx, target_key, term_depth, cases_left - 1, wl)
        if left_hit is None:
            continue
        right_ctx = ctx.clone()
        right_asm = eng.node(f.right, Rule.CASE2, (disj,))
        wl = []
        right_ctx.add(right_asm, wl)
        right_hit = _search_target(right_ctx, target_key, term_depth, cases_left - 1, wl)
        if right_hit is None:
            continue
        combined = eng.node(
            left_hit.formula,
            Rule.CASES,
            (disj, left_hit, right_hit),
            extra=(left_asm, right_asm),
        )
        ctx.nodes[target_key] = combined
        ctx.order.append(combined)
        return combined
    return None


def prove(premises: list[Formula], goal: Formula, cfg: SearchConfig | None = None) -> SearchResult:
    """Search for a kernel-valid proof of goal from the premises."""
    cfg = cfg or SearchConfig()
    started = time.monotonic()
    for f in list(premises) + [goal]:
        if free_vars(f):
            raise ValueError("premises and goal must be closed")

    taken: set[str] = set()
    for f in list(premises) + [goal]:
        taken |= bound_vars(f)
    seeded = frozenset(taken)
    steps, assumptions, target = _decompose(goal, taken)
    branch_vars = frozenset(taken) - seeded  # only the fresh eigenvariables
    engine = _Engine(cfg, branch_vars)
    target_key = canonical_key(target)

    premise_nodes = [_Node(p, Rule.PREMISE, seq=next(engine.seq)) for p in premises]
    assumption_nodes = [_Node(a, Rule.ASSUMED_PREMISE, seq=next(engine.seq)) for a in assumptions]

    status = "exhausted"
    hit = None
    try:
        for depth in range(1, max(cfg.max_term_depth, 1) + 1):
            engine.pruned = False
            ctx = _Context(engine)
            wl: list[_Node] = []
            for n in premise_nodes + assumption_nodes:
                ctx.add(n, wl)
            hit = _search_target(ctx, target_key, depth, cfg.max_depth, wl)
            if hit is not None:
                break
        if hit is None:
            status = "budget-exceeded" if engine.pruned else "exhausted"
    except _Budget:
        status = "budget-exceeded"

    if hit is None:
        stats = engine.stats
        stats.wall_time = time.monotonic() - started
        return SearchResult(status, None, stats)

    proof = _emit(premises, goal, steps, assumption_nodes, hit, engine)
    report = check_proof(proof)
    if not report.valid:
        raise RuntimeError(
            f"internal error: search produced an invalid proof "
            f"(line {report.line}: {report.message})"
        )
    stats = engine.stats
    stats.wall_time = time.monotonic() - started
    return SearchResult("proved", proof, stats)


def _emit(
    premises: list[Formula],
    goal: Formula,
    steps: list[_Step],
    assumption_nodes: list[_Node],
    hit: _Node,
    engine: _Engine,
) -> Proof:
    needed: dict[int, _Node] = {}

    def collect(n: _Node):
        if n.seq in needed:
            return
        needed[n.seq] = n
        for c in n.cited:
            collect(c)
        for c in n.extra:
            collect(c)

    collect(hit)
    for n in assumption_nodes:  # assumptions must appear even if unused
        collect(n)

    ordered = [needed[s] for s in sorted(needed)]
    numbers: dict[int, int] = {}
    lines: list[ProofLine] = []

    for n in ordered:
        numbers[n.seq] = len(lines) + 1
        cited = tuple(numbers[c.seq] for c in n.cited)
        lines.append(ProofLine(len(lines) + 1, n.formula, Justification(n.rule, cited, n.annot)))

    # unwind the goal plan inside-out
    current = numbers[hit.seq]
    current_formula = hit.formula
    for step in reversed(steps):
        if step.kind in ("cp", "cp_imp"):
            impl = Implies(step.assumption, current_formula)
            lines.append(
                ProofLine(len(lines) + 1, impl, Justification(Rule.CP, (current,)))
            )
            current = len(lines)
            current_formula = impl
            if step.kind == "cp_imp":
                disj = _imp_result(impl)
                lines.append(
                    ProofLine(len(lines) + 1, disj, Justification(Rule.IMP, (current,)))
                )
                current = len(lines)
                current_formula = disj
        else:  # ug
            lines.append(
                ProofLine(
                    len(lines) + 1, step.quantified, Justification(Rule.UG, (current,))
                )
            )
            current = len(lines)
            current_formula = step.quantified
    return Proof(list(premises), lines, show=goal)


# ---------------------------------------------------------------------------
# Staged proving: derive lemmas first, then inline them so the emitted
# artifact is a single kernel-valid script over the original premises.


def prove_with_lemmas(
    premises: list[Formula],
    lemmas: list[tuple[list[Formula], Formula]],
    goal: Formula,
    cfg: SearchConfig | None = None,
) -> SearchResult:
    """Prove each (lemma premises, lemma goal) then the goal with the lemmas
    available, and merge everything into one proof from `premises`.

    Lemma premises must be among `premises`.
    """
    cfg = cfg or SearchConfig()
    stats = SearchStats()
    started = time.monotonic()
    lemma_proofs: list[Proof] = []
    lemma_goals: list[Formula] = []
    for lemma_premises, lemma_goal in lemmas:
        for p in lemma_premises:
            if not any(rule_eq(p, q) for q in premises):
                raise ValueError("lemma premise is not among the main premises")
        r = prove(lemma_premises, lemma_goal, cfg)
        _merge_stats(stats, r.stats)
        if not r.proved:
            r.stats = stats
            stats.wall_time = time.monotonic() - started
            return r
        lemma_proofs.append(r.proof)
        lemma_goals.append(lemma_goal)

    r = prove(list(premises) + lemma_goals, goal, cfg)
    _merge_stats(stats, r.stats)
    stats.wall_time = time.monotonic() - started
    if not r.proved:
        r.stats = stats
        return r

    merged = _inline(premises, lemma_proofs, r.proof, goal)
    report = check_proof(merged)
    if not report.valid:
        raise RuntimeError(
            f"internal error: lemma inlining produced an invalid proof "
            f"(line {report.line}: {report.message})"
        )
    return SearchResult("proved", merged, stats)


def _merge_stats(acc: SearchStats, extra: SearchStats) -> None:
    acc.lines_generated += extra.lines_generated
    acc.instantiations_tried += extra.instantiations_tried


def _inline(
    premises: list[Formula], lemma_proofs: list[Proof], main: Proof, goal: Formula
) -> Proof:
    lines: list[ProofLine] = []
    premise_line: dict = {}

    def find_premise(f: Formula) -> int | None:
        for key, num in premise_line.items():
            if rule_eq(key_formulas[key], f):
                return num
        return None

    key_formulas: dict = {}
    for p in premises:
        lines.append(
            ProofLine(len(lines) + 1, p, Justification(Rule.PREMISE))
        )
        k = canonical_key(p)
        premise_line[k] = len(lines)
        key_formulas[k] = p

    lemma_conclusion_line: list[int] = []
    for lp in lemma_proofs:
        mapping: dict[int, int] = {}
        for l in lp.lines:
            if l.just.rule is Rule.PREMISE:
                num = find_premise(l.formula)
                if num is None:
                    raise RuntimeError("lemma premise missing from merged premises")
                mapping[l.number] = num
                continue
            cited = tuple(mapping[c] for c in l.just.cited)
            lines.append(
                ProofLine(len(lines) + 1, l.formula, Justification(l.just.rule, cited, l.just.annot))
            )
            mapping[l.number] = len(lines)
        lemma_conclusion_line.append(mapping[lp.lines[-1].number])

    lemma_keys = [canonical_key(lp.lines[-1].formula) for lp in lemma_proofs]
    mapping = {}
    for l in main.lines:
        if l.just.rule is Rule.PREMISE:
            num = find_premise(l.formula)
            if num is None:
                k = canonical_key(l.formula)
                for lk, lnum in zip(lemma_keys, lemma_conclusion_line):
                    if lk == k:
                        num = lnum
                        break
            if num is None:
                raise RuntimeError("main premise missing from merged premises")
            mapping[l.number] = num
            continue
        cited = tuple(mapping[c] for c in l.just.cited)
        lines.append(
            ProofLine(len(lines) + 1, l.formula, Justification(l.just.rule, cited, l.just.annot))
        )
        mapping[l.number] = len(lines)
    return Proof(list(premises), lines, show=goal)
