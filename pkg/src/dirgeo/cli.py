"""Command-line front end: check, prove, models, corpus.

Exit codes are a stable contract: 0 all verdicts pass, 1 proof-check
failure, 2 parse error, 3 search exhausted or over budget, 4 expectation
mismatch (models --expect-*).  Reports print as human-readable text or as
JSON records (--format records) for CI diffing.  Proof scripts themselves
go to stdout (or --out) so `dirgeo prove ... | dirgeo check -` round-trips.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import corpus as corpus_mod
from .geometry import UnknownAxiom, axiom, expand_defs
from .kernel import ScriptError, check_proof, parse_proof_script, print_proof_script
from .models import Structure, _find_at_size, find_countermodel
from .search import (
    POOL_SUBTERMS_PLUS_REV,
    SearchConfig,
    prove,
    prove_with_lemmas,
)
from .syntax import GEOMETRY, ParseError, Signature, free_vars, parse_formula, print_formula, rule_eq

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE_ERROR = 2
EXIT_SEARCH_FAILED = 3
EXIT_EXPECTATION = 4


@dataclass
class RunReport:
    command: str
    items: list[dict] = field(default_factory=list)
    exit_code: int = EXIT_OK
    elapsed: float = 0.0

    def add(self, name: str, status: str, detail: str = "", **extra) -> None:
        self.items.append({"item": name, "status": status, "detail": detail, **extra})

    def emit(self, fmt: str, stream=None) -> None:
        stream = stream or sys.stdout
        if fmt == "records":
            for item in self.items:
                record = {"command": self.command, **item}
                print(json.dumps(record), file=stream)
            print(
                json.dumps(
                    {
                        "command": self.command,
                        "item": None,
                        "status": "pass" if self.exit_code == EXIT_OK else "fail",
                        "exit_code": self.exit_code,
                        "elapsed": round(self.elapsed, 4),
                    }
                ),
                file=stream,
            )
        else:
            for item in self.items:
                line = f"{item['status']:<8} {item['item']}"
                if item.get("detail"):
                    line += f"  {item['detail']}"
                print(line, file=stream)
            overall = "pass" if self.exit_code == EXIT_OK else f"fail (exit {self.exit_code})"
            print(f"{self.command}: {overall} in {self.elapsed:.2f}s", file=stream)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    return json.loads(Path(path).read_text())


def _signature_from_config(cfg: dict) -> Signature:
    sig_cfg = cfg.get("signature", {})
    return GEOMETRY.extended(sig_cfg.get("predicates", {}), sig_cfg.get("functions", {}))


def _search_config(args, cfg: dict) -> SearchConfig:
    sc = cfg.get("search", {})
    return SearchConfig(
        max_depth=args.max_depth if args.max_depth is not None else sc.get("max_depth", 2),
        max_term_depth=(
            args.max_term_depth if args.max_term_depth is not None else sc.get("max_term_depth", 3)
        ),
        max_lines=args.max_lines if args.max_lines is not None else sc.get("max_lines", 50000),
        instantiation_pool=args.pool or sc.get("pool", POOL_SUBTERMS_PLUS_REV),
    )


def _resolve_names(spec: str, do_expand: bool):
    out = []
    for name in [s for s in spec.split(",") if s.strip()]:
        f = axiom(name.strip())
        if do_expand:
            f = expand_defs(f)
        out.append((name.strip(), f))
    return out


# -- check -------------------------------------------------------------------


def _check_one(path: str, signature_cfg: dict) -> dict:
    sig = _signature_from_config(signature_cfg)
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        proof = parse_proof_script(text, sig)
    except (ScriptError, ParseError, OSError) as exc:
        return {"status": "parse-error", "detail": str(exc)}
    report = check_proof(proof)
    if report.valid:
        return {"status": "valid", "detail": report.sequent(), "lines": len(proof.lines)}
    return {
        "status": "invalid",
        "detail": f"line {report.line} [{report.kind}]: {report.message}",
        "line": report.line,
    }


def cmd_check(args, cfg: dict) -> RunReport:
    report = RunReport("check")
    started = time.monotonic()
    results: list[dict] = []
    if args.jobs > 1 and len(args.paths) > 1 and "-" not in args.paths:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_check_one, args.paths, [cfg] * len(args.paths)))
    else:
        for p in args.paths:
            results.append(_check_one(p, cfg))
            if results[-1]["status"] != "valid" and not args.keep_going:
                break
    for path, res in zip(args.paths, results):
        report.add(path, res["status"], res.get("detail", ""))
        if res["status"] == "parse-error":
            report.exit_code = EXIT_PARSE_ERROR
        elif res["status"] != "valid" and report.exit_code == EXIT_OK:
            report.exit_code = EXIT_CHECK_FAILED
    report.elapsed = time.monotonic() - started
    return report


# -- prove -------------------------------------------------------------------


def cmd_prove(args, cfg: dict) -> RunReport:
    report = RunReport("prove")
    started = time.monotonic()
    try:
        premises = _resolve_names(args.premises or "", args.expand_defs)
        goal_name, goal = _resolve_names(args.goal, args.expand_defs)[0]
    except UnknownAxiom as exc:
        report.add(args.goal, "error", f"unknown axiom name {exc}")
        report.exit_code = EXIT_PARSE_ERROR
        report.elapsed = time.monotonic() - started
        return report
    for name, f in premises + [(goal_name, goal)]:
        if free_vars(f):
            report.add(name, "error", "not a closed formula (use --expand-defs?)")
            report.exit_code = EXIT_PARSE_ERROR
            report.elapsed = time.monotonic() - started
            return report

    search_cfg = _search_config(args, cfg)
    premise_names = [n for n, _ in premises]
    premise_formulas = [f for _, f in premises]

    staged = args.staged
    if staged is None:
        staged = (
            goal_name in ("W2", "W3")
            and "ODO" in premise_names
            and "I5" in premise_names
            and "OO" not in premise_names
        )
    if staged:
        lemmas = [([axiom("I5"), axiom("ODO")], axiom("OO"))]
        result = prove_with_lemmas(premise_formulas, lemmas, goal, search_cfg)
        mode = "staged (OO lemma inlined)"
    else:
        result = prove(premise_formulas, goal, search_cfg)
        mode = "direct"

    stats = result.stats
    detail = (
        f"mode={mode} generated={stats.lines_generated} "
        f"instantiations={stats.instantiations_tried} wall={stats.wall_time:.2f}s"
    )
    if result.proved:
        script = print_proof_script(
            result.proof, header=f"proved {','.join(premise_names)} |- {goal_name}"
        )
        if args.out:
            Path(args.out).write_text(script)
        else:
            sys.stdout.write(script)
        report.add(goal_name, "proved", f"{len(result.proof.lines)} lines, {detail}")
    else:
        report.add(goal_name, result.status, detail)
        report.exit_code = EXIT_SEARCH_FAILED
    report.elapsed = time.monotonic() - started
    return report


# -- models ------------------------------------------------------------------


def _models_worker(payload: tuple[list[str], str, int, int, int]):
    premise_texts, goal_text, n, lo, hi = payload
    premises = [parse_formula(t) for t in premise_texts]
    goal = parse_formula(goal_text)
    return _find_at_size(premises, goal, n, (lo, hi))


def _parallel_countermodel(premises, goal, max_n: int, jobs: int) -> Structure | None:
    import itertools as _it

    premise_texts = [print_formula(p) for p in premises]
    goal_text = print_formula(goal)
    for n in range(1, max_n + 1):
        rev_count = n ** n
        chunk = max(1, (rev_count + jobs - 1) // jobs)
        ranges = [(lo, min(lo + chunk, rev_count)) for lo in range(0, rev_count, chunk)]
        payloads = [(premise_texts, goal_text, n, lo, hi) for lo, hi in ranges]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            hits = [h for h in pool.map(_models_worker, payloads) if h is not None]
        if hits:
            ri, ui = min(hits)
            rev = list(_it.product(range(n), repeat=n))[ri]
            from .models import _structure_from_index

            return _structure_from_index(n, rev, ui)
    return None


def cmd_models(args, cfg: dict) -> RunReport:
    report = RunReport("models")
    started = time.monotonic()
    try:
        premises = _resolve_names(args.premises or "", args.expand_defs)
        goal_name, goal = _resolve_names(args.goal, args.expand_defs)[0]
    except UnknownAxiom as exc:
        report.add(args.goal, "error", f"unknown axiom name {exc}")
        report.exit_code = EXIT_PARSE_ERROR
        report.elapsed = time.monotonic() - started
        return report
    premise_formulas = [f for _, f in premises]
    label = f"{','.join(n for n, _ in premises) or '(none)'} |= {goal_name}"

    try:
        if args.jobs > 1:
            cm = _parallel_countermodel(premise_formulas, goal, args.max_size, args.jobs)
        else:
            cm = find_countermodel(premise_formulas, goal, args.max_size)
    except ValueError as exc:
        report.add(label, "error", f"{exc} (did you mean --expand-defs?)")
        report.exit_code = EXIT_PARSE_ERROR
        report.elapsed = time.monotonic() - started
        return report

    if cm is None:
        report.add(label, "no-countermodel", f"up to size {args.max_size}")
        if args.expect == "counter":
            report.exit_code = EXIT_EXPECTATION
    else:
        detail = cm.describe()
        if args.record:
            detail = json.dumps(cm.to_record())
        report.add(label, "countermodel", detail)
        if args.expect == "none":
            report.exit_code = EXIT_EXPECTATION
    report.elapsed = time.monotonic() - started
    return report


# -- corpus ------------------------------------------------------------------


def cmd_corpus(args, cfg: dict) -> RunReport:
    report = RunReport("corpus")
    started = time.monotonic()
    for cid in corpus_mod.corpus_ids():
        try:
            proof, entry = corpus_mod.load(cid)
        except (ScriptError, ParseError, OSError) as exc:
            report.add(cid, "parse-error", str(exc))
            report.exit_code = EXIT_PARSE_ERROR
            continue
        res = check_proof(proof)
        if not res.valid:
            report.add(cid, "invalid", f"line {res.line} [{res.kind}]: {res.message}")
            report.exit_code = EXIT_CHECK_FAILED
            continue
        problems = []
        if len(proof.lines) != entry.expected_lines:
            problems.append(f"expected {entry.expected_lines} lines, found {len(proof.lines)}")
        declared = entry.declared_premises()
        if len(res.premises) != len(declared) or not all(
            rule_eq(a, b) for a, b in zip(res.premises, declared)
        ):
            problems.append("premises differ from the declared sequent")
        if not rule_eq(res.conclusion, entry.declared_conclusion()):
            problems.append("conclusion differs from the declared sequent")
        if problems:
            report.add(cid, "mismatch", "; ".join(problems))
            report.exit_code = EXIT_CHECK_FAILED
        else:
            report.add(cid, "valid", res.sequent())
    report.elapsed = time.monotonic() - started
    return report


# -- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirgeo",
        description="Check, search, and semantically probe derivations in the "
        "directed-line geometry fragment.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (search bounds, signature)")
    common.add_argument(
        "--format", choices=("text", "records"), default="text", help="report format"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="verify proof scripts", parents=[common])
    p_check.add_argument("paths", nargs="+", help="script files ('-' for stdin)")
    p_check.add_argument("--keep-going", action="store_true", help="continue past failures")
    p_check.add_argument("--jobs", type=int, default=1, help="check files in parallel")
    p_check.set_defaults(func=cmd_check)

    p_prove = sub.add_parser("prove", help="search for a derivation", parents=[common])
    p_prove.add_argument("--from", dest="premises", default="", help="comma-separated axiom names")
    p_prove.add_argument("--goal", required=True, help="axiom name to derive")
    p_prove.add_argument("--max-depth", type=int, default=None, help="case-split nesting bound")
    p_prove.add_argument("--max-term-depth", type=int, default=None, help="rev-nesting bound")
    p_prove.add_argument("--max-lines", type=int, default=None, help="derived-formula budget")
    p_prove.add_argument(
        "--pool", choices=("subterms-only", "subterms-plus-rev"), default=None,
        help="instantiation pool strategy",
    )
    p_prove.add_argument("--out", help="write the proof script here instead of stdout")
    staged = p_prove.add_mutually_exclusive_group()
    staged.add_argument(
        "--staged", dest="staged", action="store_true", default=None,
        help="derive the OO lemma first and inline it (default for W2/W3)",
    )
    staged.add_argument(
        "--direct", dest="staged", action="store_false", help="single search, no lemma staging"
    )
    p_prove.add_argument(
        "--expand-defs", action="store_true", help="expand CON/DIR/OPP/INOPP in resolved names"
    )
    p_prove.set_defaults(func=cmd_prove)

    p_models = sub.add_parser("models", help="search finite structures for countermodels", parents=[common])
    p_models.add_argument("--from", dest="premises", default="", help="comma-separated axiom names")
    p_models.add_argument("--goal", required=True, help="axiom name to test")
    p_models.add_argument("--max-size", type=int, default=3, help="largest domain size")
    p_models.add_argument("--jobs", type=int, default=1, help="partition the enumeration")
    p_models.add_argument("--record", action="store_true", help="print the countermodel as JSON")
    expect = p_models.add_mutually_exclusive_group()
    expect.add_argument(
        "--expect-none", dest="expect", action="store_const", const="none", default=None
    )
    expect.add_argument("--expect-counter", dest="expect", action="store_const", const="counter")
    p_models.add_argument(
        "--expand-defs", action="store_true", help="expand CON/DIR/OPP/INOPP in resolved names"
    )
    p_models.set_defaults(func=cmd_models)

    p_corpus = sub.add_parser("corpus", help="run the bundled golden transcripts", parents=[common])
    p_corpus.set_defaults(func=cmd_corpus)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    report = args.func(args, cfg)
    report.emit(args.format, stream=sys.stderr if args.command == "prove" else sys.stdout)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
