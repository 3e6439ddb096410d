"""Command-line front end.

Exit codes: 0 success, 2 usage or input error, 3 invalid-pair shortfall
(``gen-states``), 4 no run produced a candidate without positive
counterexamples (``infer``).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .assessment import Postcondition, assess, dedupe_conjuncts, most_frequent
from .corpus import CorpusError, decode_corpus, encode_corpus
from .evolution import GaConfig, evolve
from .generation import GenerationConfig, Scope, generate_corpus
from .lang import CorpusEvaluator, DslSyntaxError, SortError, evaluate, parse
from .lang.ast import Logic, is_formula
from .lang.evaluator import EvalEnv, EvalTypeError
from .state_model import NULL, Obj, UsageError, Val, atom_sort_key
from .subjects import get_subject, list_subjects

EXIT_OK, EXIT_USAGE, EXIT_SHORTFALL, EXIT_NO_VALID = 0, 2, 3, 4
SEED_ENV = "EVOSPEX_SEED"

log = logging.getLogger("postinfer")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _write(path: str | None, data: bytes | str) -> None:
    if isinstance(data, str):
        data = data.encode("utf-8")
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(path).write_bytes(data)


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ── corpus handling ─────────────────────────────────────────────────────────

class _Inputs:
    """Subject, method, scope and V/I, either generated inline or read from a corpus file."""

    def __init__(self, subject, method, scope: Scope, valid, invalid, schema, seed: int, shortfall: int = 0,
                 source: str = "generated"):
        self.subject, self.method, self.scope = subject, method, scope
        self.valid, self.invalid, self.schema = valid, invalid, schema
        self.seed, self.shortfall, self.source = seed, shortfall, source


def _scope_from(args, subject) -> Scope:
    k = subject.default_scope if args.scope is None else args.scope
    if k < 0:
        raise UsageError("--scope must be non-negative")
    return Scope(k)


def _generate(args) -> _Inputs:
    if not args.subject or not args.method:
        raise UsageError("--subject and --method are required (or pass --corpus)")
    subject = get_subject(args.subject)
    method = subject.method(args.method)
    scope = _scope_from(args, subject)
    ratio = subject.default_invalid_ratio if args.invalid_ratio is None else args.invalid_ratio
    gc = generate_corpus(subject, method, GenerationConfig(scope, ratio, seed=args.seed))
    return _Inputs(subject, method, scope, gc.valid, gc.invalid.pairs, gc.schema, args.seed, gc.invalid.shortfall)


def _load(path: str) -> _Inputs:
    try:
        corpus = decode_corpus(Path(path).read_bytes())
    except OSError as exc:
        raise UsageError(f"cannot read corpus {path}: {exc}") from None
    except CorpusError as exc:
        raise UsageError(f"bad corpus {path}: {exc}") from None
    extra = corpus.extra
    subject = get_subject(extra["subject"]) if "subject" in extra else None
    method = subject.method(corpus.method) if subject else None
    scope = Scope(**extra["scope"]) if "scope" in extra else None
    if scope is not None and scope.int_range is not None:
        scope = Scope(scope.k, scope.max_objects_per_type, tuple(scope.int_range))
    return _Inputs(subject, method, scope, corpus.valid, corpus.invalid, corpus.schema,
                   extra.get("seed", 0), extra.get("shortfall", 0), source=path)


def _inputs(args) -> _Inputs:
    return _load(args.corpus) if getattr(args, "corpus", None) else _generate(args)


# ── commands ────────────────────────────────────────────────────────────────

def cmd_gen_states(args) -> int:
    inp = _generate(args)
    extra = {
        "subject": inp.subject.name,
        "scope": inp.scope.to_json(),
        "seed": inp.seed,
        "requested_invalid": len(inp.invalid) + inp.shortfall,
        "shortfall": inp.shortfall,
    }
    data = encode_corpus(inp.valid + inp.invalid, inp.schema, inp.method.name, extra)
    _write(args.out, data)
    print(f"{len(inp.valid)} valid, {len(inp.invalid)} invalid pairs", file=sys.stderr)
    if not inp.valid:
        log.warning("no valid pairs at scope %d", inp.scope.k)
    if inp.shortfall:
        print(f"warning: invalid-pair shortfall of {inp.shortfall}", file=sys.stderr)
        return EXIT_SHORTFALL
    return EXIT_OK


def _ga_config(args) -> GaConfig:
    data = GaConfig.load(args.config).to_json() if args.config else GaConfig().to_json()
    overrides = {
        "generations": args.generations, "timeout": args.timeout_secs, "repeats": args.repeats,
        "population_size": args.population, "max_len": args.max_len,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    data["seed"] = args.seed
    try:
        return GaConfig.from_json(data)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None


def run_seed(base: int, index: int) -> int:
    return base * 1000 + index


def _one_run(job):
    corpus_bytes, subject_name, method_name, cfg_json = job
    corpus = decode_corpus(corpus_bytes)
    subject = get_subject(subject_name) if subject_name else None
    method = subject.method(method_name) if subject else None
    cfg = GaConfig.from_json(cfg_json)
    started = time.monotonic()
    r = evolve(subject, method, corpus.valid, corpus.invalid, cfg)
    return {
        "seed": cfg.seed,
        "conjuncts": [g.text for g in r.best.genes],
        "fitness": r.fitness,
        "P": r.P,
        "N": r.N,
        "valid": r.valid,
        "generations": r.generations,
        "log": r.log,
    }, time.monotonic() - started


def infer(inp: _Inputs, cfg: GaConfig, jobs: int = 1) -> tuple[dict, list]:
    """Run ``cfg.repeats`` seeded searches and reduce them; returns the report and per-run timings."""
    if not inp.valid:
        raise UsageError("no valid pairs to infer from")
    subject_name = inp.subject.name if inp.subject else None
    method_name = inp.method.name if inp.method else (inp.valid[0].method if inp.valid else "")
    data = encode_corpus(inp.valid + inp.invalid, inp.schema, method_name)
    jobs_list = []
    for i in range(cfg.repeats):
        run_cfg = GaConfig.from_json({**cfg.to_json(), "seed": run_seed(cfg.seed, i)})
        jobs_list.append((data, subject_name, method_name, run_cfg.to_json()))
    if jobs > 1 and len(jobs_list) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_one_run, jobs_list))
    else:
        outcomes = [_one_run(j) for j in jobs_list]
    runs = [o[0] for o in outcomes]
    timings = [{"seed": r["seed"], "elapsed": round(o[1], 3)} for r, o in zip(runs, outcomes)]

    # majority voting over runs without positive counterexamples, if there are any
    ids = [i for i, r in enumerate(runs) if r["valid"]] or list(range(len(runs)))
    chosen = [[parse(t, inp.schema) for t in runs[i]["conjuncts"]] for i in ids]
    # conjuncts are identified by their truth vector over the inference corpus
    ev = CorpusEvaluator(list(inp.valid) + list(inp.invalid))
    best = most_frequent(chosen, [runs[i]["fitness"] for i in ids], identity=ev.mask)
    best = Postcondition(best.conjuncts, tuple(ids[i] for i in best.provenance), best.fitness)
    final = dedupe_conjuncts(best, inp.valid, inp.invalid)
    report = {
        "tool": {"name": "postinfer", "version": __version__},
        "manifest": {
            "subject": subject_name,
            "method": method_name,
            "scope": inp.scope.to_json() if inp.scope else None,
            "corpus": inp.source,
            "corpus_seed": inp.seed,
            "valid_pairs": len(inp.valid),
            "invalid_pairs": len(inp.invalid),
            "ga": cfg.to_json(),
            "run_seeds": [r["seed"] for r in runs],
        },
        "postcondition": final.texts,
        "frequency": best.frequency,
        "valid": any(r["valid"] for r in runs),
        "runs": [{k: v for k, v in r.items() if k != "log"} for r in runs],
    }
    return report, [dict(t, log=r["log"]) for t, r in zip(timings, runs)]


def cmd_infer(args) -> int:
    inp = _inputs(args)
    cfg = _ga_config(args)
    started = time.monotonic()
    report, timings = infer(inp, cfg, args.jobs)
    if args.out:
        report["manifest"]["outputs"] = {"report": args.out, "timing": args.out + ".timing.json"}
    if args.out:
        _write(args.out, _dumps(report))
        side = {"runs": [{"seed": t["seed"], "elapsed": t["elapsed"]} for t in timings],
                "total": round(time.monotonic() - started, 3)}
        Path(args.out + ".timing.json").write_text(_dumps(side), encoding="utf-8")
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            for t in timings:
                for rec in t["log"]:
                    fh.write(json.dumps({"seed": t["seed"], **rec}, sort_keys=True) + "\n")
    for text in report["postcondition"]:
        print(text)
    if not report["valid"]:
        print("warning: no run found a candidate without positive counterexamples", file=sys.stderr)
        return EXIT_NO_VALID
    return EXIT_OK


def read_post(path: str, schema) -> Postcondition:
    """One conjunct per line; ``//`` starts a comment; a line may itself be a conjunction."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    exprs = []
    for line in text.splitlines():
        line = line.split("//", 1)[0].strip()
        if not line:
            continue
        exprs.extend(_conjuncts(parse(line, schema)))
    return Postcondition(tuple(exprs))


def _conjuncts(e):
    if isinstance(e, Logic) and e.op == "&&":
        return _conjuncts(e.left) + _conjuncts(e.right)
    return [e]


def cmd_assess(args) -> int:
    inp = _inputs(args)
    if inp.subject is None or inp.scope is None:
        raise UsageError("assessment needs the subject and scope (pass --subject or a generated corpus)")
    post = read_post(args.post, inp.schema)
    manifest = {"post": args.post, "corpus": inp.source, "seed": args.seed, "scope_bump": args.scope_bump,
                "budget": args.budget}
    report = assess(post, inp.subject, inp.method, inp.scope, args.scope_bump, args.budget, args.seed, manifest)
    if args.out:
        _write(args.out, _dumps(report.to_json()))
        sys.stdout.write(report.table())
    else:
        _write(None, _dumps(report.to_json()))
        sys.stderr.write(report.table())
    return EXIT_OK


def _atom_text(a) -> str:
    if a is NULL:
        return "null"
    if isinstance(a, Obj):
        return f"{a.type}#{a.id}"
    if isinstance(a, Val):
        return f"'{a.name}'"
    if isinstance(a, bool):
        return "true" if a else "false"
    return str(a)


def _show(v) -> str:
    if isinstance(v, (bool, int)):
        return _atom_text(v)
    items = sorted(v, key=atom_sort_key)
    if len(items) == 1:
        return _atom_text(items[0])
    return "{" + ", ".join(_atom_text(a) for a in items) + "}"


def cmd_eval(args) -> int:
    if not args.corpus:
        raise UsageError("--corpus is required")
    inp = _load(args.corpus)
    pairs = inp.valid + inp.invalid
    if not 0 <= args.pair < len(pairs):
        raise UsageError(f"--pair must be in [0, {len(pairs)})")
    e = parse(args.expr, inp.schema)
    try:
        v = evaluate(e, EvalEnv(pairs[args.pair]))
    except EvalTypeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if is_formula(e) and not isinstance(v, bool):
        v = bool(v)
    print(_show(v))
    return EXIT_OK


def cmd_list_subjects(args) -> int:
    if args.json:
        _write(None, _dumps([{"name": s.name, "description": s.description, "default_scope": s.default_scope,
                              "methods": [m.signature() for m in s.methods]} for s in list_subjects()]))
        return EXIT_OK
    for s in list_subjects():
        print(f"{s.name:<22} scope {s.default_scope}  {', '.join(m.signature() for m in s.methods)}")
    return EXIT_OK


# ── argument parsing ────────────────────────────────────────────────────────

def _corpus_flags(p, corpus: bool = True) -> None:
    p.add_argument("--subject")
    p.add_argument("--method")
    p.add_argument("--scope", type=int)
    p.add_argument("--invalid-ratio", type=float)
    p.add_argument("--seed", type=int, default=None)
    if corpus:
        p.add_argument("--corpus", help="read pairs from a gen-states file instead of generating them")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="postinfer", description="Infer postconditions of heap methods.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-states", help="generate a valid/invalid corpus")
    _corpus_flags(p, corpus=False)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_states)

    p = sub.add_parser("infer", help="evolve a postcondition")
    _corpus_flags(p)
    p.add_argument("--generations", type=int)
    p.add_argument("--timeout-secs", type=float)
    p.add_argument("--repeats", type=int)
    p.add_argument("--population", type=int)
    p.add_argument("--max-len", type=int)
    p.add_argument("--config", help="JSON file with GA settings")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="report path; a .timing.json sidecar is written next to it")
    p.add_argument("--log", help="write the per-generation log as JSON lines")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("assess", help="check a postcondition for false positives and weakness")
    _corpus_flags(p)
    p.add_argument("--post", required=True)
    p.add_argument("--scope-bump", type=int, default=1)
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("eval", help="evaluate one assertion on one corpus pair")
    p.add_argument("--corpus")
    p.add_argument("--pair", type=int, default=0)
    p.add_argument("--expr", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("list-subjects", help="show the subject catalog")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_list_subjects)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        if hasattr(args, "seed") and args.seed is None:
            args.seed = _default_seed()
        if getattr(args, "jobs", 1) < 1:
            raise UsageError("--jobs must be at least 1")
        return args.func(args)
    except (UsageError, DslSyntaxError, SortError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
