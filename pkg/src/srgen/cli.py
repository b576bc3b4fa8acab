"""srgen command line: generate, compare, mutants, evaluate."""
from __future__ import annotations

import argparse
import json
import os
import shutil
import sys
import tempfile
import traceback
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .assertions import DEFAULT_TOLERANCE
from .chromosome import ChromosomeConfig
from .emitter import parse_suite
from .metrics import RunRow, compare
from .mutation import generate_mutants
from .pipeline import PipelineConfig, evaluate_suite, generate
from .runtime import DEFAULT_STEP_LIMIT
from .search import SearchConfig
from .subject import SubjectError, parse_subject_file
from .testcase import REPRESENTATIONS

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_CONFIG = 0, 1, 2, 3


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def parse_seeds(text: str) -> list:
    """``1..10``, ``1,4,7`` or a mix such as ``1..3,9``."""
    seeds = []
    try:
        for part in text.split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = (int(x) for x in part.split("..", 1))
                if hi < lo:
                    raise ValueError
                seeds.extend(range(lo, hi + 1))
            else:
                seeds.append(int(part))
    except ValueError:
        raise ConfigError(f"bad seed list {text!r}; use e.g. 1..10 or 1,2,3") from None
    return seeds


def corpus_tolerance(subject: Path):
    """Tolerance recorded for ``subject`` in a sibling manifest.json, if any."""
    manifest = subject.parent / "manifest.json"
    if not manifest.is_file():
        return None
    try:
        data = json.loads(manifest.read_text(encoding="utf-8"))
    except (OSError, ValueError):
        return None
    entry = data.get("subjects", {}).get(subject.name, {})
    return entry.get("tolerance")


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--budget", type=int, default=50_000, help="search budget in test executions")
    p.add_argument("--population", type=int, default=50)
    p.add_argument("--max-len", type=int, default=40, help="maximum statements per test")
    p.add_argument("--step-limit", type=int, default=DEFAULT_STEP_LIMIT)
    p.add_argument("--tolerance", type=float, default=None,
                   help="real-valued assertion tolerance (default: corpus manifest, else 1e-6)")
    p.add_argument("--out", default="out")
    p.add_argument("--no-aaa", action="store_true", help="omit arrange/act/assert comments")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="srgen", description="Single-responsibility unit test generation.")
    parser.add_argument("--version", action="version", version=f"srgen {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="run the full pipeline for one subject")
    g.add_argument("subject", nargs="?")
    g.add_argument("--repr", choices=REPRESENTATIONS, default="focal")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--dump-traces", action="store_true")
    g.add_argument("--split", action="store_true", help="also split baseline tests by responsibility")
    g.add_argument("--from-manifest", help="rerun exactly the run recorded in a manifest.json")
    _add_run_options(g)

    c = sub.add_parser("compare", help="both representations over many seeds")
    c.add_argument("subjects", nargs="*")
    c.add_argument("--corpus", help="directory whose .sub files are all compared")
    c.add_argument("--seeds", default="1..10")
    _add_run_options(c)

    m = sub.add_parser("mutants", help="list mutants as JSON lines")
    m.add_argument("subject")

    e = sub.add_parser("evaluate", help="re-run a rendered suite against a subject and its mutants")
    e.add_argument("subject")
    e.add_argument("suite")
    e.add_argument("--tolerance", type=float, default=None)
    e.add_argument("--step-limit", type=int, default=DEFAULT_STEP_LIMIT)
    return parser


# -- generate -----------------------------------------------------------------

def run_settings(args) -> dict:
    subject = Path(args.subject)
    tol = args.tolerance
    if tol is None:
        tol = corpus_tolerance(subject)
    return {
        "subject": str(subject),
        "representation": args.repr,
        "seed": args.seed,
        "budget": args.budget,
        "population": args.population,
        "max_len": args.max_len,
        "step_limit": args.step_limit,
        "tolerance": DEFAULT_TOLERANCE if tol is None else tol,
        "aaa_comments": not args.no_aaa,
        "split": bool(getattr(args, "split", False)),
        "dump_traces": bool(getattr(args, "dump_traces", False)),
    }


def pipeline_config(s: dict) -> PipelineConfig:
    try:
        chrom = ChromosomeConfig(max_length=s["max_len"], init_length=min(8, s["max_len"]))
        search = SearchConfig(
            population_size=s["population"], max_evaluations=s["budget"], seed=s["seed"],
            representation=s["representation"], step_limit=s["step_limit"], chromosome=chrom)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if s["step_limit"] <= 0:
        raise ConfigError("step limit must be positive")
    if s["tolerance"] < 0:
        raise ConfigError("tolerance must be non-negative")
    return PipelineConfig(search, s["tolerance"], aaa_comments=s["aaa_comments"], split=s["split"])


def run_dir(out: Path, subject: Path, rep: str, seed: int) -> Path:
    return out / subject.stem / rep / f"seed-{seed}"


def execute_run(settings: dict, out: Path) -> tuple:
    """Run one cell and write its outputs; returns (target dir, report, result)."""
    subject = Path(settings["subject"])
    config = pipeline_config(settings)
    unit = parse_subject_file(subject)
    result = generate(unit, config)
    target = run_dir(out, subject, settings["representation"], settings["seed"])
    target.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".tmp-", dir=target.parent))
    try:
        report = result.report(subject.stem)
        _write(staging / "report.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
        name = f"{subject.stem}.{settings['representation']}.tests"
        _write(staging / name, result.rendered().text)
        if config.split and settings["representation"] == "baseline":
            _write(staging / f"{subject.stem}.baseline-split.tests", result.rendered_split().text)
        if settings["dump_traces"]:
            _write(staging / "traces.json", json.dumps(_traces(result), indent=2) + "\n")
        manifest = {
            "tool": "srgen",
            "version": __version__,
            "settings": settings,
            "output": str(target),
            "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }
        _write(staging / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        if target.exists():
            shutil.rmtree(target)
        staging.rename(target)
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    return target, report, result


def _traces(result) -> list:
    out = []
    for t in result.tests:
        tr = t.trace
        out.append({
            "name": t.name,
            "covered": sorted(tr.covered_in(*t.test.window())),
            "outcomes": [_outcome(o) for o in tr.outcomes],
            "steps": tr.steps,
            "timeout": tr.timeout,
        })
    return out


def _outcome(o) -> str:
    text = getattr(o, "text", None)
    if text is not None:
        return f"raised {text}"
    return "normal" if hasattr(o, "value") else str(o)


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def cmd_generate(args) -> int:
    if args.from_manifest:
        try:
            data = json.loads(Path(args.from_manifest).read_text(encoding="utf-8"))
            settings = data["settings"]
        except (OSError, ValueError, KeyError) as exc:
            print(f"srgen: cannot read manifest: {exc}", file=sys.stderr)
            return EXIT_INPUT
        out = Path(args.out)
    else:
        if not args.subject:
            print("srgen: generate needs a subject file or --from-manifest", file=sys.stderr)
            return EXIT_CONFIG
        settings = run_settings(args)
        out = Path(args.out)
    try:
        pipeline_config(settings)
        target, report, _ = execute_run(settings, out)
    except ConfigError as exc:
        print(f"srgen: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"srgen: cannot read subject: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SubjectError as exc:
        print(f"srgen: {settings['subject']}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(f"{target}: coverage {report['coverage']:.3f}, mutation score "
          f"{report['mutation_score']:.3f}, sr_rate {report['sr_rate']:.3f}, "
          f"coherence {report['mean_coherence']:.3f}, {len(report['tests'])} tests")
    return EXIT_OK


# -- compare ------------------------------------------------------------------

def _cell(job) -> RunRow:
    settings, out = job
    subject = Path(settings["subject"])
    try:
        _, report, result = execute_run(settings, Path(out))
        return RunRow(subject.stem, settings["representation"], settings["seed"],
                      result.metrics, report["budget_used"])
    except Exception as exc:  # recorded as a failed row
        detail = "".join(traceback.format_exception_only(type(exc), exc)).strip()
        return RunRow(subject.stem, settings["representation"], settings["seed"], None, 0, detail)


def cmd_compare(args) -> int:
    try:
        seeds = parse_seeds(args.seeds)
    except ConfigError as exc:
        print(f"srgen: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    subjects = [Path(s) for s in args.subjects]
    if args.corpus:
        corpus = Path(args.corpus)
        if not corpus.is_dir():
            print(f"srgen: no such corpus directory: {corpus}", file=sys.stderr)
            return EXIT_INPUT
        subjects.extend(sorted(corpus.glob("*.sub")))
    if not subjects:
        print("srgen: compare needs subject files or --corpus", file=sys.stderr)
        return EXIT_CONFIG
    for s in subjects:
        if not s.is_file():
            print(f"srgen: no such subject file: {s}", file=sys.stderr)
            return EXIT_INPUT
    jobs = []
    for s in subjects:
        for rep in REPRESENTATIONS:
            for seed in seeds:
                ns = argparse.Namespace(**vars(args), subject=str(s), repr=rep, seed=seed)
                settings = run_settings(ns)
                try:
                    pipeline_config(settings)
                except ConfigError as exc:
                    print(f"srgen: config error: {exc}", file=sys.stderr)
                    return EXIT_CONFIG
                jobs.append((settings, args.out))
    workers = _workers()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_cell, jobs))
    else:
        rows = [_cell(j) for j in jobs]
    comparison = compare(rows)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "comparison.csv", comparison.to_csv())
    for s in comparison.mismatched:
        print(f"srgen: {s}: representations incomplete; not compared", file=sys.stderr)
    failed = [r for r in comparison.rows if r.failed]
    for r in failed:
        print(f"srgen: run failed: {r.subject} {r.representation} seed {r.seed}: {r.error}",
              file=sys.stderr)
    print(f"{out / 'comparison.csv'}: {len(rows)} runs, {len(failed)} failed")
    return EXIT_FAILED if failed else EXIT_OK


def _workers() -> int:
    raw = os.environ.get("SRGEN_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return max(1, min(os.cpu_count() or 1, 8))


# -- mutants / evaluate -------------------------------------------------------

def _load_unit(path: str):
    try:
        return parse_subject_file(path), None
    except OSError as exc:
        return None, f"srgen: cannot read {path}: {exc}"
    except SubjectError as exc:
        return None, f"srgen: {path}: {exc}"


def cmd_mutants(args) -> int:
    unit, err = _load_unit(args.subject)
    if err:
        print(err, file=sys.stderr)
        return EXIT_INPUT
    for m in generate_mutants(unit):
        print(json.dumps(m.to_json()))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    unit, err = _load_unit(args.subject)
    if err:
        print(err, file=sys.stderr)
        return EXIT_INPUT
    tol = args.tolerance if args.tolerance is not None else corpus_tolerance(Path(args.subject))
    tol = DEFAULT_TOLERANCE if tol is None else tol
    try:
        text = Path(args.suite).read_text(encoding="utf-8")
        parsed = parse_suite(text, unit, tol)
    except OSError as exc:
        print(f"srgen: cannot read {args.suite}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SubjectError as exc:
        print(f"srgen: {args.suite}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    ev = evaluate_suite(unit, parsed, step_limit=args.step_limit)
    out = ev.metrics.to_json()
    out["failed_assertions"] = [{"test": t, "assertion": a} for t, a in ev.failures]
    print(json.dumps(out, indent=2, sort_keys=True))
    return EXIT_FAILED if ev.failures else EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"generate": cmd_generate, "compare": cmd_compare,
               "mutants": cmd_mutants, "evaluate": cmd_evaluate}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
