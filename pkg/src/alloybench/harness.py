"""Command-line surface and the extractor retry loop.

Subcommands:
  validate <file>                          check one document, print issues
  score --extracted F --target F [...]     score a document against ground truth
  run --papers D --targets D --extractor C drive an extractor over a corpus
  report <run-dir> [--csv F]               aggregate runs into a leaderboard

Extractor protocol: per attempt the harness spawns the extractor command and
writes one JSON line to its stdin:

    {"paper_text": ..., "attempt_index": k, "previous_feedback": "..."}

The process must print one extraction document to stdout, either bare or
wrapped in an envelope object {"document": "...", "cost": 1.2, "currency":
"USD"} when it wants to report spend. Attempts stop at the first document
that validates or when --max-attempts is exhausted.

Run directories are laid out as <dir>/<method>/<run-label>/<paper>.json; the
report command aggregates every method it finds. Report bodies never contain
timestamps, so identical inputs produce byte-identical reports.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import shlex
import subprocess
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import composition as comp
from . import interchange
from . import scoring
from .datamodel import Experiment
from .validation import ERROR, ValidationIssue, render_feedback, validate

WORKERS_ENV = "ALLOYBENCH_WORKERS"

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2


class TargetInvalid(ValueError):
    pass


class ExtractorCrashed(RuntimeError):
    def __init__(self, attempt: int, detail: str):
        super().__init__(f"extractor crashed on attempt {attempt}: {detail}")
        self.attempt = attempt


class AttemptsExhausted(RuntimeError):
    def __init__(self, attempts: int, issues: list[ValidationIssue], document: Optional[str]):
        super().__init__(f"no valid document after {attempts} attempts")
        self.attempts = attempts
        self.issues = issues
        self.document = document


# --- document-level validation --------------------------------------------------


def validate_document(experiments: list[Experiment]) -> list[ValidationIssue]:
    """Validate every experiment; paths get a [i] prefix in multi-experiment docs."""
    issues: list[ValidationIssue] = []
    for index, experiment in enumerate(experiments):
        for issue in validate(experiment):
            path = issue.path if len(experiments) == 1 else f"[{index}].{issue.path}"
            issues.append(ValidationIssue(issue.rule, issue.severity, path, issue.message))
    return issues


def _schema_issues(errors: list[interchange.SchemaError]) -> list[ValidationIssue]:
    return [ValidationIssue("SCHEMA", ERROR, e.path, e.message) for e in errors]


def check_document(text: str, mode: str = "experiment") -> list[ValidationIssue]:
    """Decode + validate a document of the given mode; issues describe failures."""
    if mode == "experiment":
        try:
            experiments = interchange.decode(text)
        except interchange.DecodeFailed as err:
            return _schema_issues(err.errors)
        return validate_document(experiments)
    if mode == "composition_list":
        return _check_composition_list(text)
    if mode == "property_list":
        return _check_property_list(text)
    raise ValueError(f"unknown mode {mode!r}")


def _parse_json_array(text: str) -> tuple[Optional[list], list[ValidationIssue]]:
    try:
        tree = json.loads(interchange.strip_fences(text))
    except json.JSONDecodeError as err:
        return None, [ValidationIssue("SCHEMA", ERROR, "", f"expected valid JSON, found {err}")]
    if not isinstance(tree, list):
        return None, [ValidationIssue("SCHEMA", ERROR, "", "expected a top-level array")]
    return tree, []


def _check_composition_list(text: str) -> list[ValidationIssue]:
    tree, issues = _parse_json_array(text)
    if tree is None:
        return issues
    for i, entry in enumerate(tree):
        try:
            decode_composition_entry(entry)
        except (comp.CompositionError, ValueError) as err:
            issues.append(ValidationIssue("SCHEMA", ERROR, f"[{i}]", str(err)))
    return issues


def decode_composition_entry(entry) -> comp.Composition:
    if isinstance(entry, str):
        return comp.parse_formula(entry)
    if isinstance(entry, dict) and entry.get("_helper") == "balance_composition":
        return comp.balance_composition(entry["main_element"], entry["additions"])
    if isinstance(entry, dict) and entry.get("_helper") == "from_weight_dict":
        return comp.from_weight_dict(entry["weights"])
    if isinstance(entry, dict) and entry.get("_helper") == "weight_additions":
        return comp.with_weight_additions(
            comp.parse_formula(entry["base"]),
            comp.from_weight_dict(entry["additions_weights"]),
            float(entry["fraction"]),
        )
    if isinstance(entry, dict):
        return comp.from_atomic_dict(entry)
    raise ValueError(f"not a composition value: {entry!r}")


def _check_property_list(text: str) -> list[ValidationIssue]:
    tree, issues = _parse_json_array(text)
    if tree is None:
        return issues
    for i, entry in enumerate(tree):
        if isinstance(entry, bool) or not isinstance(entry, (int, float)):
            issues.append(
                ValidationIssue("SCHEMA", ERROR, f"[{i}]", f"expected a number, found {entry!r}")
            )
    return issues


# --- extractor loop --------------------------------------------------------------


@dataclass
class AttemptRecord:
    issue_count: int
    feedback: str


@dataclass
class RunRecord:
    paper_id: str
    attempts: int
    valid: bool
    document_path: Optional[str]
    attempt_log: list[AttemptRecord] = field(default_factory=list)
    wall_time: float = 0.0
    cost: Optional[float] = None
    currency: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "paper_id": self.paper_id,
            "attempts": self.attempts,
            "valid": self.valid,
            "document_path": self.document_path,
            "attempt_log": [
                {"issue_count": a.issue_count, "feedback": a.feedback} for a in self.attempt_log
            ],
            "wall_time": self.wall_time,
            "cost": self.cost,
            "currency": self.currency,
        }


def _invoke_extractor(command: list[str], request: dict, attempt: int) -> tuple[str, Optional[float], Optional[str]]:
    """One extractor call; returns (document text, cost, currency)."""
    try:
        proc = subprocess.run(
            command,
            input=json.dumps(request) + "\n",
            capture_output=True,
            text=True,
        )
    except OSError as err:
        raise ExtractorCrashed(attempt, str(err)) from None
    if proc.returncode != 0:
        detail = proc.stderr.strip().splitlines()[-1] if proc.stderr.strip() else f"exit {proc.returncode}"
        raise ExtractorCrashed(attempt, detail)
    output = proc.stdout.strip()
    if not output:
        raise ExtractorCrashed(attempt, "no output")
    # Envelope form: a JSON object with a "document" key. Raw documents are
    # top-level arrays, so the two shapes cannot collide.
    try:
        tree = json.loads(output)
    except json.JSONDecodeError:
        tree = None
    if isinstance(tree, dict) and "document" in tree:
        document = tree["document"]
        if not isinstance(document, str):
            document = json.dumps(document)
        cost = tree.get("cost")
        currency = tree.get("currency")
        return document, (float(cost) if cost is not None else None), currency
    return output, None, None


def run_extractor(
    paper_text_path: str,
    extractor_command: str,
    max_attempts: int = 5,
    mode: str = "experiment",
    paper_id: Optional[str] = None,
    out_dir: Optional[Path] = None,
) -> tuple[RunRecord, Optional[str]]:
    """Drive one extractor through the validate-retry loop for one paper.

    Returns the run record and the final document text (None after a crash
    with no output). Feedback passed to attempt k+1 is exactly the rendered
    issues of attempt k.
    """
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    paper_text = Path(paper_text_path).read_text(encoding="utf-8")
    pid = paper_id or Path(paper_text_path).stem
    command = shlex.split(extractor_command)
    record = RunRecord(paper_id=pid, attempts=0, valid=False, document_path=None)
    started = time.perf_counter()
    feedback = ""
    document: Optional[str] = None
    total_cost: Optional[float] = None
    currency: Optional[str] = None
    for attempt in range(1, max_attempts + 1):
        record.attempts = attempt
        request = {
            "paper_text": paper_text,
            "attempt_index": attempt,
            "previous_feedback": feedback,
        }
        document, cost, cur = _invoke_extractor(command, request, attempt)
        if cost is not None:
            total_cost = (total_cost or 0.0) + cost
            currency = cur or currency
        issues = check_document(document, mode)
        errors = [i for i in issues if i.severity == ERROR]
        feedback = render_feedback(errors)
        record.attempt_log.append(AttemptRecord(issue_count=len(errors), feedback=feedback))
        if not errors:
            record.valid = True
            break
    record.wall_time = time.perf_counter() - started
    record.cost = total_cost
    record.currency = currency
    if out_dir is not None and document is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        doc_path = out_dir / f"{pid}.document.json"
        doc_path.write_text(document, encoding="utf-8")
        record.document_path = str(doc_path)
    return record, document


# --- scoring entry points --------------------------------------------------------


def load_config(path: Optional[str]) -> tuple[scoring.Weights, scoring.ScoringConfig, dict]:
    """Read the JSON config file; returns (weights, scoring config, raw dict).

    Recognized keys: "weights" (object with the four category names),
    "value_rel_tol", "composition_threshold", "material_threshold",
    "parent_penalty", "max_attempts", "aggregation" ("per_paper"|"pooled").
    """
    if path is None:
        return scoring.DEFAULT_WEIGHTS, scoring.DEFAULT_CONFIG, {}
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    weights = scoring.Weights(**data["weights"]) if "weights" in data else scoring.DEFAULT_WEIGHTS
    config = scoring.ScoringConfig.from_dict(data)
    return weights, config, data


def _parse_weights_flag(flag: str) -> scoring.Weights:
    parts = [float(x) for x in flag.split(",")]
    if len(parts) != 4:
        raise ValueError("--weights takes four comma-separated numbers")
    return scoring.Weights(*parts)


def score_files(
    extracted_path: str,
    target_path: str,
    weights: scoring.Weights = scoring.DEFAULT_WEIGHTS,
    config: scoring.ScoringConfig = scoring.DEFAULT_CONFIG,
) -> scoring.ScoreReport:
    """Decode, validate and score one extracted/target document pair.

    The target must be issue-free; the extracted document may carry warnings
    but not errors.
    """
    extracted = interchange.decode(Path(extracted_path).read_text(encoding="utf-8"))
    try:
        target = interchange.decode(Path(target_path).read_text(encoding="utf-8"))
    except interchange.DecodeFailed as err:
        raise TargetInvalid(f"target failed to decode: {err}") from None
    target_issues = validate_document(target)
    if target_issues:
        raise TargetInvalid(
            "target document has issues:\n" + render_feedback(target_issues)
        )
    extracted_errors = [i for i in validate_document(extracted) if i.severity == ERROR]
    if extracted_errors:
        raise interchange.DecodeFailed(
            [interchange.SchemaError(i.path, f"a document passing {i.rule}", i.message)
             for i in extracted_errors]
        )
    return scoring.score_overall(extracted, target, weights, config)


def _render_score_table(report: scoring.ScoreReport) -> str:
    lines = [
        f"{'category':<14} {'precision':>9} {'recall':>9} {'f1':>9}",
    ]
    for name in scoring.CATEGORIES:
        score = report.categories[name]
        lines.append(f"{name:<14} {score.precision:>9.4f} {score.recall:>9.4f} {score.f1:>9.4f}")
    lines.append(
        f"{'overall':<14} {report.overall_precision:>9.4f} "
        f"{report.overall_recall:>9.4f} {report.overall_f1:>9.4f}"
    )
    return "\n".join(lines)


# --- corpus runs ------------------------------------------------------------------


def _worker_count() -> int:
    value = os.environ.get(WORKERS_ENV)
    if value:
        return max(1, int(value))
    return min(4, os.cpu_count() or 1)


def run_corpus(
    papers_dir: str,
    targets_dir: Optional[str],
    extractor_command: str,
    out_dir: str,
    method: str,
    run_label: str,
    mode: str = "experiment",
    max_attempts: int = 5,
    weights: scoring.Weights = scoring.DEFAULT_WEIGHTS,
    config: scoring.ScoringConfig = scoring.DEFAULT_CONFIG,
) -> list[dict]:
    """Run the extractor over every paper text in a directory, then score.

    Writes <out>/<method>/<run_label>/<paper>.json entries containing the run
    record and, when a target exists and the final document is valid, the
    score report. Invalid finals are recorded with score null.
    """
    papers = sorted(Path(papers_dir).glob("*.txt"))
    if not papers:
        raise FileNotFoundError(f"no .txt paper files under {papers_dir}")
    destination = Path(out_dir) / method / run_label
    destination.mkdir(parents=True, exist_ok=True)

    def one(paper: Path) -> dict:
        record, document = run_extractor(
            str(paper),
            extractor_command,
            max_attempts=max_attempts,
            mode=mode,
            out_dir=destination,
        )
        entry: dict = {"record": record.to_dict(), "score": None}
        if targets_dir is not None and record.valid and mode == "experiment":
            target_path = Path(targets_dir) / f"{paper.stem}.json"
            if target_path.exists():
                extracted = interchange.decode(document)
                target = interchange.decode(target_path.read_text(encoding="utf-8"))
                report = scoring.score_overall(extracted, target, weights, config)
                entry["score"] = report.to_dict()
        out_path = destination / f"{paper.stem}.json"
        out_path.write_text(json.dumps(entry, indent=2, sort_keys=True), encoding="utf-8")
        return entry

    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        return list(pool.map(one, papers))


# --- leaderboard -------------------------------------------------------------------


@dataclass
class LeaderboardRow:
    method: str
    precision: float
    recall: float
    f1: float
    f1_half_width: Optional[float]
    category_f1: dict[str, float]
    mean_attempts: float
    total_cost: float
    runs: int
    papers: int

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "f1_half_width": self.f1_half_width,
            "category_f1": self.category_f1,
            "mean_attempts": self.mean_attempts,
            "total_cost": self.total_cost,
            "runs": self.runs,
            "papers": self.papers,
        }


def _mean(values: list[float]) -> float:
    return math.fsum(values) / len(values) if values else 0.0


def _collect_run(run_dir: Path, aggregation: str, weights: scoring.Weights) -> Optional[dict]:
    entries = []
    for path in sorted(run_dir.glob("*.json")):
        if path.name.endswith(".document.json"):
            continue
        entries.append(json.loads(path.read_text(encoding="utf-8")))
    if not entries:
        return None
    overall_f1: list[float] = []
    overall_precision: list[float] = []
    overall_recall: list[float] = []
    per_category: dict[str, list[float]] = {name: [] for name in scoring.CATEGORIES}
    attempts: list[float] = []
    cost = 0.0
    for entry in entries:
        record = entry.get("record", {})
        attempts.append(float(record.get("attempts", 0)))
        if record.get("cost"):
            cost += float(record["cost"])
        score = entry.get("score")
        if score is None:
            # failed paper: zero credit against its target
            overall_f1.append(0.0)
            overall_precision.append(0.0)
            overall_recall.append(0.0)
            for name in scoring.CATEGORIES:
                per_category[name].append(0.0)
            continue
        overall_f1.append(score["overall"]["f1"])
        overall_precision.append(score["overall"]["precision"])
        overall_recall.append(score["overall"]["recall"])
        for name in scoring.CATEGORIES:
            per_category[name].append(score["categories"][name]["f1"])
    category_means = {name: _mean(values) for name, values in per_category.items()}
    if aggregation == "pooled":
        f1 = weights.combine(category_means)
    else:
        f1 = _mean(overall_f1)
    return {
        "f1": f1,
        "precision": _mean(overall_precision),
        "recall": _mean(overall_recall),
        "category_f1": category_means,
        "mean_attempts": _mean(attempts),
        "cost": cost,
        "papers": len(entries),
    }


def build_leaderboard(
    run_directory: str,
    aggregation: str = "per_paper",
    weights: scoring.Weights = scoring.DEFAULT_WEIGHTS,
) -> tuple[list[LeaderboardRow], Optional[float]]:
    """Aggregate every <method>/<run>/ under the directory into rows.

    Also returns the Pearson correlation between mean attempts and overall
    F1 across methods (None when fewer than two methods or zero variance).
    """
    root = Path(run_directory)
    rows: list[LeaderboardRow] = []
    for method_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        run_summaries = []
        for run_dir in sorted(p for p in method_dir.iterdir() if p.is_dir()):
            summary = _collect_run(run_dir, aggregation, weights)
            if summary is not None:
                run_summaries.append(summary)
        if not run_summaries:
            continue
        f1_values = [s["f1"] for s in run_summaries]
        half_width = scoring.run_ci(f1_values).half_width if len(f1_values) >= 2 else None
        rows.append(
            LeaderboardRow(
                method=method_dir.name,
                precision=_mean([s["precision"] for s in run_summaries]),
                recall=_mean([s["recall"] for s in run_summaries]),
                f1=_mean(f1_values),
                f1_half_width=half_width,
                category_f1={
                    name: _mean([s["category_f1"][name] for s in run_summaries])
                    for name in scoring.CATEGORIES
                },
                mean_attempts=_mean([s["mean_attempts"] for s in run_summaries]),
                total_cost=math.fsum(s["cost"] for s in run_summaries),
                runs=len(run_summaries),
                papers=max(s["papers"] for s in run_summaries),
            )
        )
    if not rows:
        raise FileNotFoundError(f"no run records under {run_directory}")
    correlation = None
    if len(rows) >= 2:
        try:
            correlation = scoring.pearson(
                [row.mean_attempts for row in rows], [row.f1 for row in rows]
            )
        except scoring.DegenerateInput:
            correlation = None
    return rows, correlation


def _render_leaderboard(rows: list[LeaderboardRow], correlation: Optional[float]) -> str:
    header = (
        f"{'method':<24} {'prec':>6} {'rec':>6} {'f1':>6} {'ci':>7} "
        f"{'meas':>6} {'proc':>6} {'mat':>6} {'config':>6} {'att':>6} {'cost':>8}"
    )
    lines = [header, "-" * len(header)]
    for row in sorted(rows, key=lambda r: -r.f1):
        ci = f"{row.f1_half_width:.3f}" if row.f1_half_width is not None else "n/a"
        lines.append(
            f"{row.method:<24} {row.precision:>6.3f} {row.recall:>6.3f} {row.f1:>6.3f} {ci:>7} "
            f"{row.category_f1['measurements']:>6.3f} {row.category_f1['process']:>6.3f} "
            f"{row.category_f1['material']:>6.3f} {row.category_f1['configuration']:>6.3f} "
            f"{row.mean_attempts:>6.2f} {row.total_cost:>8.2f}"
        )
    if correlation is not None:
        lines.append(f"attempts-vs-f1 pearson: {correlation:.4f}")
    else:
        lines.append("attempts-vs-f1 pearson: n/a")
    return "\n".join(lines)


def _leaderboard_csv(rows: list[LeaderboardRow]) -> str:
    out = ["method,precision,recall,f1,f1_half_width,meas_f1,proc_f1,mat_f1,config_f1,mean_attempts,total_cost,runs,papers"]
    for row in sorted(rows, key=lambda r: -r.f1):
        ci = "" if row.f1_half_width is None else f"{row.f1_half_width!r}"
        out.append(
            f"{row.method},{row.precision!r},{row.recall!r},{row.f1!r},{ci},"
            f"{row.category_f1['measurements']!r},{row.category_f1['process']!r},"
            f"{row.category_f1['material']!r},{row.category_f1['configuration']!r},"
            f"{row.mean_attempts!r},{row.total_cost!r},{row.runs},{row.papers}"
        )
    return "\n".join(out) + "\n"


# --- CLI ---------------------------------------------------------------------------


def cmd_validate(args) -> int:
    try:
        text = Path(args.file).read_text(encoding="utf-8")
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    try:
        json.loads(interchange.strip_fences(text))
    except json.JSONDecodeError as err:
        print(f"error: not a JSON document: {err}", file=sys.stderr)
        return EXIT_USAGE
    issues = check_document(text, args.mode)
    errors = [i for i in issues if i.severity == ERROR]
    if issues:
        print(render_feedback(issues))
    return EXIT_DOMAIN if errors else EXIT_OK


def cmd_score(args) -> int:
    try:
        weights, config, _ = load_config(args.config)
        if args.weights:
            weights = _parse_weights_flag(args.weights)
        report = score_files(args.extracted, args.target, weights, config)
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (TargetInvalid, interchange.DecodeFailed, scoring.WeightSumError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DOMAIN
    print(_render_score_table(report))
    if args.out:
        Path(args.out).write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
        )
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        weights, config, raw = load_config(args.config)
        max_attempts = args.max_attempts or int(raw.get("max_attempts", 5))
        run_corpus(
            papers_dir=args.papers,
            targets_dir=args.targets,
            extractor_command=args.extractor,
            out_dir=args.out,
            method=args.method,
            run_label=args.run_label,
            mode=args.mode,
            max_attempts=max_attempts,
            weights=weights,
            config=config,
        )
    except (OSError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (ExtractorCrashed, interchange.DecodeFailed, TargetInvalid) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        weights, _, raw = load_config(args.config)
        aggregation = args.aggregation or raw.get("aggregation", "per_paper")
        rows, correlation = build_leaderboard(args.run_directory, aggregation, weights)
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    print(_render_leaderboard(rows, correlation))
    payload = {
        "rows": [row.to_dict() for row in sorted(rows, key=lambda r: -r.f1)],
        "attempts_f1_pearson": correlation,
        "aggregation": aggregation,
    }
    out_path = Path(args.out) if args.out else Path(args.run_directory) / "leaderboard.json"
    out_path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    if args.csv:
        Path(args.csv).write_text(_leaderboard_csv(rows), encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alloybench",
        description="Validate, score and benchmark alloy experiment extraction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="validate one extraction document")
    p_validate.add_argument("file")
    p_validate.add_argument(
        "--mode",
        choices=["experiment", "composition_list", "property_list"],
        default="experiment",
    )
    p_validate.set_defaults(func=cmd_validate)

    p_score = sub.add_parser("score", help="score an extraction against ground truth")
    p_score.add_argument("--extracted", required=True)
    p_score.add_argument("--target", required=True)
    p_score.add_argument("--weights", help="four comma-separated category weights")
    p_score.add_argument("--config", help="JSON config file")
    p_score.add_argument("--out", help="write the structured report here")
    p_score.set_defaults(func=cmd_score)

    p_run = sub.add_parser("run", help="drive an extractor over a corpus of paper texts")
    p_run.add_argument("--papers", required=True, help="directory of .txt paper texts")
    p_run.add_argument("--targets", help="directory of <paper>.json ground-truth documents")
    p_run.add_argument("--extractor", required=True, help="extractor command line")
    p_run.add_argument(
        "--mode",
        choices=["experiment", "composition_list", "property_list"],
        default="experiment",
    )
    p_run.add_argument("--max-attempts", type=int, dest="max_attempts")
    p_run.add_argument("--out", required=True, help="run directory")
    p_run.add_argument("--method", default="extractor", help="method label for the leaderboard")
    p_run.add_argument("--run-label", default="run1", dest="run_label")
    p_run.add_argument("--config", help="JSON config file")
    p_run.set_defaults(func=cmd_run)

    p_report = sub.add_parser("report", help="aggregate run records into a leaderboard")
    p_report.add_argument("run_directory")
    p_report.add_argument("--csv", help="also write leaderboard rows as CSV")
    p_report.add_argument("--out", help="structured leaderboard path")
    p_report.add_argument("--aggregation", choices=["per_paper", "pooled"])
    p_report.add_argument("--config", help="JSON config file")
    p_report.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
