"""Command-line pipeline: exact -> bench -> fit -> plan -> run, plus frontier.

Exit codes: 0 success, 2 invalid arguments or config, 3 insufficient data,
4 infeasible budget.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import re
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .bench import (
    CHEMICAL_PRECISION,
    SuccessCurve,
    aggregate_samples,
    fit_success_curve,
    read_records,
    run_benchmark,
    write_records,
)
from .campaign import run_campaign
from .errors import InfeasibleBudgetError, InsufficientDataError, InvalidArgumentError
from .metaplan import MetaPlan, frontier, frontier_csv, optimize_plan, probability_surface, surface_csv
from .pauli import Hamiltonian, exact_spectrum, ground_state, h2_hamiltonian
from .spsa import SpsaConfig, shots_per_eval_for_budget

EXIT_OK, EXIT_INVALID, EXIT_DATA, EXIT_BUDGET = 0, 2, 3, 4

DEFAULT_SHOTS_SCHEDULE = [4, 16, 64, 256, 1024, 4096, 16384]
DEFAULT_LEVELS = [1, 2, 3, 4, 5]


class Config:
    """Resolved run configuration; see README for the JSON layout."""

    def __init__(self, doc: Optional[dict] = None, base: Optional[Path] = None):
        doc = dict(doc or {})
        self.raw = doc
        ham = doc.get("hamiltonian")
        if ham is None:
            self.hamiltonian = h2_hamiltonian()
        elif isinstance(ham, str):
            path = Path(ham) if base is None else base / ham
            self.hamiltonian = Hamiltonian.from_json(path.read_text())
        else:
            self.hamiltonian = Hamiltonian.from_json(ham)
        self.spsa = SpsaConfig.from_json(doc.get("spsa", {}))
        bench = doc.get("bench", {})
        if "n_schedule" in bench and "shots_per_eval" in bench:
            raise InvalidArgumentError("give either bench.n_schedule or bench.shots_per_eval, not both")
        if "n_schedule" in bench:
            self.shots_schedule = [shots_per_eval_for_budget(self.spsa, int(n)) for n in bench["n_schedule"]]
        else:
            self.shots_schedule = [int(s) for s in bench.get("shots_per_eval", DEFAULT_SHOTS_SCHEDULE)]
        self.trials = int(bench.get("trials", 200))
        self.levels = [parse_precision(x) for x in doc.get("accuracy_levels", DEFAULT_LEVELS)]
        self.budgets = [int(b) for b in doc.get("budgets", [])]
        self.precisions = [parse_precision(x) for x in doc.get("precisions", [])]

    def resolved(self) -> dict:
        return {
            "hamiltonian": self.hamiltonian.to_json(),
            "spsa": self.spsa.to_json(),
            "bench": {"shots_per_eval": self.shots_schedule, "trials": self.trials},
            "accuracy_levels": self.levels,
            "budgets": self.budgets,
            "precisions": self.precisions,
        }

    def digest(self) -> str:
        blob = json.dumps(self.resolved(), sort_keys=True).encode()
        return "sha256:" + hashlib.sha256(blob).hexdigest()

    @classmethod
    def load(cls, path: Optional[str]) -> "Config":
        if path is None:
            return cls()
        p = Path(path)
        try:
            doc = json.loads(p.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidArgumentError(f"cannot read config {path}: {exc}") from None
        if not isinstance(doc, dict):
            raise InvalidArgumentError("config must be a JSON object")
        return cls(doc, base=p.parent)


_CHP = re.compile(r"^\s*chp\s*[x*]\s*([0-9.eE+-]+)\s*$", re.IGNORECASE)


def parse_precision(value) -> float:
    """Hartree value, or ``ChPxK`` meaning K times chemical precision.

    In JSON configs an integer is a multiple of chemical precision and a
    float is Hartree.
    """
    if isinstance(value, bool):
        raise InvalidArgumentError(f"invalid precision {value!r}")
    if isinstance(value, int):
        d = value * CHEMICAL_PRECISION
    elif isinstance(value, float):
        d = value
    else:
        text = str(value)
        match = _CHP.match(text)
        try:
            d = float(match.group(1)) * CHEMICAL_PRECISION if match else float(text)
        except ValueError:
            raise InvalidArgumentError(f"invalid precision {value!r}") from None
    if not (d > 0 and math.isfinite(d)):
        raise InvalidArgumentError(f"precision must be positive, got {value!r}")
    return d


def _parse_list(text: str, conv) -> list:
    return [conv(part) for part in text.split(",") if part.strip()]


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = int(np.random.SeedSequence().entropy % (1 << 64))
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def _meta(seed: Optional[int], config: Config) -> dict:
    return {"tool": "shotmeta", "version": __version__, "seed": seed, "config_digest": config.digest()}


def _meta_comment(meta: dict) -> str:
    return " ".join(f"{k}={meta[k]}" for k in sorted(meta))


def _write(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def cmd_exact(args, config: Config) -> int:
    h = config.hamiltonian
    values = exact_spectrum(h)
    e0, vec = ground_state(h)
    lines = ["eigenvalues (Ha):"] + [f"  {v:+.8f}" for v in values]
    lines.append("ground state amplitudes (b = 2*q1 + q0):")
    lines += [f"  |{b:02b}>  {a.real:+.6f}{a.imag:+.6f}j" for b, a in enumerate(vec)]
    print("\n".join(lines))
    if args.out:
        doc = {
            "meta": _meta(None, config),
            "eigenvalues": [float(v) for v in values],
            "ground_energy": e0,
            "ground_state": [[float(a.real), float(a.imag)] for a in vec],
        }
        Path(args.out).write_text(_dump(doc))
    return EXIT_OK


def cmd_bench(args, config: Config) -> int:
    if args.out is None:
        raise InvalidArgumentError("bench needs --out")
    seed = _seed(args)
    trials = args.trials if args.trials is not None else config.trials
    records = run_benchmark(
        config.spsa, config.hamiltonian, config.shots_schedule, trials, seed,
        workers=args.workers, statevector=args.statevector,
    )
    write_records(args.out, records, meta=_meta(seed, config))
    print(f"wrote {len(records)} records to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_fit(args, config: Config) -> int:
    h = config.hamiltonian
    e0 = float(exact_spectrum(h)[0])
    records = read_records(args.records)
    sv = [r for r in records if r.statevector]
    samples = aggregate_samples(records, config.levels, e0=e0)
    if not samples:
        raise InsufficientDataError("no finite-shot records to fit")
    curves = [fit_success_curve(samples, d) for d in config.levels]
    doc = {
        "meta": _meta(None, config),
        "e0": e0,
        "samples": [s.to_json() for s in samples],
        "curves": [c.to_json() for c in curves],
    }
    if sv:
        doc["statevector_success"] = [
            {"accuracy_d": d, "fraction": sum(abs(r.true_energy - e0) <= d for r in sv) / len(sv), "trials": len(sv)}
            for d in config.levels
        ]
    _write(args.out, _dump(doc))
    return EXIT_OK


def _load_curves(path: str) -> list[SuccessCurve]:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidArgumentError(f"cannot read curves {path}: {exc}") from None
    return [SuccessCurve.from_json(c) for c in doc["curves"]]


def _curve_for(curves: Sequence[SuccessCurve], d: float) -> SuccessCurve:
    for c in curves:
        if math.isclose(c.accuracy_d, d, rel_tol=1e-9):
            return c
    have = ", ".join(f"{c.accuracy_d:g}" for c in curves)
    raise InsufficientDataError(f"no fitted curve at accuracy {d:g} (available: {have})")


def cmd_plan(args, config: Config) -> int:
    if args.budget is None or args.precision is None:
        raise InvalidArgumentError("plan needs --budget and --precision")
    d = parse_precision(args.precision)
    curve = _curve_for(_load_curves(args.curves), d)
    h = config.hamiltonian
    plan = optimize_plan(curve, h, args.budget, d)
    meta = _meta(None, config)
    _write(args.out, _dump({"meta": meta, "plan": plan.to_json(), "curve": curve.to_json()}))
    if args.surface:
        rows = probability_surface(curve, h, args.budget, d)
        Path(args.surface).write_text(surface_csv(rows, _meta_comment(meta)))
    return EXIT_OK


def cmd_run(args, config: Config) -> int:
    seed = _seed(args)
    try:
        doc = json.loads(Path(args.plan).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidArgumentError(f"cannot read plan {args.plan}: {exc}") from None
    plan = MetaPlan.from_json(doc["plan"])
    result = run_campaign(plan, config.hamiltonian, seed, config.spsa, workers=args.workers)
    _write(args.out, _dump({"meta": _meta(seed, config), "campaign": result.to_json()}))
    return EXIT_OK


def cmd_frontier(args, config: Config) -> int:
    budgets = _parse_list(args.budget, int) if args.budget else config.budgets
    precisions = _parse_list(args.precision, parse_precision) if args.precision else config.precisions
    if not budgets or not precisions:
        raise InvalidArgumentError("frontier needs budget and precision lists")
    curves = _load_curves(args.curves)
    rows = frontier(lambda d: _curve_for(curves, d), config.hamiltonian, budgets, precisions)
    _write(args.out, frontier_csv(rows, _meta_comment(_meta(None, config))))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shotmeta", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=False, workers=False):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output path (stdout if omitted, where allowed)")
        if seed:
            p.add_argument("--seed", type=int, help="master seed (random if omitted)")
        if workers:
            p.add_argument("--workers", type=int, default=1, help="worker processes")
        return p

    common(sub.add_parser("exact", help="print the exact spectrum and ground state"))
    p = common(sub.add_parser("bench", help="benchmark SPSA over the shot schedule"), seed=True, workers=True)
    p.add_argument("--trials", type=int, help="trials per schedule point")
    p.add_argument("--statevector", action="store_true", help="exact objective, no shot noise")
    p = common(sub.add_parser("fit", help="fit success curves to benchmark records"))
    p.add_argument("records", help="JSONL file written by bench")
    p = common(sub.add_parser("plan", help="optimal shot split for a budget and accuracy"))
    p.add_argument("--curves", required=True, help="curves JSON written by fit")
    p.add_argument("--budget", type=int, help="total shot budget B")
    p.add_argument("--precision", help="accuracy d in Hartree, or ChPxK")
    p.add_argument("--surface", help="write the (r, m) probability surface CSV here")
    p = common(sub.add_parser("run", help="execute a plan"), seed=True, workers=True)
    p.add_argument("--plan", required=True, help="plan JSON written by plan")
    p = common(sub.add_parser("frontier", help="optimal reliable probability over budgets and accuracies"))
    p.add_argument("--curves", required=True, help="curves JSON written by fit")
    p.add_argument("--budget", help="comma-separated budgets")
    p.add_argument("--precision", help="comma-separated accuracies (Hartree or ChPxK)")
    return parser


COMMANDS = {
    "exact": cmd_exact,
    "bench": cmd_bench,
    "fit": cmd_fit,
    "plan": cmd_plan,
    "run": cmd_run,
    "frontier": cmd_frontier,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code not in (0, None) else EXIT_OK
    try:
        config = Config.load(args.config)
        return COMMANDS[args.command](args, config)
    except InfeasibleBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except InsufficientDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (InvalidArgumentError, TypeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
