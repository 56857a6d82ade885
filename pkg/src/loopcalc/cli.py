"""Command-line front end.

Exit status: 0 success, 1 invalid model, 2 BP did not converge (a partial
report is still written), 3 enumeration guard exceeded, 4 identity breach in
``verify``.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

from . import fixtures, report
from .bethe import equivalence_check
from .bp import (BpOptions, ConvergenceError, beliefs, bp_residual, bp_solve,
                 complete_bp_gauge)
from .exact import DEFAULT_MAX_TERMS, GuardExceeded, exact_marginals, exact_partition
from .gauge import ExcitedBasisScheme, GaugeError
from .loops import MAX_LOOP_EDGES, enumerate_generalized_loops, loop_series_binary
from .model import ModelError, ModelSpec, load_model
from .tower import TowerOptions, tower_decompose
from .verify import run_checks

EXIT_OK, EXIT_INVALID, EXIT_CONVERGENCE, EXIT_GUARD, EXIT_BREACH = 0, 1, 2, 3, 4
COMMANDS = ("exact", "bp", "loops", "series", "tower", "bethe", "verify")


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: str
    tol: float = 1e-10
    damping: float = 0.5
    seed: int = 0
    max_terms: int = DEFAULT_MAX_TERMS
    max_loop_edges: int | None = None
    scheme: str | None = None
    dump_gauges: str | None = None
    out: str | None = None
    threads: int = 1
    init: str = "uniform"
    max_iter: int = 10_000

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if not self.tol > 0:
            raise ValueError("--tol must be positive")
        if not 0 <= self.damping < 1:
            raise ValueError("--damping must lie in [0, 1)")
        if self.max_terms < 1:
            raise ValueError("--max-terms must be positive")

    @property
    def bp_opts(self) -> BpOptions:
        return BpOptions(damping=self.damping, tol=self.tol, init=self.init,
                         max_iter=self.max_iter,
                         seed=self.seed if self.init == "seeded-random" else None)

    def excited_scheme(self, q) -> ExcitedBasisScheme:
        name = self.scheme or ("binary-paper" if q == 2 else "gram-schmidt-dual")
        return ExcitedBasisScheme(name)


def resolve_model(spec: str) -> ModelSpec:
    """A file path, or ``fixture:NAME`` for a bundled model."""
    if spec.startswith("fixture:"):
        return fixtures.load(spec.split(":", 1)[1])
    return load_model(spec)


def _dump_gauges(cfg, model, fp):
    if cfg.dump_gauges and fp.converged:
        gauges = complete_bp_gauge(model, fp, cfg.excited_scheme(model.q))
        with open(cfg.dump_gauges, "w", encoding="utf-8") as fh:
            fh.write(gauges.to_json())


def _execute(cfg: RunConfig, model: ModelSpec):
    """Return ``(status, body)`` for one command."""
    cmd = cfg.command
    if cmd == "exact":
        return EXIT_OK, report.exact_doc(exact_marginals(model, cfg.max_terms))
    if cmd == "loops":
        loops = enumerate_generalized_loops(model, cfg.max_loop_edges)
        return EXIT_OK, report.loops_doc(loops)

    fp = bp_solve(model, cfg.bp_opts)
    if cmd == "bp":
        bel = beliefs(model, fp) if fp.converged and model.is_positive() else None
        body = report.bp_doc(fp, bel, bp_residual(model, fp))
        _dump_gauges(cfg, model, fp)
        return (EXIT_OK if fp.converged else EXIT_CONVERGENCE), body
    if not fp.converged:
        return EXIT_CONVERGENCE, {"bp": report.bp_doc(fp, None, bp_residual(model, fp))}
    _dump_gauges(cfg, model, fp)
    if cmd == "series":
        rep = loop_series_binary(model, cfg.bp_opts, max_edges=cfg.max_loop_edges,
                                 max_terms=cfg.max_terms, fp=fp)
        return EXIT_OK, report.series_doc(rep)
    if cmd == "tower":
        opts = TowerOptions(scheme=cfg.excited_scheme(model.q), bp=cfg.bp_opts,
                            max_terms=cfg.max_terms)
        return EXIT_OK, report.tower_doc(tower_decompose(model, opts))
    if cmd == "bethe":
        return EXIT_OK, report.bethe_doc(equivalence_check(model, fp))
    checks = run_checks(model, fp, bp_opts=cfg.bp_opts, scheme=cfg.scheme and
                        cfg.excited_scheme(model.q), seed=cfg.seed, max_terms=cfg.max_terms)
    n_loops = len(enumerate_generalized_loops(model))
    exact_z = exact_partition(model, cfg.max_terms) if model.n_configs <= cfg.max_terms else None
    body = {"z0": fp.z0, "exact_z": exact_z, "n_loops": n_loops,
            "checks": [c.as_dict() for c in checks],
            "passed": all(c.passed for c in checks)}
    return (EXIT_OK if body["passed"] else EXIT_BREACH), body


def run(cfg: RunConfig) -> tuple[int, str]:
    """Run one command; returns the exit status and the JSON report text."""
    try:
        model = resolve_model(cfg.model)
    except (ModelError, OSError) as exc:
        return EXIT_INVALID, report.dumps(report.document(cfg.command, {"error": str(exc)}))
    try:
        status, body = _execute(cfg, model)
    except GuardExceeded as exc:
        status, body = EXIT_GUARD, {"error": str(exc)}
    except ConvergenceError as exc:
        status, body = EXIT_CONVERGENCE, {"error": str(exc)}
    except GaugeError as exc:
        status, body = EXIT_CONVERGENCE, {"error": str(exc)}
    return status, report.dumps(report.document(cfg.command, body))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="loopcalc", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--model", required=True,
                   help="model JSON file, or fixture:NAME for a bundled model")
    p.add_argument("--tol", type=float, default=1e-10, help="BP convergence tolerance")
    p.add_argument("--damping", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init", choices=("uniform", "seeded-random"), default="uniform",
                   help="BP initialisation; seeded-random uses --seed")
    p.add_argument("--max-iter", type=int, default=10_000, help="BP sweep limit")
    p.add_argument("--max-terms", type=int, default=DEFAULT_MAX_TERMS,
                   help="enumeration guard in configurations")
    p.add_argument("--max-loop-edges", type=int, default=None,
                   help=f"truncate loops to this many edges (graph guard {MAX_LOOP_EDGES})")
    p.add_argument("--scheme", choices=("binary-paper", "gram-schmidt-dual"), default=None)
    p.add_argument("--dump-gauges", metavar="PATH", default=None)
    p.add_argument("--out", metavar="PATH", default=None)
    p.add_argument("--threads", type=int, default=1,
                   help="accepted for compatibility; evaluation is single-threaded")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(command=args.command, model=args.model, tol=args.tol,
                        damping=args.damping, seed=args.seed, max_terms=args.max_terms,
                        max_loop_edges=args.max_loop_edges, scheme=args.scheme,
                        dump_gauges=args.dump_gauges, out=args.out, threads=args.threads,
                        init=args.init, max_iter=args.max_iter)
    except ValueError as exc:
        print(f"loopcalc: {exc}", file=sys.stderr)
        return EXIT_INVALID
    status, text = run(cfg)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
