"""Batch front-end: ``rcond --command {price,sweep,sparse-demo,validate}``.

Configuration is a plain ``key = value`` file whose keys carry their units::

    x0 = 1.0
    strike = 0.2
    rate_per_year = 0.0175
    volatility_per_sqrt_year = 0.1
    maturity_years = 10
    n_paths = 10000
    lambda_tilde = 0.1, 0.5, 1.0

Every run writes ``effective_config.txt`` to the output directory; it parses
back to the same configuration.  Exit status is 0 on success, 1 on a domain
or solver failure and 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .core import RandomVector, ScenarioSpace, discrete_partition, read_csv
from .errors import (
    CapabilityError,
    ConfigurationError,
    ConvergenceError,
    InfeasibleError,
    InvariantError,
)
from .solver import lambda_from_tilde
from .sparsity import SparseDemoRow, sparse_ce_demo, write_sparsity_csv
from .splitting import SolverConfig
from .valuation import (
    GBMParams,
    valuation_perspective,
    table_report,
    write_value_curve_csv,
    write_report_csv,
    write_report_json,
)
from .validation import run_validation, write_validation_csv

COMMANDS = ("price", "sweep", "sparse-demo", "validate")
EXIT_OK, EXIT_DOMAIN, EXIT_CONFIG = 0, 1, 2

DEFAULT_LAMBDA_TILDE = (0.1, 0.5, 1.0)


@dataclass(frozen=True)
class RunConfig:
    command: str = "sweep"
    seed: int = 0
    x0: float = 1.0
    strike: float = 0.2
    rate_per_year: float = 0.0175
    drift_per_year: Optional[float] = None
    volatility_per_sqrt_year: float = 0.1
    maturity_years: float = 10.0
    n_paths: int = 10_000
    lambda_tilde: Optional[tuple] = None
    lambda_: Optional[tuple] = None
    gamma0: Optional[float] = None
    step_schedule: str = "constant"
    step_ratio: float = 0.7
    alpha: float = 1.0
    max_iter: int = 10_000
    tol: float = 1e-10
    base_measure: str = "Q"
    conditioning_measure: str = "Q"
    sparse_radius: tuple = (0.5, 1.0, 2.0, 4.0)
    sparse_d: int = 1
    sparse_dim: int = 3
    sparse_n_scenarios: int = 1000
    scenario_file: Optional[str] = None
    out_dir: str = "out"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigurationError(f"command must be one of {COMMANDS}, got {self.command!r}")
        if self.lambda_tilde is not None and self.lambda_ is not None:
            raise ConfigurationError("give either lambda_tilde or lambda, not both")
        for m in (self.base_measure, self.conditioning_measure):
            if m not in ("P", "Q"):
                raise ConfigurationError(f"measure must be P or Q, got {m!r}")
        if self.command == "price" and len(self.lambdas()) != 1:
            raise ConfigurationError("price takes exactly one lambda / lambda_tilde value")
        self.gbm()
        self.solver()

    def lambdas(self) -> tuple:
        """Aversion weights in ``[0, 1)``, ascending as given."""
        if self.lambda_ is not None:
            return tuple(self.lambda_)
        lt = self.lambda_tilde
        if lt is None:
            lt = (1.0,) if self.command == "price" else DEFAULT_LAMBDA_TILDE
        return tuple(lambda_from_tilde(v) for v in lt)

    def gbm(self) -> GBMParams:
        return GBMParams(self.x0, self.drift_per_year, self.volatility_per_sqrt_year,
                         self.rate_per_year, self.maturity_years, self.strike,
                         self.n_paths, self.seed)

    def solver(self) -> SolverConfig:
        return SolverConfig(gamma0=self.gamma0, step_schedule=self.step_schedule,
                            ratio=self.step_ratio, alpha=self.alpha,
                            max_iter=self.max_iter, tol=self.tol, seed=self.seed)


# config key -> (field name, parser)
def _floats(s):
    return tuple(float(v) for v in s.split(",") if v.strip())


_KEYS = {
    "command": ("command", str),
    "seed": ("seed", int),
    "x0": ("x0", float),
    "strike": ("strike", float),
    "rate_per_year": ("rate_per_year", float),
    "drift_per_year": ("drift_per_year", float),
    "volatility_per_sqrt_year": ("volatility_per_sqrt_year", float),
    "maturity_years": ("maturity_years", float),
    "n_paths": ("n_paths", int),
    "lambda_tilde": ("lambda_tilde", _floats),
    "lambda": ("lambda_", _floats),
    "gamma0": ("gamma0", float),
    "step_schedule": ("step_schedule", str),
    "step_ratio": ("step_ratio", float),
    "alpha": ("alpha", float),
    "max_iter": ("max_iter", int),
    "tol": ("tol", float),
    "base_measure": ("base_measure", str),
    "conditioning_measure": ("conditioning_measure", str),
    "sparse_radius": ("sparse_radius", _floats),
    "sparse_d": ("sparse_d", int),
    "sparse_dim": ("sparse_dim", int),
    "sparse_n_scenarios": ("sparse_n_scenarios", int),
    "scenario_file": ("scenario_file", str),
    "out_dir": ("out_dir", str),
}
_FIELD_TO_KEY = {f: k for k, (f, _) in _KEYS.items()}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """``key = value`` lines to a field dict; ``#`` starts a comment."""
    fields = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigurationError(f"{source}:{lineno}: unknown key {key!r}")
        name, conv = _KEYS[key]
        if name in fields:
            raise ConfigurationError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            fields[name] = conv(value)
        except ValueError as exc:
            raise ConfigurationError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from exc
    return fields


def format_config(cfg: RunConfig) -> str:
    lines = []
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if v is None:
            continue
        if isinstance(v, tuple):
            v = ", ".join(repr(float(x)) for x in v)
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{_FIELD_TO_KEY[f.name]} = {v}")
    return "\n".join(lines) + "\n"


def load_config(path) -> RunConfig:
    text = Path(path).read_text()
    return RunConfig(**parse_config_text(text, str(path)))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rcond", description="Risk-averse conditioning experiments.")
    ap.add_argument("--config", type=Path, help="key = value configuration file")
    ap.add_argument("--seed", type=int, help="RNG seed (overrides the config)")
    ap.add_argument("--out", type=Path, help="output directory (overrides the config)")
    ap.add_argument("--command", choices=COMMANDS, help="what to run (overrides the config)")
    g = ap.add_mutually_exclusive_group()
    g.add_argument("--lambda-tilde", type=_floats, help="comma-separated aversion levels on the unbounded scale")
    g.add_argument("--lambda", dest="lam", type=_floats, help="comma-separated aversion weights in [0, 1)")
    return ap


def resolve_config(args) -> RunConfig:
    fields = {}
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigurationError(f"cannot read config: {exc}") from exc
        fields = parse_config_text(text, str(args.config))
    if args.seed is not None:
        fields["seed"] = args.seed
    if args.out is not None:
        fields["out_dir"] = str(args.out)
    if args.command is not None:
        fields["command"] = args.command
    if args.lambda_tilde is not None:
        fields.pop("lambda_", None)
        fields["lambda_tilde"] = args.lambda_tilde
    if args.lam is not None:
        fields.pop("lambda_tilde", None)
        fields["lambda_"] = args.lam
    return RunConfig(**fields)


def _perspective(cfg: RunConfig):
    p = valuation_perspective()
    return dataclasses.replace(p, base_measure=cfg.base_measure,
                               conditioning_measure=cfg.conditioning_measure)


def _run_valuation(cfg: RunConfig, out: Path) -> int:
    reports = table_report(cfg.gbm(), cfg.lambdas(), _perspective(cfg), cfg.solver())
    stem = "report" if cfg.command == "price" else "table"
    write_report_csv(reports, out / f"{stem}.csv")
    write_report_json(reports, out / f"{stem}.json")
    if cfg.command == "sweep":
        write_value_curve_csv(reports, out / "value_curve.csv")
    failed = [r for r in reports if not r.converged]
    for r in failed:
        print(f"solver did not converge at lambda={r.lam!r}", file=sys.stderr)
    return EXIT_DOMAIN if failed else EXIT_OK


def _sparse_input(cfg: RunConfig) -> RandomVector:
    if cfg.scenario_file:
        return read_csv(cfg.scenario_file)
    rng = np.random.default_rng(cfg.seed)
    n = cfg.sparse_n_scenarios
    space = ScenarioSpace(np.full(n, 1.0 / n), None, discrete_partition(n))
    return RandomVector(space, rng.uniform(-1.0, 1.0, (n, cfg.sparse_dim)))


def _run_sparse(cfg: RunConfig, out: Path) -> int:
    X = _sparse_input(cfg)
    rows = []
    for radius in cfg.sparse_radius:
        before, after, _ = sparse_ce_demo(X, radius, cfg.sparse_d)
        rows.append(SparseDemoRow(radius, cfg.sparse_d, before, after))
    write_sparsity_csv(rows, out / "sparsity.csv")
    return EXIT_OK


def _run_validate(cfg: RunConfig, out: Path) -> int:
    checks = run_validation(cfg.seed)
    write_validation_csv(checks, out / "validation.csv")
    n_pass = sum(c.passed for c in checks)
    n_fail = len(checks) - n_pass
    with open(out / "validation_summary.txt", "w") as fh:
        fh.write(f"passed = {n_pass}\nfailed = {n_fail}\n")
    print(f"validate: {n_pass} passed, {n_fail} failed")
    for c in checks:
        if not c.passed:
            print(f"  FAIL {c.suite}/{c.name}: error {c.error!r} > {c.tolerance!r}")
    return EXIT_OK if n_fail == 0 else EXIT_DOMAIN


def run(cfg: RunConfig) -> int:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "effective_config.txt").write_text(format_config(cfg))
    if cfg.command in ("price", "sweep"):
        return _run_valuation(cfg, out)
    if cfg.command == "sparse-demo":
        return _run_sparse(cfg, out)
    return _run_validate(cfg, out)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return run(cfg)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"solver failure: {exc} (residual {exc.residual!r})", file=sys.stderr)
        return EXIT_DOMAIN
    except (InvariantError, InfeasibleError, CapabilityError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
