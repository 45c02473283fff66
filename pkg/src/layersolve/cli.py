"""Command-line front end.

Commands
--------
solve          march one problem and write the solution CSV (or plot data)
converge       run the double-mesh study, write report CSV(s), print the table
temporal       manufactured-solution temporal-order study, write order CSV
dump-mesh      write the spatial mesh in the text dump format
dump-solution  march one problem and write the solution CSV

Outputs are written atomically (temp file + rename) so concurrent sweeps
cannot observe partial files.  ``LAYERSOLVE_THREADS`` caps how many mu values
of a sweep run in parallel (default 1).  All numeric flags accept scientific
notation.  Exit codes: 0 success, 2 configuration error, 1 computation error;
errors print one machine-parsable line to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import analysis, registry
from .errors import LayerSolveError
from .mesh import ThetaVariant, spatial_mesh_for, uniform_time_grid
from .problem import derive_regime, validate
from .solver import CheckPolicy, march

__all__ = ["RunConfig", "run", "main"]

COMMANDS = ("solve", "converge", "temporal", "dump-mesh", "dump-solution")

_CHECK_POLICIES = {
    "strict": CheckPolicy.strict_policy(),
    "warn": CheckPolicy(),
    "off": CheckPolicy.off(),
}

_DEFAULT_OUT = {
    "solve": "solution.csv",
    "dump-solution": "solution.csv",
    "dump-mesh": "mesh.txt",
    "converge": ".",
    "temporal": "temporal.csv",
}


@dataclass(frozen=True)
class RunConfig:
    """Validated settings for one CLI invocation."""

    command: str
    example: str = "example1"
    epsilon: float = 1e-8
    mu: float = 1e-6
    mu_list: tuple[float, ...] = ()
    n: int = 64
    m: int | None = None
    levels: int = 4
    theta_variant: ThetaVariant = ThetaVariant.SECTION4
    checks: CheckPolicy = field(default_factory=CheckPolicy)
    out_path: str = ""
    plot_data: bool = False


class ConfigError(ValueError):
    pass


def _validate_config(cfg: RunConfig) -> None:
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    if cfg.example == "custom":
        raise ConfigError("custom problems are defined in host code via "
                          "ProblemSpec; the CLI serves the registry only")
    if cfg.example not in registry.REGISTRY_KEYS:
        raise ConfigError(f"unknown example {cfg.example!r}; "
                          f"available: {', '.join(registry.REGISTRY_KEYS)}")
    if cfg.n < 16 or cfg.n % 8 != 0:
        raise ConfigError(f"N={cfg.n} must be >= 16 and divisible by 8")
    if cfg.m is not None and cfg.m < 1:
        raise ConfigError("M must be positive")
    if cfg.command == "converge" and cfg.levels < 2:
        raise ConfigError("levels must be at least 2 for converge")
    for name, value in (("epsilon", cfg.epsilon), ("mu", cfg.mu),
                        *((f"mu-list[{k}]", v) for k, v in enumerate(cfg.mu_list))):
        if not 0.0 < value <= 1.0:
            raise ConfigError(f"{name}={value} must be in (0, 1]")


def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _solution_csv(sol) -> str:
    lines = ["t,x,u"]
    times = sol.grid.times
    xs = sol.mesh.points
    for j in range(sol.grid.m + 1):
        row = sol.values[j]
        t = times[j]
        lines.extend(f"{t:.17g},{xs[i]:.17g},{row[i]:.17g}"
                     for i in range(sol.mesh.n + 1))
    return "\n".join(lines) + "\n"


def _plot_data(sol) -> str:
    blocks = []
    xs = sol.mesh.points
    for j in range(sol.grid.m + 1):
        lines = [f"# t={sol.grid.times[j]:.17g}"]
        lines.extend(f"{xs[i]:.17g} {sol.values[j][i]:.17g}"
                     for i in range(sol.mesh.n + 1))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def _mesh_dump(mesh) -> str:
    t1, t2, t3, t4 = mesh.tau
    header = (f"# N={mesh.n} theta1={mesh.layer.theta1:.17g} "
              f"theta2={mesh.layer.theta2:.17g} tau1={t1:.17g} tau2={t2:.17g} "
              f"tau3={t3:.17g} tau4={t4:.17g}")
    lines = [header]
    for i in range(mesh.n + 1):
        h = 0.0 if i == 0 else mesh.h[i]
        lines.append(f"{i} {mesh.points[i]:.17g} {h:.17g} {mesh.segment_label(i)}")
    return "\n".join(lines) + "\n"


def _build_mesh(cfg: RunConfig, spec):
    regime = derive_regime(spec)
    return spatial_mesh_for(regime, spec.params, cfg.n, spec.d, cfg.theta_variant)


def _run_solve(cfg: RunConfig) -> None:
    spec = registry.lookup(cfg.example, cfg.epsilon, cfg.mu)
    validate(spec)
    mesh = _build_mesh(cfg, spec)
    grid = uniform_time_grid(spec.t_final, cfg.m if cfg.m is not None else cfg.n)
    sol = march(spec, mesh, grid, cfg.checks)
    text = _plot_data(sol) if cfg.plot_data else _solution_csv(sol)
    _atomic_write(cfg.out_path, text)


def _run_dump_mesh(cfg: RunConfig) -> None:
    spec = registry.lookup(cfg.example, cfg.epsilon, cfg.mu)
    validate(spec)
    _atomic_write(cfg.out_path, _mesh_dump(_build_mesh(cfg, spec)))


def _converge_one(cfg: RunConfig, mu: float) -> "analysis.ConvergenceReport":
    spec = registry.lookup(cfg.example, cfg.epsilon, mu)
    base_m = cfg.m if cfg.m is not None else cfg.n
    return analysis.convergence_study(spec, cfg.n, base_m, cfg.levels,
                                      variant=cfg.theta_variant, checks=cfg.checks)


def _run_converge(cfg: RunConfig) -> None:
    mus = cfg.mu_list if cfg.mu_list else (cfg.mu,)
    workers = max(1, int(os.environ.get("LAYERSOLVE_THREADS", "1")))
    if workers > 1 and len(mus) > 1:
        with ThreadPoolExecutor(max_workers=min(workers, len(mus))) as pool:
            reports = list(pool.map(lambda mu: _converge_one(cfg, mu), mus))
    else:
        reports = [_converge_one(cfg, mu) for mu in mus]
    os.makedirs(cfg.out_path, exist_ok=True)
    for rep in reports:
        path = os.path.join(cfg.out_path, analysis.report_filename(rep.epsilon, rep.mu))
        _atomic_write(path, analysis.render_report_csv(rep))
    sys.stdout.write(analysis.render_text_table(reports))


def _run_temporal(cfg: RunConfig) -> None:
    man = registry.manufactured_sine()
    m_top = cfg.m if cfg.m is not None else 32
    m_list = []
    m = 4
    while m <= max(4, m_top):
        m_list.append(m)
        m *= 2
    report = analysis.temporal_order_study(man, cfg.n, tuple(m_list), cfg.checks)
    _atomic_write(cfg.out_path, analysis.render_temporal_csv(report))


_RUNNERS = {
    "solve": _run_solve,
    "dump-solution": _run_solve,
    "dump-mesh": _run_dump_mesh,
    "converge": _run_converge,
    "temporal": _run_temporal,
}


def run(cfg: RunConfig) -> int:
    """Execute one validated configuration; returns the process exit status."""
    try:
        _validate_config(cfg)
    except ConfigError as exc:
        sys.stderr.write(f"error: config: {exc}\n")
        return 2
    try:
        _RUNNERS[cfg.command](cfg)
    except LayerSolveError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="layersolve",
        description="Layer-adapted Crank-Nicolson/upwind solver for "
                    "two-parameter singularly perturbed parabolic problems "
                    "with an interior discontinuity.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--example", default="example1",
                        help="registry key (example1, example2)")
    parser.add_argument("--epsilon", type=float, default=1e-8,
                        help="diffusion parameter (scientific notation ok)")
    parser.add_argument("--mu", type=float, default=1e-6,
                        help="convection parameter")
    parser.add_argument("--mu-list", type=str, default="",
                        help="comma-separated mu values for a converge sweep")
    parser.add_argument("--N", dest="n", type=int, default=64,
                        help="spatial intervals (divisible by 8)")
    parser.add_argument("--M", dest="m", type=int, default=None,
                        help="time steps (defaults to N; for temporal: largest M)")
    parser.add_argument("--levels", type=int, default=4,
                        help="refinement levels for converge")
    parser.add_argument("--theta-variant", default="section4",
                        choices=[v.value for v in ThetaVariant])
    parser.add_argument("--checks", default="warn", choices=sorted(_CHECK_POLICIES))
    parser.add_argument("--out", default=None,
                        help="output file (directory for converge)")
    parser.add_argument("--plot-data", action="store_true",
                        help="solve: emit x-u pairs per time slice instead of CSV")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    try:
        mu_list = tuple(float(tok) for tok in args.mu_list.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"bad --mu-list: {exc}") from None
    return RunConfig(
        command=args.command,
        example=args.example,
        epsilon=args.epsilon,
        mu=args.mu,
        mu_list=mu_list,
        n=args.n,
        m=args.m,
        levels=args.levels,
        theta_variant=ThetaVariant(args.theta_variant),
        checks=_CHECK_POLICIES[args.checks],
        out_path=args.out if args.out is not None else _DEFAULT_OUT[args.command],
        plot_data=args.plot_data)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        sys.stderr.write(f"error: config: {exc}\n")
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
