"""Command-line front end.

Exit status: 0 on success, 2 on invalid input (nothing written), 3 when a
numeric check or iteration fails (the report is still written).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field as PField, ValidationError as PydanticValidationError, field_validator

from . import io
from .constants import eta_table, parse_r
from .errors import AccuracyError, ConvergenceError, NSLorentzError, NumericError, ValidationError
from .fields import DataSpec, Grid, TaylorGreen, generate_initial_data, taylor_green_field
from .lorentz import LorentzIndex, lorentz_norm, lorentz_quasinorm

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3
CONFIG_DIR = Path(__file__).parent / "configs"


class RunConfig(BaseModel):
    """Validated run description; unknown keys are rejected."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = PField(default=2, ge=2, le=3)
    N: int = 64
    L: float = PField(default=2 * math.pi, gt=0)
    data: DataSpec = PField(default_factory=TaylorGreen)
    T: float = PField(default=0.5, gt=0)
    J: int = PField(default=32, ge=4)
    indices: list[str] = PField(default_factory=lambda: ["2,2", "infbar,inf"])
    r: float = math.inf
    r_list: list[float] = PField(default_factory=lambda: [math.inf])
    picard_tol: float = PField(default=1e-10, gt=0)
    max_iterations: int = PField(default=64, ge=1)
    alphas: list[float] = PField(default_factory=lambda: [0.5])
    out: str = "out"
    strict: bool = False
    seed: int = 0

    @field_validator("indices")
    @classmethod
    def _indices(cls, v):
        for tok in v:
            LorentzIndex.parse(tok)
        return v

    @field_validator("r", mode="before")
    @classmethod
    def _r(cls, v):
        return parse_r(v)

    @field_validator("r_list", mode="before")
    @classmethod
    def _rl(cls, v):
        return [parse_r(x) for x in v]

    @field_validator("alphas")
    @classmethod
    def _alphas(cls, v):
        if any(not 0 < a < 1 for a in v):
            raise ValueError("Hoelder exponents must lie in (0, 1)")
        return v

    @property
    def grid(self) -> Grid:
        return Grid(n=self.n, N=self.N, L=self.L)

    def solve_config(self):
        from .solver import SolveConfig

        return SolveConfig(
            n=self.n, N=self.N, L=self.L, T=self.T, J=self.J, picard_tol=self.picard_tol,
            max_iterations=self.max_iterations, indices=self.indices, r=self.r, r_list=self.r_list,
        )


def load_config(args) -> RunConfig:
    raw: dict = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            for cand in (CONFIG_DIR / path.name, CONFIG_DIR / f"{path.name}.json"):
                if cand.exists():
                    path = cand
                    break
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ValidationError("config must be a JSON object")
    for key in ("out", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
    if getattr(args, "strict", False):
        raw["strict"] = True
    if getattr(args, "n", None) is not None:
        raw["n"] = args.n
    if getattr(args, "J", None) is not None:
        raw["J"] = args.J
    if getattr(args, "r_list", None) is not None:
        raw["r_list"] = [t for t in args.r_list.split(",") if t] if args.r_list else []
    cfg = RunConfig.model_validate(raw)
    cfg.grid  # grid invariants (power-of-two N) are checked here
    cfg.solve_config()
    return cfg


def _tok(r: float) -> str:
    return "inf" if math.isinf(r) else f"{r:g}"


def _out(cfg: RunConfig) -> Path:
    p = Path(cfg.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


# --- subcommands -----------------------------------------------------------------


def cmd_constants(args) -> int:
    n = args.n if args.n is not None else 2
    rs = [parse_r(t) for t in (args.r or "inf").split(",") if t]
    table = eta_table(n, rs)
    out = Path(args.out or "out")
    out.mkdir(parents=True, exist_ok=True)
    io.write_json(out / "constants.json", table.to_dict())
    return EXIT_OK


def _initial(cfg: RunConfig):
    return generate_initial_data(cfg.data, cfg.grid)


def cmd_norms(args) -> int:
    cfg = load_config(args)
    f = _initial(cfg)
    rows = []
    for tok in cfg.indices:
        idx = LorentzIndex.parse(tok)
        norm = lorentz_norm(f, idx.model_copy(update={"norm": True})) if idx.p > 1 else math.nan
        rows.append([idx.token, idx.p, idx.q, lorentz_quasinorm(f, idx.model_copy(update={"norm": False})), norm])
    io.write_csv(_out(cfg) / "initial_norms.csv", ["index", "p", "q", "quasinorm", "norm"], rows)
    return EXIT_OK


def cmd_kernel_check(args) -> int:
    from .kernels import MultiplierSpec, kernel_grid, pointwise_decay_constant, semigroup_residual

    cfg = load_config(args)
    grid = Grid(n=cfg.n, N=args.kernel_N, L=args.kernel_L)
    ts = [float(t) for t in args.t.split(",")]
    ps = [float(p) for p in args.p.split(",")]
    specs = [MultiplierSpec(tag=tag, order=o) for tag in ("heat", "oseen") for o in (0, 1)]
    header = ["tag", "alpha", "t", "L1_norm"] + [f"Lp1_{p:g}" for p in ps] + ["decay_constant", "semigroup_residual"]
    rows = []
    for spec in specs:
        decay = pointwise_decay_constant(spec, ts, grid)
        for t in ts:
            prof = kernel_grid(spec, t, grid, strict=cfg.strict)
            l1 = prof.l1_norm if not (spec.tag == "oseen" and spec.order == 0) else math.nan
            lp = [prof.lp1_quasinorm(p) for p in ps]
            res = semigroup_residual(spec, t / 2, t / 2, grid)
            rows.append([spec.tag, f"d{spec.order}", t, l1, *lp, decay.constant, res])
    io.write_csv(_out(cfg) / "kernel_check.csv", header, rows)
    return EXIT_OK


def cmd_estimate_check(args) -> int:
    from .estimates import run_harness, violations

    cfg = load_config(args)
    recs = run_harness(samples=args.samples, seed=cfg.seed)
    rows = [[r.estimate, r.sample, r.lhs, r.rhs, r.ratio, r.holds] for r in recs]
    io.write_csv(_out(cfg) / "estimates.csv", ["estimate", "sample", "lhs", "rhs", "ratio", "holds"], rows)
    bad = violations(recs)
    if bad:
        print(f"{len(bad)} estimate violations", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _solve(cfg: RunConfig):
    from .solver import picard_solve

    f = _initial(cfg)
    scfg = cfg.solve_config()
    table = eta_table(cfg.n, sorted({cfg.r, *cfg.r_list}))
    return picard_solve(f, scfg, table), table


def _norms_rows(report, r_list):
    labels = list(report.node_norms)
    header = ["t"] + labels + [f"threshold_r{_tok(r)}" for r in r_list]
    times = report.trajectory.times
    rows = []
    for j, t in enumerate(times):
        row = [t] + [report.node_norms[k][j] for k in labels] + [report.thresholds[r][j] for r in r_list]
        rows.append(row)
    return header, rows


def cmd_solve(args) -> int:
    cfg = load_config(args)
    report, table = _solve(cfg)
    out = _out(cfg)
    header, rows = _norms_rows(report, cfg.r_list)
    io.write_csv(out / "norms.csv", header, rows)
    summary = report.summary()
    summary["ratios"] = report.ratios
    summary["differences"] = report.differences
    summary["constants"] = table.to_dict()
    summary["config"] = cfg.model_dump(exclude={"out"})
    if isinstance(cfg.data, TaylorGreen) and cfg.n == 2:
        err = max(
            (report.trajectory.field(j) - taylor_green_field(cfg.grid, cfg.data.amplitude, t)).sup_norm()
            for j, t in enumerate(report.trajectory.times)
        )
        summary["sup_error"] = err
    io.write_json(out / "summary.json", summary)
    return EXIT_OK if report.converged else EXIT_NUMERIC


def cmd_regularity(args) -> int:
    from .regularity import initial_distance, regularity_report

    cfg = load_config(args)
    report, _ = _solve(cfg)
    traj = report.trajectory
    idxs = [LorentzIndex.parse(t) for t in cfg.indices]
    rr = regularity_report(traj, alphas=tuple(cfg.alphas), indices=idxs)
    labels = list(rr.gaps)
    gap_at = {float(t): j for j, t in enumerate(rr.gap_times)}
    header = ["t", "alpha", "quotient", "bracket", "ratio"] + [f"gap_{k}" for k in labels]
    rows = []
    for row in rr.rows:
        j = gap_at.get(row.t)
        gaps = [rr.gaps[k][j] if j is not None else math.nan for k in labels]
        rows.append([row.t, row.alpha, row.quotient, row.bracket, row.ratio, *gaps])
    out = _out(cfg)
    io.write_csv(out / "regularity.csv", header, rows)
    finite_q = [i for i in idxs if not math.isinf(i.q)]
    io.write_json(
        out / "regularity.json",
        {
            "t0": rr.t0,
            "ratio_spread": {str(a): rr.ratio_spread(a, cfg.T / 4) for a in cfg.alphas},
            "max_gap": {k: float(np.max(v)) for k, v in rr.gaps.items()},
            "initial_distance": {i.label: initial_distance(traj, i) for i in finite_q},
            "converged": report.converged,
        },
    )
    return EXIT_OK if report.converged else EXIT_NUMERIC


def cmd_blowup(args) -> int:
    from .solver import blowup_monitor

    cfg = load_config(args)
    if not cfg.r_list:
        raise ValidationError("blowup-report needs a non-empty r_list")
    report, table = _solve(cfg)
    horizon = args.horizon if args.horizon is not None else cfg.T
    mon = blowup_monitor(report.trajectory, cfg.r_list, table, horizon)
    times = report.trajectory.times
    header = ["t"]
    for r in cfg.r_list:
        s = _tok(r)
        header += [f"weak_r{s}", f"threshold_r{s}", f"margin_r{s}", f"lifespan_r{s}"]
    by = {(row.t, row.r): row for row in mon}
    rows = []
    for t in times:
        row = [t]
        for r in cfg.r_list:
            m = by[(float(t), r)]
            row += [m.norm, m.threshold, m.margin, m.lifespan_bound]
        rows.append(row)
    io.write_csv(_out(cfg) / "blowup.csv", header, rows)
    return EXIT_OK if report.converged else EXIT_NUMERIC


def cmd_plot(args) -> int:
    out = Path(args.out or "out")
    io.plot_series(Path(args.csv), out)
    return EXIT_OK


# --- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config (bundled names are also accepted)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--strict", action="store_true", help="turn accuracy warnings into errors")
    common.add_argument("--seed", type=int)
    common.add_argument("--n", type=int, help="spatial dimension override")

    parser = argparse.ArgumentParser(prog="nslorentz", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", parents=[common], help="alpha, beta, gamma, delta, eta table")
    p.add_argument("--r", help="comma-separated r values, 'inf' allowed")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("norms", parents=[common], help="Lorentz norms of the initial datum")
    p.set_defaults(func=cmd_norms)

    p = sub.add_parser("kernel-check", parents=[common], help="heat and Oseen kernel certification")
    p.add_argument("--t", default="0.25,1,4", help="comma-separated times (at least two)")
    p.add_argument("--p", default="1.5,2,4", help="comma-separated Lorentz exponents")
    p.add_argument("--kernel-N", dest="kernel_N", type=int, default=128)
    p.add_argument("--kernel-L", dest="kernel_L", type=float, default=40.0)
    p.set_defaults(func=cmd_kernel_check)

    p = sub.add_parser("estimate-check", parents=[common], help="randomized estimate audit")
    p.add_argument("--samples", type=int, default=20)
    p.set_defaults(func=cmd_estimate_check)

    for name, func, helptext in (
        ("solve", cmd_solve, "Picard solve; norms.csv and summary.json"),
        ("regularity-report", cmd_regularity, "continuity and Hoelder diagnostics"),
        ("blowup-report", cmd_blowup, "blowup thresholds along a run"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--J", type=int, help="time-step count override")
        p.add_argument("--r-list", dest="r_list", help="comma-separated r values for thresholds")
        if name == "blowup-report":
            p.add_argument("--horizon", type=float, help="candidate blowup time (default T)")
        p.set_defaults(func=func)

    p = sub.add_parser("plot", help="SVG plots from a norms or blowup CSV")
    p.add_argument("csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, PydanticValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ConvergenceError, NumericError, AccuracyError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except NSLorentzError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
