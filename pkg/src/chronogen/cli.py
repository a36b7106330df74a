"""Command-line front end.

Exit codes: 0 success, 2 verification failure, 3 singular clock overlap,
4 invalid configuration, 5 malformed configuration document.
"""

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .config import MODES, ConfigValidationError, parse_config, with_overrides, GridConfig
from .dynamics import norm_drift
from .exceptions import (
    ChronogenError,
    ConfigParseError,
    ReadoutRangeError,
    ReadoutUnusableError,
    SingularOverlapError,
    ValidationError,
    VerificationError,
)
from .model import HamiltonianSpec, assemble_global, paper_example_spec, pauli, random_spec
from .readout import expectation_curve, invert_readout, monotonicity, resolution_spectrum
from .relational import clock_only_trajectory
from .scenarios import (
    PaperExampleReference,
    degenerate_free_spec,
    generate_solvable,
    pauli_components_stack,
    paper_example_state,
    run_paper_example,
    run_pipeline,
)
from .spectral import eigenspaces, make_eigenstate, select_state

EXIT_OK = 0
EXIT_VERIFICATION = 2
EXIT_SINGULAR = 3
EXIT_CONFIG = 4
EXIT_PARSE = 5

SEED_ENV = "CHRONOGEN_SEED"

CSV_COLUMNS_QUBIT = ("lambda", "vs_0", "vs_x", "vs_y", "vs_z", "escript_re", "escript_im", "s_re", "s_im",
                     "n_overlap", "phi_norm", "infidelity_proj_vs_int")
CSV_COLUMNS_GENERAL = ("lambda", "escript_re", "escript_im", "s_re", "s_im", "n_overlap", "phi_norm",
                       "infidelity_proj_vs_int")


def fmt(x):
    """17 significant digits, enough to round-trip a double."""
    return format(float(x), ".17g")


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _dump(obj, fh):
    json.dump(to_jsonable(obj), fh, indent=1, sort_keys=True)
    fh.write("\n")


# ---------------------------------------------------------------------------
# config -> physics objects


def resolve_spec(cfg):
    spec = cfg.spec
    if "builtin" in spec:
        return paper_example_spec() if spec["builtin"] == "paper_example" else degenerate_free_spec()
    if "random" in spec:
        r = spec["random"]
        return random_spec(r["d_system"], r["d_clock"], r["coupling_strength"], cfg.seed)
    return HamiltonianSpec(*(np.array(spec[k], dtype=complex) for k in ("h_system", "h_clock", "v_interaction")))


def resolve_state(cfg, spec):
    """Global eigenstate and initial clock state for a run."""
    builtin = cfg.spec.get("builtin")
    h = assemble_global(spec)
    if cfg.eigenstate is None and builtin == "paper_example":
        state = paper_example_state(spec)[0]
    elif cfg.eigenstate is None and builtin == "degenerate_free":
        state = make_eigenstate(h, np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2), 0.0)
    else:
        spaces = eigenspaces(h)
        idx = 0 if cfg.eigenstate is None else cfg.eigenstate.energy_index
        if not 0 <= idx < len(spaces):
            raise ConfigValidationError(f"eigenstate.energy_index {idx} out of range (0..{len(spaces) - 1})")
        coeffs = None if cfg.eigenstate is None else cfg.eigenstate.coefficients
        state = select_state(h, spaces[idx], coeffs)

    if cfg.chi0 is not None:
        chi0 = np.array(cfg.chi0, dtype=complex)
        if chi0.shape != (spec.d_clock,):
            raise ConfigValidationError(f"chi0 has length {chi0.shape[0]}, expected {spec.d_clock}")
    elif builtin == "paper_example":
        chi0 = PaperExampleReference().chi0()
    elif "random" in cfg.spec:
        rng = np.random.default_rng([cfg.seed, 1])
        chi0 = rng.standard_normal(spec.d_clock) + 1j * rng.standard_normal(spec.d_clock)
        chi0 /= np.linalg.norm(chi0)
    else:
        chi0 = np.ones(spec.d_clock, dtype=complex) / np.sqrt(spec.d_clock)
    return state, chi0


def grid_of(cfg):
    return np.linspace(cfg.grid.start, cfg.grid.stop, cfg.grid.points)


# ---------------------------------------------------------------------------
# writers


def write_trajectory_csv(path, run):
    """One row per grid point; Pauli components of ``V_S`` only when ``d_S == 2``."""
    traj = run.trajectory
    grid = run.projected.lambda_grid
    phi_norm = np.linalg.norm(run.projected.states, axis=1)
    qubit = run.spec.d_system == 2
    comps = pauli_components_stack(run.v_s) if qubit else None
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS_QUBIT if qubit else CSV_COLUMNS_GENERAL)
        for k, lam in enumerate(grid):
            row = [fmt(lam)]
            if qubit:
                row += [fmt(c) for c in comps[k]]
            e, s = traj.e_script[k], traj.s_phase[k]
            row += [fmt(e.real), fmt(e.imag), fmt(s.real), fmt(s.imag), fmt(traj.n_overlap[k]), fmt(phi_norm[k]),
                    fmt(run.pointwise_infidelity[k])]
            w.writerow(row)


def write_potentials_json(path, run):
    doc = {
        "d_system": run.spec.d_system,
        "lambda": run.projected.lambda_grid,
        "v_s": run.v_s,
        "phi": run.projected.states,
    }
    with open(path, "w") as fh:
        _dump(doc, fh)


def write_export_json(path, export):
    with open(path, "w") as fh:
        _dump({"metadata": export.metadata, "records": export.records}, fh)


def write_readout_csv(path, curve):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("lambda", "value"))
        for lam, val in zip(curve.lambda_grid, curve.values):
            w.writerow((fmt(lam), fmt(val)))


# ---------------------------------------------------------------------------
# modes


def _checks(cfg, run):
    tol = cfg.tolerances
    gen_norm = float(np.max(np.linalg.norm(run.spec.h_system + run.v_s, ord=2, axis=(1, 2))))
    tdse_threshold = tol["tdse_rtol"] * max(gen_norm, np.finfo(float).tiny)
    drift = norm_drift(run.integrated)
    return {
        "infidelity_proj_vs_int": {"value": run.report.max_infidelity, "threshold": tol["infidelity"]},
        "tdse_residual": {"value": run.report.max_tdse_residual, "threshold": tdse_threshold},
        "norm_drift": {"value": drift, "threshold": tol["norm_drift"]},
    }


def _finish_checks(checks):
    for c in checks.values():
        c["passed"] = bool(c["value"] <= c["threshold"])
    return all(c["passed"] for c in checks.values())


def _write_run_outputs(cfg, run, out):
    if out is None:
        return []
    written = [out / cfg.output["csv"]]
    write_trajectory_csv(written[0], run)
    if run.spec.d_system != 2:
        written.append(out / cfg.output["json"])
        write_potentials_json(written[-1], run)
    return written


def _mode_pipeline(cfg, out):
    spec = resolve_spec(cfg)
    state, chi0 = resolve_state(cfg, spec)
    grid = grid_of(cfg)
    if cfg.mode == "example" and cfg.spec.get("builtin") == "paper_example" and cfg.chi0 is None \
            and cfg.eigenstate is None:
        run = run_paper_example(grid, cfg.threads)
    else:
        run = run_pipeline(spec, state, chi0, grid, cfg.threads)
    checks = _checks(cfg, run)
    ok = _finish_checks(checks)
    report = {
        "mode": cfg.mode,
        "energy": state.energy,
        "eigenstate_residual": state.residual,
        "comparison": run.report.to_dict(),
        "checks": checks,
        "passed": ok,
    }
    if "projected_vs_closed" in run.extras:
        report["projected_vs_closed_form"] = run.extras["projected_vs_closed"].to_dict()
        report["integrated_vs_closed_form"] = run.extras["integrated_vs_closed"].to_dict()
    report["outputs"] = [str(p) for p in _write_run_outputs(cfg, run, out)]
    return ok, report


def _mode_generate(cfg, out):
    spec = resolve_spec(cfg)
    state, chi0 = resolve_state(cfg, spec)
    export = generate_solvable(spec, state, chi0, grid_of(cfg), cfg.tolerances["tdse_rtol"], cfg.threads)
    report = {"mode": "generate", "energy": state.energy, "verification": export.stamp, "passed": True,
              "outputs": []}
    if out is not None:
        path = out / cfg.output["export"]
        write_export_json(path, export)
        report["outputs"].append(str(path))
        run = run_pipeline(spec, state, chi0, grid_of(cfg), cfg.threads)
        report["outputs"] += [str(p) for p in _write_run_outputs(cfg, run, out)]
    return True, report


def _mode_readout(cfg, out):
    spec = resolve_spec(cfg)
    state, chi0 = resolve_state(cfg, spec)
    if cfg.readout.observable is not None:
        obs = np.array(cfg.readout.observable, dtype=complex)
    elif spec.d_clock == 2:
        obs = pauli("x")
    else:
        raise ConfigValidationError("readout.observable is required when the clock is not a qubit")
    traj = clock_only_trajectory(chi0, spec.h_clock, state.energy, grid_of(cfg))
    curve = expectation_curve(obs, traj)
    spectrum = resolution_spectrum(chi0, spec.h_clock)
    report = {
        "mode": "readout",
        "energy": state.energy,
        "participation_ratio": spectrum.participation_ratio,
        "parseval_defect": abs(float(np.sum(np.abs(spectrum.coefficients) ** 2)) - float(np.vdot(chi0, chi0).real)),
        "monotone": monotonicity(curve.values) != 0,
        "value_range": [float(curve.values.min()), float(curve.values.max())],
        "passed": True,
        "outputs": [],
    }
    if cfg.readout.observed_value is not None:
        report["estimated_lambda"] = invert_readout(curve, cfg.readout.observed_value)
    if out is not None:
        path = out / cfg.output["readout_csv"]
        write_readout_csv(path, curve)
        report["outputs"].append(str(path))
    return True, report


_MODES = {"example": _mode_pipeline, "verify": _mode_pipeline, "generate": _mode_generate, "readout": _mode_readout}


def summary_line(report):
    status = "PASS" if report.get("passed") else "FAIL"
    parts = [f"{report.get('mode', '?')}: {status}"]
    if "comparison" in report:
        c = report["comparison"]
        parts.append(f"max_infidelity={c['max_infidelity']:.3e}")
        parts.append(f"tdse_residual={c['max_tdse_residual']:.3e}")
        parts.append(f"norm_drift={c['max_norm_drift']:.3e}")
    if "verification" in report:
        v = report["verification"]
        parts.append(f"tdse_residual={v['tdse_residual']:.3e} (threshold {v['threshold']:.3e})")
    if "participation_ratio" in report:
        parts.append(f"participation_ratio={report['participation_ratio']:.6g}")
    if "estimated_lambda" in report:
        parts.append(f"estimated_lambda={report['estimated_lambda']:.10g}")
    if "error" in report:
        parts.append(report["error"])
    return " ".join(parts)


def run(cfg, report_format="text", stdout=None, stderr=None):
    """Execute ``cfg`` and return the process exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    out = None
    if cfg.output.get("dir"):
        out = Path(cfg.output["dir"])
        out.mkdir(parents=True, exist_ok=True)
    try:
        ok, report = _MODES[cfg.mode](cfg, out)
        code = EXIT_OK if ok else EXIT_VERIFICATION
    except SingularOverlapError as exc:
        report, code = {"mode": cfg.mode, "passed": False, "error": str(exc), "lambda": exc.lam}, EXIT_SINGULAR
    except (VerificationError, ReadoutUnusableError, ReadoutRangeError) as exc:
        report, code = {"mode": cfg.mode, "passed": False, "error": str(exc)}, EXIT_VERIFICATION
    except ValidationError as exc:
        report, code = {"mode": cfg.mode, "passed": False, "error": f"invalid configuration: {exc}"}, EXIT_CONFIG
    report["exit_code"] = code
    if out is not None:
        with open(out / cfg.output["report"], "w") as fh:
            _dump(report, fh)
    if report_format == "json":
        _dump(report, stdout)
        print(summary_line(report), file=stderr)
    else:
        print(summary_line(report), file=stdout)
    return code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def build_parser():
    parser = _Parser(prog="chronogen", description="Relational time: emergent TDSE from global eigenstates.")
    sub = parser.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    for mode in MODES:
        p = sub.add_parser(mode)
        p.add_argument("--config", type=Path, help="JSON run configuration")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--grid", nargs=3, metavar=("START", "STOP", "POINTS"))
        p.add_argument("--threads", type=int)
        p.add_argument("--report", choices=("json", "text"), default="text")
    return parser


def load_config(args, environ=None):
    environ = os.environ if environ is None else environ
    text = args.config.read_bytes() if args.config else b""
    cfg = parse_config(text)
    if args.config and cfg.mode != args.mode and json.loads(text).get("mode") is not None:
        raise ConfigValidationError(f"config mode {cfg.mode!r} conflicts with subcommand {args.mode!r}")
    cfg = with_overrides(cfg, mode=args.mode, threads=args.threads)
    if args.threads is not None and args.threads < 1:
        raise ConfigValidationError("--threads must be >= 1")
    if args.grid is not None:
        try:
            grid = GridConfig(float(args.grid[0]), float(args.grid[1]), int(args.grid[2]))
        except ValueError:
            raise ConfigValidationError("--grid expects START STOP POINTS") from None
        if grid.points < 2 or not grid.stop > grid.start:
            raise ConfigValidationError("--grid needs POINTS >= 2 and STOP > START")
        cfg = with_overrides(cfg, grid=grid)
    if args.out is not None:
        cfg = with_overrides(cfg, output={**cfg.output, "dir": str(args.out)})
    if environ.get(SEED_ENV):
        try:
            cfg = with_overrides(cfg, seed=int(environ[SEED_ENV]))
        except ValueError:
            raise ConfigValidationError(f"{SEED_ENV} must be an integer") from None
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except ConfigParseError as exc:
        print(f"config parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ConfigValidationError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run(cfg, args.report)
    except ChronogenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
