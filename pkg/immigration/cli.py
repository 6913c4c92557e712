#!/usr/bin/env python

__doc__ = """
Simulate random processes with immigration and check their convergence to stationarity.
"""

import argparse
import logging
import math
import os
import sys
from typing import Any, Dict, List

from scipy import stats as sps

from immigration import __version__
from immigration.config import ExperimentConfig
from immigration.diagnostics import (
    Verdict,
    convergence_test,
    dri_mean_check,
    dri_path_check,
    intensity_check,
    laplace_functional_compare,
    overshoot_check,
    shift_invariance_check,
)
from immigration.errors import (
    ConfigError,
    DomainError,
    NonAbsorbedPathError,
    PreconditionError,
    TruncationError,
)
from immigration.process import (
    C0_MEAN_MULTIPLE,
    Stationary,
    Transient,
    sample_metadata,
    simulate_replicates,
    write_fdd_csv,
    write_fdd_metadata,
)
from immigration.renewal import build_stationary_window
from immigration.utils import io
from immigration.utils.logging_utils import configure_logger, get_logger
from immigration.utils.rng import AUXILIARY_KEY, WINDOW_KEY, make_stream

EXIT_PASS = 0
EXIT_CONFIG = 1
EXIT_REJECT = 2
EXIT_INCONCLUSIVE = 3

COMMANDS = ("simulate", "stationary", "converge", "dri", "pointprocess")


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with the config code; 2 is reserved for rejections."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _get_parser():
    description = __doc__ + f"\nVersion: {__version__}\n"
    parser = _ArgumentParser(description=description)

    parser.add_argument(
        "command",
        choices=COMMANDS,
        help="Experiment to run.",
    )

    parser.add_argument(
        "config",
        help="Path to the JSON experiment config (schema 1).",
    )

    parser.add_argument(
        "--output-dir",
        default=None,
        dest="output_dir",
        help="Directory for CSV/JSON artifacts. Overrides `output_dir` from the config. "
        "A one-line summary is printed to stdout as well.",
    )

    parser.add_argument(
        "--dump-window",
        default=False,
        action="store_true",
        dest="dump_window",
        help="stationary only: also write one stationary renewal window to window.csv.",
    )

    parser.add_argument(
        "--jobs",
        type=int,
        default=1,
        dest="n_jobs",
        help="Number of worker processes for replicates. Outputs do not depend on it.",
    )

    parser.add_argument("-l", "--log", "--loglevel", "--log-level",
                        default="INFO", dest="loglevel")

    parser.add_argument("-v", "--version", action="version", version=__version__)

    return parser


def _path(output_dir: str, name: str) -> str:
    return os.path.join(output_dir, name)


def _progress() -> bool:
    return get_logger().isEnabledFor(logging.INFO) and sys.stderr.isatty()


def _truncation_report(output_dir: str, error: TruncationError) -> Dict[str, Any]:
    path = io.write_json(_path(output_dir, "truncation_report.json"), error)
    return {"status": "truncation_failure", "exit_code": EXIT_REJECT, "report": path}


def _fdd(config: ExperimentConfig, mode, output_dir: str, n_jobs: int, prefix: str) -> Dict[str, Any]:
    kernel = config.require_kernel()
    samples = simulate_replicates(
        config.law, kernel, mode, config.mode.u_grid, config.mode.n_replicates,
        config.seed, n_jobs=n_jobs, progress=_progress(),
    )
    matrix = [s.values for s in samples]
    csv_path = write_fdd_csv(_path(output_dir, f"{prefix}.csv"), config.mode.u_grid, matrix)
    meta = sample_metadata(config.law, kernel, mode, config.seed, samples)
    meta_path = write_fdd_metadata(_path(output_dir, f"{prefix}_metadata.json"), meta)
    return {
        "status": "ok",
        "exit_code": EXIT_PASS,
        "rows": len(samples),
        "columns": len(config.mode.u_grid),
        "fdd": csv_path,
        "metadata": meta_path,
    }


def cmd_simulate(config: ExperimentConfig, output_dir: str, n_jobs: int = 1, **kwargs) -> Dict[str, Any]:
    """Transient fdd matrix ``Y(t + u_j)`` and its metadata sidecar."""
    mode = Transient(config.require_t())
    return _fdd(config, mode, output_dir, n_jobs, "fdd_transient")


def cmd_stationary(
    config: ExperimentConfig, output_dir: str, n_jobs: int = 1, dump_window: bool = False, **kwargs
) -> Dict[str, Any]:
    """Stationary fdd matrix ``Y*(u_j)``; optionally one stationary window."""
    mode = Stationary(config.mode.tol, config.mode.c_max)
    summary: Dict[str, Any] = {}
    if dump_window:
        c = config.mode.window_c
        if c is None:
            c = max(abs(u) for u in config.mode.u_grid) + C0_MEAN_MULTIPLE * config.law.mean()
        window = build_stationary_window(config.law, c, make_stream(config.seed, WINDOW_KEY))
        summary["window"] = window.to_csv(_path(output_dir, "window.csv"))
    try:
        summary.update(_fdd(config, mode, output_dir, n_jobs, "fdd_stationary"))
    except TruncationError as e:
        get_logger().error(str(e))
        summary.update(_truncation_report(output_dir, e))
    return summary


def _summary_rows(study) -> List[List[Any]]:
    rows = []
    for report in study.reports:
        decision = "reject" if report.reject else "accept"
        rows.append([report.t] + [r.p_value for r in report.ks] + [report.energy.p_value, decision])
    return rows


def cmd_converge(config: ExperimentConfig, output_dir: str, n_jobs: int = 1, **kwargs) -> Dict[str, Any]:
    """Transient-versus-stationary comparison for every ``t`` in ``mode.t_list``."""
    mode = config.mode
    study = convergence_test(
        config.law,
        config.require_kernel(),
        config.require_t_list(),
        mode.u_grid,
        mode.n_replicates,
        mode.alpha,
        config.seed,
        n_permutations=mode.n_permutations,
        tol=mode.tol,
        c_max=mode.c_max,
        n_jobs=n_jobs,
        progress=_progress(),
    )
    for i, report in enumerate(study.reports):
        io.write_json(_path(output_dir, f"comparison_{i:03d}.json"), report)
    header = ["t"] + [f"ks_p_u={io.format_float(u)}" for u in mode.u_grid] + ["energy_p", "decision"]
    io.write_csv(_path(output_dir, "summary.csv"), header, _summary_rows(study))
    study_path = io.write_json(_path(output_dir, "study.json"), study)

    if study.warnings or study.hypothesis_violation:
        exit_code = EXIT_INCONCLUSIVE
        status = "hypothesis_warning"
    else:
        last = max(study.reports, key=lambda r: r.t)
        exit_code = EXIT_REJECT if last.reject else EXIT_PASS
        status = "reject" if last.reject else "accept"
    return {
        "status": status,
        "exit_code": exit_code,
        "t": [r.t for r in study.reports],
        "reject": [r.reject for r in study.reports],
        "warnings": len(study.warnings),
        "study": study_path,
    }


def cmd_dri(config: ExperimentConfig, output_dir: str, **kwargs) -> Dict[str, Any]:
    """Mean and path dRi criteria; exit 0 only when both read convergent."""
    kernel = config.require_kernel()
    dri = config.dri
    try:
        mean = dri_mean_check(
            kernel, dri.k_max, dri.grid_per_unit, dri.n_mc, make_stream(config.seed, AUXILIARY_KEY, 0)
        )
        path = dri_path_check(kernel, dri.k_max, dri.n_mc, make_stream(config.seed, AUXILIARY_KEY, 1))
    except NonAbsorbedPathError as e:
        get_logger().warning(f"dRi estimate aborted: {e}")
        return {"status": "non_absorbed", "exit_code": EXIT_INCONCLUSIVE, "message": str(e)}
    io.write_json(_path(output_dir, "dri_mean.json"), mean)
    io.write_json(_path(output_dir, "dri_path.json"), path)

    verdicts = {mean.verdict, path.verdict}
    if verdicts == {Verdict.CONVERGENT}:
        exit_code = EXIT_PASS
        explanation = "both criteria show convergent evidence"
    elif verdicts == {Verdict.DIVERGENT}:
        exit_code = EXIT_REJECT
        explanation = "both criteria show divergent evidence"
    else:
        exit_code = EXIT_INCONCLUSIVE
        explanation = (
            f"mean criterion: {mean.verdict.value}, path criterion: {path.verdict.value}; "
            "the mean criterion alone does not imply the path criterion"
        )
    return {
        "status": "dri",
        "exit_code": exit_code,
        "mean": mean.verdict,
        "path": path.verdict,
        "explanation": explanation,
    }


def cmd_pointprocess(config: ExperimentConfig, output_dir: str, **kwargs) -> Dict[str, Any]:
    """Intensity, overshoot, shift-invariance and Laplace-functional checks of the renewal window."""
    law = config.law
    pp = config.pointprocess
    alpha = config.mode.alpha
    streams = [make_stream(config.seed, AUXILIARY_KEY, j) for j in range(4)]

    intensity = intensity_check(law, pp.intervals, pp.n_windows, streams[0])
    z_crit = float(sps.norm.ppf(1 - alpha / (2 * len(intensity))))
    intensity_pass = all(abs(r.z_score) <= z_crit for r in intensity)

    overshoot = overshoot_check(law, pp.horizon, pp.n_realizations, streams[1])
    overshoot_pass = min(overshoot.overshoot.p_value, overshoot.undershoot.p_value) >= alpha / 2

    shift = shift_invariance_check(law, pp.shift, pp.shift_interval, pp.n_windows, streams[2], alpha=alpha)

    laplace = laplace_functional_compare(law, pp.test_function, pp.laplace_t, pp.n_mc, streams[3])
    gap = abs(laplace.transient_estimate - laplace.stationary_estimate)
    laplace_pass = gap <= math.hypot(*laplace.ci_halfwidths)

    warnings = sorted(set(overshoot.warnings) | set(laplace.warnings))
    passed = {
        "intensity": intensity_pass,
        "overshoot": overshoot_pass,
        "shift_invariance": not shift.reject,
        "laplace": laplace_pass,
    }
    report = {
        "alpha": alpha,
        "intensity": {"z_critical": z_crit, "results": intensity},
        "overshoot": overshoot,
        "shift_invariance": shift,
        "laplace": laplace,
        "passed": passed,
        "warnings": warnings,
    }
    report_path = io.write_json(_path(output_dir, "pointprocess.json"), report)
    if warnings:
        exit_code, status = EXIT_INCONCLUSIVE, "warning"
    elif all(passed.values()):
        exit_code, status = EXIT_PASS, "pass"
    else:
        exit_code, status = EXIT_REJECT, "reject"
    return {
        "status": status,
        "exit_code": exit_code,
        "passed": passed,
        "warnings": len(warnings),
        "report": report_path,
    }


_HANDLERS = {
    "simulate": cmd_simulate,
    "stationary": cmd_stationary,
    "converge": cmd_converge,
    "dri": cmd_dri,
    "pointprocess": cmd_pointprocess,
}


def run(command: str, config_path: str, output_dir=None, n_jobs: int = 1, dump_window: bool = False) -> Dict[str, Any]:
    """Run one command and return its summary; the exit code is ``summary["exit_code"]``."""
    logger = get_logger()
    try:
        config = ExperimentConfig.from_file(config_path)
        if command != "pointprocess":
            config.require_kernel()
        output_dir = output_dir or config.output_dir
        os.makedirs(output_dir, exist_ok=True)
        logger.info(f"{command}: config {config_path}, seed {config.seed}, output {output_dir}")
        io.write_json(_path(output_dir, "config.json"), config.to_dict())
        summary = _HANDLERS[command](config, output_dir, n_jobs=n_jobs, dump_window=dump_window)
    except ConfigError as e:
        logger.error(f"invalid config: {e}")
        return {"status": "config_error", "exit_code": EXIT_CONFIG, "field": e.field, "message": str(e)}
    except NonAbsorbedPathError as e:
        logger.warning(f"kernel path not absorbed: {e}")
        return {"status": "non_absorbed", "exit_code": EXIT_INCONCLUSIVE, "message": str(e)}
    except (DomainError, PreconditionError) as e:
        logger.error(f"invalid experiment: {e}")
        return {
            "status": "config_error",
            "exit_code": EXIT_CONFIG,
            "field": getattr(e, "field", None),
            "message": str(e),
        }
    summary = dict({"command": command}, **summary)
    return summary


def main():
    args = _get_parser().parse_args()
    configure_logger(args.loglevel)
    summary = run(
        args.command,
        args.config,
        output_dir=args.output_dir,
        n_jobs=args.n_jobs,
        dump_window=args.dump_window,
    )
    print(io.dumps_line(summary))
    return summary["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
